#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("hardy_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CmdResult run(const std::string& args, const std::string& env = "") {
        const auto out = dir_ / "stdout", err = dir_ / "stderr";
        std::string cmd = "env -u HARDY_CACHE_DIR -u HARDY_PRECISION_BITS " + env + " " + HARDY_LAB_PATH + " " + args +
                          " > " + out.string() + " 2> " + err.string();
        int status = std::system(cmd.c_str());
        CmdResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
        std::vector<std::vector<std::string>> rows;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::vector<std::string> cells;
            std::string cell;
            std::istringstream ls(line);
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            rows.push_back(cells);
        }
        return rows;
    }

    std::string cache() const { return (dir_ / "cache").string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, CoeffsRows) {
    auto r = run("coeffs --k 2 --n 4");
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"n", "g_k", "h_k", "precision_bits"}));
    EXPECT_NEAR(std::stod(rows[1][1]), -0.6931471805599453, 1e-15);
    EXPECT_EQ(rows[1][1], rows[1][2]);
    EXPECT_NEAR(std::stod(rows[2][1]), 1.0, 0);
    EXPECT_NEAR(std::stod(rows[2][2]), 0.3068528194400547, 1e-15);
    EXPECT_EQ(rows[2][3], "128");
    EXPECT_GE(rows[1][1].size(), 38u);  // digits follow the working precision
}

TEST_F(Cli, CoeffsSingleRowAndUsageErrors) {
    auto r = run("coeffs --k 3 --n 0 --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["results"].size(), 1u);
    EXPECT_EQ(run("coeffs --k 1 --n 3").code, 2);
    EXPECT_EQ(run("coeffs --k 2 --n 3 --precision-bits 64").code, 2);
    EXPECT_EQ(run("coeffs --k 2 --n 3 --format xml").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("distance --target cosine --basis h --K 2..3 --N 100 --no-cache").code, 2);
}

TEST_F(Cli, PrecisionFromEnvironment) {
    auto r = run("coeffs --k 2 --n 1 --format json", "HARDY_PRECISION_BITS=256");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_EQ(j["config"]["precision_bits"], 256);
    EXPECT_EQ(j["results"][0]["precision_bits"], 256);
    EXPECT_GE(j["results"][0]["g_k"].get<std::string>().size(), 75u);
    auto flag = run("coeffs --k 2 --n 1 --format json --precision-bits 128", "HARDY_PRECISION_BITS=256");
    EXPECT_EQ(Json::parse(flag.out)["config"]["precision_bits"], 128);
}

TEST_F(Cli, VerifySuites) {
    auto id = run("verify --suite identities --k 2..4 --n 200");
    EXPECT_EQ(id.code, 0) << id.out << id.err;
    auto b = run("verify --suite boundary --k 2..6 --grid 5000 --format json");
    ASSERT_EQ(b.code, 0) << b.err;
    auto j = Json::parse(b.out);
    for (const auto& row : j["results"]) {
        EXPECT_TRUE(row["pass"].get<bool>());
        EXPECT_TRUE(row.contains("max_violation"));
        EXPECT_TRUE(row.contains("tolerance"));
        EXPECT_TRUE(row.contains("precision_bits"));
    }
    EXPECT_EQ(run("verify --suite outer --k 2..4").code, 0);
    EXPECT_EQ(run("verify --suite outer --k 2..3 --tolerance 1e-20").code, 3);
    EXPECT_EQ(run("verify --suite nonsense").code, 2);
}

TEST_F(Cli, DistanceSpanMember) {
    auto r = run("distance --target h2 --basis h --K 2..4 --N 10000 --format json --cache-dir " + cache());
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"config", "results", "diagnostics"}));
    ASSERT_EQ(j["results"].size(), 3u);
    for (const auto& row : j["results"]) {
        EXPECT_LT(std::stod(row["d"].get<std::string>()), 1e-8);
        EXPECT_TRUE(row["d"].is_string());
        EXPECT_EQ(row["precision_bits"], 128);
    }
}

TEST_F(Cli, DistanceIsDeterministicAndCached) {
    const std::string args = "distance --target one --basis g --K 2..12 --N 20000 --cache-dir " + cache();
    auto first = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_NE(first.err.find("miss"), std::string::npos);
    auto second = run(args);
    ASSERT_EQ(second.code, 0);
    EXPECT_NE(second.err.find("hit"), std::string::npos);
    EXPECT_EQ(first.out, second.out);
    auto uncached = run("distance --target one --basis g --K 2..12 --N 20000 --no-cache");
    EXPECT_EQ(uncached.out, first.out);

    auto rows = csv_rows(first.out);
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
}

TEST_F(Cli, CorruptCacheIsRecomputedOrRejected) {
    const std::string args = "gram --basis h --K 2..5 --N 2000 --cache-dir " + cache();
    auto clean = run(args);
    ASSERT_EQ(clean.code, 0) << clean.err;
    fs::path entry;
    for (const auto& e : fs::directory_iterator(cache()))
        if (e.path().extension() == ".bin") entry = e.path();
    ASSERT_FALSE(entry.empty());
    {
        std::fstream f(entry, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(80);
        f.put('\x7f');
    }
    auto verify = run(args + " --verify-cache");
    EXPECT_EQ(verify.code, 5);
    EXPECT_EQ(run(args + " --strict-cache").code, 5);
    auto again = run(args);
    EXPECT_EQ(again.code, 0);
    EXPECT_NE(again.err.find("recomputing"), std::string::npos);
    EXPECT_EQ(again.out, clean.out);
    EXPECT_EQ(run(args + " --verify-cache").code, 0);
}

TEST_F(Cli, Dirichlet) {
    auto z = run("dirichlet --f z --zeta 1 --format json");
    ASSERT_EQ(z.code, 0) << z.err;
    auto row = Json::parse(z.out)["results"][0];
    EXPECT_NEAR(std::stod(row["value_decomposition"].get<std::string>()), 1.0, 1e-12);
    EXPECT_NEAR(std::stod(row["value_area"].get<std::string>()), 1.0, 1e-3);
    EXPECT_FALSE(row["diverged"].get<bool>());
    auto h = run("dirichlet --f h2 --zeta -1 --n 65536 --format json");
    ASSERT_EQ(h.code, 0) << h.err;
    EXPECT_TRUE(Json::parse(h.out)["results"][0]["diverged"].get<bool>());
}

TEST_F(Cli, Smirnov) {
    auto r = run("smirnov --f z --g z^2 --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    // integral of log(1 + 2 |sin(theta/2)|) over the normalized circle
    EXPECT_NEAR(std::stod(Json::parse(r.out)["results"][0]["smirnov_distance"].get<std::string>()), 0.7774957440952618,
                1e-9);
    auto p = run("smirnov --target h3 --basis h --K 2..3 --N 5000 --grid 4000 --cache-dir " + cache());
    ASSERT_EQ(p.code, 0) << p.err;
    auto rows = csv_rows(p.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_LT(std::stod(rows[2][2]), 1e-6);
}
