// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <hardy/boundary.hpp>
#include <hardy/cache.hpp>
#include <hardy/gram.hpp>
#include <hardy/series.hpp>
#include <hardy/solver.hpp>
#include <hardy/verify.hpp>

using namespace hardy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<unsigned> k_range(unsigned lo, unsigned hi) {
    std::vector<unsigned> ks(hi - lo + 1);
    std::iota(ks.begin(), ks.end(), lo);
    return ks;
}

double worst_violation(const std::vector<CheckResult>& rows, const std::string& check) {
    double w = 0.0;
    for (const auto& r : rows)
        if (r.check == check) w = std::max(w, r.max_violation);
    return w;
}

Outcome closed_form_vs_formal_log() {
    const std::size_t N = 5000;
    double worst = 0.0;
    for (unsigned k = 2; k <= 50; ++k) {
        TruncatedSeries<Real128> P;
        P.coeffs.assign(k, Real128(1) / Real128(k));
        worst = std::max(worst, max_coeff_gap(formal_log_series(P, N), gk_coefficients<Real128>(k, N)));
    }
    return {worst < 1e-30, "k=2..50 N=5000 128-bit max deviation " + sci(worst) + " (< 1e-30)"};
}

Outcome structural_identities() {
    auto rows = verify_identities<Real128>(k_range(2, 20), 2000, 1e-30, 100);
    bool exact = true;
    for (const auto& r : rows)
        if (r.detail == "exact" || r.detail == "symbolic zeta") exact = exact && r.max_violation == 0.0;
    const double fl = worst_violation(rows, "rotation_identity_float");
    return {exact && fl < 1e-30,
            std::string("k=2..20 N=2000 100 zeta: rational ") + (exact ? "exact" : "MISMATCH") +
                ", float max deviation " + sci(fl) + " (< 1e-30)"};
}

Outcome radial_limits() {
    const std::size_t N = std::size_t(1) << 17;
    double worst = 0.0;
    bool converged = true;
    for (unsigned k = 2; k <= 20; ++k) {
        auto lim = radial_limit(hk_coefficients<Real128>(k, N), RotationParameter<Real128>::from_turns(0));
        const double expect = -(static_cast<double>(k) - 1.0) / 2.0;
        worst = std::max(worst, std::abs(static_cast<double>(real(lim.value)) - expect) / std::abs(expect));
        converged = converged && lim.converged;
    }
    return {converged && worst < 1e-8, "k=2..20 max relative error " + sci(worst) + " (< 1e-8)"};
}

Outcome boundary_inequalities() {
    auto grid = BoundaryGrid::uniform(100000);
    double max_re_g = -kInfinity, min_rot = kInfinity;
    for (unsigned k = 2; k <= 50; ++k) {
        auto rep = check_nonpositive_real<double>(k, grid);
        max_re_g = std::max(max_re_g, rep.max_re_g);
        min_rot = std::min(min_rot, rep.min_re_rotated_h);
    }
    return {max_re_g <= 1e-12 && min_rot >= -1e-12,
            "k=2..50 on 1e5 nodes: max Re g " + sci(max_re_g) + " (<= 1e-12), min Re[(w-1)h] " + sci(min_rot) +
                " (>= -1e-12)"};
}

Outcome outer_identity() {
    auto rows = verify_outer<double>(k_range(2, 10), 1e-6);
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.pass;
    auto k2 = outer_defect_adaptive<double>(2, 1e-9);
    ok = ok && std::abs(k2.integral - (-0.366513)) < 5e-7;
    return {ok, "k=2..10 max defect " + sci(worst_violation(rows, "outer_log_integral_defect")) +
                    " (< 1e-6), k=2 integral " + to_decimal(k2.integral, 8) + " (reference -0.366513)"};
}

Outcome dirichlet_agreement() {
    auto rows = verify_dirichlet<Real128>(1e-3, std::size_t(1) << 20);
    bool ok = true;
    double worst = 0.0;
    bool flagged = false;
    for (const auto& r : rows) {
        ok = ok && r.pass;
        if (r.check.rfind("two_method_agreement", 0) == 0) worst = std::max(worst, r.max_violation);
        if (r.check.rfind("divergence_flag", 0) == 0) flagged = r.pass;
    }
    return {ok, "max relative discrepancy " + sci(worst) + " (< 1e-3), h2 at zeta=-1 " +
                    (flagged ? "flagged divergent" : "NOT flagged")};
}

template <class R>
DistanceProfile<R> profile(BasisFamily family, const std::string& target, unsigned K, std::size_t N) {
    BasisSpec spec{family, K, N, 0.0};
    HarmonicTables<R> tables(N);
    auto G = build_gram(spec, tables);
    auto t = parse_target(target);
    return distance_profile(G, cross_vector(t, spec, tables), t, k_range(2, K));
}

Outcome distance_profiles() {
    const std::size_t N = 100000;
    std::ostringstream why;
    bool ok = true;

    auto g = profile<Real128>(BasisFamily::g, "one", 100, N);
    bool decreasing = !g.frontier && g.entries.size() == 99;
    bool intervals = decreasing;
    for (std::size_t i = 1; decreasing && i < g.entries.size(); ++i) {
        const auto& a = g.entries[i - 1];
        const auto& b = g.entries[i];
        const double dec = static_cast<double>(a.d - b.d);
        if (!(dec > 0)) decreasing = false;
        const double wa = static_cast<double>(a.d_high - a.d_low), wb = static_cast<double>(b.d_high - b.d_low);
        if (!(wa < dec && wb < dec)) intervals = false;
    }
    ok = ok && decreasing && intervals;
    why << "g/one K=2..100: " << (decreasing ? "strictly decreasing" : "NOT decreasing") << ", intervals "
        << (intervals ? "below decrements" : "NOT below decrements") << " (d_100=" << to_decimal(g.entries.back().d, 6)
        << ")";

    auto h = profile<Real128>(BasisFamily::h, "one", 100, N);
    bool nonincreasing = !h.frontier;
    for (std::size_t i = 1; nonincreasing && i < h.entries.size(); ++i)
        nonincreasing = h.entries[i].d <= h.entries[i - 1].d;
    double member = 0.0;
    for (unsigned j : {2u, 3u, 7u, 20u, 50u}) {
        auto p = profile<Real128>(BasisFamily::h, "h" + std::to_string(j), 50, N);
        for (const auto& e : p.entries)
            if (e.K >= j) member = std::max(member, static_cast<double>(e.d));
    }
    ok = ok && nonincreasing && member < 1e-8;
    why << "; h/one " << (nonincreasing ? "nonincreasing" : "NOT nonincreasing") << ", span members max d "
        << sci(member) << " (< 1e-8)";

    auto lo = profile<Real128>(BasisFamily::g, "one", 50, N);
    auto hi = profile<Real256>(BasisFamily::g, "one", 50, N);
    double gap = 0.0;
    for (std::size_t i = 0; i < lo.entries.size(); ++i)
        gap = std::max(gap, std::abs(static_cast<double>(lo.entries[i].d) - static_cast<double>(hi.entries[i].d)));
    ok = ok && gap < 1e-6 && lo.entries.size() == 49 && hi.entries.size() == 49;
    why << "; 128 vs 256 bits K<=50 max gap " << sci(gap) << " (< 1e-6)";
    return {ok, why.str()};
}

Outcome tail_soundness() {
    const std::size_t n_small = 100000, n_big = 1000000;
    HarmonicTables<Real128> small(n_small), big(n_big);
    struct Case {
        BasisFamily family;
        double turns;
    };
    const Case cases[] = {{BasisFamily::h, 0.0}, {BasisFamily::g, 0.0}, {BasisFamily::deflated_h, 0.3}};
    const unsigned K = 100;
    std::size_t entries = 0, violations = 0;
    double worst_ratio = 0.0;
    for (const auto& cs : cases) {
        BasisSpec a{cs.family, K, n_small, cs.turns}, b{cs.family, K, n_big, cs.turns};
        auto Ga = build_gram(a, small), Gb = build_gram(b, big);
        for (std::size_t i = 0; i < Ga.dimension(); ++i)
            for (std::size_t j = 0; j < Ga.dimension(); ++j) {
                const double diff = static_cast<double>(abs(Complex128(Ga(i, j) - Gb(i, j))));
                const double bound = Ga.tail(i, j);
                if (!(diff <= bound)) ++violations;
                if (bound > 0) worst_ratio = std::max(worst_ratio, diff / bound);
                ++entries;
            }
    }
    return {violations == 0, "h, g, deflated-h (zeta=0.3 turns) K=100: " + std::to_string(entries) + " entries, " +
                                 std::to_string(violations) + " violations, max |diff|/tail " + sci(worst_ratio)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("hardy_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto run = [&](const std::string& args, const std::string& out) {
        std::string cmd = std::string(HARDY_LAB_PATH) + " " + args + " > " + (dir / out).string() + " 2>/dev/null";
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    const std::string args = "distance --target one --basis g --K 2..40 --N 100000 --format json --cache-dir " +
                             (dir / "cache").string();
    bool ran = run(args, "a") && run(args, "b") &&
               run("distance --target z^3 --basis deflated-h --zeta 0.3 --K 2..12 --N 20000 --no-cache", "c") &&
               run("distance --target z^3 --basis deflated-h --zeta 0.3 --K 2..12 --N 20000 --no-cache", "d");
    const bool same = ran && slurp(dir / "a") == slurp(dir / "b") && slurp(dir / "c") == slurp(dir / "d") &&
                      !slurp(dir / "a").empty();

    BasisSpec spec{BasisFamily::deflated_h, 30, 20000, 0.3};
    auto G = build_gram<Real128>(spec);
    GramCache cache(dir / "roundtrip");
    cache.store(G);
    auto back = cache.load<Real128>(spec);
    bool exact = back.has_value() && back->matrix.size() == G.matrix.size() && back->tail_matrix == G.tail_matrix;
    for (std::size_t i = 0; exact && i < G.matrix.size(); ++i)
        exact = real(G.matrix[i]) == real(back->matrix[i]) && imag(G.matrix[i]) == imag(back->matrix[i]);
    exact = exact && serialize_gram(*back) == serialize_gram(G);
    fs::remove_all(dir);
    return {same && exact, std::string("repeated distance runs ") + (same ? "byte-identical" : "DIFFER") +
                               ", cache roundtrip " + (exact ? "bit-exact" : "NOT bit-exact")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed form vs formal log", closed_form_vs_formal_log},
        {"structural identities", structural_identities},
        {"radial limits at 1", radial_limits},
        {"boundary inequalities", boundary_inequalities},
        {"outer identity", outer_identity},
        {"Dirichlet two-method agreement", dirichlet_agreement},
        {"distance profiles", distance_profiles},
        {"tail-bound soundness", tail_soundness},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
