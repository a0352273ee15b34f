// hardy_lab: command line front end for the series, boundary, Dirichlet and
// distance computations.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error, 3 verification
// failure, 4 precision exhausted, 5 cache corruption.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <hardy/boundary.hpp>
#include <hardy/cache.hpp>
#include <hardy/dirichlet.hpp>
#include <hardy/gram.hpp>
#include <hardy/io.hpp>
#include <hardy/series.hpp>
#include <hardy/solver.hpp>
#include <hardy/verify.hpp>

namespace {

using namespace hardy;

enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kUsageError = 2,
    kVerificationFailed = 3,
    kPrecisionExhausted = 4,
    kCacheCorrupt = 5,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    int bits = 128;
    std::string format = "csv";
    std::string cache_dir;

    // shared by several subcommands
    std::string k = "2";
    std::string K = "2..20";
    std::size_t N = 0;
    std::string zeta = "1";
    std::string suite = "all";
    std::size_t grid = 100000;
    double tolerance = -1.0;

    std::string target = "one";
    std::string basis = "h";
    std::string f = "z";
    std::string g = "0";
    double spectral_cutoff = -1.0;
    bool force_spectral = false;
    bool strict_cache = false;
    bool no_cache = false;
    bool verify_cache = false;
    double s_min = 1e-4;
};

/// "2..20", "2,3,7" or "5".
std::vector<unsigned> parse_range(const std::string& s) {
    std::vector<unsigned> out;
    auto num = [&](const std::string& t) {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            throw UsageError("bad index list '" + s + "'");
        }
        return static_cast<unsigned>(std::stoul(t));
    };
    if (auto p = s.find(".."); p != std::string::npos) {
        unsigned a = num(s.substr(0, p)), b = num(s.substr(p + 2));
        if (a > b) throw UsageError("empty range '" + s + "'");
        for (unsigned i = a; i <= b; ++i) out.push_back(i);
    } else {
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ',')) out.push_back(num(part));
    }
    if (out.empty()) throw UsageError("empty index list");
    for (unsigned v : out) {
        if (v < 2) throw UsageError("indices must be >= 2 (got " + std::to_string(v) + ")");
    }
    return out;
}

/// Angle in turns; "1", "-1", "i", "-i" are shorthands for the quarter points.
double parse_zeta(const std::string& s) {
    if (s == "1") return 0.0;
    if (s == "-1") return 0.5;
    if (s == "i") return 0.25;
    if (s == "-i") return 0.75;
    try {
        std::size_t used = 0;
        double t = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(t)) throw std::invalid_argument(s);
        t -= std::floor(t);
        return t;
    } catch (const std::exception&) {
        throw UsageError("bad --zeta '" + s + "' (turns, or 1, -1, i, -i)");
    }
}

template <class R>
std::string num(const R& x) {
    return to_decimal(x, decimal_digits_for_bits(precision_bits_v<R>));
}

std::string dnum(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return to_decimal(x, 17);
}

Json base_config(const std::string& command, const Options& o) {
    Json c = Json::object();
    c["command"] = command;
    c["precision_bits"] = o.bits;
    c["format"] = o.format;
    return c;
}

void emit(const Report& r, const Options& o) {
    write_report(std::cout, r, o.format);
    if (o.format == "csv" && !r.diagnostics.empty()) std::cerr << "diagnostics: " << r.diagnostics.dump() << '\n';
}

// ---------------------------------------------------------------------------
// function specs: "one", "0", "z", "z^m", "3*z^2-z", "h<k>", "g<k>"

struct FunctionSpec {
    enum Kind { polynomial, h, g } kind = polynomial;
    std::vector<long> poly;  ///< integer coefficients
    unsigned k = 2;
    std::string text;
};

FunctionSpec parse_function(const std::string& s) {
    FunctionSpec f;
    f.text = s;
    if (s.size() >= 2 && (s[0] == 'h' || s[0] == 'g') && s.find_first_not_of("0123456789", 1) == std::string::npos) {
        f.kind = s[0] == 'h' ? FunctionSpec::h : FunctionSpec::g;
        f.k = static_cast<unsigned>(std::stoul(s.substr(1)));
        if (f.k < 2) throw UsageError("family index must be >= 2");
        return f;
    }
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t == "one") t = "1";
    if (t.empty()) throw UsageError("empty function spec");
    std::size_t i = 0;
    auto add = [&](long c, std::size_t m) {
        if (f.poly.size() <= m) f.poly.resize(m + 1, 0);
        f.poly[m] += c;
    };
    while (i < t.size()) {
        long sign = 1;
        if (t[i] == '+' || t[i] == '-') {
            sign = t[i] == '-' ? -1 : 1;
            ++i;
        }
        long coeff = 1;
        bool have_coeff = false;
        std::size_t j = i;
        while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
        if (j > i) {
            coeff = std::stol(t.substr(i, j - i));
            have_coeff = true;
            i = j;
        }
        std::size_t power = 0;
        if (i < t.size() && t[i] == '*') {
            if (!have_coeff) throw UsageError("bad polynomial '" + s + "'");
            ++i;
        }
        if (i < t.size() && t[i] == 'z') {
            ++i;
            power = 1;
            if (i < t.size() && t[i] == '^') {
                ++i;
                std::size_t e = i;
                while (e < t.size() && std::isdigit(static_cast<unsigned char>(t[e]))) ++e;
                if (e == i) throw UsageError("bad exponent in '" + s + "'");
                power = std::stoul(t.substr(i, e - i));
                i = e;
            }
        } else if (!have_coeff) {
            throw UsageError("cannot parse function '" + s + "'");
        }
        add(sign * coeff, power);
        if (i < t.size() && t[i] != '+' && t[i] != '-') throw UsageError("cannot parse function '" + s + "'");
    }
    return f;
}

template <class R>
TruncatedSeries<R> function_series(const FunctionSpec& f, std::size_t N) {
    switch (f.kind) {
        case FunctionSpec::h: return hk_coefficients<R>(f.k, N);
        case FunctionSpec::g: return gk_coefficients<R>(f.k, N);
        case FunctionSpec::polynomial: break;
    }
    TruncatedSeries<R> s;
    for (long c : f.poly) s.coeffs.push_back(R(c));
    s.label = f.text;
    return s;
}

/// Closed-form boundary value at angle theta (double precision).
std::complex<double> function_on_circle(const FunctionSpec& f, double theta) {
    switch (f.kind) {
        case FunctionSpec::h: return eval_hk_boundary<double>(f.k, theta);
        case FunctionSpec::g: return eval_gk_boundary<double>(f.k, theta);
        case FunctionSpec::polynomial: break;
    }
    std::complex<double> acc = 0.0;
    const std::complex<double> w = std::polar(1.0, theta);
    for (std::size_t m = f.poly.size(); m-- > 0;) acc = acc * w + static_cast<double>(f.poly[m]);
    return acc;
}

std::vector<double> singular_angles(const FunctionSpec& f) {
    return f.kind == FunctionSpec::polynomial ? std::vector<double>{} : root_of_unity_angles(f.k);
}

// ---------------------------------------------------------------------------
// commands

template <class R>
int cmd_coeffs(const Options& o) {
    auto ks = parse_range(o.k);
    if (ks.size() != 1) throw UsageError("coeffs takes a single --k");
    const unsigned k = ks[0];
    const std::size_t N = o.N;
    auto g = gk_coefficients<R>(k, N);
    auto h = hk_coefficients<R>(k, N);
    Report r;
    r.config = base_config("coeffs", o);
    r.config["k"] = k;
    r.config["N"] = N;
    r.columns = {"n", "g_k", "h_k", "precision_bits"};
    for (std::size_t n = 0; n <= N; ++n) r.add_row({Json(n), num(g[n]), num(h[n]), o.bits});
    r.diagnostics["tail_coeff_bound_h"] = dnum(h.tail.coeff_sup);
    r.diagnostics["tail_norm_sq_bound_h"] = dnum(h.tail.norm_sq);
    r.diagnostics["decay_constant"] = dnum(kHkDecayConstant);
    emit(r, o);
    return kOk;
}

template <class R>
int cmd_verify(const Options& o) {
    const std::string suite = o.suite;
    if (suite != "identities" && suite != "boundary" && suite != "outer" && suite != "dirichlet" && suite != "all") {
        throw UsageError("unknown suite '" + suite + "'");
    }
    const bool explicit_k = !o.k.empty();
    auto ks_or = [&](const char* dflt) { return parse_range(explicit_k ? o.k : std::string(dflt)); };
    const double float_tol = precision_bits_v<R> >= 256 ? 1e-60 : 1e-30;
    std::vector<CheckResult> checks;
    auto append = [&](std::vector<CheckResult> v) { checks.insert(checks.end(), v.begin(), v.end()); };
    if (suite == "identities" || suite == "all") {
        append(verify_identities<R>(ks_or("2..20"), o.N ? o.N : 2000, o.tolerance > 0 ? o.tolerance : float_tol));
    }
    if (suite == "boundary" || suite == "all") {
        append(verify_boundary<double>(ks_or("2..20"), o.grid, o.tolerance > 0 ? o.tolerance : 1e-12));
    }
    if (suite == "outer" || suite == "all") {
        append(verify_outer<double>(ks_or("2..10"), o.tolerance > 0 ? o.tolerance : 1e-6));
    }
    if (suite == "dirichlet" || suite == "all") {
        append(verify_dirichlet<R>(o.tolerance > 0 ? o.tolerance : 1e-3));
    }
    Report r;
    r.config = base_config("verify", o);
    r.config["suite"] = suite;
    r.config["grid"] = o.grid;
    r.columns = {"suite", "check", "k", "max_violation", "tolerance", "pass", "detail", "precision_bits"};
    bool all_pass = true;
    for (const auto& c : checks) {
        all_pass = all_pass && c.pass;
        r.add_row({c.suite, c.check, c.k ? Json(c.k) : Json(nullptr), dnum(c.max_violation), dnum(c.tolerance),
                   c.pass, c.detail, c.precision_bits});
    }
    r.diagnostics["checks"] = checks.size();
    r.diagnostics["all_pass"] = all_pass;
    emit(r, o);
    return all_pass ? kOk : kVerificationFailed;
}

BasisSpec basis_from(const Options& o, unsigned K) {
    BasisSpec spec;
    spec.family = parse_family(o.basis);
    spec.K = K;
    spec.N = o.N ? o.N : BasisSpec::default_N(K);
    spec.zeta_turns = spec.uses_zeta() ? parse_zeta(o.zeta) : 0.0;
    spec.validate();
    return spec;
}

/// Loads the Gram system from the cache or builds (and stores) it.
template <class R>
GramSystem<R> obtain_gram(const BasisSpec& spec, const HarmonicTables<R>& tables, const Options& o, bool strict) {
    std::optional<GramCache> cache;
    if (!o.no_cache && !o.cache_dir.empty()) cache.emplace(o.cache_dir);
    if (cache) {
        try {
            if (auto hit = cache->load<R>(spec)) {
                std::cerr << "cache: hit " << cache->file_for(spec, precision_bits_v<R>).string() << '\n';
                return *hit;
            }
            std::cerr << "cache: miss\n";
        } catch (const CacheCorruption& e) {
            if (strict) throw;
            std::cerr << "warning: cache entry invalid (" << e.what() << "), recomputing\n";
        }
    }
    GramSystem<R> G = build_gram(spec, tables);
    if (cache) cache->store(G);
    return G;
}

template <class R>
int cmd_distance(const Options& o) {
    auto Ks = parse_range(o.K);
    const unsigned Kmax = *std::max_element(Ks.begin(), Ks.end());
    BasisSpec spec = basis_from(o, Kmax);
    TargetSpec target;
    try {
        target = parse_target(o.target);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    HarmonicTables<R> tables(spec.N);
    GramSystem<R> G = obtain_gram(spec, tables, o, o.strict_cache);
    auto c = cross_vector(target, spec, tables);
    SolverConfig cfg;
    cfg.spectral_cutoff = o.spectral_cutoff;
    cfg.force_spectral = o.force_spectral;
    auto prof = distance_profile(G, c, target, Ks, cfg);

    Report r;
    r.config = base_config("distance", o);
    r.config["target"] = target.label();
    r.config["basis"] = to_string(spec.family);
    r.config["K"] = o.K;
    r.config["N"] = spec.N;
    if (spec.uses_zeta()) r.config["zeta_turns"] = dnum(spec.zeta_turns);
    r.config["solver"] = prof.solver_config;
    r.columns = {"K", "d", "d_low", "d_high", "d_squared", "cond", "lambda_min", "truncation_sensitivity",
                 "method", "dropped", "clamped", "precision_bits"};
    for (const auto& e : prof.entries) {
        r.add_row({Json(e.K), num(e.d), num(e.d_low), num(e.d_high), num(e.d2), dnum(e.cond),
                   dnum(e.lambda_min), dnum(e.truncation_sensitivity), e.method, std::to_string(e.dropped), e.clamped,
                   o.bits});
    }
    r.diagnostics["target_norm_sq"] = num(c.target_norm_sq);
    r.diagnostics["gram_assembly_error"] = dnum(G.assembly_error);
    r.diagnostics["tail_decay_constant"] = dnum(kHkDecayConstant);
    r.diagnostics["frontier"] = prof.frontier ? Json(*prof.frontier) : Json(nullptr);
    if (prof.frontier) r.diagnostics["frontier_reason"] = prof.frontier_reason;
    if (!prof.entries.empty()) {
        auto cr = condition_diagnostics(G.leading(prof.entries.back().K));
        r.diagnostics["recommended_bits"] = cr.recommended_bits;
        r.diagnostics["tail_matrix_norm"] = dnum(cr.tail_norm);
        r.diagnostics["tail_may_flip_definiteness"] = cr.tail_may_flip_definiteness;
    }
    emit(r, o);
    return prof.frontier ? kPrecisionExhausted : kOk;
}

template <class R>
int cmd_gram(const Options& o) {
    auto Ks = parse_range(o.K);
    const unsigned Kmax = *std::max_element(Ks.begin(), Ks.end());
    BasisSpec spec = basis_from(o, Kmax);
    HarmonicTables<R> tables(spec.N);
    GramSystem<R> G;
    if (o.verify_cache) {
        if (o.cache_dir.empty()) throw UsageError("--verify-cache needs a cache directory");
        auto hit = GramCache(o.cache_dir).load<R>(spec);
        if (!hit) {
            std::cerr << "cache: no entry for this request\n";
            return kRuntimeError;
        }
        G = *hit;
    } else {
        G = obtain_gram(spec, tables, o, o.strict_cache);
    }
    auto cr = condition_diagnostics(G);
    Report r;
    r.config = base_config("gram", o);
    r.config["basis"] = to_string(spec.family);
    r.config["K"] = Kmax;
    r.config["N"] = spec.N;
    if (spec.uses_zeta()) r.config["zeta_turns"] = dnum(spec.zeta_turns);
    r.columns = {"j", "k", "re", "im", "tail_bound", "precision_bits"};
    for (std::size_t i = 0; i < G.dimension(); ++i) {
        for (std::size_t l = 0; l < G.dimension(); ++l) {
            r.add_row({Json(i + 2), Json(l + 2), num(real_part(G(i, l))), num(imag_part(G(i, l))),
                       dnum(G.tail(i, l)), o.bits});
        }
    }
    r.diagnostics["cond"] = dnum(cr.cond);
    r.diagnostics["lambda_min"] = dnum(cr.lambda_min);
    r.diagnostics["lambda_max"] = dnum(cr.lambda_max);
    r.diagnostics["recommended_bits"] = cr.recommended_bits;
    r.diagnostics["tail_matrix_norm"] = dnum(cr.tail_norm);
    r.diagnostics["tail_may_flip_definiteness"] = cr.tail_may_flip_definiteness;
    r.diagnostics["assembly_error"] = dnum(G.assembly_error);
    emit(r, o);
    return kOk;
}

template <class R>
int cmd_dirichlet(const Options& o) {
    FunctionSpec f = parse_function(o.f);
    const std::size_t N = o.N ? o.N : (f.kind == FunctionSpec::polynomial ? std::max<std::size_t>(f.poly.size(), 1) - 1
                                                                          : std::size_t(1) << 20);
    auto series = function_series<R>(f, N);
    auto zeta = RotationParameter<R>::from_turns(parse_zeta(o.zeta));
    AreaQuadrature q;
    q.s_min = o.s_min;
    auto rep = local_dirichlet(series, zeta, q);
    Report r;
    r.config = base_config("dirichlet", o);
    r.config["f"] = o.f;
    r.config["zeta_turns"] = dnum(zeta.turns());
    r.config["N"] = N;
    r.config["s_min"] = dnum(q.s_min);
    r.columns = {"zeta_turns", "boundary_value_re", "boundary_value_im", "value_decomposition", "value_area",
                 "agreement", "diverged", "precision_bits"};
    r.add_row({dnum(rep.zeta_turns), num(real_part(rep.boundary_value)), num(imag_part(rep.boundary_value)),
               dnum(rep.value_decomposition), dnum(rep.value_area), dnum(rep.agreement), rep.diverged, o.bits});
    r.diagnostics["radial_converged"] = rep.radial_converged;
    r.diagnostics["radial_error"] = dnum(rep.radial_error);
    r.diagnostics["deflation_residual"] = dnum(rep.deflation_residual);
    r.diagnostics["deflation_converged"] = rep.deflation_converged;
    r.diagnostics["area_coarse"] = dnum(rep.area_coarse);
    r.diagnostics["area_growth"] = dnum(rep.area_growth);
    emit(r, o);
    return kOk;
}

template <class R>
int cmd_smirnov(const Options& o) {
    Report r;
    r.config = base_config("smirnov", o);
    if (o.target.empty() || o.target == "-") {
        // distance between two boundary functions
        FunctionSpec f = parse_function(o.f), g = parse_function(o.g);
        auto sing = singular_angles(f);
        auto sg = singular_angles(g);
        sing.insert(sing.end(), sg.begin(), sg.end());
        std::sort(sing.begin(), sing.end());
        sing.erase(std::unique(sing.begin(), sing.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   sing.end());
        auto grid = BoundaryGrid::graded(sing, {});
        std::vector<std::complex<double>> fv, gv;
        for (double th : grid.nodes) {
            fv.push_back(function_on_circle(f, th));
            gv.push_back(function_on_circle(g, th));
        }
        double d = smirnov_distance<std::complex<double>>(fv, gv, grid);
        r.config["f"] = o.f;
        r.config["g"] = o.g;
        r.columns = {"f", "g", "smirnov_distance", "nodes", "precision_bits"};
        r.add_row({o.f, o.g, dnum(d), Json(grid.size()), 53});
        emit(r, o);
        return kOk;
    }
    // Smirnov distance from a target to its best H^2 approximation in span{basis_2..basis_K}
    auto Ks = parse_range(o.K);
    const unsigned Kmax = *std::max_element(Ks.begin(), Ks.end());
    BasisSpec spec = basis_from(o, Kmax);
    TargetSpec target;
    try {
        target = parse_target(o.target);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    HarmonicTables<R> tables(spec.N);
    GramSystem<R> G = obtain_gram(spec, tables, o, o.strict_cache);
    auto c = cross_vector(target, spec, tables);
    auto prof = distance_profile(G, c, target, Ks);

    std::vector<double> sing;
    for (unsigned k = 2; k <= Kmax; ++k) {
        for (unsigned j = 1; j < k; ++j)
            if (std::gcd(j, k) == 1) sing.push_back(kTwoPi * j / k);
    }
    const double phi = kTwoPi * spec.zeta_turns;
    if (spec.family == BasisFamily::rotated_h)
        for (double& s : sing) s = std::fmod(s + phi, kTwoPi);
    auto grid = BoundaryGrid::uniform(o.grid, sing, 1e-9);
    // target on the circle
    auto ts = target_series<R>(target, std::min<std::size_t>(spec.N, 4096), tables);
    std::vector<std::complex<double>> tv;
    for (double th : grid.nodes) {
        std::complex<double> acc = 0.0, w = std::polar(1.0, th);
        if (target.kind == TargetKind::member) {
            acc = target.member_family == BasisFamily::h ? eval_hk_boundary<double>(target.j, th)
                                                         : eval_gk_boundary<double>(target.j, th);
        } else {
            for (std::size_t n = ts.coeffs.size(); n-- > 0;)
                acc = acc * w + std::complex<double>(static_cast<double>(real_part(ts.coeffs[n])),
                                                     static_cast<double>(imag_part(ts.coeffs[n])));
        }
        tv.push_back(acc);
    }
    // basis elements on the circle
    std::vector<std::vector<std::complex<double>>> bv(Kmax - 1);
    for (unsigned k = 2; k <= Kmax; ++k) {
        for (double th : grid.nodes) {
            std::complex<double> v;
            switch (spec.family) {
                case BasisFamily::h: v = eval_hk_boundary<double>(k, th); break;
                case BasisFamily::g: v = eval_gk_boundary<double>(k, th); break;
                case BasisFamily::rotated_h: v = eval_hk_boundary<double>(k, th - phi); break;
                case BasisFamily::deflated_h:
                    v = (std::polar(1.0, phi) - std::polar(1.0, th)) * eval_hk_boundary<double>(k, th);
                    break;
            }
            bv[k - 2].push_back(v);
        }
    }
    r.config["target"] = target.label();
    r.config["basis"] = to_string(spec.family);
    r.config["K"] = o.K;
    r.config["N"] = spec.N;
    r.config["grid"] = o.grid;
    r.columns = {"K", "h2_distance", "smirnov_distance", "precision_bits"};
    for (const auto& e : prof.entries) {
        std::vector<std::complex<double>> pv(grid.size(), 0.0);
        for (std::size_t i = 0; i < e.solution.size(); ++i) {
            std::complex<double> x(static_cast<double>(real_part(e.solution[i])),
                                   static_cast<double>(imag_part(e.solution[i])));
            for (std::size_t n = 0; n < grid.size(); ++n) pv[n] += x * bv[i][n];
        }
        double d = smirnov_distance<std::complex<double>>(tv, pv, grid);
        r.add_row({Json(e.K), num(e.d), dnum(d), o.bits});
    }
    r.diagnostics["nodes"] = grid.size();
    r.diagnostics["frontier"] = prof.frontier ? Json(*prof.frontier) : Json(nullptr);
    emit(r, o);
    return prof.frontier ? kPrecisionExhausted : kOk;
}

template <class R>
int dispatch(const std::string& cmd, const Options& o) {
    if (cmd == "coeffs") return cmd_coeffs<R>(o);
    if (cmd == "verify") return cmd_verify<R>(o);
    if (cmd == "distance") return cmd_distance<R>(o);
    if (cmd == "gram") return cmd_gram<R>(o);
    if (cmd == "dirichlet") return cmd_dirichlet<R>(o);
    if (cmd == "smirnov") return cmd_smirnov<R>(o);
    throw UsageError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    if (const char* env = std::getenv("HARDY_CACHE_DIR")) o.cache_dir = env;
    if (const char* env = std::getenv("HARDY_PRECISION_BITS")) {
        try {
            o.bits = std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "error: HARDY_PRECISION_BITS is not an integer\n";
            return kUsageError;
        }
    }

    CLI::App app{"Hardy-space laboratory for the functions h_k and g_k"};
    app.require_subcommand(1);
    auto common = [&](CLI::App* sub) {
        sub->add_option("--precision-bits", o.bits, "working precision in bits (128 or 256)");
        sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--cache-dir", o.cache_dir, "Gram cache directory");
    };

    auto* coeffs = app.add_subcommand("coeffs", "coefficients of g_k and h_k");
    common(coeffs);
    coeffs->add_option("--k", o.k, "family index")->required();
    coeffs->add_option("--n,--N", o.N, "truncation order")->required();

    auto* verify = app.add_subcommand("verify", "identity, boundary, outer and Dirichlet checks");
    common(verify);
    verify->add_option("--suite", o.suite)->check(CLI::IsMember({"identities", "boundary", "outer", "dirichlet", "all"}));
    verify->add_option("--k", o.k, "index range such as 2..20");
    verify->add_option("--n,--N", o.N, "truncation order for the identity checks");
    verify->add_option("--grid", o.grid, "boundary nodes");
    verify->add_option("--tolerance", o.tolerance);

    auto* distance = app.add_subcommand("distance", "distance profile from a target to span{basis_2..basis_K}");
    common(distance);
    distance->add_option("--target", o.target, "one, z^m, subexp:c, h<j>, g<j>");
    distance->add_option("--basis", o.basis)->check(CLI::IsMember({"h", "g", "rotated-h", "deflated-h"}));
    distance->add_option("--K", o.K, "K values such as 2..100");
    distance->add_option("--n,--N", o.N, "truncation order (default max(1e5, 100 K^2))");
    distance->add_option("--zeta", o.zeta, "rotation/deflation point in turns, or 1, -1, i, -i");
    distance->add_option("--spectral-cutoff", o.spectral_cutoff);
    distance->add_flag("--force-spectral", o.force_spectral);
    distance->add_flag("--strict-cache", o.strict_cache, "treat a corrupt cache entry as an error");
    distance->add_flag("--no-cache", o.no_cache);

    auto* gram = app.add_subcommand("gram", "Gram matrix entries and conditioning");
    common(gram);
    gram->add_option("--basis", o.basis)->check(CLI::IsMember({"h", "g", "rotated-h", "deflated-h"}));
    gram->add_option("--K", o.K);
    gram->add_option("--n,--N", o.N);
    gram->add_option("--zeta", o.zeta);
    gram->add_flag("--strict-cache", o.strict_cache);
    gram->add_flag("--no-cache", o.no_cache);
    gram->add_flag("--verify-cache", o.verify_cache, "read the entry from the cache only, failing on corruption");

    auto* dirichlet = app.add_subcommand("dirichlet", "local Dirichlet integral by decomposition and by area");
    common(dirichlet);
    dirichlet->add_option("--f", o.f, "z, z^2, z+z^3, h<k>, g<k>, ...");
    dirichlet->add_option("--zeta", o.zeta);
    dirichlet->add_option("--n,--N", o.N);
    dirichlet->add_option("--s-min", o.s_min, "innermost resolved 1 - r of the area quadrature");

    auto* smirnov = app.add_subcommand("smirnov", "Smirnov-metric distances");
    common(smirnov);
    smirnov->add_option("--f", o.f);
    smirnov->add_option("--g", o.g);
    smirnov->add_option("--target", o.target, "with --basis/--K: distance to the H^2 best approximation");
    smirnov->add_option("--basis", o.basis)->check(CLI::IsMember({"h", "g", "rotated-h", "deflated-h"}));
    smirnov->add_option("--K", o.K);
    smirnov->add_option("--n,--N", o.N);
    smirnov->add_option("--zeta", o.zeta);
    smirnov->add_option("--grid", o.grid, "uniform boundary nodes for the best-approximation mode (the two-function mode uses a graded rule)");

    // the smirnov subcommand defaults to the two-function mode
    o.target.clear();
    o.k.clear();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsageError;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    if (cmd == "distance" && o.target.empty()) o.target = "one";
    if (cmd == "coeffs" && o.k.empty()) o.k = "2";
    if (cmd == "smirnov" && o.grid == 100000) o.grid = 20000;

    try {
        if (o.bits == 128) return dispatch<Real128>(cmd, o);
        if (o.bits == 256) return dispatch<Real256>(cmd, o);
        std::cerr << "error: --precision-bits must be 128 or 256\n";
        return kUsageError;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const CacheCorruption& e) {
        std::cerr << "cache error: " << e.what() << '\n';
        return kCacheCorrupt;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
