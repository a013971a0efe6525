#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedom/czdecomp.hpp"
#include "sparsedom/generate.hpp"
#include "sparsedom/io.hpp"
#include "sparsedom/sharpness.hpp"
#include "sparsedom/sparse.hpp"
#include "sparsedom/weights.hpp"

namespace sparsedom {

// Experiment runner. Configuration is a flat key-value file plus
// command-line flags; flags win. A seed is mandatory for any randomized
// run, and identical config plus seed reproduces identical output bytes
// (all reductions are serial; --deterministic is accepted and documents
// that contract, it does not change behavior).
//
// Exit codes: 0 success, 1 assertion/verification failure, 2 config error.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& key, const std::string& detail)
        : std::runtime_error("config error at key '" + key + "': " + detail), key(key) {}
    std::string key;
};

struct ExperimentConfig {
    std::string subcommand;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError(key, "missing");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values.at(key);
        if (s == "inf") return std::numeric_limits<double>::infinity();
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "expected a number, got '" + s + "'");
        }
    }

    long long get_int(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        const std::string& s = values.at(key);
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, "expected an integer, got '" + s + "'");
        }
    }

    std::uint64_t require_seed() const {
        if (!has("seed")) throw ConfigError("seed", "missing (mandatory for randomized runs)");
        try {
            return std::stoull(values.at("seed"));
        } catch (const std::exception&) {
            throw ConfigError("seed", "expected an unsigned integer");
        }
    }

    // "4,8,16" and "4..32" (inclusive) and mixtures of both.
    std::vector<long long> get_int_list(const std::string& key, const std::string& fallback) const {
        const std::string s = get(key, fallback);
        std::vector<long long> out;
        std::istringstream is(s);
        std::string item;
        while (std::getline(is, item, ',')) {
            const auto dots = item.find("..");
            try {
                if (dots == std::string::npos) {
                    out.push_back(std::stoll(item));
                } else {
                    const long long lo = std::stoll(item.substr(0, dots));
                    const long long hi = std::stoll(item.substr(dots + 2));
                    if (hi < lo) throw std::invalid_argument(item);
                    for (long long v = lo; v <= hi; ++v) out.push_back(v);
                }
            } catch (const std::exception&) {
                throw ConfigError(key, "expected integers or ranges a..b, got '" + item + "'");
            }
        }
        if (out.empty()) throw ConfigError(key, "empty list");
        return out;
    }

    GridSpec grid() const {
        const int d = int(get_int("d", 1));
        const int depth = int(get_int("depth", 8));
        try {
            return GridSpec(d, depth);
        } catch (const std::exception& e) {
            throw ConfigError("depth", e.what());
        }
    }

    LatticeNormSpec norm(const std::string& fallback) const {
        try {
            return LatticeNormSpec::parse(get("norm", fallback));
        } catch (const std::exception& e) {
            throw ConfigError("norm", e.what());
        }
    }

    std::string hash_comment() const {
        std::ostringstream os;
        os << subcommand;
        for (const auto& [k, v] : values) os << '|' << k << '=' << v;
        std::ostringstream out;
        out << "config_hash=" << std::hex << fnv1a64(os.str()) << std::dec
            << " seed=" << get("seed", "none");
        return out.str();
    }
};

inline const std::vector<std::string>& known_subcommands() {
    static const std::vector<std::string> names = {"sparse-build", "dominate-check", "sharpness",
                                                   "weights-scan", "cz-check",       "convexity",
                                                   "probe-norm"};
    return names;
}

// argv: subcommand followed by --key value flags; --config FILE loads a
// key=value file first, explicit flags override it.
inline ExperimentConfig parse_command_line(const std::vector<std::string>& args) {
    if (args.empty()) throw ConfigError("subcommand", "missing");
    ExperimentConfig config;
    config.subcommand = args[0];
    bool known = false;
    for (const auto& name : known_subcommands()) known = known || name == config.subcommand;
    if (!known) throw ConfigError("subcommand", "unknown subcommand '" + config.subcommand + "'");

    std::map<std::string, std::string> flags;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg.rfind("--", 0) != 0) throw ConfigError(arg, "expected a --flag");
        const std::string key = arg.substr(2);
        if (key == "deterministic") {
            flags[key] = "1";
            continue;
        }
        if (i + 1 >= args.size()) throw ConfigError(key, "flag needs a value");
        flags[key] = args[++i];
    }

    if (flags.count("config")) {
        std::ifstream in(flags.at("config"));
        if (!in) throw ConfigError("config", "cannot open '" + flags.at("config") + "'");
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!key.empty()) config.values[key] = value;
        }
    }
    for (const auto& [k, v] : flags) config.values[k] = v; // flags win
    return config;
}

namespace cli_detail {

inline DyadicMeasure load_measure(const ExperimentConfig& config, const GridSpec& grid,
                                  std::uint64_t seed_stream) {
    const std::string spec = config.get("measure", "uniform");
    if (spec == "uniform") return DyadicMeasure::uniform(grid);
    if (spec == "lebesgue") return DyadicMeasure::lebesgue(grid);
    if (spec == "random") return random_measure(grid, derive_seed(config.require_seed(), seed_stream));
    if (spec.rfind("file:", 0) == 0) return read_measure_csv(spec.substr(5), grid);
    throw ConfigError("measure", "expected uniform|lebesgue|random|file:PATH, got '" + spec + "'");
}

inline SimpleFunction load_function(const ExperimentConfig& config, const GridSpec& grid, int dim,
                                    std::uint64_t seed_stream) {
    const std::string spec = config.get("function", "random");
    if (spec == "random")
        return random_function(grid, dim, derive_seed(config.require_seed(), seed_stream));
    if (spec.rfind("file:", 0) == 0) return read_function_csv(spec.substr(5), grid);
    throw ConfigError("function", "expected random|file:PATH, got '" + spec + "'");
}

inline int run_sparse_build(const ExperimentConfig& config, std::ostream& log) {
    const GridSpec grid = config.grid();
    const LatticeNormSpec norm = config.norm("lp:2");
    const int dim = int(config.get_int("dim", 1));
    const DyadicMeasure mu = load_measure(config, grid, 0);
    const SimpleFunction f = load_function(config, grid, dim, 1);
    const double tau0 = config.get_double("tau0", 1.0);
    if (!(tau0 > 0.0)) throw ConfigError("tau0", "must be positive");

    const auto [family, tau] = adaptive_threshold(f, all_cubes(grid), mu, norm, tau0);
    CsvWriter csv(config.get("out", "sparse-build.csv"), config.hash_comment(),
                  {"cube", "parent", "tau", "witness_mass", "cube_mass"});
    for (std::size_t i = 0; i < family.cubes.size(); ++i) {
        double witness_mass = 0.0;
        for (std::uint64_t c : family.witness_cells[i]) witness_mass += mu.cell_mass(c);
        const int pi = family.family_parent[i];
        csv.write_row({format_cube(family.cubes[i], grid.dimension),
                       pi < 0 ? "none" : format_cube(family.cubes[pi], grid.dimension),
                       format_double(tau), format_double(witness_mass),
                       format_double(mu.mass(family.cubes[i]))});
    }
    log << "sparse-build: " << family.cubes.size() << " cubes at tau=" << tau << "\n";
    return 0;
}

inline int run_dominate_check(const ExperimentConfig& config, std::ostream& log) {
    const GridSpec grid = config.grid();
    const LatticeNormSpec norm = config.norm("lp:2");
    const int dim = int(config.get_int("dim", 1));
    const double q = config.get_double("q", 2.0);
    const double tau0 = config.get_double("tau0", 1.0);
    if (!(tau0 > 0.0)) throw ConfigError("tau0", "must be positive");
    const DyadicMeasure mu = load_measure(config, grid, 0);
    const SimpleFunction f = load_function(config, grid, dim, 1);
    const CubeCollection cubes = all_cubes(grid);

    const double density = config.get_double("density", 0.5);
    if (!(density > 0.0) || density > 1.0) throw ConfigError("density", "must be in (0, 1]");
    const auto [family, tau] = adaptive_threshold(f, cubes, mu, norm, tau0);
    const SparsityCertificate cert = verify_sparsity(family.cube_collection(), mu, density);
    const DominationReport report =
        domination_constant(f, cubes, q, family.cube_collection(), mu, norm);

    std::ostringstream comment;
    comment << config.hash_comment() << " tau_final=" << format_double(tau)
            << " constant=" << format_double(report.constant)
            << " sparse=" << (cert.feasible ? "yes" : "no");
    CsvWriter csv(config.get("out", "dominate-check.csv"), comment.str(),
                  {"cell", "numerator", "denominator", "ratio"});
    for (const auto& row : report.rows)
        csv.write_row({std::to_string(row.cell), format_double(row.numerator),
                       format_double(row.denominator), format_double(row.ratio)});

    log << "dominate-check: constant=" << report.constant << " tau_final=" << tau
        << " sparse=" << (cert.feasible ? "yes" : "no") << "\n";
    const bool ok = cert.feasible && !report.infinite && report.constant <= tau;
    return ok ? 0 : 1;
}

inline int run_sharpness(const ExperimentConfig& config, std::ostream& log) {
    const double r = config.get_double("r", 1.0);
    const double q = config.get_double("q", 2.0);
    const double rho = config.get_double("rho", 0.5);
    if (!(r >= 1.0)) throw ConfigError("r", "must be >= 1");
    if (!(rho > 0.0) || rho > 0.5) throw ConfigError("rho", "must be in (0, 1/2]");
    const LatticeNormSpec norm = config.norm("lp:" + (std::isinf(r) ? std::string("inf")
                                                                    : format_double(r)));
    std::vector<int> lengths;
    for (long long n : config.get_int_list("n", "4..32")) {
        if (n < 1) throw ConfigError("n", "chain lengths must be >= 1");
        lengths.push_back(int(n));
    }
    if (lengths.size() < 2) throw ConfigError("n", "need at least two chain lengths");

    const BlowupCurve curve = blowup_curve(norm, q, lengths, rho);
    CsvWriter csv(config.get("out", "sharpness.csv"), config.hash_comment(),
                  {"n", "q", "r", "C_star", "slope"});
    for (const auto& row : curve.rows)
        csv.write_row({std::to_string(row.n), format_double(q), format_double(r),
                       format_double(row.c_star), format_double(curve.slope)});
    log << "sharpness: slope=" << curve.slope << " over " << curve.rows.size() << " lengths\n";
    return 0;
}

inline int run_weights_scan(const ExperimentConfig& config, std::ostream& log) {
    ScalingConfig sc;
    sc.grid = GridSpec(1, int(config.get_int("depth", 14)));
    sc.p = config.get_double("p", 2.0);
    sc.q = config.get_double("q", 2.0);
    sc.dim = int(config.get_int("dim", 1));
    sc.norm = config.norm("lp:2");
    const std::string family = config.get("family", "geometric");
    if (family == "geometric") sc.family = WeightFamily::Geometric;
    else if (family == "poly") sc.family = WeightFamily::Poly;
    else throw ConfigError("family", "expected geometric|poly, got '" + family + "'");
    const std::string mode = config.get("mode", "strong");
    if (mode == "strong") sc.mode = ScalingMode::Strong;
    else if (mode == "weak") sc.mode = ScalingMode::Weak;
    else if (mode == "weak1") sc.mode = ScalingMode::WeakL1;
    else throw ConfigError("mode", "expected strong|weak|weak1, got '" + mode + "'");
    for (long long t : config.get_int_list("t", "1..8")) {
        if (t < 1) throw ConfigError("t", "family parameters must be >= 1");
        sc.ts.push_back(double(t));
    }
    sc.probe.samples = int(config.get_int("samples", 64));
    sc.probe.refine_steps = int(config.get_int("refine", 0));
    sc.probe.seed = config.require_seed();
    if (!(sc.p >= 1.0)) throw ConfigError("p", "must be >= 1");
    if (!(sc.q >= 1.0)) throw ConfigError("q", "must be >= 1");

    ScalingResult result;
    try {
        result = scaling_experiment(sc);
    } catch (const std::runtime_error& e) {
        throw ConfigError("family", e.what());
    }
    CsvWriter csv(config.get("out", "weights-scan.csv"), config.hash_comment(),
                  {"t", "Ap", "Ainf", "Ainf_dual", "norm_lb", "predicted_exponent",
                   "fitted_slope"});
    for (const auto& row : result.rows)
        csv.write_row({format_double(row.t), format_double(row.ap), format_double(row.ainf),
                       format_double(row.ainf_dual), format_double(row.norm_lb),
                       format_double(result.predicted_exponent),
                       format_double(result.fitted_slope)});
    log << "weights-scan: fitted_slope=" << result.fitted_slope
        << " predicted=" << result.predicted_exponent << "\n";
    return 0;
}

inline int run_cz_check(const ExperimentConfig& config, std::ostream& log) {
    const GridSpec grid = config.grid();
    const LatticeNormSpec norm = config.norm("lp:2");
    const int dim = int(config.get_int("dim", 3));
    const double p = config.get_double("p", 2.0);
    const long long count = config.get_int("count", 100);
    if (count < 1) throw ConfigError("count", "must be >= 1");
    const double tolerance = config.get_double("tolerance", 0.0);
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance", "must be nonnegative");
    const std::uint64_t seed = config.require_seed();
    const CubeCollection cubes = all_cubes(grid);
    const DyadicMeasure mu = load_measure(config, grid, 0);

    bool all_ok = true;
    std::vector<std::vector<std::string>> rows;
    for (long long i = 0; i < count; ++i) {
        const std::uint64_t child = derive_seed(seed, std::uint64_t(i));
        const SimpleFunction f = random_integer_function(grid, dim, child);
        double lambda = config.get_double("lambda", 0.0);
        if (!(lambda > 0.0)) {
            auto rng = make_rng(child, 3);
            std::uniform_real_distribution<double> unif(0.25, 4.0);
            lambda = unif(rng) * std::max(1.0, average_norm(f, root_cube(), mu, norm));
        }
        const CZParts parts = cz_decompose(f, lambda, cubes, mu, norm);
        const CZBoundsReport report = verify_cz_bounds(parts, f, cubes, mu, norm, p, tolerance);
        const bool ok = report.pointwise_ok && report.weak_b_ok && report.g2_ok;
        all_ok = all_ok && ok;
        rows.push_back({std::to_string(i), format_double(lambda),
                        report.pointwise_ok ? "1" : "0", report.weak_b_ok ? "1" : "0",
                        report.g2_ok ? "1" : "0", format_double(report.g1_ratio)});
    }

    // Weak-from-strong record: the ratio of the weak-(1,1) lower bound to
    // the strong-(p,p) lower bounds of the maximal operator on this grid
    // and measure. Both sides are lower bounds, so the ratio is reported,
    // never asserted.
    ProbeConfig probe;
    probe.samples = int(config.get_int("samples", 32));
    probe.seed = derive_seed(seed, 0xabcdULL);
    const double weak1 =
        probe_maximal_norm(cubes, mu, norm, dim, 1.0, NormMode::Weak, probe).value;
    std::ostringstream comment;
    comment << config.hash_comment() << " weak1_lb=" << format_double(weak1);
    for (double pp : {2.0, 4.0}) {
        const double strong =
            probe_maximal_norm(cubes, mu, norm, dim, pp, NormMode::Strong, probe).value;
        comment << " strong" << pp << "_lb=" << format_double(strong)
                << " weak1_over_strong" << pp << "=" << format_double(weak1 / strong);
    }

    CsvWriter csv(config.get("out", "cz-check.csv"), comment.str(),
                  {"instance", "lambda", "pointwise_ok", "weak_b_ok", "g2_ok", "g1_ratio"});
    for (const auto& row : rows) csv.write_row(row);
    log << "cz-check: " << count << " instances, " << (all_ok ? "all bounds hold" : "VIOLATION")
        << "\n";
    return all_ok ? 0 : 1;
}

inline int run_convexity(const ExperimentConfig& config, std::ostream& log) {
    const LatticeNormSpec norm = config.norm("lp:2");
    const double q = config.get_double("q", 2.0);
    const int n = int(config.get_int("dim", 8));
    const int samples = int(config.get_int("samples", 10000));
    if (!(q >= 1.0)) throw ConfigError("q", "must be >= 1");
    if (n < 1) throw ConfigError("dim", "must be >= 1");
    const std::uint64_t seed = config.require_seed();

    const double lb = q_convexity_lower_bound(norm, q, n, samples, seed);
    CsvWriter csv(config.get("out", "convexity.csv"), config.hash_comment(),
                  {"norm", "q", "n", "samples", "seed", "ratio_lb"});
    csv.write_row({norm.to_string(), format_double(q), std::to_string(n),
                   std::to_string(samples), std::to_string(seed), format_double(lb)});
    log << "convexity: lower bound " << lb << "\n";
    return 0;
}

inline int run_probe_norm(const ExperimentConfig& config, std::ostream& log) {
    const GridSpec grid = config.grid();
    const LatticeNormSpec norm = config.norm("lp:2");
    const int dim = int(config.get_int("dim", 1));
    const double p = config.get_double("p", 2.0);
    const double q = config.get_double("q", 2.0);
    if (!(p >= 1.0)) throw ConfigError("p", "must be >= 1");
    const std::string op = config.get("operator", "maximal");
    const std::string mode_name = config.get("mode", "strong");
    NormMode mode;
    if (mode_name == "strong") mode = NormMode::Strong;
    else if (mode_name == "weak") mode = NormMode::Weak;
    else throw ConfigError("mode", "expected strong|weak, got '" + mode_name + "'");

    ProbeConfig probe;
    probe.samples = int(config.get_int("samples", 64));
    probe.refine_steps = int(config.get_int("refine", 0));
    probe.seed = config.require_seed();
    const DyadicMeasure mu = load_measure(config, grid, 0);
    const CubeCollection cubes = all_cubes(grid);

    OperatorNormEstimate est;
    if (op == "maximal") {
        est = probe_maximal_norm(cubes, mu, norm, dim, p, mode, probe);
    } else if (op == "sparse") {
        if (!(q >= 1.0)) throw ConfigError("q", "must be >= 1");
        est = probe_sparse_norm(cubes, q, mu, norm, p, mode, probe);
    } else {
        throw ConfigError("operator", "expected maximal|sparse, got '" + op + "'");
    }

    CsvWriter csv(config.get("out", "probe-norm.csv"), config.hash_comment(),
                  {"operator", "p", "mode", "value", "samples", "seed"});
    csv.write_row({op, format_double(p), mode_name, format_double(est.value),
                   std::to_string(est.samples), std::to_string(est.seed)});
    if (config.has("witness-out"))
        write_function_csv(config.get("witness-out", ""), est.witness,
                           config.hash_comment() + " role=probe-witness");
    log << "probe-norm: " << op << " lower bound " << est.value << "\n";
    return 0;
}

} // namespace cli_detail

inline int run_experiment(const ExperimentConfig& config, std::ostream& log) {
    if (config.subcommand == "sparse-build") return cli_detail::run_sparse_build(config, log);
    if (config.subcommand == "dominate-check") return cli_detail::run_dominate_check(config, log);
    if (config.subcommand == "sharpness") return cli_detail::run_sharpness(config, log);
    if (config.subcommand == "weights-scan") return cli_detail::run_weights_scan(config, log);
    if (config.subcommand == "cz-check") return cli_detail::run_cz_check(config, log);
    if (config.subcommand == "convexity") return cli_detail::run_convexity(config, log);
    if (config.subcommand == "probe-norm") return cli_detail::run_probe_norm(config, log);
    throw ConfigError("subcommand", "unknown subcommand '" + config.subcommand + "'");
}

inline int run_command_line(const std::vector<std::string>& args, std::ostream& log,
                            std::ostream& err) {
    try {
        const ExperimentConfig config = parse_command_line(args);
        return run_experiment(config, log);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace sparsedom
