#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/lattice.hpp"
#include "sparsedom/measure.hpp"
#include "sparsedom/rng.hpp"

namespace sparsedom {

// Dyadic lattice maximal operator: on each positive-mass cell x,
//   sup_{Q in D, x in Q, mu(Q) > 0} <|f|>_Q^mu   (coordinatewise),
// and 0 on zero-mass cells and when no admissible cube covers x.
// Zero-mass cubes are skipped: their indicators are mu-a.e. zero.
inline SimpleFunction lattice_maximal(const SimpleFunction& f, const CubeCollection& cubes,
                                      const DyadicMeasure& mu) {
    if (f.grid() != mu.grid()) throw std::invalid_argument("lattice_maximal: grid mismatch");
    const GridSpec& grid = f.grid();
    const int n = f.dim();
    const SimpleFunction af = abs(f);
    SimpleFunction out(grid, n);
    for (const CubeId& q : cubes) {
        if (q.level > grid.depth) throw std::invalid_argument("lattice_maximal: cube below grid depth");
        if (!(mu.mass(q) > 0.0)) continue;
        const LatticeVector avg = average(af, q, mu);
        for_each_cell(grid, q, [&](std::uint64_t c) {
            if (mu.cell_mass(c) == 0.0) return;
            auto v = out.value(c);
            for (int i = 0; i < n; ++i) v[i] = std::max(v[i], avg[i]);
        });
    }
    return out;
}

// Sparse operator on a nonnegative scalar function:
//   A_{q,S} g(x) = (sum_{S in S, x in S, mu(S) > 0} (<g>_S^mu)^q)^{1/q}.
// q = inf is the max over the admissible averages.
inline SimpleFunction sparse_operator(const SimpleFunction& g, double q,
                                      const CubeCollection& cubes, const DyadicMeasure& mu) {
    if (g.dim() != 1) throw std::invalid_argument("sparse_operator: scalar input required");
    if (g.grid() != mu.grid()) throw std::invalid_argument("sparse_operator: grid mismatch");
    if (q < 1.0) throw std::invalid_argument("sparse_operator: q must be >= 1");
    const GridSpec& grid = g.grid();
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c)
        if (mu.cell_mass(c) > 0.0 && g.value(c)[0] < 0.0)
            throw std::invalid_argument("sparse_operator: input must be nonnegative");
    SimpleFunction out(grid, 1);
    const bool use_max = std::isinf(q);
    for (const CubeId& s : cubes) {
        if (!(mu.mass(s) > 0.0)) continue;
        const double a = average(g, s, mu)[0];
        const double term = use_max ? a : std::pow(a, q);
        for_each_cell(grid, s, [&](std::uint64_t c) {
            if (mu.cell_mass(c) == 0.0) return;
            double& x = out.value(c)[0];
            x = use_max ? std::max(x, term) : x + term;
        });
    }
    if (!use_max)
        for (std::uint64_t c = 0; c < grid.cell_count(); ++c)
            out.value(c)[0] = std::pow(out.value(c)[0], 1.0 / q);
    return out;
}

struct ProbeConfig {
    int samples = 64;
    std::uint64_t seed = 0;
    int refine_steps = 0;
};

// A certified lower bound: value is the ratio achieved by the stored
// witness and is recomputable exactly from it.
struct OperatorNormEstimate {
    double value = 0.0;
    SimpleFunction witness;
    int samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Ratio ||Op f||_{L^p or L^{p,inf}(nu)} / ||f||_{L^p(nu)}.
inline double probe_ratio(const SimpleFunction& f,
                          const std::function<SimpleFunction(const SimpleFunction&)>& op,
                          const LatticeNormSpec& norm, double p, NormMode mode,
                          const DyadicMeasure& nu) {
    const double den = bochner_norm(f, nu, norm, p, NormMode::Strong);
    if (!(den > 0.0)) return -1.0;
    const double num = bochner_norm(op(f), nu, norm, p, mode);
    return num / den;
}

// Nested dyadic chain cubes [0, 2^{k-m}) along the first axis.
inline CubeId chain_cube(int m, int k) {
    CubeId q;
    q.level = m - k;
    return q;
}

inline std::vector<CubeId> anchor_cubes(const GridSpec& grid,
                                        const std::vector<std::uint64_t>& anchors) {
    std::vector<CubeId> out;
    for (std::uint64_t cell : anchors) {
        const CubeId leaf = cell_from_linear(grid, cell);
        for (int level = 0; level <= grid.depth; ++level)
            out.push_back(ancestor_at_level(leaf, level));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

// Lower-bound probe for an operator norm. Maximizes the ratio over
//  - structured candidates: cube indicators and dual-weight profiles
//    sigma^{1/(p-1)}-type along the ancestor chains of extremal cells, and
//    the nested-chain disjoint-basis construction (the known extremal
//    family for the maximal operator), and
//  - seeded random simple functions, sample k drawn from the child stream
//    derive_seed(seed, k), so estimates grow monotonically in the sample
//    count for a fixed seed.
// The operator acts with averages against mu_op; norms are taken in
// L^p(norm_measure) (defaults to mu_op). Optional coordinate-ascent
// refinement multiplies single entries of the best witness.
inline OperatorNormEstimate operator_norm_probe(
    const std::function<SimpleFunction(const SimpleFunction&)>& op, int op_dim,
    const DyadicMeasure& mu_op, const LatticeNormSpec& norm, double p, NormMode mode,
    const ProbeConfig& cfg, const DyadicMeasure* norm_measure = nullptr) {
    if (p < 1.0) throw std::invalid_argument("operator_norm_probe: p must be >= 1");
    const DyadicMeasure& nu = norm_measure ? *norm_measure : mu_op;
    const GridSpec& grid = mu_op.grid();
    const std::uint64_t cells = grid.cell_count();

    OperatorNormEstimate best{0.0, SimpleFunction(grid, op_dim), cfg.samples, cfg.seed};
    auto consider = [&](const SimpleFunction& f) {
        const double r = detail::probe_ratio(f, op, norm, p, mode, nu);
        if (r > best.value) {
            best.value = r;
            best.witness = f;
        }
    };

    // Extremal cells for anchoring: domain corners plus the cells where the
    // norm measure is heaviest/lightest.
    std::vector<std::uint64_t> anchors = {0, cells - 1};
    {
        std::uint64_t heavy = 0, light = 0;
        for (std::uint64_t c = 1; c < cells; ++c) {
            if (nu.cell_mass(c) > nu.cell_mass(heavy)) heavy = c;
            if (nu.cell_mass(c) > 0.0 &&
                (nu.cell_mass(light) == 0.0 || nu.cell_mass(c) < nu.cell_mass(light)))
                light = c;
        }
        anchors.push_back(heavy);
        anchors.push_back(light);
    }

    // Dual-weight profile sigma = (d nu / d vol)^{-1/(p-1)} on positive cells
    // (for p = 1, simply the reciprocal density).
    std::vector<double> sigma(cells, 0.0);
    {
        const double vol = std::ldexp(1.0, -grid.dimension * grid.depth);
        const double expo = (p > 1.0 && std::isfinite(p)) ? 1.0 / (p - 1.0) : 1.0;
        for (std::uint64_t c = 0; c < cells; ++c) {
            const double dens = nu.cell_mass(c) / vol;
            if (dens > 0.0) sigma[c] = std::pow(dens, -expo);
        }
    }

    std::vector<double> direction(op_dim, 0.0);
    auto structured = [&](const CubeId& q, bool dual) {
        SimpleFunction f(grid, op_dim);
        for_each_cell(grid, q, [&](std::uint64_t c) {
            const double amp = dual ? sigma[c] : 1.0;
            if (amp == 0.0) return;
            auto v = f.value(c);
            for (int i = 0; i < op_dim; ++i) v[i] = direction[i] * amp;
        });
        consider(f);
    };

    const std::vector<CubeId> anchor_set = detail::anchor_cubes(grid, anchors);
    // First basis direction and the all-ones direction.
    for (int pass = 0; pass < 2; ++pass) {
        std::fill(direction.begin(), direction.end(), pass == 0 ? 0.0 : 1.0);
        if (pass == 0) direction[0] = 1.0;
        for (const CubeId& q : anchor_set) {
            structured(q, false);
            structured(q, true);
        }
        if (op_dim == 1) break; // all-ones pass only matters for vectors
    }

    // Nested-chain construction with pairwise disjoint basis vectors.
    {
        const int m = std::min(grid.depth, op_dim);
        if (m >= 1) {
            SimpleFunction f(grid, op_dim);
            for (int k = 1; k <= m; ++k) {
                const CubeId outer = detail::chain_cube(m, k);
                const CubeId inner = detail::chain_cube(m, k - 1);
                for_each_cell(grid, outer, [&](std::uint64_t c) {
                    if (cell_in_cube(grid, c, inner)) return;
                    f.value(c)[k - 1] = 1.0;
                });
            }
            consider(f);
        }
    }

    // Seeded random candidates.
    for (int s = 0; s < cfg.samples; ++s) {
        auto rng = make_rng(cfg.seed, std::uint64_t(s));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 2.0);
        std::bernoulli_distribution sparse(0.5);
        SimpleFunction f(grid, op_dim);
        const bool spiky = sparse(rng);
        const double keep = spiky ? 8.0 / double(cells) : 1.0;
        for (std::uint64_t c = 0; c < cells; ++c) {
            if (spiky && unif(rng) > keep) continue;
            auto v = f.value(c);
            for (int i = 0; i < op_dim; ++i) v[i] = std::exp(gauss(rng));
        }
        consider(f);
    }

    // Coordinate ascent on the best witness.
    if (cfg.refine_steps > 0 && best.value > 0.0) {
        auto rng = make_rng(cfg.seed, 0x5eedull);
        std::uniform_int_distribution<std::uint64_t> pick_cell(0, cells - 1);
        std::uniform_int_distribution<int> pick_coord(0, op_dim - 1);
        for (int step = 0; step < cfg.refine_steps; ++step) {
            SimpleFunction trial = best.witness;
            const std::uint64_t c = pick_cell(rng);
            const int i = pick_coord(rng);
            const double factor = (step % 2 == 0) ? 2.0 : 0.5;
            trial.value(c)[i] = trial.value(c)[i] == 0.0 ? 1.0 : trial.value(c)[i] * factor;
            consider(trial);
        }
    }
    return best;
}

inline OperatorNormEstimate probe_maximal_norm(const CubeCollection& cubes,
                                               const DyadicMeasure& mu,
                                               const LatticeNormSpec& norm, int dim, double p,
                                               NormMode mode, const ProbeConfig& cfg,
                                               const DyadicMeasure* norm_measure = nullptr) {
    auto op = [&cubes, &mu](const SimpleFunction& f) { return lattice_maximal(f, cubes, mu); };
    return operator_norm_probe(op, dim, mu, norm, p, mode, cfg, norm_measure);
}

inline OperatorNormEstimate probe_sparse_norm(const CubeCollection& cubes, double q,
                                              const DyadicMeasure& mu,
                                              const LatticeNormSpec& norm, double p,
                                              NormMode mode, const ProbeConfig& cfg,
                                              const DyadicMeasure* norm_measure = nullptr) {
    auto op = [&cubes, &mu, q](const SimpleFunction& f) {
        return sparse_operator(abs(f), q, cubes, mu);
    };
    return operator_norm_probe(op, 1, mu, norm, p, mode, cfg, norm_measure);
}

// Recomputes the ratio certified by an estimate's witness.
inline double recompute_maximal_ratio(const OperatorNormEstimate& est, const CubeCollection& cubes,
                                      const DyadicMeasure& mu, const LatticeNormSpec& norm,
                                      double p, NormMode mode,
                                      const DyadicMeasure* norm_measure = nullptr) {
    auto op = [&cubes, &mu](const SimpleFunction& f) { return lattice_maximal(f, cubes, mu); };
    return detail::probe_ratio(est.witness, op, norm, p, mode,
                               norm_measure ? *norm_measure : mu);
}

} // namespace sparsedom
