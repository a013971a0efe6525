#pragma once

// Independent reference implementations used only by the tests. They share
// the library's two numeric conventions -- serial ascending-cell summation
// and the exact single-atom average -- because both are part of the
// documented semantics; everything else (scan structure, recursion, data
// handling) is written from scratch against the definitions.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/lattice.hpp"
#include "sparsedom/measure.hpp"

namespace oracles {

using namespace sparsedom;

inline std::optional<LatticeVector> plain_average(const SimpleFunction& f, const CubeId& q,
                                                  const DyadicMeasure& mu) {
    const GridSpec& grid = f.grid();
    const int n = f.dim();
    std::vector<double> sum(n, 0.0);
    double total = 0.0;
    std::uint64_t atom = 0;
    int positive = 0;
    for_each_cell(grid, q, [&](std::uint64_t c) {
        const double m = mu.cell_mass(c);
        if (m == 0.0) return;
        ++positive;
        atom = c;
        total += m;
        for (int i = 0; i < n; ++i) sum[i] += f.value(c)[i] * m;
    });
    if (positive == 0) return std::nullopt;
    if (positive == 1) {
        auto v = f.value(atom);
        return LatticeVector(v.begin(), v.end());
    }
    for (double& x : sum) x /= total;
    return sum;
}

// Classical per-cell scan: for every positive-mass cell, loop over every
// admissible cube and take the coordinatewise maximum of its average.
inline SimpleFunction brute_force_maximal(const SimpleFunction& f, const CubeCollection& cubes,
                                          const DyadicMeasure& mu) {
    const GridSpec& grid = f.grid();
    const int n = f.dim();
    SimpleFunction af = f;
    for (double& x : af.raw()) x = std::fabs(x);
    SimpleFunction out(grid, n);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        if (mu.cell_mass(c) == 0.0) continue;
        for (const CubeId& q : cubes) {
            if (!cell_in_cube(grid, c, q)) continue;
            const auto avg = plain_average(af, q, mu);
            if (!avg) continue;
            for (int i = 0; i < n; ++i) out.value(c)[i] = std::max(out.value(c)[i], (*avg)[i]);
        }
    }
    return out;
}

// Muckenhoupt-Wheeden principal cubes for nonnegative scalar functions:
// stopping children are the maximal subcubes with <f>_{S'} > tau <f>_S.
// Returns the family as a sorted set of cubes.
inline std::vector<CubeId> principal_cubes(const SimpleFunction& f, const CubeCollection& cubes,
                                           const DyadicMeasure& mu, double tau) {
    const GridSpec& grid = f.grid();
    std::vector<CubeId> dplus;
    for (const CubeId& q : cubes)
        if (mu.mass(q) > 0.0) dplus.push_back(q);

    std::vector<CubeId> family;
    std::vector<CubeId> queue;
    for (const CubeId& q : dplus) {
        bool dominated = false;
        for (const CubeId& other : dplus)
            if (!(other == q) && cube_contains(other, q, grid.dimension)) dominated = true;
        if (!dominated) queue.push_back(q);
    }
    while (!queue.empty()) {
        const CubeId s = queue.back();
        queue.pop_back();
        family.push_back(s);
        const double threshold = tau * (*plain_average(f, s, mu))[0];
        std::vector<CubeId> satisfying;
        for (const CubeId& q : dplus)
            if (cube_contains(s, q, grid.dimension) && !(q == s) &&
                (*plain_average(f, q, mu))[0] > threshold)
                satisfying.push_back(q);
        for (const CubeId& q : satisfying) {
            bool dominated = false;
            for (const CubeId& other : satisfying)
                if (!(other == q) && cube_contains(other, q, grid.dimension)) dominated = true;
            if (!dominated) queue.push_back(q);
        }
    }
    std::sort(family.begin(), family.end());
    return family;
}

// Generalized stopping cubes selected by scanning every subcube for the
// chain-supremum condition and keeping the maximal satisfying ones.
inline std::vector<CubeId> chain_sup_stopping_cubes(const SimpleFunction& f,
                                                    const CubeCollection& cubes,
                                                    const DyadicMeasure& mu,
                                                    const LatticeNormSpec& norm, double tau) {
    const GridSpec& grid = f.grid();
    SimpleFunction af = f;
    for (double& x : af.raw()) x = std::fabs(x);
    std::vector<CubeId> dplus;
    for (const CubeId& q : cubes)
        if (mu.mass(q) > 0.0) dplus.push_back(q);

    SimpleFunction nf(grid, 1);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) nf.value(c)[0] = norm(f.value(c));

    std::vector<CubeId> family;
    std::vector<CubeId> queue;
    for (const CubeId& q : dplus) {
        bool dominated = false;
        for (const CubeId& other : dplus)
            if (!(other == q) && cube_contains(other, q, grid.dimension)) dominated = true;
        if (!dominated) queue.push_back(q);
    }
    while (!queue.empty()) {
        const CubeId s = queue.back();
        queue.pop_back();
        family.push_back(s);
        const double threshold = tau * (*plain_average(nf, s, mu))[0];
        std::vector<CubeId> satisfying;
        for (const CubeId& q : dplus) {
            if (!cube_contains(s, q, grid.dimension) || q == s) continue;
            // chain supremum over D-members between q and s
            LatticeVector sup(std::size_t(f.dim()), 0.0);
            for (const CubeId& mid : dplus)
                if (cube_contains(s, mid, grid.dimension) && cube_contains(mid, q, grid.dimension))
                    sup = lattice_sup(sup, *plain_average(af, mid, mu));
            if (norm(sup) > threshold) satisfying.push_back(q);
        }
        for (const CubeId& q : satisfying) {
            bool dominated = false;
            for (const CubeId& other : satisfying)
                if (!(other == q) && cube_contains(other, q, grid.dimension)) dominated = true;
            if (!dominated) queue.push_back(q);
        }
    }
    std::sort(family.begin(), family.end());
    return family;
}

// Hall/Gale feasibility for the sparsity transportation problem: every
// subfamily's total demand must fit inside the mass of its union.
inline bool hall_feasible(const std::vector<CubeId>& cubes, const DyadicMeasure& mu,
                          double density = 0.5) {
    const GridSpec& grid = mu.grid();
    const std::size_t k = cubes.size();
    std::vector<double> demand(k);
    for (std::size_t i = 0; i < k; ++i) demand[i] = density * mu.mass(cubes[i]);
    for (std::uint64_t subset = 1; subset < (std::uint64_t(1) << k); ++subset) {
        double total_demand = 0.0;
        std::vector<std::uint8_t> in_union(grid.cell_count(), 0);
        for (std::size_t i = 0; i < k; ++i) {
            if (!(subset >> i & 1)) continue;
            total_demand += demand[i];
            for_each_cell(grid, cubes[i], [&](std::uint64_t c) { in_union[c] = 1; });
        }
        double union_mass = 0.0;
        for (std::uint64_t c = 0; c < grid.cell_count(); ++c)
            if (in_union[c]) union_mass += mu.cell_mass(c);
        if (total_demand > union_mass) return false;
    }
    return true;
}

} // namespace oracles
