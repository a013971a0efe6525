#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sparsedom/fitting.hpp"
#include "sparsedom/grid.hpp"
#include "sparsedom/lattice.hpp"
#include "sparsedom/measure.hpp"
#include "sparsedom/sparse.hpp"

namespace sparsedom {

// Nested doubling chain on [0,1): cubes Q_k = [0, 2^{k-n}) at level n-k,
// masses mass(Q_k) = ratio^{n-k} (doubling holds with equality at the
// default ratio 1/2), and f = sum_k 1_{Q_k \ Q_{k-1}} e_k with pairwise
// disjoint basis vectors of nondecreasing norm. The chain length n is the
// experiment parameter standing in for the infinite-measure hypothesis: the
// verified content is the growth rate in n.
struct ChainInstance {
    int length = 0;
    double mass_ratio = 0.5;
    GridSpec grid;
    DyadicMeasure mu;
    SimpleFunction f;
    CubeCollection cubes;
    LatticeNormSpec norm;
    std::vector<double> vector_norms; // ||e_k||_E for k = 1..n, nondecreasing

    CubeId chain_cube(int k) const {
        CubeId q;
        q.level = length - k;
        return q;
    }
};

// Basis norms under the given norm in the given dimension, with the
// permutation that sorts them ascending (so the chain's norms are
// nondecreasing even for weighted norms).
inline std::vector<int> basis_order_by_norm(const LatticeNormSpec& norm, int dim) {
    std::vector<double> norms(dim);
    for (int i = 0; i < dim; ++i) {
        LatticeVector e(dim, 0.0);
        e[i] = 1.0;
        norms[i] = norm(e);
    }
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&norms](int a, int b) { return norms[a] < norms[b]; });
    return order;
}

inline ChainInstance build_counterexample(int n, const LatticeNormSpec& norm, int lattice_dim,
                                          double mass_ratio = 0.5, int depth = -1) {
    if (n < 1) throw std::invalid_argument("build_counterexample: n must be >= 1");
    if (depth < 0) depth = n;
    if (n > depth) throw std::invalid_argument("build_counterexample: n exceeds grid depth");
    if (n > lattice_dim)
        throw std::invalid_argument("build_counterexample: n exceeds lattice dimension");
    if (!(mass_ratio > 0.0) || mass_ratio > 0.5)
        throw std::invalid_argument("build_counterexample: mass ratio must be in (0, 1/2]");

    const GridSpec grid(1, depth);
    const std::uint64_t cells = grid.cell_count();
    std::vector<double> mass(cells, 0.0);
    SimpleFunction f(grid, lattice_dim);
    const std::vector<int> order = basis_order_by_norm(norm, lattice_dim);

    // Q_k covers cells [0, 2^{depth-n+k}); region k is Q_k minus Q_{k-1}.
    auto cells_of = [&](int k) { return std::uint64_t(1) << (depth - n + k); };
    {
        const double q0_mass = std::pow(mass_ratio, n);
        const std::uint64_t m = cells_of(0);
        for (std::uint64_t c = 0; c < m; ++c) mass[c] = q0_mass / double(m);
    }
    for (int k = 1; k <= n; ++k) {
        const double region_mass =
            std::pow(mass_ratio, n - k) - std::pow(mass_ratio, n - k + 1);
        const std::uint64_t lo = cells_of(k - 1), hi = cells_of(k);
        for (std::uint64_t c = lo; c < hi; ++c) {
            mass[c] = region_mass / double(hi - lo);
            f.value(c)[order[k - 1]] = 1.0;
        }
    }

    std::vector<CubeId> chain;
    std::vector<double> norms;
    for (int k = 0; k <= n; ++k) {
        CubeId q;
        q.level = n - k;
        chain.push_back(q);
    }
    for (int k = 1; k <= n; ++k) {
        LatticeVector e(lattice_dim, 0.0);
        e[order[k - 1]] = 1.0;
        norms.push_back(norm(e));
    }

    return ChainInstance{n,
                         mass_ratio,
                         grid,
                         DyadicMeasure(grid, std::move(mass)),
                         std::move(f),
                         CubeCollection(std::move(chain)),
                         norm,
                         std::move(norms)};
}

// Measured best constant: min over sparse subcollections S of D of the
// domination constant. Every subcollection of a chain is sparse and the
// sparse operator is pointwise largest at S = D, so the minimum is attained
// there; the enumeration cross-check lives in the tests.
inline double best_domination_constant(const ChainInstance& instance, double q) {
    return domination_constant(instance.f, instance.cubes, q, instance.cubes, instance.mu,
                               instance.norm)
        .constant;
}

// Closed-form evaluation of the same constant for the disjoint-basis chain,
// exact for any chain length: all quantities depend only on the n+1 regions.
// Coefficient of e_i in <|f|>_{Q_k} is (1-rho) rho^{k-i}; on region j the
// maximal function has coordinate (1-rho) rho^{max(i,j)-i}, and the sparse
// operator at exponent q aggregates the scalar averages over Q_k for k >= j.
inline double chain_domination_constant(int n, const LatticeNormSpec& norm, double q,
                                        double mass_ratio = 0.5) {
    if (n < 1) throw std::invalid_argument("chain_domination_constant: n must be >= 1");
    const double rho = mass_ratio;
    const std::vector<int> order = basis_order_by_norm(norm, n);
    std::vector<double> basis_norm(n);
    for (int i = 1; i <= n; ++i) {
        LatticeVector e(n, 0.0);
        e[order[i - 1]] = 1.0;
        basis_norm[i - 1] = norm(e);
    }
    // Scalar averages s_k = <||f||>_{Q_k}, k = 1..n.
    std::vector<double> s(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= k; ++i)
            acc += (1.0 - rho) * std::pow(rho, k - i) * basis_norm[i - 1];
        s[k] = acc;
    }
    double best = 0.0;
    for (int j = 0; j <= n; ++j) {
        LatticeVector v(n, 0.0);
        for (int i = 1; i <= n; ++i)
            v[order[i - 1]] = (1.0 - rho) * std::pow(rho, std::max(i, j) - i);
        const double numerator = norm(v);
        double denominator;
        if (std::isinf(q)) {
            denominator = 0.0;
            for (int k = std::max(j, 1); k <= n; ++k) denominator = std::max(denominator, s[k]);
        } else {
            double acc = 0.0;
            for (int k = std::max(j, 1); k <= n; ++k) acc += std::pow(s[k], q);
            denominator = std::pow(acc, 1.0 / q);
        }
        if (denominator > 0.0) best = std::max(best, numerator / denominator);
    }
    return best;
}

struct BlowupCurve {
    struct Row {
        int n;
        double c_star;
    };
    std::vector<Row> rows;
    double slope = 0.0; // least-squares slope of log C* against log n
};

inline BlowupCurve blowup_curve(const LatticeNormSpec& norm, double q,
                                const std::vector<int>& lengths, double mass_ratio = 0.5) {
    if (lengths.size() < 2) throw std::invalid_argument("blowup_curve: need at least two lengths");
    BlowupCurve curve;
    std::vector<double> xs, ys;
    for (int n : lengths) {
        const double c = chain_domination_constant(n, norm, q, mass_ratio);
        curve.rows.push_back({n, c});
        xs.push_back(double(n));
        ys.push_back(c);
    }
    curve.slope = loglog_fit(xs, ys).slope;
    return curve;
}

} // namespace sparsedom
