#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/lattice.hpp"

namespace sparsedom {

// Purely atomic measures on the finest cells. Every locally finite measure
// restricted to the finite grid is representable this way, and all integrals
// are finite sums.
//
// mu-a.e. convention: almost-everywhere statements are checked exactly on
// the finest cells with positive mass; zero-mass cells are excluded from
// suprema and verifications throughout the library.
//
// Cube sums accumulate serially in ascending cell order (see for_each_cell).
class DyadicMeasure {
  public:
    DyadicMeasure(GridSpec grid, std::vector<double> cell_mass)
        : grid_(grid), cell_mass_(std::move(cell_mass)) {
        if (cell_mass_.size() != grid_.cell_count())
            throw std::invalid_argument("DyadicMeasure: cell count mismatch");
        for (double m : cell_mass_)
            if (!(m >= 0.0) || !std::isfinite(m))
                throw std::invalid_argument("DyadicMeasure: masses must be finite and >= 0");
    }

    static DyadicMeasure uniform(const GridSpec& grid, double total = 1.0) {
        const double per_cell = total / double(grid.cell_count());
        return DyadicMeasure(grid, std::vector<double>(grid.cell_count(), per_cell));
    }

    // Lebesgue cell measure: each cell carries its volume 2^{-dL}.
    static DyadicMeasure lebesgue(const GridSpec& grid) {
        return DyadicMeasure(grid, std::vector<double>(grid.cell_count(),
                                                       std::ldexp(1.0, -grid.dimension * grid.depth)));
    }

    const GridSpec& grid() const { return grid_; }
    double cell_mass(std::uint64_t cell) const { return cell_mass_[cell]; }
    const std::vector<double>& cell_masses() const { return cell_mass_; }

    double mass(const CubeId& q) const {
        double s = 0.0;
        for_each_cell(grid_, q, [&](std::uint64_t c) { s += cell_mass_[c]; });
        return s;
    }

    double total_mass() const {
        double s = 0.0;
        for (double m : cell_mass_) s += m;
        return s;
    }

  private:
    GridSpec grid_;
    std::vector<double> cell_mass_;
};

// Piecewise-constant lattice-valued function: one vector of fixed dimension
// per finest cell, stored cell-major.
class SimpleFunction {
  public:
    SimpleFunction() : SimpleFunction(GridSpec{}, 1) {}

    SimpleFunction(GridSpec grid, int dim)
        : grid_(grid), dim_(dim), values_(grid.cell_count() * std::size_t(dim), 0.0) {
        if (dim < 1) throw std::invalid_argument("SimpleFunction: dimension must be positive");
    }

    SimpleFunction(GridSpec grid, int dim, std::vector<double> values)
        : grid_(grid), dim_(dim), values_(std::move(values)) {
        if (dim < 1) throw std::invalid_argument("SimpleFunction: dimension must be positive");
        if (values_.size() != grid_.cell_count() * std::size_t(dim))
            throw std::invalid_argument("SimpleFunction: value count mismatch");
    }

    static SimpleFunction constant(const GridSpec& grid, const LatticeVector& value) {
        SimpleFunction f(grid, int(value.size()));
        for (std::uint64_t c = 0; c < grid.cell_count(); ++c) f.set_value(c, value);
        return f;
    }

    const GridSpec& grid() const { return grid_; }
    int dim() const { return dim_; }

    std::span<const double> value(std::uint64_t cell) const {
        return {values_.data() + cell * dim_, std::size_t(dim_)};
    }
    std::span<double> value(std::uint64_t cell) {
        return {values_.data() + cell * dim_, std::size_t(dim_)};
    }

    void set_value(std::uint64_t cell, std::span<const double> v) {
        if (v.size() != std::size_t(dim_))
            throw std::invalid_argument("SimpleFunction: value dimension mismatch");
        std::copy(v.begin(), v.end(), values_.data() + cell * dim_);
    }

    const std::vector<double>& raw() const { return values_; }
    std::vector<double>& raw() { return values_; }

  private:
    GridSpec grid_;
    int dim_;
    std::vector<double> values_;
};

inline SimpleFunction add(const SimpleFunction& f, const SimpleFunction& g) {
    if (f.grid() != g.grid() || f.dim() != g.dim())
        throw std::invalid_argument("add: function mismatch");
    SimpleFunction out = f;
    for (std::size_t i = 0; i < out.raw().size(); ++i) out.raw()[i] += g.raw()[i];
    return out;
}

inline SimpleFunction abs(const SimpleFunction& f) {
    SimpleFunction out = f;
    for (double& x : out.raw()) x = std::fabs(x);
    return out;
}

// The scalar field x -> ||f(x)||_E.
inline SimpleFunction norm_field(const SimpleFunction& f, const LatticeNormSpec& norm) {
    SimpleFunction out(f.grid(), 1);
    for (std::uint64_t c = 0; c < f.grid().cell_count(); ++c)
        out.value(c)[0] = norm(f.value(c));
    return out;
}

// Mass-weighted mean of f over Q. When the positive-mass support of Q is a
// single cell the atom's value is returned exactly; this keeps averages over
// atoms free of rounding, which the stopping-time verifications rely on.
inline LatticeVector average(const SimpleFunction& f, const CubeId& q,
                             const DyadicMeasure& mu) {
    if (f.grid() != mu.grid()) throw std::invalid_argument("average: grid mismatch");
    const int n = f.dim();
    LatticeVector sum(n, 0.0);
    double total = 0.0;
    std::uint64_t support_cell = 0;
    std::size_t support_count = 0;
    for_each_cell(f.grid(), q, [&](std::uint64_t c) {
        const double m = mu.cell_mass(c);
        if (m == 0.0) return;
        ++support_count;
        support_cell = c;
        total += m;
        auto v = f.value(c);
        for (int i = 0; i < n; ++i) sum[i] += v[i] * m;
    });
    if (total == 0.0) throw std::domain_error("average: zero-mass cube");
    if (support_count == 1) {
        auto v = f.value(support_cell);
        return LatticeVector(v.begin(), v.end());
    }
    for (int i = 0; i < n; ++i) sum[i] /= total;
    return sum;
}

// <||f||_E>_Q, with the same single-atom convention as average().
inline double average_norm(const SimpleFunction& f, const CubeId& q,
                           const DyadicMeasure& mu, const LatticeNormSpec& norm) {
    if (f.grid() != mu.grid()) throw std::invalid_argument("average_norm: grid mismatch");
    double sum = 0.0;
    double total = 0.0;
    std::uint64_t support_cell = 0;
    std::size_t support_count = 0;
    for_each_cell(f.grid(), q, [&](std::uint64_t c) {
        const double m = mu.cell_mass(c);
        if (m == 0.0) return;
        ++support_count;
        support_cell = c;
        total += m;
        sum += norm(f.value(c)) * m;
    });
    if (total == 0.0) throw std::domain_error("average_norm: zero-mass cube");
    if (support_count == 1) return norm(f.value(support_cell));
    return sum / total;
}

enum class NormMode { Strong, Weak };

// Strong mode: (sum_cells ||f||_E^p mass)^{1/p}; p = inf gives the essential
// supremum over positive-mass cells.
// Weak mode: sup_lambda lambda * mu(||f|| > lambda)^{1/p}, computed exactly
// by maximizing over thresholds just below each attained value.
inline double bochner_norm(const SimpleFunction& f, const DyadicMeasure& mu,
                           const LatticeNormSpec& norm, double p,
                           NormMode mode = NormMode::Strong) {
    if (f.grid() != mu.grid()) throw std::invalid_argument("bochner_norm: grid mismatch");
    if (p < 1.0) throw std::invalid_argument("bochner_norm: p must be >= 1");
    const std::uint64_t cells = f.grid().cell_count();
    if (mode == NormMode::Strong) {
        if (std::isinf(p)) {
            double m = 0.0;
            for (std::uint64_t c = 0; c < cells; ++c)
                if (mu.cell_mass(c) > 0.0) m = std::max(m, norm(f.value(c)));
            return m;
        }
        double s = 0.0;
        for (std::uint64_t c = 0; c < cells; ++c) {
            const double m = mu.cell_mass(c);
            if (m == 0.0) continue;
            s += std::pow(norm(f.value(c)), p) * m;
        }
        return std::pow(s, 1.0 / p);
    }
    if (std::isinf(p)) throw std::invalid_argument("bochner_norm: weak mode needs finite p");
    std::vector<std::pair<double, double>> levels; // (||f(c)||, mass)
    for (std::uint64_t c = 0; c < cells; ++c) {
        const double m = mu.cell_mass(c);
        if (m == 0.0) continue;
        levels.emplace_back(norm(f.value(c)), m);
    }
    std::sort(levels.begin(), levels.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = 0.0;
    double cumulative = 0.0;
    std::size_t i = 0;
    while (i < levels.size()) {
        const double lambda = levels[i].first;
        while (i < levels.size() && levels[i].first == lambda) {
            cumulative += levels[i].second;
            ++i;
        }
        if (lambda > 0.0) best = std::max(best, lambda * std::pow(cumulative, 1.0 / p));
    }
    return best;
}

} // namespace sparsedom
