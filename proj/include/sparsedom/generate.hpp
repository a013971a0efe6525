#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/measure.hpp"
#include "sparsedom/rng.hpp"

namespace sparsedom {

// Seeded instance generators used by the experiment runner and the test
// corpora. Masses draw away from zero so that feasibility decisions never
// sit on floating-point boundaries.
inline DyadicMeasure random_measure(const GridSpec& grid, std::uint64_t seed,
                                    double zero_fraction = 0.2) {
    auto rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    std::bernoulli_distribution zero(zero_fraction);
    std::vector<double> mass(grid.cell_count());
    bool any = false;
    for (auto& m : mass) {
        m = zero(rng) ? 0.0 : unif(rng);
        any = any || m > 0.0;
    }
    if (!any) mass[0] = 1.0;
    return DyadicMeasure(grid, std::move(mass));
}

// Nonnegative values, a mix of diffuse and spiky cells.
inline SimpleFunction random_function(const GridSpec& grid, int dim, std::uint64_t seed,
                                      double spike_fraction = 0.1, double spike_scale = 16.0) {
    auto rng = make_rng(seed, 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::bernoulli_distribution spike(spike_fraction);
    SimpleFunction f(grid, dim);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        const double scale = spike(rng) ? spike_scale : 1.0;
        auto v = f.value(c);
        for (int i = 0; i < dim; ++i) v[i] = scale * unif(rng);
    }
    return f;
}

// Nonnegative small-integer values. On uniform measures every average the
// library forms from such a function is exact in double precision, so the
// decomposition bounds can be asserted with no tolerance.
inline SimpleFunction random_integer_function(const GridSpec& grid, int dim, std::uint64_t seed,
                                              int max_value = 16, double zero_fraction = 0.3) {
    auto rng = make_rng(seed, 2);
    std::uniform_int_distribution<int> values(1, max_value);
    std::bernoulli_distribution zero(zero_fraction);
    SimpleFunction f(grid, dim);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        auto v = f.value(c);
        for (int i = 0; i < dim; ++i) v[i] = zero(rng) ? 0.0 : double(values(rng));
    }
    return f;
}

} // namespace sparsedom
