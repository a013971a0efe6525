#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sparsedom/generate.hpp"
#include "sparsedom/sparse.hpp"

using namespace sparsedom;

namespace {

CubeId interval(int level, std::uint32_t index) {
    CubeId q;
    q.level = level;
    q.index[0] = index;
    return q;
}

std::vector<CubeId> sorted_cubes(const SparseCollection& family) {
    std::vector<CubeId> out = family.cubes;
    std::sort(out.begin(), out.end());
    return out;
}

double witness_mass(const SparseCollection& family, std::size_t i, const DyadicMeasure& mu) {
    double m = 0.0;
    for (std::uint64_t c : family.witness_cells[i]) m += mu.cell_mass(c);
    return m;
}

} // namespace

TEST_CASE("huge thresholds stop nothing") {
    const GridSpec grid(1, 3);
    const DyadicMeasure mu = random_measure(grid, 301, 0.2);
    const SimpleFunction f = random_function(grid, 2, 302);
    const auto family =
        build_stopping_family(f, all_cubes(grid), mu, LatticeNormSpec::lp(2.0), 1e9);
    const CubeCollection dplus = positive_mass_cubes(all_cubes(grid), mu);
    CHECK(sorted_cubes(family) == maximal_cubes(dplus).cubes());
    // the built-in witness is the full cube
    for (std::size_t i = 0; i < family.size(); ++i)
        CHECK(witness_mass(family, i, mu) == mu.mass(family.cubes[i]));
}

TEST_CASE("constant functions stop nothing at any threshold") {
    const GridSpec grid(1, 4);
    const DyadicMeasure mu = DyadicMeasure::uniform(grid, 1.0);
    const SimpleFunction f = SimpleFunction::constant(grid, {0.3, 1.7, 0.4});
    for (double tau : {1.0, 1.5, 4.0}) {
        const auto family =
            build_stopping_family(f, all_cubes(grid), mu, LatticeNormSpec::lp(2.0), tau);
        REQUIRE(family.size() == 1);
        CHECK(family.cubes[0] == root_cube());
    }
}

TEST_CASE("stopping children of a hand-sized spike instance") {
    // f = 8 on the first cell of a depth-3 grid, 1 elsewhere, tau = 2. The
    // chain-sup scan oracle works from the definition over all subcubes.
    const GridSpec grid(1, 3);
    const DyadicMeasure mu = DyadicMeasure::uniform(grid, 1.0);
    SimpleFunction f(grid, 1);
    for (std::uint64_t c = 0; c < 8; ++c) f.value(c)[0] = c == 0 ? 8.0 : 1.0;
    const LatticeNormSpec norm = LatticeNormSpec::lp(1.0);

    const auto family = build_stopping_family(f, all_cubes(grid), mu, norm, 2.0);
    const auto reference = oracles::chain_sup_stopping_cubes(f, all_cubes(grid), mu, norm, 2.0);
    CHECK(sorted_cubes(family) == reference);

    // root average 15/8, threshold 15/4; only [0,1/4) exceeds it
    REQUIRE(family.size() == 2);
    CHECK(sorted_cubes(family) == std::vector<CubeId>{root_cube(), interval(2, 0)});
}

TEST_CASE("generalized stopping cubes match the scan oracle") {
    for (int trial = 0; trial < 25; ++trial) {
        const GridSpec grid(1, 4);
        const DyadicMeasure mu = random_measure(grid, 310 + trial, 0.25);
        const SimpleFunction f = random_function(grid, 2, 340 + trial);
        const LatticeNormSpec norm = LatticeNormSpec::lp(2.0);
        for (double tau : {1.0, 2.0, 4.0}) {
            const auto family = build_stopping_family(f, all_cubes(grid), mu, norm, tau);
            CHECK(sorted_cubes(family) ==
                  oracles::chain_sup_stopping_cubes(f, all_cubes(grid), mu, norm, tau));
        }
    }
}

TEST_CASE("scalar stopping cubes are the principal cubes") {
    for (int trial = 0; trial < 25; ++trial) {
        const GridSpec grid(1, 4);
        const DyadicMeasure mu = random_measure(grid, 350 + trial, 0.25);
        const SimpleFunction f = random_function(grid, 1, 380 + trial);
        const auto family =
            build_stopping_family(f, all_cubes(grid), mu, LatticeNormSpec::lp(1.0), 2.0);
        CHECK(sorted_cubes(family) ==
              oracles::principal_cubes(f, all_cubes(grid), mu, 2.0));
    }
}

TEST_CASE("every positive-mass cube has a stopping parent") {
    const GridSpec grid(2, 3);
    const DyadicMeasure mu = random_measure(grid, 401, 0.3);
    const SimpleFunction f = random_function(grid, 2, 402);
    const auto family =
        build_stopping_family(f, all_cubes(grid), mu, LatticeNormSpec::lp(2.0), 2.0);
    const CubeCollection dplus = positive_mass_cubes(all_cubes(grid), mu);
    const std::vector<int> pi = stopping_parents(family, dplus);
    std::size_t qi = 0;
    for (const CubeId& q : dplus) {
        const int claimed = pi[qi++];
        REQUIRE(claimed >= 0);
        // oracle: the member containing q with the deepest level
        int best = -1;
        for (std::size_t i = 0; i < family.size(); ++i) {
            if (!cube_contains(family.cubes[i], q, grid.dimension)) continue;
            if (best < 0 || family.cubes[i].level > family.cubes[best].level) best = int(i);
        }
        CHECK(claimed == best);
    }
}

TEST_CASE("pointwise estimate and supremum decomposition hold on a corpus") {
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec grid(1, 5);
        const DyadicMeasure mu = random_measure(grid, 500 + trial, 0.2);
        const SimpleFunction f = random_function(grid, 4, 550 + trial);
        const LatticeNormSpec norm = LatticeNormSpec::lp(2.0);
        const auto [family, tau] = adaptive_threshold(f, all_cubes(grid), mu, norm, 1.0);
        const auto report = verify_stopping_family(family, f, all_cubes(grid), mu, norm);
        CHECK(report.pointwise_ok);
        CHECK(report.decomposition_ok);
    }
}

TEST_CASE("sparsity verifier on the classic examples") {
    const GridSpec grid(1, 2);
    const DyadicMeasure mu = DyadicMeasure::uniform(grid, 1.0);
    const CubeId left = interval(1, 0), right = interval(1, 1);

    SECTION("root plus both halves is exactly feasible") {
        const CubeCollection family({root_cube(), left, right});
        const auto cert = verify_sparsity(family, mu);
        REQUIRE(cert.feasible);
        // demands 1/2 + 1/4 + 1/4 exhaust the unit mass
        double assigned = 0.0;
        std::vector<double> per_cell(4, 0.0);
        for (std::size_t i = 0; i < cert.assignment.size(); ++i) {
            double got = 0.0;
            for (const auto& [cell, amount] : cert.assignment[i]) {
                got += amount;
                per_cell[cell] += amount;
                CHECK(cell_in_cube(grid, cell, family.cubes()[i]));
            }
            CHECK(got >= 0.5 * mu.mass(family.cubes()[i]));
            assigned += got;
        }
        CHECK(assigned == 1.0);
        for (std::uint64_t c = 0; c < 4; ++c) CHECK(per_cell[c] <= mu.cell_mass(c));
    }

    SECTION("adding all four quarters is infeasible") {
        std::vector<CubeId> cubes = {root_cube(), left, right};
        for (std::uint32_t j = 0; j < 4; ++j) cubes.push_back(interval(2, j));
        const auto cert = verify_sparsity(CubeCollection(cubes), mu);
        REQUIRE_FALSE(cert.feasible);
        // demand 3/2 over total mass 1; the cut is the whole family
        REQUIRE_FALSE(cert.violated_cut.empty());
        double cut_demand = 0.0;
        for (const CubeId& q : cert.violated_cut) cut_demand += 0.5 * mu.mass(q);
        double cut_mass = 0.0;
        {
            std::vector<std::uint8_t> mask(grid.cell_count(), 0);
            for (const CubeId& q : cert.violated_cut)
                for_each_cell(grid, q, [&](std::uint64_t c) { mask[c] = 1; });
            for (std::uint64_t c = 0; c < grid.cell_count(); ++c)
                if (mask[c]) cut_mass += mu.cell_mass(c);
        }
        CHECK(cut_demand > cut_mass);
    }
}

TEST_CASE("nested doubling chains are feasible") {
    const GridSpec grid(1, 4);
    std::vector<double> mass(16, 0.0);
    // mass(Q_k) = 2^(k-4) on the chain of left-anchored intervals
    mass[0] = std::ldexp(1.0, -4);
    for (int k = 1; k <= 4; ++k)
        for (std::uint64_t c = (std::uint64_t(1) << (k - 1)); c < (std::uint64_t(1) << k); ++c)
            mass[c] = std::ldexp(1.0, k - 5) / double(std::uint64_t(1) << (k - 1));
    const DyadicMeasure mu(grid, mass);
    std::vector<CubeId> chain;
    for (int k = 0; k <= 4; ++k) chain.push_back(interval(4 - k, 0));
    const auto cert = verify_sparsity(CubeCollection(chain), mu);
    CHECK(cert.feasible);
}

TEST_CASE("sparsity verifier agrees with the Hall oracle") {
    // Exhaustive small sweep with dyadic masses, so both decisions are
    // exact; the acceptance suite runs the larger corpus.
    const GridSpec grid(1, 2);
    const std::vector<std::vector<double>> measures = {
        {0.25, 0.25, 0.25, 0.25},
        {0.5, 0.25, 0.125, 0.125},
        {0.0, 0.5, 0.5, 0.0},
        {1.0, 0.0, 0.0, 0.25},
    };
    const std::vector<CubeId> pool = all_cubes(grid).cubes(); // 7 cubes
    for (const auto& mass : measures) {
        const DyadicMeasure mu(grid, mass);
        for (std::uint32_t bits = 1; bits < (1u << pool.size()); ++bits) {
            if (std::popcount(bits) > 3) continue;
            std::vector<CubeId> cubes;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if (bits >> i & 1) cubes.push_back(pool[i]);
            const bool expected = oracles::hall_feasible(cubes, mu);
            const auto cert = verify_sparsity(CubeCollection(cubes), mu);
            CHECK(cert.feasible == expected);
        }
    }
}

TEST_CASE("subset witnesses on uniform measures") {
    const GridSpec grid(1, 2);
    const DyadicMeasure mu = DyadicMeasure::uniform(grid, 1.0);
    const CubeId left = interval(1, 0), right = interval(1, 1);

    const auto ok = verify_sparsity(CubeCollection({root_cube(), left, right}), mu, 0.5,
                                    WitnessMode::Subset);
    REQUIRE(ok.feasible);
    // whole cells only: each assignment entry consumes its full cell
    for (const auto& cube_cells : ok.assignment)
        for (const auto& [cell, amount] : cube_cells) CHECK(amount == mu.cell_mass(cell));

    std::vector<CubeId> over = {root_cube(), left, right, interval(2, 0), interval(2, 1),
                                interval(2, 2), interval(2, 3)};
    CHECK_FALSE(verify_sparsity(CubeCollection(over), mu, 0.5, WitnessMode::Subset).feasible);
}

TEST_CASE("domination constants of the spike instance") {
    const GridSpec grid(1, 2);
    const DyadicMeasure mu = DyadicMeasure::uniform(grid, 1.0);
    SimpleFunction f(grid, 1);
    f.value(0)[0] = 1.0;
    const LatticeNormSpec norm = LatticeNormSpec::lp(1.0);
    const CubeCollection cubes = all_cubes(grid);

    SECTION("sparse family = root alone gives C = 4") {
        const auto report = domination_constant(f, cubes, 1.0, CubeCollection({root_cube()}), mu, norm);
        CHECK_FALSE(report.infinite);
        CHECK(report.constant == 4.0);
        CHECK(report.argmax_cell == 0);
    }

    SECTION("sparse family = all cubes gives C = 1 at cell 2") {
        const auto report = domination_constant(f, cubes, 1.0, cubes, mu, norm);
        CHECK_FALSE(report.infinite);
        CHECK(report.constant == 1.0);
        CHECK(report.argmax_cell == 2);
    }

    SECTION("zero functions have zero constant") {
        const SimpleFunction zero(grid, 1);
        const auto report = domination_constant(zero, cubes, 1.0, cubes, mu, norm);
        CHECK(report.constant == 0.0);
        CHECK(report.rows.empty());
    }

    SECTION("empty sparse family flags infinity") {
        const auto report = domination_constant(f, cubes, 1.0, CubeCollection{}, mu, norm);
        CHECK(report.infinite);
        CHECK(std::isinf(report.constant));
    }
}

TEST_CASE("adaptive threshold terminates immediately when tau is huge") {
    const GridSpec grid(1, 3);
    const DyadicMeasure mu = random_measure(grid, 601, 0.2);
    const SimpleFunction f = random_function(grid, 2, 602);
    const auto [family, tau] = adaptive_threshold(f, all_cubes(grid), mu,
                                                  LatticeNormSpec::lp(2.0), 1e12);
    CHECK(tau == 1e12);
    const CubeCollection dplus = positive_mass_cubes(all_cubes(grid), mu);
    CHECK(sorted_cubes(family) == maximal_cubes(dplus).cubes());
}

TEST_CASE("scalar threshold two is already sparse") {
    // Classical principal cubes: a child average above twice the parent
    // average forces the children to carry less than half the mass, so the
    // first iteration succeeds and tau stays 2.
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec grid(1, 5);
        const DyadicMeasure mu = random_measure(grid, 700 + trial, 0.2);
        const SimpleFunction f = random_function(grid, 1, 750 + trial);
        const auto [family, tau] =
            adaptive_threshold(f, all_cubes(grid), mu, LatticeNormSpec::lp(1.0), 2.0);
        CHECK(tau == 2.0);
        for (std::size_t i = 0; i < family.size(); ++i)
            CHECK(witness_mass(family, i, mu) >= 0.5 * mu.mass(family.cubes[i]));
    }
}

TEST_CASE("adaptive threshold terminates on a seeded corpus") {
    for (int trial = 0; trial < 100; ++trial) {
        const GridSpec grid(1, 4);
        const DyadicMeasure mu = random_measure(grid, 800 + trial, 0.25);
        const SimpleFunction f = random_function(grid, 3, 900 + trial);
        const auto [family, tau] =
            adaptive_threshold(f, all_cubes(grid), mu, LatticeNormSpec::lp(2.0), 1.0);
        CHECK(tau >= 1.0);
        const auto cert = verify_sparsity(family.cube_collection(), mu);
        CHECK(cert.feasible);
    }
}

TEST_CASE("constructed families dominate at their threshold") {
    // The full chain: pointwise estimate, q-convexity with constant one for
    // E = l^q, and the l^inf <= l^q embedding give C <= tau exactly.
    for (int trial = 0; trial < 20; ++trial) {
        const GridSpec grid(1, 5);
        const DyadicMeasure mu = random_measure(grid, 1000 + trial, 0.2);
        const SimpleFunction f = random_function(grid, 4, 1100 + trial);
        const LatticeNormSpec norm = LatticeNormSpec::lp(2.0);
        const auto [family, tau] = adaptive_threshold(f, all_cubes(grid), mu, norm, 1.0);
        const auto report =
            domination_constant(f, all_cubes(grid), 2.0, family.cube_collection(), mu, norm);
        CHECK_FALSE(report.infinite);
        CHECK(report.constant <= tau);
    }
}
