#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/lattice.hpp"
#include "sparsedom/measure.hpp"
#include "sparsedom/operators.hpp"

namespace sparsedom {

// A family of cubes with its stopping-tree structure, the construction
// threshold, and the built-in witness sets E_S = S minus its stopping
// children.
struct SparseCollection {
    GridSpec grid;
    std::vector<CubeId> cubes;          // construction order: parents first
    std::vector<int> family_parent;     // index into cubes, -1 for roots
    double tau = 0.0;
    std::vector<std::vector<std::uint64_t>> witness_cells;

    CubeCollection cube_collection() const { return CubeCollection(cubes); }
    std::size_t size() const { return cubes.size(); }
};

// Filters a collection to its positive-mass members.
inline CubeCollection positive_mass_cubes(const CubeCollection& cubes, const DyadicMeasure& mu) {
    std::vector<CubeId> out;
    for (const CubeId& q : cubes)
        if (mu.mass(q) > 0.0) out.push_back(q);
    return CubeCollection(std::move(out));
}

// Stopping-cubes construction. Roots are the maximal positive-mass cubes of
// D; the stopping children of a member S are the maximal cubes S' in D,
// S' strictly inside S, whose chain supremum violates the threshold:
//   || sup_{Q in D, S' <= Q <= S} <|f|>_Q ||_E > tau * <||f||_E>_S.
// The chain supremum only grows as S' descends, so the satisfying set is
// downward closed along each branch and a depth-first walk that stops at
// the first trigger finds exactly the maximal ones. Zero-mass cubes are
// excluded throughout. Terminates because levels strictly increase.
inline SparseCollection build_stopping_family(const SimpleFunction& f, const CubeCollection& cubes,
                                              const DyadicMeasure& mu, const LatticeNormSpec& norm,
                                              double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("build_stopping_family: tau must be positive");
    if (f.grid() != mu.grid()) throw std::invalid_argument("build_stopping_family: grid mismatch");
    const GridSpec& grid = f.grid();
    const SimpleFunction af = abs(f);
    const CubeCollection dplus = positive_mass_cubes(cubes, mu);

    SparseCollection family;
    family.grid = grid;
    family.tau = tau;
    if (dplus.empty()) return family;

    for (const CubeId& q : maximal_cubes(dplus)) {
        family.cubes.push_back(q);
        family.family_parent.push_back(-1);
    }

    std::vector<std::uint8_t> covered(grid.cell_count(), 0);
    for (std::size_t mi = 0; mi < family.cubes.size(); ++mi) {
        const CubeId member = family.cubes[mi];
        const double threshold = tau * average_norm(f, member, mu, norm);
        std::vector<CubeId> stops;

        // DFS through the grid tree below the member; the running chain
        // supremum accumulates averages of the D-members on the path.
        auto visit = [&](auto&& self, const CubeId& cube, const LatticeVector& sup) -> void {
            if (cube.level >= grid.depth) return;
            for (const CubeId& child : children(cube, grid)) {
                if (!(mu.mass(child) > 0.0)) continue;
                if (dplus.contains_cube(child)) {
                    LatticeVector next = lattice_sup(sup, average(af, child, mu));
                    if (norm(next) > threshold) {
                        stops.push_back(child);
                        continue;
                    }
                    self(self, child, next);
                } else {
                    self(self, child, sup);
                }
            }
        };
        visit(visit, member, average(af, member, mu));

        std::vector<std::uint64_t> touched;
        for (const CubeId& s : stops) {
            family.cubes.push_back(s);
            family.family_parent.push_back(int(mi));
            for_each_cell(grid, s, [&](std::uint64_t c) {
                covered[c] = 1;
                touched.push_back(c);
            });
        }
        std::vector<std::uint64_t> witness;
        for_each_cell(grid, member, [&](std::uint64_t c) {
            if (!covered[c]) witness.push_back(c);
        });
        family.witness_cells.push_back(std::move(witness));
        for (std::uint64_t c : touched) covered[c] = 0;
    }
    return family;
}

// Stopping parent of every positive-mass cube of D: the minimal member
// containing it. Returns indices into family.cubes, aligned with the cubes
// of positive_mass_cubes(D, mu).
inline std::vector<int> stopping_parents(const SparseCollection& family,
                                         const CubeCollection& dplus) {
    std::vector<std::pair<CubeId, int>> members;
    members.reserve(family.cubes.size());
    for (std::size_t i = 0; i < family.cubes.size(); ++i)
        members.emplace_back(family.cubes[i], int(i));
    std::sort(members.begin(), members.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto find_member = [&members](const CubeId& q) -> int {
        auto it = std::lower_bound(members.begin(), members.end(), q,
                                   [](const auto& a, const CubeId& b) { return a.first < b; });
        if (it != members.end() && it->first == q) return it->second;
        return -1;
    };
    std::vector<int> out;
    out.reserve(dplus.size());
    for (const CubeId& q : dplus) {
        int parent_index = -1;
        for (int level = q.level; level >= 0 && parent_index < 0; --level)
            parent_index = find_member(ancestor_at_level(q, level));
        if (parent_index < 0)
            throw std::logic_error("stopping_parents: cube without stopping parent");
        out.push_back(parent_index);
    }
    return out;
}

struct StoppingVerification {
    bool pointwise_ok = true;      // chain-sup bound at every member and cell
    bool decomposition_ok = true;  // maximal function equals the sup over members
    double max_excess = 0.0;       // worst violation of the pointwise estimate
};

// Checks, exactly as stated, that for every member S and positive-mass cell
// x in S:  || sup_{Q: pi(Q) = S} <f>_Q 1_Q(x) ||_E <= tau * <||f||_E>_S,
// and that the member-wise suprema reassemble the maximal function.
inline StoppingVerification verify_stopping_family(const SparseCollection& family,
                                                   const SimpleFunction& f,
                                                   const CubeCollection& cubes,
                                                   const DyadicMeasure& mu,
                                                   const LatticeNormSpec& norm) {
    const GridSpec& grid = f.grid();
    const int n = f.dim();
    const SimpleFunction af = abs(f);
    const CubeCollection dplus = positive_mass_cubes(cubes, mu);
    const std::vector<int> pi = stopping_parents(family, dplus);

    std::vector<std::vector<const CubeId*>> by_member(family.cubes.size());
    {
        std::size_t qi = 0;
        for (const CubeId& q : dplus) by_member[pi[qi++]].push_back(&q);
    }

    StoppingVerification report;
    SimpleFunction reassembled(grid, n);
    SimpleFunction inner(grid, n);
    for (std::size_t mi = 0; mi < family.cubes.size(); ++mi) {
        const CubeId member = family.cubes[mi];
        const double bound = family.tau * average_norm(f, member, mu, norm);
        std::vector<std::uint64_t> touched;
        for (const CubeId* q : by_member[mi]) {
            const LatticeVector avg = average(af, *q, mu);
            for_each_cell(grid, *q, [&](std::uint64_t c) {
                if (mu.cell_mass(c) == 0.0) return;
                auto v = inner.value(c);
                bool was_zero = true;
                for (int i = 0; i < n; ++i) {
                    if (v[i] != 0.0) was_zero = false;
                    v[i] = std::max(v[i], avg[i]);
                }
                if (was_zero) touched.push_back(c);
            });
        }
        for (std::uint64_t c : touched) {
            auto v = inner.value(c);
            const double lhs = norm(v);
            if (lhs > bound) {
                report.pointwise_ok = false;
                report.max_excess = std::max(report.max_excess, lhs - bound);
            }
            auto g = reassembled.value(c);
            for (int i = 0; i < n; ++i) {
                g[i] = std::max(g[i], v[i]);
                v[i] = 0.0;
            }
        }
    }

    const SimpleFunction direct = lattice_maximal(f, cubes, mu);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        if (mu.cell_mass(c) == 0.0) continue;
        auto a = direct.value(c);
        auto b = reassembled.value(c);
        for (int i = 0; i < n; ++i)
            if (a[i] != b[i]) report.decomposition_ok = false;
    }
    return report;
}

enum class WitnessMode { Fractional, Subset };

// Witness for the sparsity verifier: either a fractional cell-mass
// assignment per cube or, in subset mode, whole cells only. On failure the
// violated cut is a subfamily whose total demand exceeds the mass of its
// union.
struct SparsityCertificate {
    bool feasible = false;
    std::vector<std::vector<std::pair<std::uint64_t, double>>> assignment;
    std::vector<CubeId> violated_cut;
};

// Decides feasibility of assigning disjoint cell masses E_S with
// mass(E_S) >= density * mass(S) to every cube. The cubes are dyadic, hence
// laminar, so the bipartite flow problem (cells supply mass, each cube
// demands density*mass(S) from its own cells) reduces to a deepest-first
// greedy: Hall's condition binds only on subtrees. Fractional mode is exact
// for arbitrary measures; subset mode assigns whole cells (exact for
// uniform measures, greedy largest-cell-first otherwise).
inline SparsityCertificate verify_sparsity(const CubeCollection& collection,
                                           const DyadicMeasure& mu, double density = 0.5,
                                           WitnessMode mode = WitnessMode::Fractional) {
    if (!(density > 0.0) || density > 1.0)
        throw std::invalid_argument("verify_sparsity: density must be in (0, 1]");
    const GridSpec& grid = mu.grid();
    const std::size_t count = collection.size();

    SparsityCertificate cert;
    cert.assignment.resize(count);

    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return collection.cubes()[a].level > collection.cubes()[b].level;
    });

    std::vector<double> remaining = mu.cell_masses();
    for (std::size_t oi = 0; oi < count; ++oi) {
        const std::size_t i = order[oi];
        const CubeId& cube = collection.cubes()[i];
        const double demand = density * mu.mass(cube);
        double needed = demand;
        if (mode == WitnessMode::Fractional) {
            for_each_cell(grid, cube, [&](std::uint64_t c) {
                if (needed <= 0.0 || remaining[c] == 0.0) return;
                const double take = std::min(remaining[c], needed);
                cert.assignment[i].emplace_back(c, take);
                remaining[c] -= take;
                needed -= take;
            });
        } else {
            std::vector<std::uint64_t> cells;
            for_each_cell(grid, cube, [&](std::uint64_t c) {
                if (remaining[c] > 0.0) cells.push_back(c);
            });
            std::stable_sort(cells.begin(), cells.end(), [&](std::uint64_t a, std::uint64_t b) {
                return remaining[a] > remaining[b];
            });
            for (std::uint64_t c : cells) {
                if (needed <= 0.0) break;
                cert.assignment[i].emplace_back(c, remaining[c]);
                needed -= remaining[c];
                remaining[c] = 0.0;
            }
        }
        if (needed > 0.0) {
            cert.feasible = false;
            cert.assignment.assign(count, {});
            for (const CubeId& other : collection)
                if (cube_contains(cube, other, grid.dimension)) cert.violated_cut.push_back(other);
            return cert;
        }
    }
    cert.feasible = true;
    return cert;
}

// Per-cell domination table: C = max over positive-mass cells of
// ||M f(x)||_E / A_{q,S}(||f||_E)(x). Cells where both sides vanish are
// skipped; a positive numerator over a zero denominator raises the
// infinite flag.
struct DominationReport {
    struct Row {
        std::uint64_t cell;
        double numerator;
        double denominator;
        double ratio;
    };
    double constant = 0.0;
    bool infinite = false;
    std::uint64_t argmax_cell = 0;
    std::vector<Row> rows;
};

inline DominationReport domination_constant(const SimpleFunction& f, const CubeCollection& cubes,
                                            double q, const CubeCollection& sparse_family,
                                            const DyadicMeasure& mu, const LatticeNormSpec& norm) {
    const GridSpec& grid = f.grid();
    const SimpleFunction maximal = lattice_maximal(f, cubes, mu);
    const SimpleFunction applied = sparse_operator(norm_field(f, norm), q, sparse_family, mu);

    DominationReport report;
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        if (mu.cell_mass(c) == 0.0) continue;
        const double num = norm(maximal.value(c));
        const double den = applied.value(c)[0];
        if (num == 0.0 && den == 0.0) continue;
        if (den == 0.0) {
            report.infinite = true;
            report.argmax_cell = c;
            report.constant = std::numeric_limits<double>::infinity();
            report.rows.push_back({c, num, den, std::numeric_limits<double>::infinity()});
            continue;
        }
        const double ratio = num / den;
        report.rows.push_back({c, num, den, ratio});
        if (!report.infinite && ratio > report.constant) {
            report.constant = ratio;
            report.argmax_cell = c;
        }
    }
    return report;
}

// Doubles tau until the built-in witness of the constructed family reaches
// density 1/2. The classical threshold 2*||M||_{L^1 -> L^{1,inf}} is not
// computable exactly; once tau exceeds the largest chain-sup ratio no cube
// stops and the maximal cubes alone are trivially witnessed, so the loop
// terminates.
inline std::pair<SparseCollection, double> adaptive_threshold(const SimpleFunction& f,
                                                              const CubeCollection& cubes,
                                                              const DyadicMeasure& mu,
                                                              const LatticeNormSpec& norm,
                                                              double tau0) {
    if (!(tau0 > 0.0)) throw std::invalid_argument("adaptive_threshold: tau0 must be positive");
    double tau = tau0;
    // Doubling reaches any finite chain-sup ratio; past overflow the
    // threshold is infinite and nothing stops, so the bound is generous.
    for (int iteration = 0; iteration < 4096; ++iteration, tau *= 2.0) {
        SparseCollection family = build_stopping_family(f, cubes, mu, norm, tau);
        bool ok = true;
        for (std::size_t i = 0; i < family.cubes.size() && ok; ++i) {
            double witness_mass = 0.0;
            for (std::uint64_t c : family.witness_cells[i]) witness_mass += mu.cell_mass(c);
            ok = witness_mass >= 0.5 * mu.mass(family.cubes[i]);
        }
        if (ok) return {std::move(family), tau};
    }
    throw std::logic_error("adaptive_threshold: failed to terminate");
}

} // namespace sparsedom
