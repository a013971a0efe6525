#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsedom {

// Dyadic cube arithmetic on [0,1)^d discretized to depth L.
//
// Cubes are half-open products of dyadic intervals, so the finest cells
// partition the domain exactly and any two cubes are either nested or
// disjoint. Cube identity is (level, index), never geometry, so equality
// and containment are integer-exact.
//
// Cells are linearized in Morton (bit-interleaved) order: the cells of any
// cube form one contiguous block, and the block of a cube at level l is the
// top d*l bits of its cells' indices. File formats use this cell index.

inline constexpr int kMaxDimension = 6;

// Addressing limit: cell indices are linearized into a uint64 and cell
// arrays are held densely in memory, so we require d*L <= 30 (at most
// 2^30 finest cells).
inline constexpr int kMaxLevelBits = 30;

struct GridSpec {
    int dimension = 1;
    int depth = 0;

    GridSpec() = default;
    GridSpec(int d, int L) : dimension(d), depth(L) {
        if (d < 1 || d > kMaxDimension)
            throw std::invalid_argument("GridSpec: dimension must be in [1, " +
                                        std::to_string(kMaxDimension) + "]");
        if (L < 0) throw std::invalid_argument("GridSpec: depth must be nonnegative");
        if (d * L > kMaxLevelBits)
            throw std::invalid_argument("GridSpec: d*L exceeds addressing limit " +
                                        std::to_string(kMaxLevelBits));
    }

    std::uint64_t cell_count() const { return std::uint64_t(1) << (dimension * depth); }
    std::uint64_t cells_per_side() const { return std::uint64_t(1) << depth; }

    bool operator==(const GridSpec&) const = default;
};

struct CubeId {
    int level = 0;
    std::array<std::uint32_t, kMaxDimension> index{}; // index[i] in [0, 2^level)

    bool operator==(const CubeId&) const = default;
};

// Canonical order: by level, then lexicographic index.
inline bool operator<(const CubeId& a, const CubeId& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.index < b.index;
}

inline CubeId root_cube() { return CubeId{}; }

inline double cube_volume(const GridSpec& grid, const CubeId& q) {
    return std::ldexp(1.0, -grid.dimension * q.level);
}

// Dyadic containment: outer contains inner iff truncating the deeper index
// to the shallower level reproduces it.
inline bool cube_contains(const CubeId& outer, const CubeId& inner, int dimension) {
    if (outer.level > inner.level) return false;
    const int shift = inner.level - outer.level;
    for (int i = 0; i < dimension; ++i)
        if ((inner.index[i] >> shift) != outer.index[i]) return false;
    return true;
}

inline bool cubes_disjoint(const CubeId& a, const CubeId& b, int dimension) {
    return !cube_contains(a, b, dimension) && !cube_contains(b, a, dimension);
}

inline std::optional<CubeId> parent(const CubeId& q) {
    if (q.level == 0) return std::nullopt;
    CubeId p;
    p.level = q.level - 1;
    for (int i = 0; i < kMaxDimension; ++i) p.index[i] = q.index[i] >> 1;
    return p;
}

inline CubeId ancestor_at_level(const CubeId& q, int level) {
    if (level > q.level) throw std::invalid_argument("ancestor_at_level: level below cube");
    CubeId a;
    a.level = level;
    const int shift = q.level - level;
    for (int i = 0; i < kMaxDimension; ++i) a.index[i] = q.index[i] >> shift;
    return a;
}

inline std::vector<CubeId> children(const CubeId& q, const GridSpec& grid) {
    if (q.level >= grid.depth) throw std::domain_error("children: no children");
    const int d = grid.dimension;
    std::vector<CubeId> out;
    out.reserve(std::size_t(1) << d);
    for (std::uint32_t bits = 0; bits < (1u << d); ++bits) {
        CubeId c;
        c.level = q.level + 1;
        for (int i = 0; i < d; ++i)
            c.index[i] = (q.index[i] << 1) | ((bits >> i) & 1u);
        out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Morton interleave: bit b of axis i lands at output position b*d + (d-1-i).
inline std::uint64_t cube_linear_index(const GridSpec& grid, const CubeId& q) {
    std::uint64_t out = 0;
    for (int b = q.level - 1; b >= 0; --b)
        for (int i = 0; i < grid.dimension; ++i)
            out = (out << 1) | ((q.index[i] >> b) & 1u);
    return out;
}

inline CubeId cube_from_linear(const GridSpec& grid, int level, std::uint64_t linear) {
    CubeId q;
    q.level = level;
    for (int b = 0; b < level; ++b)
        for (int i = grid.dimension - 1; i >= 0; --i) {
            q.index[i] |= std::uint32_t(linear & 1u) << b;
            linear >>= 1;
        }
    return q;
}

inline std::uint64_t cell_linear_index(const GridSpec& grid, const CubeId& cell) {
    return cube_linear_index(grid, cell);
}

inline CubeId cell_from_linear(const GridSpec& grid, std::uint64_t linear) {
    return cube_from_linear(grid, grid.depth, linear);
}

inline std::uint64_t cell_count_of(const GridSpec& grid, const CubeId& q) {
    return std::uint64_t(1) << (grid.dimension * (grid.depth - q.level));
}

// First cell of the cube's contiguous Morton block.
inline std::uint64_t first_cell_of(const GridSpec& grid, const CubeId& q) {
    return cube_linear_index(grid, q) << (grid.dimension * (grid.depth - q.level));
}

// Visits the finest cells of q in ascending linear order. All cube sums in
// this library accumulate serially in exactly this order; tests rely on it.
template <class F>
inline void for_each_cell(const GridSpec& grid, const CubeId& q, F&& f) {
    const std::uint64_t base = first_cell_of(grid, q);
    const std::uint64_t count = cell_count_of(grid, q);
    for (std::uint64_t k = 0; k < count; ++k) f(base + k);
}

inline bool cell_in_cube(const GridSpec& grid, std::uint64_t cell, const CubeId& q) {
    const std::uint64_t base = first_cell_of(grid, q);
    return cell >= base && cell < base + cell_count_of(grid, q);
}

// Serialization "l:j_1,...,j_d" used in all CSV/config files.
inline std::string format_cube(const CubeId& q, int dimension) {
    std::ostringstream os;
    os << q.level << ':';
    for (int i = 0; i < dimension; ++i) {
        if (i) os << ',';
        os << q.index[i];
    }
    return os.str();
}

inline CubeId parse_cube(const std::string& text, const GridSpec& grid) {
    std::istringstream is(text);
    CubeId q;
    char sep = 0;
    if (!(is >> q.level >> sep) || sep != ':')
        throw std::invalid_argument("parse_cube: expected 'level:indices' in '" + text + "'");
    if (q.level < 0 || q.level > grid.depth)
        throw std::invalid_argument("parse_cube: level out of range in '" + text + "'");
    for (int i = 0; i < grid.dimension; ++i) {
        std::uint64_t j = 0;
        if (i && (!(is >> sep) || sep != ','))
            throw std::invalid_argument("parse_cube: malformed index list in '" + text + "'");
        if (!(is >> j)) throw std::invalid_argument("parse_cube: malformed index list in '" + text + "'");
        if (j >= (std::uint64_t(1) << q.level))
            throw std::invalid_argument("parse_cube: index out of range in '" + text + "'");
        q.index[i] = static_cast<std::uint32_t>(j);
    }
    if (is >> sep) throw std::invalid_argument("parse_cube: trailing characters in '" + text + "'");
    return q;
}

// A finite set of cubes within one grid, kept sorted and duplicate-free.
class CubeCollection {
  public:
    CubeCollection() = default;
    explicit CubeCollection(std::vector<CubeId> cubes) : cubes_(std::move(cubes)) {
        std::sort(cubes_.begin(), cubes_.end());
        cubes_.erase(std::unique(cubes_.begin(), cubes_.end()), cubes_.end());
    }

    const std::vector<CubeId>& cubes() const { return cubes_; }
    std::size_t size() const { return cubes_.size(); }
    bool empty() const { return cubes_.empty(); }
    auto begin() const { return cubes_.begin(); }
    auto end() const { return cubes_.end(); }

    bool contains_cube(const CubeId& q) const {
        return std::binary_search(cubes_.begin(), cubes_.end(), q);
    }

    void insert(const CubeId& q) {
        auto it = std::lower_bound(cubes_.begin(), cubes_.end(), q);
        if (it == cubes_.end() || !(*it == q)) cubes_.insert(it, q);
    }

  private:
    std::vector<CubeId> cubes_;
};

inline CubeCollection all_cubes(const GridSpec& grid) {
    std::vector<CubeId> out;
    for (int level = 0; level <= grid.depth; ++level) {
        const std::uint64_t count = std::uint64_t(1) << (grid.dimension * level);
        for (std::uint64_t k = 0; k < count; ++k) out.push_back(cube_from_linear(grid, level, k));
    }
    return CubeCollection(std::move(out));
}

// The antichain of cubes not strictly contained in any other member.
inline CubeCollection maximal_cubes(const CubeCollection& collection) {
    std::vector<CubeId> out;
    for (const CubeId& q : collection) {
        bool dominated = false;
        for (int level = q.level - 1; level >= 0 && !dominated; --level)
            if (collection.contains_cube(ancestor_at_level(q, level))) dominated = true;
        if (!dominated) out.push_back(q);
    }
    return CubeCollection(std::move(out));
}

} // namespace sparsedom
