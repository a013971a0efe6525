#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedom/rng.hpp"

namespace sparsedom {

// Finite-dimensional Banach lattices with coordinatewise order. Every
// construction used here (disjoint vectors, q-sums, convexity ratios)
// reduces to coordinatewise arithmetic in this class.

using LatticeVector = std::vector<double>;

inline void require_same_dimension(const LatticeVector& u, const LatticeVector& v) {
    if (u.size() != v.size()) throw std::invalid_argument("lattice: dimension mismatch");
}

inline LatticeVector lattice_sup(const LatticeVector& u, const LatticeVector& v) {
    require_same_dimension(u, v);
    LatticeVector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::max(u[i], v[i]);
    return out;
}

inline LatticeVector lattice_inf(const LatticeVector& u, const LatticeVector& v) {
    require_same_dimension(u, v);
    LatticeVector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::min(u[i], v[i]);
    return out;
}

inline LatticeVector lattice_abs(const LatticeVector& v) {
    LatticeVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::fabs(v[i]);
    return out;
}

inline LatticeVector lattice_add(const LatticeVector& u, const LatticeVector& v) {
    require_same_dimension(u, v);
    LatticeVector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + v[i];
    return out;
}

// Coordinatewise (sum_k |e_k|^q)^(1/q). Empty input yields the empty vector.
inline LatticeVector q_sum(std::span<const LatticeVector> vectors, double q) {
    if (q < 1.0) throw std::invalid_argument("q_sum: q must be >= 1");
    if (vectors.empty()) return {};
    const std::size_t n = vectors.front().size();
    LatticeVector out(n, 0.0);
    if (std::isinf(q)) {
        for (const auto& e : vectors) {
            if (e.size() != n) throw std::invalid_argument("q_sum: dimension mismatch");
            for (std::size_t i = 0; i < n; ++i) out[i] = std::max(out[i], std::fabs(e[i]));
        }
        return out;
    }
    for (const auto& e : vectors) {
        if (e.size() != n) throw std::invalid_argument("q_sum: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += std::pow(std::fabs(e[i]), q);
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(out[i], 1.0 / q);
    return out;
}

// Norm descriptor: lp(p), weighted lp(p, omega), or the discrete Lorentz
// norm ||v||_{p,q} = (sum_k (v*_k)^q (k^{q/p} - (k-1)^{q/p}))^{1/q} with v*
// the decreasing rearrangement of |v|; it reduces to lp when q = p.
// Lorentz with p < q is only a quasi-norm; is_quasi_norm() flags it and the
// triangle-inequality property test skips those instances.
struct LatticeNormSpec {
    enum class Kind { Lp, WeightedLp, Lorentz };

    Kind kind = Kind::Lp;
    double p = 2.0;
    double q = 0.0;               // Lorentz second exponent
    std::vector<double> weights;  // WeightedLp only

    static LatticeNormSpec lp(double p) {
        if (!(p >= 1.0)) throw std::invalid_argument("lp norm: p must be >= 1");
        LatticeNormSpec s;
        s.kind = Kind::Lp;
        s.p = p;
        return s;
    }

    static LatticeNormSpec weighted_lp(double p, std::vector<double> weights) {
        if (!(p >= 1.0)) throw std::invalid_argument("weighted lp norm: p must be >= 1");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("weighted lp norm: weights must be positive");
        LatticeNormSpec s;
        s.kind = Kind::WeightedLp;
        s.p = p;
        s.weights = std::move(weights);
        return s;
    }

    static LatticeNormSpec lorentz(double p, double q) {
        if (!(p > 1.0) || std::isinf(p))
            throw std::invalid_argument("lorentz norm: p must be in (1, inf)");
        if (!(q >= 1.0) || std::isinf(q))
            throw std::invalid_argument("lorentz norm: q must be in [1, inf)");
        LatticeNormSpec s;
        s.kind = Kind::Lorentz;
        s.p = p;
        s.q = q;
        return s;
    }

    bool is_quasi_norm() const { return kind == Kind::Lorentz && p < q; }

    double operator()(std::span<const double> v) const {
        switch (kind) {
            case Kind::Lp: {
                if (std::isinf(p)) {
                    double m = 0.0;
                    for (double x : v) m = std::max(m, std::fabs(x));
                    return m;
                }
                if (p == 1.0) {
                    double s = 0.0;
                    for (double x : v) s += std::fabs(x);
                    return s;
                }
                if (p == 2.0) {
                    double s = 0.0;
                    for (double x : v) s += x * x;
                    return std::sqrt(s);
                }
                double s = 0.0;
                for (double x : v) s += std::pow(std::fabs(x), p);
                return std::pow(s, 1.0 / p);
            }
            case Kind::WeightedLp: {
                if (v.size() != weights.size())
                    throw std::invalid_argument("weighted lp norm: dimension mismatch");
                if (std::isinf(p)) {
                    double m = 0.0;
                    for (std::size_t i = 0; i < v.size(); ++i)
                        m = std::max(m, weights[i] * std::fabs(v[i]));
                    return m;
                }
                double s = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    s += weights[i] * std::pow(std::fabs(v[i]), p);
                return std::pow(s, 1.0 / p);
            }
            case Kind::Lorentz: {
                std::vector<double> a(v.begin(), v.end());
                for (double& x : a) x = std::fabs(x);
                std::sort(a.begin(), a.end(), std::greater<double>());
                double s = 0.0;
                for (std::size_t k = 1; k <= a.size(); ++k) {
                    const double coeff =
                        std::pow(double(k), q / p) - std::pow(double(k - 1), q / p);
                    s += std::pow(a[k - 1], q) * coeff;
                }
                return std::pow(s, 1.0 / q);
            }
        }
        return 0.0;
    }

    // Config syntax: "lp:2", "lp:inf", "wlp:2:1.0,0.5", "lorentz:2:1".
    std::string to_string() const {
        std::ostringstream os;
        auto put_p = [&os](double x) {
            if (std::isinf(x)) os << "inf";
            else os << x;
        };
        switch (kind) {
            case Kind::Lp:
                os << "lp:";
                put_p(p);
                break;
            case Kind::WeightedLp:
                os << "wlp:";
                put_p(p);
                os << ':';
                for (std::size_t i = 0; i < weights.size(); ++i) {
                    if (i) os << ',';
                    os << weights[i];
                }
                break;
            case Kind::Lorentz:
                os << "lorentz:" << p << ':' << q;
                break;
        }
        return os.str();
    }

    static LatticeNormSpec parse(const std::string& text) {
        auto fields = [](const std::string& s) {
            std::vector<std::string> out;
            std::string cur;
            for (char c : s) {
                if (c == ':') {
                    out.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            out.push_back(cur);
            return out;
        }(text);
        auto num = [&text](const std::string& s) -> double {
            if (s == "inf") return std::numeric_limits<double>::infinity();
            try {
                std::size_t pos = 0;
                double v = std::stod(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw std::invalid_argument("norm spec: bad number in '" + text + "'");
            }
        };
        if (fields.size() == 2 && fields[0] == "lp") return lp(num(fields[1]));
        if (fields.size() == 3 && fields[0] == "wlp") {
            std::vector<double> w;
            std::string cur;
            std::istringstream is(fields[2]);
            while (std::getline(is, cur, ',')) w.push_back(num(cur));
            return weighted_lp(num(fields[1]), std::move(w));
        }
        if (fields.size() == 3 && fields[0] == "lorentz")
            return lorentz(num(fields[1]), num(fields[2]));
        throw std::invalid_argument("norm spec: cannot parse '" + text + "'");
    }
};

// ||q_sum(e,q)||_E / (sum_k ||e_k||_E^q)^{1/q}.
inline double q_convexity_ratio(std::span<const LatticeVector> vectors, double q,
                                const LatticeNormSpec& norm) {
    if (q < 1.0) throw std::invalid_argument("q_convexity_ratio: q must be >= 1");
    const LatticeVector qs = q_sum(vectors, q);
    double denom = 0.0;
    for (const auto& e : vectors) denom += std::pow(norm(e), q);
    denom = std::pow(denom, 1.0 / q);
    if (denom == 0.0) throw std::domain_error("q_convexity_ratio: all-zero tuple");
    return norm(qs) / denom;
}

// Pairwise disjointness in the lattice sense, tested exactly: no coordinate
// may carry two nonzero entries.
inline bool pairwise_disjoint(std::span<const LatticeVector> vectors) {
    if (vectors.empty()) return true;
    const std::size_t n = vectors.front().size();
    std::vector<bool> occupied(n, false);
    for (const auto& e : vectors) {
        if (e.size() != n) throw std::invalid_argument("lattice: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (e[i] == 0.0) continue;
            if (occupied[i]) return false;
            occupied[i] = true;
        }
    }
    return true;
}

// ||sum_k e_k||_E / (sum_k ||e_k||_E^r)^{1/r} for pairwise disjoint vectors.
// For disjoint nonnegative tuples the sum equals the lattice supremum with
// one nonzero term per coordinate; that identity is asserted bitwise first.
inline double upper_r_ratio(std::span<const LatticeVector> vectors, double r,
                            const LatticeNormSpec& norm) {
    if (r < 1.0) throw std::invalid_argument("upper_r_ratio: r must be >= 1");
    if (vectors.empty()) throw std::domain_error("upper_r_ratio: empty tuple");
    if (!pairwise_disjoint(vectors))
        throw std::invalid_argument("upper_r_ratio: vectors not pairwise disjoint");
    const std::size_t n = vectors.front().size();
    LatticeVector sum(n, 0.0);
    LatticeVector sup = vectors.front();
    for (const auto& e : vectors) {
        for (std::size_t i = 0; i < n; ++i) sum[i] += e[i];
        sup = lattice_sup(sup, e);
    }
    if (vectors.size() > 1 && sum != sup)
        throw std::invalid_argument("upper_r_ratio: disjoint sum differs from lattice sup "
                                    "(vectors must be nonnegative)");
    double denom = 0.0;
    for (const auto& e : vectors) denom += std::pow(norm(e), r);
    denom = std::pow(denom, 1.0 / r);
    if (denom == 0.0) throw std::domain_error("upper_r_ratio: all-zero tuple");
    return norm(sum) / denom;
}

// Max convexity ratio over seeded random tuples plus the structured
// disjoint-basis family: a lower bound on the best constant C_{E,q}.
// The structured candidates are always included, so the estimate is
// monotone nondecreasing in the sample count for a fixed seed.
inline double q_convexity_lower_bound(const LatticeNormSpec& norm, double q, int n,
                                      int samples, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("q_convexity_lower_bound: n must be positive");
    if (q < 1.0) throw std::invalid_argument("q_convexity_lower_bound: q must be >= 1");
    double best = 0.0;

    // Disjoint standard bases of every size up to n.
    for (int m = 1; m <= n; ++m) {
        std::vector<LatticeVector> basis;
        for (int k = 0; k < m; ++k) {
            LatticeVector e(n, 0.0);
            e[k] = 1.0;
            basis.push_back(std::move(e));
        }
        best = std::max(best, q_convexity_ratio(basis, q, norm));
    }

    for (int s = 0; s < samples; ++s) {
        auto rng = make_rng(seed, std::uint64_t(s));
        std::uniform_int_distribution<int> len(1, 2 * n);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::bernoulli_distribution sparse(0.3);
        const int m = len(rng);
        std::vector<LatticeVector> tuple(m, LatticeVector(n, 0.0));
        const bool make_disjoint = sparse(rng);
        if (make_disjoint) {
            std::uniform_int_distribution<int> owner(0, m - 1);
            for (int i = 0; i < n; ++i) tuple[owner(rng)][i] = std::fabs(unif(rng));
        } else {
            for (auto& e : tuple)
                for (int i = 0; i < n; ++i) e[i] = unif(rng);
        }
        bool all_zero = true;
        for (const auto& e : tuple)
            for (double x : e)
                if (x != 0.0) all_zero = false;
        if (all_zero) continue;
        best = std::max(best, q_convexity_ratio(tuple, q, norm));
    }
    return best;
}

} // namespace sparsedom
