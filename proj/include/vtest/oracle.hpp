#pragma once

// Ground truth that does not go through the closed-form null law:
// brute-force enumeration of all label sequences, and Brownian-bridge
// simulation of the limit variables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "vtest/errors.hpp"
#include "vtest/exact_arith.hpp"
#include "vtest/random.hpp"
#include "vtest/statistic.hpp"

namespace vtest {

/// Exact null law of (R, D) obtained by counting label sequences. Keys are
/// (r, c) with D = c / (nm).
struct EnumeratedNull {
    long n = 0;
    long m = 0;
    Sided sided = Sided::one_sided;
    std::uint64_t total_sequences = 0;
    std::map<std::pair<long, long>, std::uint64_t> counts;

    Rational probability(long r, long path_max) const {
        auto it = counts.find({r, path_max});
        if (it == counts.end()) return Rational(0);
        return Rational(BigInt(static_cast<unsigned long>(it->second)),
                        BigInt(static_cast<unsigned long>(total_sequences)));
    }

    /// pmf keyed by (r, D) with D exact.
    std::map<std::pair<long, Rational>, Rational> pmf() const {
        std::map<std::pair<long, Rational>, Rational> out;
        for (const auto& [key, cnt] : counts) {
            out[{key.first, Rational(BigInt(key.second), BigInt(n) * m)}] += probability(key.first, key.second);
        }
        return out;
    }

    /// pmf keyed by (r, k) with D = k/m; requires every path maximum to be a multiple of n.
    std::map<std::pair<long, long>, Rational> pmf_rk() const {
        std::map<std::pair<long, long>, Rational> out;
        for (const auto& [key, cnt] : counts) {
            if (key.second % n != 0) throw DomainError("path maximum is not a multiple of n");
            out[{key.first, key.second / n}] += probability(key.first, key.second);
        }
        return out;
    }

    /// P(R = r) summed over D.
    Rational r_marginal(long r) const {
        Rational s;
        for (const auto& [key, cnt] : counts) {
            if (key.first == r) s += probability(key.first, key.second);
        }
        return s;
    }
};

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

namespace detail {

inline std::uint64_t small_binom(long a, long b) {
    if (b < 0 || a < b) return 0;
    const BigInt v = binom(a, b);
    if (!v.fits_ulong_p()) return UINT64_MAX;
    return v.get_ui();
}

// Subset of {0..total-1} with the given colex rank, as a bitmask.
inline std::uint64_t colex_unrank(std::uint64_t rank, long size, long total) {
    std::uint64_t mask = 0;
    long hi = total - 1;
    for (long i = size; i >= 1; --i) {
        while (small_binom(hi, i) > rank) --hi;
        rank -= small_binom(hi, i);
        mask |= std::uint64_t{1} << hi;
        --hi;
    }
    return mask;
}

// Next bitmask with the same popcount (Gosper).
inline std::uint64_t next_combination(std::uint64_t v) {
    const std::uint64_t t = v | (v - 1);
    return (t + 1) | (((~t & -~t) - 1) >> (__builtin_ctzll(v) + 1));
}

}  // namespace detail

/// Visits every arrangement of n X's among n+m positions (X where the bit is set).
inline EnumeratedNull enumerate_null(long n, long m, Sided sided, unsigned threads = 1) {
    if (n < 1 || m < 1) throw DomainError("enumerate_null requires n, m >= 1");
    const long total = n + m;
    if (total > 62) throw DomainError("enumeration supports at most 62 observations");
    const std::uint64_t count = detail::small_binom(total, n);
    if (count > kEnumerationLimit) {
        throw DomainError("binom(n+m, n) exceeds the enumeration limit of 1e6; use simulation instead");
    }

    using Counts = std::map<std::pair<long, long>, std::uint64_t>;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    auto partials = parallel_map<Counts>(threads, threads, [&](std::size_t part) {
        Counts local;
        const std::uint64_t lo = count * part / threads;
        const std::uint64_t hi = count * (part + 1) / threads;
        if (lo == hi) return local;
        std::uint64_t mask = detail::colex_unrank(lo, n, total);
        std::vector<Label> labels(static_cast<std::size_t>(total));
        for (std::uint64_t rank = lo; rank < hi; ++rank) {
            for (long i = 0; i < total; ++i) {
                labels[static_cast<std::size_t>(i)] = ((mask >> i) & 1U) ? Label::X : Label::Y;
            }
            const auto res = vincze(LabelSequence(labels), sided);
            ++local[{res.r, res.path_max}];
            if (rank + 1 < hi) mask = detail::next_combination(mask);
        }
        return local;
    });

    EnumeratedNull out;
    out.n = n;
    out.m = m;
    out.sided = sided;
    out.total_sequences = count;
    for (const auto& part : partials) {
        for (const auto& [key, c] : part) out.counts[key] += c;
    }
    return out;
}

/// One draw of the limit functional: M = max of B (or |B|), a = first argmax,
/// z = M / sqrt(a (1 - a)) (0 when a is 0 or 1).
struct LimitDraw {
    double max = 0.0;
    double argmax = 0.0;
    double z = 0.0;
};

enum class BridgeMax {
    grid,        // maximum over the grid nodes only
    continuous,  // adds the exact conditional maximum between neighbouring nodes
};

namespace detail {

// Maximum of a Brownian bridge over an interval with variance `var`, given
// endpoint values a and b: (a + b + sqrt((a - b)^2 - 2 var log U)) / 2.
inline double interval_max(double a, double b, double var, Engine& eng) {
    const double u = draw_uniform(eng);
    return 0.5 * (a + b + std::sqrt((a - b) * (a - b) - 2.0 * var * std::log(u)));
}

}  // namespace detail

/// Builds W on the grid t_i = i / grid, forms B(t_i) = W(t_i) - t_i W(1) and
/// evaluates the functional. `path` is scratch space of length grid.
inline LimitDraw bridge_functional(std::vector<double>& path, Sided kind, Engine& eng,
                                   BridgeMax mode = BridgeMax::grid) {
    const std::size_t grid = path.size();
    const double var = 1.0 / static_cast<double>(grid);
    const double step_sd = std::sqrt(var);
    double w = 0.0;
    for (auto& v : path) {
        w += step_sd * draw_normal(eng);
        v = w;
    }
    const double w1 = path.back();
    for (std::size_t i = 0; i < grid; ++i) path[i] -= static_cast<double>(i + 1) * var * w1;

    auto value = [&](std::size_t node) {  // node 0 is t = 0
        const double b = node == 0 ? 0.0 : path[node - 1];
        return kind == Sided::two_sided ? std::fabs(b) : b;
    };

    double best = 0.0;  // B(0) = 0
    std::size_t best_i = 0;
    for (std::size_t i = 1; i <= grid; ++i) {
        const double b = value(i);
        if (b > best) {
            best = b;
            best_i = i;
        }
    }
    double best_t = static_cast<double>(best_i) * var;

    if (mode == BridgeMax::continuous) {
        // Between nodes the path is a Brownian bridge with variance var.
        // Intervals whose endpoints sit more than 8 sd below the grid maximum
        // exceed it with probability below exp(-128) and are skipped.
        const double margin = 8.0 * step_sd;
        const double grid_best = best;
        for (std::size_t i = 0; i < grid; ++i) {
            const double b0 = i == 0 ? 0.0 : path[i - 1];
            const double b1 = path[i];
            const double lo_end = std::max(value(i), value(i + 1));
            if (lo_end < grid_best - margin) continue;
            double cand = detail::interval_max(b0, b1, var, eng);
            if (kind == Sided::two_sided) cand = std::max(cand, detail::interval_max(-b0, -b1, var, eng));
            if (cand > best) {
                best = cand;
                // location error within one cell is O(1 / grid)
                best_t = (static_cast<double>(i) + (value(i + 1) >= value(i) ? 1.0 : 0.0)) * var;
            }
        }
    }

    LimitDraw d;
    d.max = best;
    d.argmax = best_t;
    if (best_t > 0.0 && best_t < 1.0) d.z = best / std::sqrt(best_t * (1.0 - best_t));
    return d;
}

inline std::vector<LimitDraw> simulate_limit_draws(Sided kind, std::size_t grid_points, std::size_t reps,
                                                   std::uint64_t seed, unsigned threads = 1,
                                                   BridgeMax mode = BridgeMax::grid) {
    if (grid_points < 1000) throw DomainError("grid_points must be >= 1000");
    if (reps < 1) throw DomainError("reps must be >= 1");
    return parallel_map<LimitDraw>(reps, threads, [&](std::size_t i) {
        thread_local std::vector<double> path;
        path.resize(grid_points);
        Engine eng = make_engine(seed, i);
        return bridge_functional(path, kind, eng, mode);
    });
}

/// Simulated values of h(M(B), a(B)) (one-sided) or h(M(|B|), a(|B|)) (two-sided).
inline std::vector<double> simulate_limit_variable(Sided kind, std::size_t grid_points, std::size_t reps,
                                                   std::uint64_t seed, unsigned threads = 1,
                                                   BridgeMax mode = BridgeMax::grid) {
    const auto draws = simulate_limit_draws(kind, grid_points, reps, seed, threads, mode);
    std::vector<double> z(draws.size());
    std::transform(draws.begin(), draws.end(), z.begin(), [](const LimitDraw& d) { return d.z; });
    return z;
}

/// Sup-distance between the empirical CDF of `values` and `cdf` on `grid`.
template <typename Cdf>
double ecdf_sup_distance(std::vector<double> values, const std::vector<double>& grid, Cdf&& cdf) {
    std::sort(values.begin(), values.end());
    double worst = 0.0;
    const double n = static_cast<double>(values.size());
    for (double x : grid) {
        const auto le = std::upper_bound(values.begin(), values.end(), x) - values.begin();
        worst = std::max(worst, std::fabs(static_cast<double>(le) / n - cdf(x)));
    }
    return worst;
}

/// Dvoretzky-Kiefer-Wolfowitz band: P(sup |F_n - F| > eps) <= 2 exp(-2 n eps^2).
inline double dkw_epsilon(std::size_t n, double confidence) {
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

}  // namespace vtest
