#pragma once

// Exact null distribution of (R, D) for m = n p via Gutjahr's closed form,
// the step CDF J of T built from it, exact p-values and critical values, and
// the equal-size Smirnov tail L_n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vtest/errors.hpp"
#include "vtest/exact_arith.hpp"
#include "vtest/statistic.hpp"

namespace vtest {

/// P(R = r, D = k/m) under H0 for m = n p. Zero when (r, k) is not admissible.
inline Rational gutjahr_pmf(long n, long p, long r, long k) {
    if (n < 1 || p < 1) throw DomainError("gutjahr_pmf requires n >= 1 and p >= 1");
    const long m = n * p;
    const long total = n + m;
    if (r < 1 || r > total) throw DomainError("r out of range [1, n+m]");
    if (k < 0 || k > m) throw DomainError("k out of range [0, m]");

    // s = (r+k) n / (n+m) = (r+k) / (p+1) must be a nonnegative integer <= min(r, n)
    if ((r + k) % (p + 1) != 0) return Rational(0);
    const long s = (r + k) / (p + 1);
    if (s > std::min(r, n)) return Rational(0);

    const long step = p + 1;  // (n+m)/n
    const long j_max = k / step;
    Rational sum;
    for (long j = 0; j <= j_max; ++j) {
        const long b = s - 1 - j;
        if (b < 0) break;  // binom(., negative) = 0 for this and every larger j
        const long a = r + k - 1 - j * step;
        // a = (s - j)(p + 1) - 1 >= p here, so the quotient binom(a, b) / a is
        // never singular; binom(a, b)/a = binom(a-1, b-1)/b when b >= 1.
        const BigInt lead = binom(j * step - k, j);
        if (lead == 0) continue;
        if (b == 0) {
            sum += Rational(lead, BigInt(a));
        } else {
            sum += Rational(lead * binom(a - 1, b - 1), BigInt(b));
        }
    }
    if (sum.sign() == 0) return sum;

    Rational front(binom(total - r + 1, n - s), binom(total, n));
    front *= Rational(BigInt(k + 1), BigInt(total - r + 1));
    return front * Rational(p) * sum;
}

/// One distinct value of T in the exact null support.
struct SupportPoint {
    long k = 0;                     // representative: T^2 = k^2 / (m^2 r (n+m-r))
    long r = 0;                     // r = n+m encodes the T = 0 atom
    Rational t_sq;
    Rational mass;
    Rational cumulative;            // P(T <= t)
    std::vector<std::pair<long, long>> pairs;  // all (r, k) with this T value
};

class ExactNullTable {
public:
    ExactNullTable(long n, long p, std::vector<Rational> dense_pmf)
        : n_(n), p_(p), m_(n * p), total_(n + n * p), pmf_(std::move(dense_pmf)) {
        if (pmf_.size() != static_cast<std::size_t>(total_ * (m_ + 1))) {
            throw DomainError("pmf table has the wrong shape");
        }
        build_support();
    }

    long n() const { return n_; }
    long p() const { return p_; }
    long m() const { return m_; }
    long total() const { return total_; }

    const Rational& pmf(long r, long k) const {
        if (r < 1 || r > total_ || k < 0 || k > m_) throw DomainError("(r, k) out of range");
        return pmf_[index(r, k)];
    }

    const std::vector<SupportPoint>& support() const { return support_; }

    Rational total_mass() const {
        Rational s;
        for (const auto& v : pmf_) s += v;
        return s;
    }

    /// Number of (r, k) pairs with nonzero probability.
    std::size_t nonzero_count() const {
        return static_cast<std::size_t>(
            std::count_if(pmf_.begin(), pmf_.end(), [](const Rational& v) { return v.sign() != 0; }));
    }

    /// Index of the last support point with t_sq <= bound, or nullopt.
    std::optional<std::size_t> last_at_or_below(const Rational& t_sq_bound) const {
        auto it = std::upper_bound(support_.begin(), support_.end(), t_sq_bound,
                                   [](const Rational& b, const SupportPoint& s) { return b < s.t_sq; });
        if (it == support_.begin()) return std::nullopt;
        return static_cast<std::size_t>(std::distance(support_.begin(), it) - 1);
    }

private:
    std::size_t index(long r, long k) const {
        return static_cast<std::size_t>((r - 1) * (m_ + 1) + k);
    }

    void build_support() {
        struct Item {
            long r;
            long k;
        };
        std::vector<Item> items;
        for (long r = 1; r <= total_; ++r) {
            for (long k = 0; k <= m_; ++k) {
                if (pmf_[index(r, k)].sign() != 0) items.push_back({r, k});
            }
        }
        // Order by k^2 / (r (N - r)); r = N is the zero atom. Cross products fit in 128 bits.
        const long total = total_;
        auto key_num = [](const Item& it) -> __int128 { return static_cast<__int128>(it.k) * it.k; };
        auto key_den = [total](const Item& it) -> __int128 {
            return it.r == total ? 1 : static_cast<__int128>(it.r) * (total - it.r);
        };
        auto is_zero = [total](const Item& it) { return it.k == 0 || it.r == total; };
        auto less = [&](const Item& a, const Item& b) {
            const bool za = is_zero(a);
            const bool zb = is_zero(b);
            if (za || zb) return za && !zb;
            return key_num(a) * key_den(b) < key_num(b) * key_den(a);
        };
        auto equal = [&](const Item& a, const Item& b) {
            const bool za = is_zero(a);
            const bool zb = is_zero(b);
            if (za || zb) return za && zb;
            return key_num(a) * key_den(b) == key_num(b) * key_den(a);
        };
        std::stable_sort(items.begin(), items.end(), less);

        Rational running;
        for (std::size_t i = 0; i < items.size();) {
            SupportPoint pt;
            pt.r = items[i].r;
            pt.k = items[i].k;
            if (is_zero(items[i])) {
                pt.r = total_;
                pt.k = 0;
            } else {
                pt.t_sq = Rational(BigInt(pt.k) * pt.k, BigInt(m_) * m_ * pt.r * (total_ - pt.r));
            }
            std::size_t j = i;
            while (j < items.size() && equal(items[i], items[j])) {
                pt.mass += pmf_[index(items[j].r, items[j].k)];
                pt.pairs.emplace_back(items[j].r, items[j].k);
                ++j;
            }
            running += pt.mass;
            pt.cumulative = running;
            support_.push_back(std::move(pt));
            i = j;
        }
    }

    long n_;
    long p_;
    long m_;
    long total_;
    std::vector<Rational> pmf_;
    std::vector<SupportPoint> support_;
};

/// Full pmf over {1..n+m} x {0..m}. Rows are independent and split across
/// `threads` workers; the result does not depend on the thread count.
inline ExactNullTable build_table(long n, long p, unsigned threads = 1) {
    if (n < 1 || p < 1) throw DomainError("build_table requires n >= 1 and p >= 1");
    const long m = n * p;
    const long total = n + m;
    std::vector<Rational> pmf(static_cast<std::size_t>(total * (m + 1)));
    auto fill_rows = [&](long r_begin, long r_end) {
        for (long r = r_begin; r < r_end; ++r) {
            for (long k = 0; k <= m; ++k) {
                pmf[static_cast<std::size_t>((r - 1) * (m + 1) + k)] = gutjahr_pmf(n, p, r, k);
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (threads == 1) {
        fill_rows(1, total + 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            // interleaved assignment balances the cheap and expensive rows
            pool.emplace_back([&, t] {
                for (long r = 1 + t; r <= total; r += threads) fill_rows(r, r + 1);
            });
        }
        for (auto& th : pool) th.join();
    }
    return ExactNullTable(n, p, std::move(pmf));
}

/// Size pair (n, m) checked for the exact route; returns p = m / n.
inline long exact_ratio(long n, long m) {
    if (n < 1 || m < 1) throw DomainError("sample sizes must be positive");
    if (m % n != 0) throw UnsupportedSampleRatio(n, m);
    return m / n;
}

/// P(R = n+m) = m / ((n+m)(n+m-1)).
inline Rational atom_probability(long n, long m) {
    return Rational(BigInt(m), BigInt(n + m) * (n + m - 1));
}

/// J(x) = P(T <= x) by lookup in the sorted support.
inline Rational cdf_J(const ExactNullTable& table, const Rational& x) {
    if (x.sign() < 0) return Rational(0);
    const auto idx = table.last_at_or_below(x * x);
    return idx ? table.support()[*idx].cumulative : Rational(0);
}

/// J(x) evaluated as the double sum over r < n+m and k <= [kappa(r) x] ^ m,
/// plus the atom at R = n+m. Independent of the support ordering.
inline Rational cdf_J_by_sum(const ExactNullTable& table, const Rational& x) {
    if (x.sign() < 0) return Rational(0);
    const long m = table.m();
    const long total = table.total();
    Rational acc = atom_probability(table.n(), m);
    for (long r = 1; r < total; ++r) {
        const BigInt bound = floor_sqrt_scaled(m, r, total, x);
        const long k_hi = bound >= m ? m : to_long(bound);
        for (long k = 0; k <= k_hi; ++k) acc += table.pmf(r, k);
    }
    return acc;
}

/// P(T <= t) for T given as its exact square.
inline Rational cdf_J_at_sq(const ExactNullTable& table, const Rational& t_sq) {
    if (t_sq.sign() < 0) return Rational(0);
    const auto idx = table.last_at_or_below(t_sq);
    return idx ? table.support()[*idx].cumulative : Rational(0);
}

/// P(sqrt(nm(n+m)) T <= x).
inline Rational cdf_scaled(const ExactNullTable& table, const Rational& x) {
    if (x.sign() < 0) return Rational(0);
    const Rational scale(BigInt(table.n()) * table.m() * table.total());
    return cdf_J_at_sq(table, x * x / scale);
}

enum class Tail {
    strict,     // P(T > t) = 1 - J(t)
    inclusive,  // P(T >= t)
};

inline Rational p_value_exact(const ExactNullTable& table, const Rational& t_sq, Tail tail = Tail::strict) {
    if (tail == Tail::strict) return Rational(1) - cdf_J_at_sq(table, t_sq);
    // P(T >= t) = 1 - P(T < t)
    const auto idx = table.last_at_or_below(t_sq);
    if (!idx) return Rational(1);
    const auto& pt = table.support()[*idx];
    const Rational below = pt.t_sq == t_sq ? pt.cumulative - pt.mass : pt.cumulative;
    return Rational(1) - below;
}

inline Rational p_value_exact(const ExactNullTable& table, const VinczeResult& res, Tail tail = Tail::strict) {
    if (res.n != table.n() || res.m != table.m()) throw DomainError("statistic and table sizes differ");
    if (res.sided != Sided::one_sided) throw DomainError("exact p-values exist only for the one-sided statistic");
    return p_value_exact(table, res.t_sq, tail);
}

struct CriticalValue {
    double scaled = 0.0;     // c on the sqrt(nm(n+m)) T scale
    Rational scaled_sq;      // c^2, exact
    Rational t_sq;           // corresponding T^2
    Rational size;           // attained P(scaled T > c) <= alpha
};

/// Smallest scaled support point c with P(sqrt(nm(n+m)) T > c) <= alpha.
inline CriticalValue critical_value(const ExactNullTable& table, const Rational& alpha) {
    if (alpha.sign() <= 0 || alpha >= Rational(1)) throw DomainError("alpha must lie in (0, 1)");
    const Rational scale(BigInt(table.n()) * table.m() * table.total());
    for (const auto& pt : table.support()) {
        const Rational tail = Rational(1) - pt.cumulative;
        if (tail <= alpha) {
            CriticalValue cv;
            cv.t_sq = pt.t_sq;
            cv.scaled_sq = pt.t_sq * scale;
            cv.scaled = std::sqrt(cv.scaled_sq.to_double());
            cv.size = tail;
            return cv;
        }
    }
    throw Error("support exhausted while searching for a critical value");  // unreachable: last cumulative is 1
}

inline CriticalValue critical_value(const ExactNullTable& table, double alpha) {
    return critical_value(table, Rational::from_double(alpha));
}

/// L_n(x) = P(D_nn > x) = binom(2n, n + [nx] + 1) / binom(2n, n), x >= 0.
inline Rational smirnov_exact_tail(long n, const Rational& x) {
    if (n < 1) throw DomainError("smirnov_exact_tail requires n >= 1");
    if (x.sign() < 0) throw DomainError("smirnov_exact_tail requires x >= 0");
    const BigInt q = floor(x * Rational(n));
    if (q >= n) return Rational(0);
    const long lower = n + to_long(q) + 1;
    return Rational(binom(2 * n, lower), binom(2 * n, n));
}

inline Rational smirnov_exact_tail(long n, double x) { return smirnov_exact_tail(n, Rational::from_double(x)); }

// ---------------------------------------------------------------------------
// Table cache
//
// File layout (UTF-8 text, one record per line, comma-delimited):
//
//   # free-form comment lines start with '#'
//   vtest-exact-null-table,1
//   n,<n>
//   p,<p>
//   records,<count>
//   <r>,<k>,<numerator>,<denominator>      (count lines, nonzero pmf only)
//
// numerators and denominators are base-10 integers of arbitrary length.

inline constexpr int kTableFormatVersion = 1;

inline void write_table(const ExactNullTable& table, std::ostream& os) {
    os << "# exact null pmf P(R=r, D=k/m); columns r,k,numerator,denominator\n";
    os << "vtest-exact-null-table," << kTableFormatVersion << "\n";
    os << "n," << table.n() << "\n";
    os << "p," << table.p() << "\n";
    os << "records," << table.nonzero_count() << "\n";
    for (long r = 1; r <= table.total(); ++r) {
        for (long k = 0; k <= table.m(); ++k) {
            const Rational& v = table.pmf(r, k);
            if (v.sign() == 0) continue;
            os << r << ',' << k << ',' << v.num().get_str() << ',' << v.den().get_str() << '\n';
        }
    }
}

inline ExactNullTable read_table(std::istream& is) {
    std::string line;
    auto next = [&]() -> std::string {
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            return line;
        }
        throw Error("table file truncated");
    };
    auto field = [](const std::string& l, const std::string& name) -> long {
        const auto comma = l.find(',');
        if (comma == std::string::npos || l.substr(0, comma) != name) {
            throw Error("table file: expected '" + name + "', got '" + l + "'");
        }
        return std::stol(l.substr(comma + 1));
    };
    if (field(next(), "vtest-exact-null-table") != kTableFormatVersion) {
        throw Error("table file: unsupported format version");
    }
    const long n = field(next(), "n");
    const long p = field(next(), "p");
    const long count = field(next(), "records");
    if (n < 1 || p < 1 || count < 1) throw Error("table file: invalid header");
    const long m = n * p;
    const long total = n + m;
    std::vector<Rational> pmf(static_cast<std::size_t>(total * (m + 1)));
    for (long i = 0; i < count; ++i) {
        std::istringstream row(next());
        std::string r_s, k_s, num_s, den_s;
        if (!std::getline(row, r_s, ',') || !std::getline(row, k_s, ',') ||
            !std::getline(row, num_s, ',') || !std::getline(row, den_s)) {
            throw Error("table file: malformed record");
        }
        const long r = std::stol(r_s);
        const long k = std::stol(k_s);
        if (r < 1 || r > total || k < 0 || k > m) throw Error("table file: record out of range");
        pmf[static_cast<std::size_t>((r - 1) * (m + 1) + k)] = Rational(BigInt(num_s, 10), BigInt(den_s, 10));
    }
    ExactNullTable table(n, p, std::move(pmf));
    if (table.total_mass() != Rational(1)) throw Error("table file: probabilities do not sum to 1");
    return table;
}

/// Default cache directory: $VTEST_CACHE_DIR, else $XDG_CACHE_HOME/vtest,
/// else $HOME/.cache/vtest, else ./.vtest-cache.
inline std::filesystem::path default_cache_dir() {
    if (const char* d = std::getenv("VTEST_CACHE_DIR"); d && *d) return d;
    if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d) return std::filesystem::path(d) / "vtest";
    if (const char* d = std::getenv("HOME"); d && *d) return std::filesystem::path(d) / ".cache" / "vtest";
    return ".vtest-cache";
}

/// Memoizes tables in memory and on disk. Thread-safe.
class TableCache {
public:
    explicit TableCache(std::optional<std::filesystem::path> dir = default_cache_dir(), unsigned threads = 1)
        : dir_(std::move(dir)), threads_(threads) {}

    std::filesystem::path file_for(long n, long p) const {
        return *dir_ / ("exact_null_n" + std::to_string(n) + "_p" + std::to_string(p) + ".csv");
    }

    std::shared_ptr<const ExactNullTable> get(long n, long p) {
        std::lock_guard<std::mutex> lock(mu_);
        const auto key = std::make_pair(n, p);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        std::shared_ptr<const ExactNullTable> table;
        if (dir_) {
            const auto path = file_for(n, p);
            if (std::ifstream in(path); in) {
                try {
                    auto loaded = read_table(in);
                    if (loaded.n() == n && loaded.p() == p) {
                        table = std::make_shared<const ExactNullTable>(std::move(loaded));
                    }
                } catch (const std::exception&) {
                    table.reset();  // corrupt cache entry, rebuild below
                }
            }
        }
        if (!table) {
            table = std::make_shared<const ExactNullTable>(build_table(n, p, threads_));
            ++builds_;
            if (dir_) store(*table);
        }
        memo_.emplace(key, table);
        return table;
    }

    std::size_t builds() const { return builds_; }

private:
    void store(const ExactNullTable& table) const {
        std::error_code ec;
        std::filesystem::create_directories(*dir_, ec);
        if (ec) return;
        const auto path = file_for(table.n(), table.p());
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) return;
            write_table(table, out);
            if (!out) return;
        }
        std::filesystem::rename(tmp, path, ec);
    }

    std::optional<std::filesystem::path> dir_;
    unsigned threads_;
    std::mutex mu_;
    std::map<std::pair<long, long>, std::shared_ptr<const ExactNullTable>> memo_;
    std::size_t builds_ = 0;
};

}  // namespace vtest
