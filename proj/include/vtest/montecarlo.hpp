#pragma once

// Monte Carlo comparison of the V-test with the one-sided Smirnov test:
// mean p-values (p_V = 1 - J_nn(T), p_S = L_n(D)) and rejection rates,
// over replicates drawn under a shift alternative or the tail family.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vtest/alternatives.hpp"
#include "vtest/asymptotic.hpp"
#include "vtest/errors.hpp"
#include "vtest/exact_null.hpp"
#include "vtest/random.hpp"
#include "vtest/statistic.hpp"

namespace vtest {

enum class PValueMode { exact, asymptotic };

inline const char* to_string(PValueMode m) { return m == PValueMode::exact ? "exact" : "asymptotic"; }

/// Draws (X, Y) samples of sizes (n, m) from a replicate's engine.
using PairSampler = std::function<std::pair<Sample, Sample>(std::size_t n, std::size_t m, Engine&)>;

struct SimConfig {
    std::vector<long> n_values{10, 15, 20, 25, 30, 35, 40, 50, 60, 70, 80, 100, 200};
    double shift = 0.4;
    std::size_t replicates = 1000;
    std::uint64_t seed = 20240601;
    PValueMode p_value_mode = PValueMode::exact;
    unsigned threads = 1;
    std::string model = "normal-shift";
    /// Overrides the normal shift model when set (X from F, Y from G).
    PairSampler sampler;

    void validate() const {
        if (replicates < 1) throw DomainError("replicates must be >= 1");
        if (n_values.empty()) throw DomainError("n list is empty");
        for (long n : n_values) {
            if (n < 1) throw DomainError("sample sizes must be >= 1");
        }
        if (!std::isfinite(shift)) throw DomainError("shift must be finite");
    }

    PairSampler pair_sampler() const {
        if (sampler) return sampler;
        const NormalShiftModel model_{shift};
        return [model_](std::size_t n, std::size_t m, Engine& eng) { return model_.sample(n, m, eng); };
    }
};

struct SimRow {
    long n = 0;
    std::size_t replicates = 0;
    double mean_pV = 0.0;
    double mean_pS = 0.0;
    double std_err_pV = 0.0;
    double std_err_pS = 0.0;
    double std_err_diff = 0.0;  // of the paired differences p_V - p_S
    double runtime_seconds = 0.0;
};

struct SimReport {
    SimConfig config;
    std::vector<SimRow> rows;
    double table_build_seconds = 0.0;
};

namespace detail {

struct Moments {
    double mean = 0.0;
    double std_err = 0.0;
};

// Two-pass mean and standard error in index order.
inline Moments moments(const std::vector<double>& v) {
    Moments out;
    if (v.empty()) return out;
    double s = 0.0;
    for (double x : v) s += x;
    out.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.std_err = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return out;
}

inline std::uint64_t size_stream(std::uint64_t seed, long n) { return stream_seed(seed, static_cast<std::uint64_t>(n)); }

}  // namespace detail

/// Resolves the exact table for equal sizes n = m, timing builds.
class TableSource {
public:
    explicit TableSource(std::shared_ptr<TableCache> cache = nullptr) : cache_(std::move(cache)) {}

    std::shared_ptr<const ExactNullTable> get(long n, long p, double* build_seconds = nullptr) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shared_ptr<const ExactNullTable> t;
        if (cache_) t = cache_->get(n, p);
        else t = std::make_shared<const ExactNullTable>(build_table(n, p));
        if (build_seconds) {
            *build_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return t;
    }

private:
    std::shared_ptr<TableCache> cache_;
};

struct ReplicatePValues {
    double p_v = 0.0;
    double p_s = 0.0;
};

/// p_V and p_S for one replicate with equal sizes.
inline ReplicatePValues replicate_p_values(const VinczeResult& res, PValueMode mode, const ExactNullTable* table) {
    ReplicatePValues out;
    if (mode == PValueMode::exact) {
        out.p_v = p_value_exact(*table, res.t_sq).to_double();
        out.p_s = smirnov_exact_tail(res.n, res.d).to_double();
    } else {
        out.p_v = 1.0 - maxwell_cdf(res.scaled_t_float);
        const double x = std::sqrt(static_cast<double>(res.n) * res.m / static_cast<double>(res.n + res.m)) *
                         res.d.to_double();
        out.p_s = 1.0 - smirnov_asymptotic_cdf(x);
    }
    return out;
}

/// Mean p-values of both tests for each n (m = n).
inline SimReport run_table1(const SimConfig& cfg, TableSource source = TableSource()) {
    cfg.validate();
    SimReport report;
    report.config = cfg;
    const PairSampler sampler = cfg.pair_sampler();
    for (long n : cfg.n_values) {
        std::shared_ptr<const ExactNullTable> table;
        if (cfg.p_value_mode == PValueMode::exact) table = source.get(n, 1, &report.table_build_seconds);
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t stream = detail::size_stream(cfg.seed, n);
        const auto pvals = parallel_map<ReplicatePValues>(cfg.replicates, cfg.threads, [&](std::size_t j) {
            Engine eng = make_engine(stream, j);
            auto [x, y] = sampler(static_cast<std::size_t>(n), static_cast<std::size_t>(n), eng);
            const auto res = vincze_one_sided(pool(x, y, TiePolicy::x_first));
            return replicate_p_values(res, cfg.p_value_mode, table.get());
        });
        std::vector<double> pv(pvals.size());
        std::vector<double> ps(pvals.size());
        std::vector<double> diff(pvals.size());
        for (std::size_t j = 0; j < pvals.size(); ++j) {
            pv[j] = pvals[j].p_v;
            ps[j] = pvals[j].p_s;
            diff[j] = pv[j] - ps[j];
        }
        SimRow row;
        row.n = n;
        row.replicates = cfg.replicates;
        const auto mv = detail::moments(pv);
        const auto ms = detail::moments(ps);
        row.mean_pV = mv.mean;
        row.std_err_pV = mv.std_err;
        row.mean_pS = ms.mean;
        row.std_err_pS = ms.std_err;
        row.std_err_diff = detail::moments(diff).std_err;
        row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rows.push_back(row);
    }
    return report;
}

struct PowerRow {
    long n = 0;
    std::size_t replicates = 0;
    double alpha = 0.0;
    double critical_v = 0.0;   // on the sqrt(nm(n+m)) T scale
    double critical_s = 0.0;   // on the D scale
    double size_v = 0.0;       // attained null size (exact mode), else alpha
    double size_s = 0.0;
    double rate_v = 0.0;
    double rate_s = 0.0;
    double std_err_v = 0.0;
    double std_err_s = 0.0;
};

struct PowerReport {
    SimConfig config;
    double alpha = 0.0;
    std::vector<PowerRow> rows;
};

/// Smallest d = k/n with P(D_nn > d) <= alpha, with its attained size.
inline std::pair<Rational, Rational> smirnov_critical_value(long n, const Rational& alpha) {
    for (long k = 0; k <= n; ++k) {
        const Rational d(k, n);
        const Rational tail = smirnov_exact_tail(n, d);
        if (tail <= alpha) return {d, tail};
    }
    return {Rational(1), Rational(0)};
}

/// Empirical rejection rates of both tests at level alpha.
inline PowerReport power_comparison(const SimConfig& cfg, double alpha, TableSource source = TableSource()) {
    cfg.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    PowerReport report;
    report.config = cfg;
    report.alpha = alpha;
    const PairSampler sampler = cfg.pair_sampler();
    const Rational alpha_q = Rational::from_double(alpha);
    for (long n : cfg.n_values) {
        PowerRow row;
        row.n = n;
        row.replicates = cfg.replicates;
        row.alpha = alpha;
        std::optional<CriticalValue> cv;
        Rational crit_d;
        if (cfg.p_value_mode == PValueMode::exact) {
            const auto table = source.get(n, 1);
            cv = critical_value(*table, alpha_q);
            row.critical_v = cv->scaled;
            row.size_v = cv->size.to_double();
            const auto [d, size] = smirnov_critical_value(n, alpha_q);
            crit_d = d;
            row.critical_s = d.to_double();
            row.size_s = size.to_double();
        } else {
            row.critical_v = maxwell_quantile(1.0 - alpha);
            // P(sqrt(n/2) D > x) -> exp(-2x^2)
            row.critical_s = std::sqrt(-0.5 * std::log(alpha)) / std::sqrt(static_cast<double>(n) / 2.0);
            row.size_v = alpha;
            row.size_s = alpha;
        }
        const std::uint64_t stream = detail::size_stream(cfg.seed, n);
        const auto hits = parallel_map<std::pair<int, int>>(cfg.replicates, cfg.threads, [&](std::size_t j) {
            Engine eng = make_engine(stream, j);
            auto [x, y] = sampler(static_cast<std::size_t>(n), static_cast<std::size_t>(n), eng);
            const auto res = vincze_one_sided(pool(x, y, TiePolicy::x_first));
            if (cv) return std::make_pair(res.t_sq > cv->t_sq ? 1 : 0, res.d > crit_d ? 1 : 0);
            return std::make_pair(res.scaled_t_float > row.critical_v ? 1 : 0,
                                  res.d.to_double() > row.critical_s ? 1 : 0);
        });
        std::vector<double> v(hits.size());
        std::vector<double> s(hits.size());
        for (std::size_t j = 0; j < hits.size(); ++j) {
            v[j] = hits[j].first;
            s[j] = hits[j].second;
        }
        const auto mv = detail::moments(v);
        const auto ms = detail::moments(s);
        row.rate_v = mv.mean;
        row.std_err_v = mv.std_err;
        row.rate_s = ms.mean;
        row.std_err_s = ms.std_err;
        report.rows.push_back(row);
    }
    return report;
}

/// Statistics of `reps` replicates with X, Y drawn by `sampler`.
inline std::vector<VinczeResult> simulate_statistics(long n, long m, std::size_t reps, std::uint64_t seed,
                                                     const PairSampler& sampler, Sided sided = Sided::one_sided,
                                                     unsigned threads = 1) {
    return parallel_map<VinczeResult>(reps, threads, [&](std::size_t j) {
        Engine eng = make_engine(seed, j);
        auto [x, y] = sampler(static_cast<std::size_t>(n), static_cast<std::size_t>(m), eng);
        return vincze(pool(x, y, TiePolicy::x_first), sided);
    });
}

/// Null replicates of the scaled statistic sqrt(nm(n+m)) T: under H0 the label
/// sequence is a uniformly random arrangement of n X's and m Y's.
inline std::vector<double> simulate_null_scaled(long n, long m, std::size_t reps, std::uint64_t seed,
                                                Sided sided = Sided::one_sided, unsigned threads = 1) {
    if (n < 1 || m < 1) throw DomainError("sample sizes must be >= 1");
    return parallel_map<double>(reps, threads, [&](std::size_t j) {
        Engine eng = make_engine(seed, j);
        std::vector<Label> labels(static_cast<std::size_t>(n + m), Label::Y);
        std::fill(labels.begin(), labels.begin() + n, Label::X);
        shuffle(labels, eng);
        return vincze(LabelSequence(std::move(labels)), sided).scaled_t_float;
    });
}

}  // namespace vtest
