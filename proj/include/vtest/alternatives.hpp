#pragma once

// Distribution families used in simulations: the tail-perturbation family
// F_{tau,delta} built from a base distribution G, and the normal location
// model F(x) = Phi(x + shift), G = Phi.

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "vtest/asymptotic.hpp"
#include "vtest/errors.hpp"
#include "vtest/random.hpp"
#include "vtest/statistic.hpp"

namespace vtest {

using CdfFn = std::function<double(double)>;

/// A continuous base distribution given by its CDF and quantile function.
struct BaseDistribution {
    std::string name;
    CdfFn cdf;
    CdfFn quantile;

    static BaseDistribution uniform01() {
        return {"uniform",
                [](double x) { return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x); },
                [](double u) { return u; }};
    }

    static BaseDistribution standard_normal() {
        return {"normal", [](double x) { return normal_cdf(x); },
                [](double u) -> double {
                    if (u <= 0.0) return -INFINITY;
                    if (u >= 1.0) return INFINITY;
                    return boost::math::quantile(boost::math::normal_distribution<double>(), u);
                }};
    }
};

/// F(x) = delta G(x) for x <= tau, beta (G(x) - G(tau)) + delta G(tau) beyond,
/// with beta fixed by delta G(tau) + beta (1 - G(tau)) = 1.
class Example1Family {
public:
    Example1Family(BaseDistribution base, double tau, double delta)
        : base_(std::move(base)), tau_(tau), delta_(delta) {
        if (!(delta_ > 1.0)) throw DomainError("delta must exceed 1");
        g_tau_ = base_.cdf(tau_);
        if (!(g_tau_ > 0.0 && g_tau_ < 1.0)) throw DomainError("G(tau) must lie in (0, 1)");
        if (!(delta_ * g_tau_ < 1.0)) throw DomainError("delta * G(tau) must be below 1");
        beta_ = (1.0 - delta_ * g_tau_) / (1.0 - g_tau_);
    }

    /// tau chosen as the q-quantile of the base distribution.
    static Example1Family from_quantile(BaseDistribution base, double q, double delta) {
        if (!(q > 0.0 && q < 1.0)) throw DomainError("tau quantile must lie in (0, 1)");
        const double tau = base.quantile(q);
        return Example1Family(std::move(base), tau, delta);
    }

    double tau() const { return tau_; }
    double delta() const { return delta_; }
    double beta() const { return beta_; }
    double g_tau() const { return g_tau_; }
    const BaseDistribution& base() const { return base_; }

    double cdf(double x) const {
        const double g = base_.cdf(x);
        if (x <= tau_) return delta_ * g;
        return beta_ * (g - g_tau_) + delta_ * g_tau_;
    }

    /// D(x) = F(x) - G(x) in the closed form of the family.
    double difference(double x) const {
        const double g = base_.cdf(x);
        if (x <= tau_) return (delta_ - beta_) * (1.0 - g_tau_) * g;
        return (delta_ - beta_) * g_tau_ * (1.0 - g);
    }

    /// Maximum of D, attained at tau.
    double max_difference() const { return (delta_ - beta_) * g_tau_ * (1.0 - g_tau_); }

    double quantile(double u) const {
        const double knee = delta_ * g_tau_;
        if (u <= knee) return base_.quantile(u / delta_);
        return base_.quantile((u - knee) / beta_ + g_tau_);
    }

    Sample sample(std::size_t count, Engine& eng, Label label = Label::X) const {
        if (count < 1) throw DomainError("sample size must be >= 1");
        std::vector<double> v(count);
        for (auto& x : v) x = quantile(draw_uniform(eng));
        return Sample(std::move(v), label);
    }

    Sample sample(std::size_t count, std::uint64_t seed, Label label = Label::X) const {
        Engine eng = make_engine(seed, 0);
        return sample(count, eng, label);
    }

private:
    BaseDistribution base_;
    double tau_;
    double delta_;
    double beta_ = 0.0;
    double g_tau_ = 0.0;
};

/// Almost-sure limit of (n+m) T under an alternative whose difference F - G
/// has unique maximizer tau, with n/(n+m) -> lambda.
inline double h1_limit_diagnostic(const CdfFn& F, const CdfFn& G, double tau, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
    const double f = F(tau);
    const double g = G(tau);
    if (!(f > g)) throw DomainError("F(tau) must exceed G(tau)");
    const double h = lambda * f + (1.0 - lambda) * g;
    if (!(h > 0.0 && h < 1.0)) throw DomainError("H(tau) must lie in (0, 1)");
    return (f - g) / std::sqrt(h * (1.0 - h));
}

/// X ~ N(-shift, 1), Y ~ N(0, 1); F(x) = Phi(x + shift) >= G(x) = Phi(x) for shift >= 0.
struct NormalShiftModel {
    double shift = 0.4;

    std::pair<Sample, Sample> sample(std::size_t n, std::size_t m, Engine& eng) const {
        if (n < 1 || m < 1) throw DomainError("sample sizes must be >= 1");
        std::vector<double> x(n);
        std::vector<double> y(m);
        for (auto& v : x) v = draw_normal(eng) - shift;
        for (auto& v : y) v = draw_normal(eng);
        return {Sample(std::move(x), Label::X), Sample(std::move(y), Label::Y)};
    }

    std::pair<Sample, Sample> sample(std::size_t n, std::size_t m, std::uint64_t seed) const {
        Engine eng = make_engine(seed, 0);
        return sample(n, m, eng);
    }

    double cdf_x(double x) const { return normal_cdf(x + shift); }
    double cdf_y(double x) const { return normal_cdf(x); }
};

}  // namespace vtest
