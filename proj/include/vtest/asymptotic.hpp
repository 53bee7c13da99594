#pragma once

// Limit laws of the scaled statistic sqrt(nm(n+m)) T under H0:
//   one-sided: Maxwell-Boltzmann K (chi distribution with 3 degrees of freedom)
//   two-sided: K*, the law of max|B| / sqrt(a(1-a)) for a Brownian bridge B
// plus Smirnov's limit for sqrt(n/2) D_nn.

#include <cmath>
#include <numbers>

#include "vtest/errors.hpp"

namespace vtest {

struct SeriesControl {
    double abs_tol = 1e-12;
    int max_index = 200;

    void validate() const {
        if (!(abs_tol > 0.0)) throw DomainError("SeriesControl.abs_tol must be positive");
        if (max_index < 1) throw DomainError("SeriesControl.max_index must be >= 1");
    }
};

/// Standard normal CDF via erfc; glibc erfc is accurate to a few ulp, which
/// keeps the absolute error well below 1e-15.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// K(x) = 2 Phi(x) - sqrt(2/pi) x exp(-x^2/2) - 1 for x >= 0, else 0.
inline double maxwell_cdf(double x) {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double tail_term = std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-0.5 * x * x);
    if (x <= 1.0) return std::erf(x / std::numbers::sqrt2) - tail_term;
    return 1.0 - (std::erfc(x / std::numbers::sqrt2) + tail_term);
}

/// x with K(x) = q, by bisection on [0, 10].
inline double maxwell_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("maxwell_quantile requires q in (0, 1)");
    double lo = 0.0;
    double hi = 10.0;
    if (maxwell_cdf(hi) < q) return hi;  // q above 1 - 1e-20: K(10) already rounds to 1
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (maxwell_cdf(mid) < q) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

// Gaussian-tail form: K*(x) = 1 - 4x sum_{j>=0} phi((2j+1)x).
// Obtained from the double/single series by writing Phi - 1/2 = 1/2 - (1 - Phi):
// the constant parts sum to 1 and, per index i, the double-sum coefficients
// of (1 - Phi(a_i x))/a_i telescope to -1/4, cancelling the single-sum
// (1 - Phi) terms and leaving only the density terms.
inline double two_sided_large(double x, const SeriesControl& ctl) {
    double sum = 0.0;
    for (int j = 0; j < ctl.max_index; ++j) {
        const double a = 2.0 * j + 1.0;
        const double term = 4.0 * x * normal_pdf(a * x);
        sum += term;
        // remaining terms shrink at least geometrically with ratio rho
        const double rho = std::exp(-4.0 * (j + 1) * x * x);
        const double next = term * rho;
        const double bound = rho < 1.0 ? next / (1.0 - rho) : INFINITY;
        if (bound < 0.5 * ctl.abs_tol) return 1.0 - sum;
    }
    const double a = 2.0 * ctl.max_index + 1.0;
    throw TruncationError(x, 4.0 * x * normal_pdf(a * x) * ctl.max_index);
}

// Poisson-summation dual of the same sum:
// K*(x) = 2 sum_{v>=1} (-1)^{v+1} exp(-pi^2 v^2 / (2 x^2)).
inline double two_sided_small(double x, const SeriesControl& ctl) {
    const double c = std::numbers::pi * std::numbers::pi / (2.0 * x * x);
    double sum = 0.0;
    for (int v = 1; v <= ctl.max_index; ++v) {
        const double term = 2.0 * std::exp(-c * v * v);
        sum += (v % 2 == 1) ? term : -term;
        // alternating with decreasing magnitude: next term bounds the error
        if (2.0 * std::exp(-c * (v + 1.0) * (v + 1.0)) < 0.5 * ctl.abs_tol) return sum;
    }
    throw TruncationError(x, 2.0 * std::exp(-c * (ctl.max_index + 1.0) * (ctl.max_index + 1.0)));
}

}  // namespace detail

/// Limit CDF K* of the two-sided scaled statistic.
inline double two_sided_cdf(double x, const SeriesControl& ctl = {}) {
    ctl.validate();
    if (!(x >= 1e-3)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double v = x < 1.0 ? detail::two_sided_small(x, ctl) : detail::two_sided_large(x, ctl);
    return std::fmin(1.0, std::fmax(0.0, v));
}

/// Gaussian-tail route only; exposed so the two routes can be compared.
inline double two_sided_cdf_gaussian_form(double x, const SeriesControl& ctl = {}) {
    ctl.validate();
    if (!(x >= 1e-3)) return 0.0;
    return detail::two_sided_large(x, ctl);
}

/// Poisson-dual route only.
inline double two_sided_cdf_dual_form(double x, const SeriesControl& ctl = {}) {
    ctl.validate();
    if (!(x >= 1e-3)) return 0.0;
    return detail::two_sided_small(x, ctl);
}

/// x with K*(x) = q, by bisection on [0, 10].
inline double two_sided_quantile(double q, const SeriesControl& ctl = {}) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("two_sided_quantile requires q in (0, 1)");
    double lo = 0.0;
    double hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (two_sided_cdf(mid, ctl) < q) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// lim P(sqrt(n/2) D_nn <= x) = 1 - exp(-2x^2), equal sample sizes.
inline double smirnov_asymptotic_cdf(double x) {
    if (!(x > 0.0)) return 0.0;
    return -std::expm1(-2.0 * x * x);
}

}  // namespace vtest
