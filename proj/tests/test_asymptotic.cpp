#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "vtest/asymptotic.hpp"

namespace {

double maxwell_by_quadrature(double x) {
    auto density = [](double t) { return std::sqrt(2.0 / std::numbers::pi) * t * t * std::exp(-0.5 * t * t); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, 0.0, x, 15, 1e-14);
}

// K* written out term by term, truncated at indices < terms.
double two_sided_literal(double x, int terms) {
    auto a = [](int j) { return 2.0 * j + 1.0; };
    auto g = [&](int j) { return (vtest::normal_cdf(a(j) * x) - 0.5) / a(j); };
    double dbl = 0.0;
    for (int l = 1; l < terms; ++l) {
        for (int j = 0; j < l; ++j) {
            const double sign = (j + l) % 2 == 0 ? 1.0 : -1.0;
            dbl += sign * a(j) * a(l) / (a(l) * a(l) - a(j) * a(j)) * (g(j) - g(l));
        }
    }
    double single = 0.0;
    for (int j = 0; j < terms; ++j) single += g(j) - x * vtest::normal_pdf(a(j) * x);
    return 16.0 * dbl + 4.0 * single;
}

}  // namespace

TEST(Maxwell, Examples) {
    EXPECT_EQ(vtest::maxwell_cdf(0.0), 0.0);
    EXPECT_EQ(vtest::maxwell_cdf(-2.0), 0.0);
    EXPECT_EQ(vtest::maxwell_cdf(INFINITY), 1.0);
    EXPECT_NEAR(vtest::maxwell_cdf(40.0), 1.0, 1e-15);
    const double k1 = 2.0 * vtest::normal_cdf(1.0) - std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5) - 1.0;
    EXPECT_NEAR(vtest::maxwell_cdf(1.0), k1, 1e-15);
    EXPECT_NEAR(vtest::maxwell_cdf(1.0), maxwell_by_quadrature(1.0), 1e-13);
}

TEST(Maxwell, MatchesDensityQuadrature) {
    for (int i = 1; i <= 50; ++i) {
        const double x = 0.1 * i;
        EXPECT_NEAR(vtest::maxwell_cdf(x), maxwell_by_quadrature(x), 1e-10) << x;
    }
}

TEST(Maxwell, IsChiWithThreeDegrees) {
    const boost::math::chi_squared_distribution<double> chi3(3.0);
    for (int i = 1; i <= 80; ++i) {
        const double x = 0.05 * i;
        EXPECT_NEAR(vtest::maxwell_cdf(x), boost::math::cdf(chi3, x * x), 1e-13) << x;
    }
}

TEST(Maxwell, QuantileRoundTrip) {
    EXPECT_NEAR(vtest::maxwell_quantile(vtest::maxwell_cdf(1.0)), 1.0, 1e-10);
    EXPECT_NEAR(vtest::maxwell_cdf(vtest::maxwell_quantile(0.5)), 0.5, 1e-12);
    double prev = 0.0;
    for (int i = 1; i <= 99; ++i) {
        const double q = 0.01 * i;
        const double x = vtest::maxwell_quantile(q);
        EXPECT_NEAR(vtest::maxwell_cdf(x), q, 1e-10);
        EXPECT_GT(x, prev);
        prev = x;
    }
    EXPECT_THROW(vtest::maxwell_quantile(0.0), vtest::DomainError);
    EXPECT_THROW(vtest::maxwell_quantile(1.0), vtest::DomainError);
}

TEST(TwoSided, BoundaryValues) {
    EXPECT_EQ(vtest::two_sided_cdf(0.0), 0.0);
    EXPECT_EQ(vtest::two_sided_cdf(-1.0), 0.0);
    EXPECT_NEAR(vtest::two_sided_cdf(8.0), 1.0, 1e-12);
    EXPECT_EQ(vtest::two_sided_cdf(INFINITY), 1.0);
}

TEST(TwoSided, BothRoutesAgree) {
    for (int i = 1; i <= 60; ++i) {
        const double x = 0.4 + 0.02 * i;
        EXPECT_NEAR(vtest::two_sided_cdf_gaussian_form(x), vtest::two_sided_cdf_dual_form(x), 1e-12) << x;
    }
}

TEST(TwoSided, ClosedFormMatchesTermwiseSeries) {
    for (double x : {0.8, 1.0, 1.5, 2.0, 3.0}) {
        const double closed = vtest::two_sided_cdf(x);
        const double coarse = two_sided_literal(x, 200);
        const double fine = two_sided_literal(x, 800);
        EXPECT_LT(std::fabs(fine - closed), std::fabs(coarse - closed) + 1e-12) << x;
        EXPECT_NEAR(fine, closed, 5e-3) << x;
    }
}

TEST(TwoSided, MonotoneAndBounded) {
    double prev_k = 0.0;
    double prev_s = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = 0.006 * i;
        const double k = vtest::maxwell_cdf(x);
        const double s = vtest::two_sided_cdf(x);
        EXPECT_GE(k, prev_k);
        EXPECT_GE(s, prev_s);
        EXPECT_LE(k, 1.0);
        EXPECT_LE(s, 1.0);
        prev_k = k;
        prev_s = s;
    }
}

TEST(TwoSided, QuantileRoundTrip) {
    for (double q : {0.05, 0.25, 0.5, 0.9, 0.95, 0.99}) {
        EXPECT_NEAR(vtest::two_sided_cdf(vtest::two_sided_quantile(q)), q, 1e-10);
    }
}

TEST(TwoSided, TruncationIsReported) {
    vtest::SeriesControl tight;
    tight.max_index = 1;
    EXPECT_THROW(vtest::two_sided_cdf_gaussian_form(0.05, tight), vtest::TruncationError);
    tight.abs_tol = 0.0;
    EXPECT_THROW(tight.validate(), vtest::DomainError);
}

TEST(SmirnovLimit, Examples) {
    EXPECT_EQ(vtest::smirnov_asymptotic_cdf(0.0), 0.0);
    EXPECT_NEAR(vtest::smirnov_asymptotic_cdf(std::sqrt(std::log(2.0) / 2.0)), 0.5, 1e-15);
    EXPECT_EQ(vtest::smirnov_asymptotic_cdf(50.0), 1.0);
}
