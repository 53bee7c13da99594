#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "vtest/alternatives.hpp"
#include "vtest/oracle.hpp"

using vtest::BaseDistribution;
using vtest::Example1Family;

namespace {

Example1Family uniform_instance() { return Example1Family(BaseDistribution::uniform01(), 0.2, 2.0); }

}  // namespace

TEST(Example1, Parameters) {
    const auto f = uniform_instance();
    EXPECT_DOUBLE_EQ(f.beta(), 0.75);
    EXPECT_DOUBLE_EQ(f.cdf(0.2), 0.4);
    EXPECT_DOUBLE_EQ(f.max_difference(), 0.2);
    EXPECT_DOUBLE_EQ(f.difference(0.2), 0.2);
    EXPECT_EQ(f.cdf(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(f.cdf(1.0), 1.0);
    EXPECT_DOUBLE_EQ(f.cdf(5.0), 1.0);
}

TEST(Example1, NormalBaseLimits) {
    const auto f = Example1Family::from_quantile(BaseDistribution::standard_normal(), 0.3, 1.5);
    EXPECT_NEAR(f.cdf(-40.0), 0.0, 1e-15);
    EXPECT_NEAR(f.cdf(40.0), 1.0, 1e-15);
    EXPECT_NEAR(f.g_tau(), 0.3, 1e-12);
}

TEST(Example1, InvalidParameters) {
    EXPECT_THROW(Example1Family(BaseDistribution::uniform01(), 0.2, 1.0), vtest::DomainError);
    EXPECT_THROW(Example1Family(BaseDistribution::uniform01(), 0.6, 2.0), vtest::DomainError);
    EXPECT_THROW(Example1Family(BaseDistribution::uniform01(), 1.5, 2.0), vtest::DomainError);
    EXPECT_THROW(Example1Family::from_quantile(BaseDistribution::uniform01(), 0.0, 2.0), vtest::DomainError);
}

TEST(Example1, DifferenceIsNonnegativeAndPeaksAtTau) {
    for (const auto& f : {uniform_instance(),
                          Example1Family::from_quantile(BaseDistribution::standard_normal(), 0.25, 3.0)}) {
        const double peak = f.difference(f.tau());
        EXPECT_GT(peak, 0.0);
        EXPECT_NEAR(peak, (f.delta() - f.beta()) * f.g_tau() * (1.0 - f.g_tau()), 1e-15);
        for (int i = 0; i <= 2000; ++i) {
            const double x = f.base().quantile(0.0005 * i);
            if (!std::isfinite(x)) continue;
            const double d = f.cdf(x) - f.base().cdf(x);
            EXPECT_GE(d, -1e-15);
            EXPECT_LE(d, peak + 1e-15);
            EXPECT_NEAR(d, f.difference(x), 1e-14);
        }
    }
}

TEST(Example1, QuantileInvertsCdf) {
    const auto f = uniform_instance();
    EXPECT_DOUBLE_EQ(f.quantile(f.delta() * f.g_tau()), f.tau());
    for (int i = 1; i < 100; ++i) {
        const double u = 0.01 * i;
        EXPECT_NEAR(f.cdf(f.quantile(u)), u, 1e-14);
    }
}

TEST(Example1, SamplesFollowTheCdf) {
    const auto f = Example1Family::from_quantile(BaseDistribution::standard_normal(), 0.2, 2.0);
    const auto s = f.sample(100000, 99);
    std::vector<double> grid;
    for (int i = -300; i <= 300; ++i) grid.push_back(0.01 * i);
    const double sup = vtest::ecdf_sup_distance(s.values, grid, [&](double x) { return f.cdf(x); });
    EXPECT_LT(sup, vtest::dkw_epsilon(s.size(), 0.99));
    EXPECT_EQ(f.sample(50, 5).values, f.sample(50, 5).values);
    EXPECT_NE(f.sample(50, 5).values, f.sample(50, 6).values);
}

TEST(LimitDiagnostic, Example1Value) {
    const auto f = uniform_instance();
    const auto g = BaseDistribution::uniform01();
    const double v = vtest::h1_limit_diagnostic([&](double x) { return f.cdf(x); }, g.cdf, 0.2, 0.5);
    EXPECT_NEAR(v, 0.2 / std::sqrt(0.21), 1e-15);
    EXPECT_NEAR(v, 0.43644, 1e-5);
    EXPECT_GE(v, 2.0 * 0.2);
}

TEST(LimitDiagnostic, DegenerateCases) {
    const auto g = BaseDistribution::uniform01();
    EXPECT_THROW(vtest::h1_limit_diagnostic(g.cdf, g.cdf, 0.5, 0.5), vtest::DomainError);
    EXPECT_THROW(vtest::h1_limit_diagnostic(g.cdf, g.cdf, 0.5, 1.0), vtest::DomainError);
}

TEST(LimitDiagnostic, SmallTailFactorExceedsSeven) {
    // F(tau) = 0.02 > G(tau) keeps H(tau) below 0.02
    for (double g : {0.0, 0.005, 0.01, 0.019}) {
        for (double lambda : {0.1, 0.5, 0.9}) {
            const double h = lambda * 0.02 + (1.0 - lambda) * g;
            if (h <= 0.0) continue;
            EXPECT_GT(1.0 / std::sqrt(h * (1.0 - h)), 7.0);
        }
    }
}

TEST(NormalShift, DeterministicAndShifted) {
    const vtest::NormalShiftModel model{0.4};
    const auto [x1, y1] = model.sample(2000, 2000, 3);
    const auto [x2, y2] = model.sample(2000, 2000, 3);
    EXPECT_EQ(x1.values, x2.values);
    EXPECT_EQ(y1.values, y2.values);
    double mean = 0.0;
    for (double v : x1.values) mean += v;
    mean /= 2000.0;
    EXPECT_NEAR(mean, -0.4, 4.0 / std::sqrt(2000.0));
    for (int i = -30; i <= 30; ++i) EXPECT_GE(model.cdf_x(0.1 * i), model.cdf_y(0.1 * i));
}

TEST(NormalShift, NullSamplesAreStandardNormal) {
    const vtest::NormalShiftModel model{0.0};
    const auto [x, y] = model.sample(50000, 50000, 17);
    std::vector<double> grid;
    for (int i = -300; i <= 300; ++i) grid.push_back(0.01 * i);
    EXPECT_LT(vtest::ecdf_sup_distance(x.values, grid, vtest::normal_cdf), vtest::dkw_epsilon(50000, 0.99));
    EXPECT_LT(vtest::ecdf_sup_distance(y.values, grid, vtest::normal_cdf), vtest::dkw_epsilon(50000, 0.99));
}
