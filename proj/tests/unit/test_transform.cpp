#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "despeckle/errors.hpp"
#include "despeckle/speckle.hpp"
#include "despeckle/transform.hpp"
#include "test_support.hpp"

using namespace despeckle;

TEST(LogTransform, ForwardExamples) {
  const double eps = 1e-3;
  const Raster y(3, 2, RasterKind::kIntensity, std::numbers::e - eps);
  const Raster out = log_forward(y, eps);
  EXPECT_EQ(out.kind(), RasterKind::kTransformed);
  for (double v : out.pixels()) EXPECT_NEAR(v, 1.0, 1e-15);

  const Raster zero(2, 2);
  const Raster guarded = log_forward(zero, eps);
  for (double v : guarded.pixels()) EXPECT_DOUBLE_EQ(v, std::log(eps));
}

TEST(LogTransform, RoundTripRelativeError) {
  const Raster y = support::random_raster(40, 30, 4, 0.0, 1000.0);
  const double eps = log_epsilon_for(y);
  const Raster back = log_inverse(log_forward(y, eps), eps);
  EXPECT_EQ(back.kind(), RasterKind::kIntensity);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y.pixels()[i];
    EXPECT_LE(std::abs(back.pixels()[i] - v), 1e-12 * std::max(v, eps));
  }
}

TEST(LogTransform, EpsilonScalesWithMax) {
  Raster y(2, 2);
  EXPECT_DOUBLE_EQ(log_epsilon_for(y), 1e-3);
  y(1, 1) = 500.0;
  EXPECT_DOUBLE_EQ(log_epsilon_for(y), 0.5);
  EXPECT_DOUBLE_EQ(log_epsilon_for(y, 1e-2), 5.0);
  EXPECT_THROW(log_epsilon_for(y, 0.0), ParameterError);
}

TEST(YeoJohnson, WorkedExamples) {
  EXPECT_DOUBLE_EQ(yeo_johnson(3.0, 1.0), 3.0);
  EXPECT_NEAR(yeo_johnson(std::numbers::e - 1.0, 0.0), 1.0, 1e-15);
  // x < 0 branch evaluated by hand: -((1 - x)^(2 - lambda) - 1) / (2 - lambda).
  const double direct = -(std::pow(1.75, 1.5) - 1.0) / 1.5;
  EXPECT_NEAR(direct, -0.8766, 1e-4);
  EXPECT_NEAR(yeo_johnson(-0.75, 0.5), direct, 1e-14);
  EXPECT_NEAR(yeo_johnson(-0.75, 2.0), -std::log(1.75), 1e-15);
  EXPECT_EQ(yeo_johnson(0.0, 3.0), 0.0);
}

TEST(YeoJohnson, IdentityAtLambdaOne) {
  for (double x = -5.0; x <= 5.0; x += 0.25) EXPECT_NEAR(yeo_johnson(x, 1.0), x, 1e-14);
}

TEST(YeoJohnson, ContinuousInLambdaAtBranchPoints) {
  for (double x : {0.1, 0.9, 3.0, 7.5}) {
    const double at = yeo_johnson(x, 0.0);
    EXPECT_NEAR(yeo_johnson(x, 1e-7), at, 1e-5);
    EXPECT_NEAR(yeo_johnson(x, -1e-7), at, 1e-5);
  }
  for (double x : {-0.1, -0.9, -3.0, -7.5}) {
    const double at = yeo_johnson(x, 2.0);
    EXPECT_NEAR(yeo_johnson(x, 2.0 + 1e-7), at, 1e-5);
    EXPECT_NEAR(yeo_johnson(x, 2.0 - 1e-7), at, 1e-5);
  }
}

TEST(YeoJohnson, StrictlyIncreasingInX) {
  for (double lambda : {-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 2.5, 4.0}) {
    double prev = yeo_johnson(-6.0, lambda);
    for (double x = -5.9; x <= 6.0; x += 0.1) {
      const double cur = yeo_johnson(x, lambda);
      EXPECT_GT(cur, prev) << "lambda=" << lambda << " x=" << x;
      prev = cur;
    }
  }
}

TEST(YeoJohnson, DerivativeMatchesFiniteDifference) {
  for (double lambda : {-1.5, 0.0, 0.7, 2.0, 3.3}) {
    for (double x : {-3.0, -0.4, 0.3, 2.5}) {
      const double h = 1e-6;
      const double fd = (yeo_johnson(x + h, lambda) - yeo_johnson(x - h, lambda)) / (2 * h);
      EXPECT_NEAR(yeo_johnson_derivative(x, lambda), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(YeoJohnsonInverse, WorkedExamples) {
  for (double v = -4.0; v <= 4.0; v += 0.5) EXPECT_NEAR(yeo_johnson_inverse(v, 1.0), v, 1e-14);
  EXPECT_NEAR(yeo_johnson_inverse(1.0, 0.0), std::numbers::e - 1.0, 1e-14);
}

TEST(YeoJohnsonInverse, RejectsValuesOutsideTheRange) {
  // lambda < 0 bounds the range above by -1/lambda; lambda > 2 bounds it below by -1/(lambda - 2).
  EXPECT_THROW(yeo_johnson_inverse(1.5, -1.0), DomainError);
  EXPECT_THROW(yeo_johnson_inverse(1.0, -1.0), DomainError);
  EXPECT_NO_THROW(yeo_johnson_inverse(0.99, -1.0));
  EXPECT_THROW(yeo_johnson_inverse(-1.0, 3.0), DomainError);
  EXPECT_NO_THROW(yeo_johnson_inverse(-0.99, 3.0));
  EXPECT_THROW(yeo_johnson_inverse(std::nan(""), 1.0), DomainError);

  const auto r = yeo_johnson_range(0.5);
  EXPECT_TRUE(std::isinf(r.lo) && std::isinf(r.hi));
  EXPECT_TRUE(r.contains(1e300));
}

TEST(YeoJohnsonInverse, RoundTripSweep) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = -5.0 + 10.0 * i / 99.0;
    for (int j = 0; j < 100; ++j) {
      const double lambda = -1.0 + 4.0 * j / 99.0;
      worst = std::max(worst, std::abs(x - yeo_johnson_inverse(yeo_johnson(x, lambda), lambda)));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(YeoJohnson, RasterOverloadsAreElementwise) {
  Raster img = support::random_raster(9, 7, 2, -3.0, 3.0);
  img.set_kind(RasterKind::kTransformed);
  const Raster f = yeo_johnson(img, 0.3);
  const Raster b = yeo_johnson_inverse(f, 0.3);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_EQ(f.pixels()[i], yeo_johnson(img.pixels()[i], 0.3));
    EXPECT_NEAR(b.pixels()[i], img.pixels()[i], 1e-12);
  }
}

TEST(Moments, SymmetricTwoPointSample) {
  std::vector<double> s;
  for (int i = 0; i < 1000; ++i) s.push_back(i % 2 ? 1.0 : -1.0);
  const auto m = moments(s);
  EXPECT_NEAR(m.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.skewness, 0.0, 1e-12);
  EXPECT_NEAR(m.excess_kurtosis, -2.0, 0.01);
}

TEST(Moments, GaussianBand) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n01;
  std::vector<double> s(1'000'000);
  for (double& x : s) x = n01(gen);
  const auto m = moments(s);
  EXPECT_LT(std::abs(m.skewness), 0.01);
  EXPECT_LT(std::abs(m.excess_kurtosis), 0.02);
  EXPECT_NEAR(m.variance, 1.0, 0.005);
}

TEST(Moments, ExponentialAnalyticValues) {
  std::mt19937_64 gen(32);
  std::exponential_distribution<double> e1(1.0);
  std::vector<double> s(1'000'000);
  for (double& x : s) x = e1(gen);
  const auto m = moments(s);
  EXPECT_NEAR(m.skewness, 2.0, 0.1);
  EXPECT_NEAR(m.excess_kurtosis, 6.0, 0.6);
}

TEST(Moments, RejectsTinyOrConstantSamples) {
  const std::vector<double> three{1.0, 2.0, 3.0};
  EXPECT_THROW(moments(three), ParameterError);
  const std::vector<double> flat(10, 4.0);
  EXPECT_THROW(moments(flat), DegenerateInputError);
}

TEST(LambdaGrid, CoversDefaultRange) {
  const auto g = lambda_grid(-2.0, 4.0, 0.01);
  ASSERT_EQ(g.size(), 601u);
  EXPECT_DOUBLE_EQ(g.front(), -2.0);
  EXPECT_NEAR(g.back(), 4.0, 1e-12);
  EXPECT_NEAR(g[300], 1.0, 1e-12);
  EXPECT_THROW(lambda_grid(1.0, 0.0, 0.1), ParameterError);
  EXPECT_THROW(lambda_grid(0.0, 1.0, 0.0), ParameterError);
}

TEST(SelectLambda, GaussianSamplesDoNoWorseThanIdentity) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;
  std::vector<double> s(20'000);
  for (double& x : s) x = n01(gen);
  const auto grid = lambda_grid(-2.0, 4.0, 0.01);
  const auto pick = select_lambda(s, grid);
  std::vector<double> at_one(s.begin(), s.end());
  EXPECT_LE(pick.objective, gaussianity_objective(moments(at_one)) + 1e-12);
}

TEST(SelectLambda, GaussianizesSingleLookLogSpeckle) {
  const auto noise = sample_gamma_noise(Looks(1.0), 20'000, 17);
  std::vector<double> logs;
  for (double n : noise) logs.push_back(std::log(n));
  const auto pick = select_lambda(logs, lambda_grid(-2.0, 4.0, 0.01));
  EXPECT_LT(pick.objective, gaussianity_objective(moments(logs)));
  EXPECT_GT(pick.lambda, 1.0);  // log-gamma is left-skewed
}

TEST(SelectLambda, SingletonGridAndOrderInvariance) {
  auto s = sample_gamma_noise(Looks(2.0), 500, 3);
  const std::vector<double> one{0.5};
  EXPECT_EQ(select_lambda(s, one).lambda, 0.5);

  const auto grid = lambda_grid(-1.0, 3.0, 0.05);
  const auto a = select_lambda(s, grid);
  std::reverse(s.begin(), s.end());
  const auto b = select_lambda(s, grid);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(SelectLambda, RejectsDegenerateInput) {
  const std::vector<double> grid{1.0};
  EXPECT_THROW(select_lambda(std::vector<double>(200, 2.0), grid), DegenerateInputError);
  EXPECT_THROW(select_lambda(std::vector<double>(99, 2.0), grid), ParameterError);
  EXPECT_THROW(select_lambda(std::vector<double>(200, 2.0), std::vector<double>{}), ParameterError);
}
