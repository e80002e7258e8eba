#include "pinlab/numerics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace pinlab {
namespace {

TEST(LogSumExp, PairOfOnes) {
  const std::vector<double> v{0.0, 0.0};
  EXPECT_NEAR(log_sum_exp(std::span<const double>(v)), std::log(2.0), 1e-15);
}

TEST(LogSumExp, EmptyIsZeroState) {
  const std::vector<LogValue> v;
  EXPECT_TRUE(log_sum_exp(std::span<const LogValue>(v)).is_zero());
}

TEST(LogSumExp, DominatedTermDoesNotUnderflow) {
  const std::vector<double> v{0.0, -800.0};
  const double r = log_sum_exp(std::span<const double>(v));
  EXPECT_EQ(r, 0.0 + std::log1p(std::exp(-800.0)));
  EXPECT_TRUE(std::isfinite(r));
}

TEST(LogSumExp, RejectsNaN) {
  const std::vector<double> v{0.0, std::nan("")};
  EXPECT_THROW(log_sum_exp(std::span<const double>(v)), numeric_domain_error);
}

TEST(LogSumExp, ZeroStateAbsorbsAndIsIdentity) {
  const LogValue z = LogValue::zero();
  EXPECT_TRUE((z * LogValue{3.0}).is_zero());
  const std::vector<LogValue> v{LogValue{1.5}, z};
  EXPECT_DOUBLE_EQ(log_sum_exp(std::span<const LogValue>(v)).log_magnitude, 1.5);
}

TEST(LogSumExp, PermutationInvariant) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-700.0, 700.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(1 + rep % 37);
    for (auto& x : v) x = u(gen);
    const double a = log_sum_exp(std::span<const double>(v));
    std::shuffle(v.begin(), v.end(), gen);
    EXPECT_NEAR(log_sum_exp(std::span<const double>(v)), a, 1e-12);
    LogAccumulator acc;
    for (double x : v) acc.add(x);
    EXPECT_NEAR(acc.log_value(), a, 1e-12);
  }
}

TEST(Jet, SquareOfLinear) {
  const std::vector<double> lin{1.0, 1.0, 0.0};
  const auto j = ScaledJet::from_polynomial(lin);
  const auto sq = jet_mul(j, j);
  const auto c = sq.expanded_coeffs();
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], 2.0);
  EXPECT_DOUBLE_EQ(c[2], 1.0);
}

TEST(Jet, BoltzmannWeightCoefficients) {
  // e^{h + omega + dh} accumulated onto the unit jet at order 3.
  const auto one = ScaledJet::constant(3, 0.0);
  const auto boltz = ScaledJet::exponential(3, 0.7, 1.0);
  const auto j = jet_mul_acc(jet_zero(3), jet_mul(one, boltz), LogValue::one());
  EXPECT_NEAR(j.scale, 0.7, 1e-15);
  const auto c = j.expanded_coeffs();
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], 1.0);
  EXPECT_DOUBLE_EQ(c[2], 0.5);
  EXPECT_NEAR(c[3], 1.0 / 6.0, 1e-16);
}

TEST(Jet, OrderMismatchThrows) {
  EXPECT_THROW(jet_mul_acc(ScaledJet(2), ScaledJet(3), LogValue::one()), std::invalid_argument);
}

// Oracle: naive convolution of plain coefficient vectors.
std::vector<double> naive_product(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

TEST(Jet, RandomProductsMatchNaiveConvolution) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(5), b(5);
    for (auto& x : a) x = u(gen);
    for (auto& x : b) x = u(gen);
    a[0] = 1.0;
    b[0] = 1.0;
    const auto got = jet_mul(ScaledJet::from_polynomial(a), ScaledJet::from_polynomial(b));
    const auto want = naive_product(a, b);
    const auto c = got.expanded_coeffs();
    EXPECT_NEAR(got.scale, 0.0, 1e-15);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(c[k], want[k], 1e-14) << k;
  }
}

TEST(Jet, AccumulationOrderDoesNotMatter) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_real_distribution<double> s(-30.0, 30.0);
  std::vector<ScaledJet> terms;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> c(9);
    for (auto& x : c) x = u(gen);
    auto j = ScaledJet::from_polynomial(c);
    j.scale += s(gen);
    j.tilt = s(gen) / 10.0;
    terms.push_back(j);
  }
  auto accumulate = [&](const std::vector<ScaledJet>& ts) {
    ScaledJet acc = jet_zero(8);
    for (const auto& t : ts) acc = jet_mul_acc(acc, t, LogValue::one());
    return acc;
  };
  const auto ref = accumulate(terms);
  const auto ref_c = ref.expanded_coeffs();
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(terms.begin(), terms.end(), gen);
    const auto got = accumulate(terms);
    const auto c = got.expanded_coeffs();
    EXPECT_NEAR(got.scale, ref.scale, 1e-12);
    for (std::size_t k = 0; k < c.size(); ++k)
      EXPECT_LE(std::abs(c[k] - ref_c[k]), 1e-10 * std::max(1.0, std::abs(ref_c[k]))) << k;
  }
}

TEST(LogOfJet, LogOnePlusX) {
  const std::vector<double> c{1.0, 1.0, 0.0, 0.0};
  const auto l = log_of_jet(ScaledJet::from_polynomial(c));
  EXPECT_DOUBLE_EQ(l[0], 0.0);
  EXPECT_DOUBLE_EQ(l[1], 1.0);
  EXPECT_DOUBLE_EQ(l[2], -0.5);
  EXPECT_NEAR(l[3], 1.0 / 3.0, 1e-16);
}

TEST(LogOfJet, ExponentialIsLinear) {
  const double c = 2.5;
  for (bool via_tilt : {false, true}) {
    ScaledJet j(5);
    if (via_tilt) {
      j.tilt = c;
    } else {
      for (std::size_t k = 1; k <= 5; ++k) j.coeffs[k] = std::pow(c, k) / factorial(static_cast<int>(k));
    }
    const auto l = log_of_jet(j);
    EXPECT_NEAR(l[0], 0.0, 1e-15);
    EXPECT_NEAR(l[1], c, 1e-14);
    for (std::size_t k = 2; k <= 5; ++k) EXPECT_NEAR(l[k], 0.0, 1e-12) << k;
  }
}

TEST(LogOfJet, InverseOfJetExp) {
  const std::vector<double> lin{0.3, 1.7, 0.0, 0.0, 0.0};
  const auto back = log_of_jet(jet_exp(lin));
  for (std::size_t k = 0; k < lin.size(); ++k) EXPECT_NEAR(back[k], lin[k], 1e-14);
}

TEST(LogOfJet, MatchesFiniteDifferences) {
  // Oracle: central differences of log of the evaluated polynomial.
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.05, 0.6);
  const double step = 1e-3;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> c(5);
    for (auto& x : c) x = u(gen);
    c[0] = 1.0;
    auto logf = [&](double x) {
      double s = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
      return std::log(s);
    };
    const auto l = log_of_jet(ScaledJet::from_polynomial(c));
    const double d1 = (logf(step) - logf(-step)) / (2 * step);
    const double d2 = (logf(step) - 2 * logf(0) + logf(-step)) / (step * step);
    const double d3 = (logf(2 * step) - 2 * logf(step) + 2 * logf(-step) - logf(-2 * step)) / (2 * step * step * step);
    EXPECT_LE(std::abs(l[1] - d1), 1e-5 * std::max(1.0, std::abs(d1)));
    EXPECT_LE(std::abs(2 * l[2] - d2), 1e-5 * std::max(1.0, std::abs(d2)));
    EXPECT_LE(std::abs(6 * l[3] - d3), 1e-5 * std::max(1.0, std::abs(d3)) + 1e-5);
  }
}

TEST(Recenter, PreservesFunction) {
  const std::vector<double> c{1.0, 3.0, 2.0, 0.5, 0.1};
  auto j = ScaledJet::from_polynomial(c);
  const auto before = log_of_jet(j);
  recenter(j);
  EXPECT_EQ(j.coeffs[1], 0.0);
  const auto after = log_of_jet(j);
  for (std::size_t k = 0; k < before.size(); ++k) EXPECT_NEAR(after[k], before[k], 1e-12);
}

}  // namespace
}  // namespace pinlab
