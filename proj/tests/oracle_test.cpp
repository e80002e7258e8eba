#include "pinlab/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "pinlab/quenched_dp.hpp"
#include "test_support.hpp"

namespace pinlab {
namespace {

InterArrivalLaw toy_law() { return InterArrivalLaw::from_table({-std::log(2.0), -std::log(4.0)}); }

TEST(EnumeratePartition, Toy) {
  EXPECT_NEAR(oracle::enumerate_partition(toy_law(), 0.0, DisorderSample::constant(2, 0.0), 2), -std::log(2.0), 1e-15);
}

TEST(EnumeratePartition, SingleSite) {
  const auto inst = testing::random_instance(1, 1);
  EXPECT_NEAR(oracle::enumerate_partition(inst.law, inst.h, inst.omega, 1), inst.h + inst.omega.at(1) + inst.law.log_p(1),
              1e-15);
}

TEST(EnumeratePartition, ConfigurationCount) {
  const auto inst = testing::random_instance(2, 12);
  const auto set = oracle::enumerate_paths(inst.law, inst.h, inst.omega, 12);
  EXPECT_EQ(set.paths.size(), 1U << 11);
  EXPECT_THROW(oracle::enumerate_paths(inst.law, inst.h, inst.omega, 17), std::invalid_argument);
}

TEST(EnumeratePartition, AgreesWithDynamicProgram) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto inst = testing::random_instance(s, 1 + static_cast<int>(s % 14));
    EXPECT_NEAR(oracle::enumerate_partition(inst.law, inst.h, inst.omega, inst.n),
                log_partition(inst.law, inst.h, inst.omega, inst.n).log_z(), 1e-10);
  }
}

TEST(EnumerateExpectation, Normalization) {
  const auto inst = testing::random_instance(3, 9);
  EXPECT_NEAR(oracle::enumerate_expectation(inst.law, inst.h, inst.omega, 9, [](auto) { return 1.0; }), 1.0, 1e-14);
}

TEST(EnumerateExpectation, ToyFirstSite) {
  EXPECT_NEAR(oracle::enumerate_expectation(toy_law(), 0.0, DisorderSample::constant(2, 0.0), 2,
                                            [](auto x) { return 1.0 * x[1]; }),
              0.5, 1e-15);
}

TEST(EnumerateExpectation, SmallContactFraction) {
  const auto inst = testing::random_instance(4, 8);
  const double v = oracle::enumerate_expectation(inst.law, inst.h, inst.omega, 8, [](auto x) {
    int l = 0;
    for (std::size_t a = 1; a < x.size(); ++a) l += x[a];
    return l < 4 ? 1.0 : 0.0;
  });
  const auto law = contact_law(log_partition(inst.law, inst.h, inst.omega, 8));
  EXPECT_NEAR(v, std::exp(law.log_cdf_below(4.0)), 1e-12);
}

TEST(PureFreeEnergy, GeometricCritical) {
  EXPECT_NEAR(oracle::pure_model_free_energy(geometric_law(0.5, 200), 0.0), 0.0, 1e-12);
}

TEST(PureFreeEnergy, GeometricClosedForm) {
  EXPECT_NEAR(oracle::pure_model_free_energy(geometric_law(0.5, 200), std::log(3.0)), std::log(2.0), 1e-10);
}

TEST(PureFreeEnergy, AlphaOneAgainstDynamicProgram) {
  const auto law = build_law(1.0, EllConstant{1.0}, 4096, true);
  const double f = oracle::pure_model_free_energy(law, 2.0);
  const auto sys = log_partition(law, 2.0, DisorderSample::constant(4096, 0.0), 4096);
  EXPECT_NEAR(sys.log_z() / 4096.0, f, 1e-2);
  EXPECT_GT(f, 0.0);
}

TEST(PureFreeEnergy, ConvexNondecreasingAndAboveLowerBound) {
  const auto law = build_law(1.0, EllConstant{1.0}, 512, true);
  std::vector<double> hs, fs;
  for (double h = -1.0; h <= 3.0 + 1e-9; h += 0.25) {
    hs.push_back(h);
    fs.push_back(oracle::pure_model_free_energy(law, h));
  }
  for (std::size_t i = 0; i < fs.size(); ++i) {
    EXPECT_GE(fs[i], std::max(0.0, hs[i] + law.log_p(1)) - 1e-12);
    if (i > 0) {
      EXPECT_GE(fs[i], fs[i - 1] - 1e-12);
    }
    if (i > 0 && i + 1 < fs.size()) {
      EXPECT_GE(fs[i + 1] - 2 * fs[i] + fs[i - 1], -1e-8);
    }
  }
  EXPECT_EQ(fs.front(), 0.0);
}

}  // namespace
}  // namespace pinlab
