#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pytype/likelihood.hpp"

using namespace pytype;

namespace {

const std::vector<double> kSigmas{0.25, 0.5, 0.75};
const std::vector<double> kMs{0.0, 0.5, 1.0, 5.0};

}  // namespace

TEST(LogEppf, Examples) {
  EXPECT_NEAR(log_eppf(PartitionStats::from_block_sizes({2}), {0.5, 1.0}), std::log(0.25), 1e-14);
  EXPECT_NEAR(log_eppf(PartitionStats::from_block_sizes({1, 1, 1}), {0.5, 1.0}), std::log(0.5), 1e-14);
}

TEST(LogEppf, OutsideWindowIsMinusInfinity) {
  const auto st = PartitionStats::from_block_sizes({2, 1});
  EXPECT_EQ(log_eppf(st, {0.0, 1.0}), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(log_eppf(st, {1.0, 1.0}), -std::numeric_limits<double>::infinity());
}

TEST(LogEppf, MatchesProductFormulaOnRandomPartitions) {
  oracle::PartitionGen gen(41);
  for (int t = 0; t < 400; ++t) {
    const auto sizes = gen.sizes(12, 8);
    const double s = gen.uniform(0.02, 0.98);
    const double M = gen.uniform(0.0, 10.0);
    const double ref = std::log(static_cast<double>(oracle::eppf_product(sizes, s, M)));
    EXPECT_NEAR(log_eppf(PartitionStats::from_block_sizes(sizes), {s, M}), ref, 1e-11 * std::max(1.0, std::abs(ref)));
  }
}

TEST(LogEppf, NormalizesOverAllSetPartitions) {
  for (int n = 1; n <= 8; ++n) {
    const auto parts = oracle::set_partitions(n);
    for (double s : kSigmas) {
      for (double M : kMs) {
        long double tot = 0.0L;
        for (const auto& p : parts) {
          tot += std::exp(static_cast<long double>(log_eppf(PartitionStats::from_block_sizes(oracle::sizes_of(p)), {s, M})));
        }
        EXPECT_NEAR(static_cast<double>(tot), 1.0, 1e-10) << "n=" << n << " sigma=" << s << " M=" << M;
      }
    }
  }
  EXPECT_EQ(oracle::set_partitions(8).size(), 4140u);
}

TEST(LogEppf, EqualsSequentialConstructionLaw) {
  for (int n = 1; n <= 5; ++n) {
    for (const auto& p : oracle::set_partitions(n)) {
      for (double s : kSigmas) {
        for (double M : kMs) {
          const double path = static_cast<double>(oracle::crp_path_probability(p, s, M));
          const double e = std::exp(log_eppf(PartitionStats::from_block_sizes(oracle::sizes_of(p)), {s, M}));
          EXPECT_NEAR(path, e, 1e-12);
        }
      }
    }
  }
}

TEST(Score, MatchesFiniteDifference) {
  oracle::PartitionGen gen(42);
  for (int t = 0; t < 200; ++t) {
    const auto st = PartitionStats::from_block_sizes(gen.sizes(60, 30));
    const double s = gen.uniform(0.05, 0.95);
    const double M = gen.uniform(0.0, 10.0);
    const double h = 1e-6;
    const double fd = (log_eppf(st, {s + h, M}) - log_eppf(st, {s - h, M})) / (2 * h);
    EXPECT_NEAR(score_sigma(st, {s, M}), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Hessian, MatchesFiniteDifferenceAndIsNegative) {
  oracle::PartitionGen gen(43);
  for (int t = 0; t < 200; ++t) {
    const auto st = PartitionStats::from_block_sizes(gen.sizes(60, 30));
    const double M = gen.uniform(0.0, 10.0);
    for (double s = 0.02; s < 0.99; s += 0.07) {
      const double h = 1e-5;
      const double fd = (score_sigma(st, {s + h, M}) - score_sigma(st, {s - h, M})) / (2 * h);
      const double hs = hess_sigma(st, {s, M});
      EXPECT_NEAR(hs, fd, 1e-4 * std::abs(fd));
      EXPECT_LT(hs, 0.0);
    }
  }
}

TEST(Score, DecompositionIdentity) {
  oracle::PartitionGen gen(44);
  for (int t = 0; t < 200; ++t) {
    const auto st = PartitionStats::from_block_sizes(gen.sizes(80, 20));
    const double s = gen.uniform(0.05, 0.95);
    const double M = gen.uniform(0.0, 8.0);
    const double K = static_cast<double>(st.K());
    const double rhs = K / s - tie_sum(st, s) - h_precision(st.K(), s, M) / s;
    const double lhs = score_sigma(st, {s, M});
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Score, OutsideWindowThrows) {
  const auto st = PartitionStats::from_block_sizes({2, 1});
  EXPECT_ANY_THROW(score_sigma(st, {0.0, 1.0}));
  EXPECT_ANY_THROW(score_sigma(st, {1.0, 1.0}));
}

TEST(HPrecision, Example) {
  EXPECT_NEAR(h_precision(3, 0.5, 1.0), 1.0 + 1.0 / 1.5 + 1.0 / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(h_precision(7, 0.5, 0.0), 1.0);
}

TEST(TieSum, DirectEvaluation) {
  const auto st = PartitionStats::from_block_sizes({4, 2, 1});
  // Z₂ = 2, Z₃ = 1, Z₄ = 1.
  const double s = 0.3;
  EXPECT_NEAR(tie_sum(st, s), 2 / (1 - s) + 1 / (2 - s) + 1 / (3 - s), 1e-15);
}
