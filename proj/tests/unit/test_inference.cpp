#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pytype/asymptotics.hpp"
#include "pytype/estimators.hpp"
#include "pytype/inference.hpp"
#include "pytype/sampler.hpp"
#include "pytype/stats_util.hpp"

using namespace pytype;

namespace {

PartitionStats py_sample(std::uint64_t n, std::uint64_t rep, double M = 1.0) {
  return sample_py_partition(0.5, M, n, RngStream{71, rep});
}

}  // namespace

TEST(Prior, DensitiesAndValidation) {
  const auto u = PriorSpec::uniform();
  EXPECT_DOUBLE_EQ(u.log_density_sigma(0.3), 0.0);
  const auto b = PriorSpec::beta(2.0, 2.0);
  EXPECT_NEAR(b.log_density_sigma(0.5), std::log(6.0 * 0.25), 1e-14);
  EXPECT_THROW(PriorSpec::beta(0.0, 1.0).validate(), std::exception);
  PriorSpec m;
  m.m_prior = PriorSpec::M::UniformInterval;
  m.M_max = -1.0;
  EXPECT_THROW(m.validate(), std::exception);
  const auto again = PriorSpec::from_json(b.to_json());
  EXPECT_EQ(again.to_json(), b.to_json());
}

TEST(Posterior, CellMassesNormalize) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto st = py_sample(3000, r);
    for (const auto& prior : {PriorSpec::uniform(), PriorSpec::beta(2, 2, 0.5)}) {
      const auto post = posterior_sigma(st, prior);
      double tot = 0.0;
      for (double m : post.cell_mass) tot += m;
      EXPECT_NEAR(tot, 1.0, 1e-12);
      EXPECT_EQ(post.edges.size(), post.cell_mass.size() + 1);
      EXPECT_LE(post.quantile(0.1), post.quantile(0.5));
      EXPECT_LE(post.quantile(0.5), post.quantile(0.9));
    }
  }
}

TEST(Posterior, UniformPriorOnPrecisionNormalizes) {
  PriorSpec p;
  p.m_prior = PriorSpec::M::UniformInterval;
  p.M_max = 20.0;
  const auto post = posterior_sigma(py_sample(2000, 9), p);
  double tot = 0.0;
  for (double m : post.joint_mass) tot += m;
  EXPECT_NEAR(tot, 1.0, 1e-12);
  EXPECT_FALSE(post.M_nodes.empty());
}

TEST(Posterior, GridRefinementIsStable) {
  const auto st = py_sample(5000, 2);
  GridOptions coarse;
  GridOptions fine;
  fine.dense_nodes = 2 * coarse.dense_nodes - 1;
  const auto a = posterior_sigma(st, PriorSpec::uniform(), coarse);
  const auto b = posterior_sigma(st, PriorSpec::uniform(), fine);
  EXPECT_NEAR(a.mean, b.mean, 1e-8);
  const auto e = mle_sigma(st, 1.0);
  const double var = 1.0 / -hess_sigma(st, {e.sigma_hat, 1.0});
  EXPECT_NEAR(bvm_gap(a, e.sigma_hat, var), bvm_gap(b, e.sigma_hat, var), 1e-4);
}

TEST(Posterior, SpreadMatchesAsymptoticSd) {
  const auto st = py_sample(10000, 3);
  const auto post = posterior_sigma(st, PriorSpec::uniform());
  const auto e = mle_sigma(st, 1.0);
  const double target = 1.0 / std::sqrt(alpha_hat(st, e.sigma_hat) * tau2_sq(e.sigma_hat));
  EXPECT_NEAR(post.sd, target, 0.25 * target);
}

TEST(CellTv, MetricProperties) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> q{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> r{0.7, 0.1, 0.1, 0.1};
  EXPECT_EQ(cell_tv(p, p), 0.0);
  EXPECT_DOUBLE_EQ(cell_tv(p, q), cell_tv(q, p));
  EXPECT_NEAR(cell_tv(p, q), 0.2, 1e-15);
  EXPECT_LE(cell_tv(p, r), cell_tv(p, q) + cell_tv(q, r) + 1e-15);
  EXPECT_LE(cell_tv(q, r), cell_tv(q, p) + cell_tv(p, r) + 1e-15);
}

TEST(BvmGap, FarShiftIsNearlyDisjoint) {
  const auto st = py_sample(20000, 4);
  const auto post = posterior_sigma(st, PriorSpec::uniform());
  const double gap = bvm_gap(post, post.mean + 5.0 * post.sd, post.sd * post.sd);
  EXPECT_GE(gap, 0.97);
  EXPECT_NEAR(gap, oracle::normal_shift_tv(5.0), 0.02);
  EXPECT_LT(bvm_gap(post, post.mean, post.sd * post.sd), 0.05);
  EXPECT_THROW(bvm_gap(post, 0.5, 0.0), std::domain_error);
}

TEST(BvmGap, ShrinksWithSampleSize) {
  std::vector<double> med;
  for (std::uint64_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> gaps;
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto st = sample_py_partition(0.5, 1.0, n, RngStream{72 + n, r});
      const auto e = mle_sigma(st, 1.0);
      if (!e.interior()) continue;
      const auto post = posterior_sigma(st, PriorSpec::uniform());
      gaps.push_back(bvm_gap(post, e.sigma_hat, 1.0 / (alpha_hat(st, e.sigma_hat) * tau2_sq(e.sigma_hat))));
    }
    med.push_back(stats::median(gaps));
  }
  EXPECT_GT(med[0], med[1]);
  EXPECT_GT(med[1], med[2]);
}

TEST(PosteriorMean, ApproachesMleOnScale) {
  std::vector<double> med;
  for (std::uint64_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> d;
    for (std::uint64_t r = 0; r < 30; ++r) {
      const auto st = sample_py_partition(0.5, 1.0, n, RngStream{73 + n, r});
      const auto e = mle_sigma(st, 1.0);
      if (!e.interior()) continue;
      const auto post = posterior_sigma(st, PriorSpec::uniform());
      d.push_back(std::sqrt(alpha_hat(st, e.sigma_hat)) * std::abs(post.mean - e.sigma_hat));
    }
    med.push_back(stats::median(d));
  }
  EXPECT_GT(med[0], med[2]);
}

TEST(PosteriorSummary, IntervalBracketsMean) {
  const auto post = posterior_sigma(py_sample(4000, 5), PriorSpec::uniform());
  const auto s = posterior_mean_and_interval(post, 0.9);
  EXPECT_LT(s.lower, s.mean);
  EXPECT_GT(s.upper, s.mean);
  EXPECT_THROW(posterior_mean_and_interval(post, 1.0), std::domain_error);
}

TEST(Forensic, ReciprocalIdentityWithFixedPrecision) {
  for (double M : {0.0, 1.0, 7.5}) {
    auto sizes = py_sample(3000, 6).block_sizes();
    sizes.push_back(1);
    const auto st = PartitionStats::from_block_sizes(sizes);
    PriorSpec prior = PriorSpec::uniform(M);
    const auto fr = forensic_lr(st, prior);
    const auto post = posterior_sigma(st, prior);
    double e = 0.0;
    for (std::size_t i = 0; i < post.cell_mass.size(); ++i) e += post.cell_mass[i] * (1.0 - post.sigma_nodes[i]);
    EXPECT_NEAR(fr.lr * e, static_cast<double>(st.n()) + M, 1e-10 * static_cast<double>(st.n()));
    EXPECT_EQ(fr.database_size, st.n() - 1);
    EXPECT_GT(fr.lr, static_cast<double>(st.n()));
  }
}

TEST(Forensic, RequiresASingleton) {
  EXPECT_THROW(forensic_lr(PartitionStats::from_block_sizes({3, 2}), PriorSpec::uniform()), std::invalid_argument);
}

TEST(Forensic, InverseMatchIntensityIsCentred) {
  const int R = 60;
  std::vector<double> v;
  for (int r = 0; r < R; ++r) {
    auto sizes = py_sample(10000, 100 + r).block_sizes();
    sizes.push_back(1);
    const auto st = PartitionStats::from_block_sizes(sizes);
    const auto fr = forensic_lr(st, PriorSpec::uniform(1.0));
    v.push_back(1.0 / (static_cast<double>(fr.database_size) * fr.phi_mean));
  }
  const auto m = stats::moments(v);
  const double sd = std::sqrt(m.variance);
  EXPECT_NEAR(m.mean, 1.0 / (1.0 - 0.5), 3.0 * sd);
  int inside = 0;
  for (double x : v) inside += std::abs(x - 2.0) <= 3.0 * sd;
  EXPECT_GE(inside, R - 3);
}
