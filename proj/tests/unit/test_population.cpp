#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pytype/population.hpp"

using namespace pytype;

TEST(PowerLaw, LeadingAtomAndDescriptor) {
  const auto pop = Population::power_law(2.0);
  EXPECT_NEAR(pop.p(1), 6.0 / (M_PI * M_PI), 1e-14);
  EXPECT_NEAR(pop.p(7), 6.0 / (M_PI * M_PI) / 49.0, 1e-15);
  ASSERT_TRUE(pop.has_regular_variation());
  EXPECT_DOUBLE_EQ(pop.rv().sigma0, 0.5);
  EXPECT_NEAR(pop.rv().L0.value(1e6), std::sqrt(6.0 / (M_PI * M_PI)), 1e-14);
  EXPECT_EQ(pop.kind(), PopulationKind::PowerLaw);
  EXPECT_DOUBLE_EQ(pop.alpha(), 2.0);
}

TEST(PowerLaw, Alpha0CountExample) {
  const auto pop = Population::power_law(2.0);
  EXPECT_EQ(pop.alpha0(100.0), 7u);
  EXPECT_EQ(pop.alpha0(100.0), static_cast<std::uint64_t>(std::floor(std::sqrt(600.0 / (M_PI * M_PI)))));
}

TEST(PowerLaw, Alpha0ClosedFormAndEnvelope) {
  for (double alpha : {1.5, 2.0, 3.0}) {
    const auto pop = Population::power_law(alpha);
    const double c = 1.0 / std::riemann_zeta(alpha);
    std::uint64_t prev = 0;
    for (double lu = 0.1; lu < 12.0; lu += 0.05) {
      const double u = std::pow(10.0, lu);
      const auto a = pop.alpha0(u);
      EXPECT_GE(a, prev);
      EXPECT_LE(a, u);
      EXPECT_LE(std::abs(static_cast<double>(a) - std::pow(c * u, 1.0 / alpha)), 1.0) << "u=" << u;
      prev = a;
    }
  }
}

TEST(PowerLaw, Alpha0MatchesDirectCount) {
  const auto pop = Population::power_law(2.0);
  std::vector<double> p;
  for (std::uint64_t j = 1; j <= 5000; ++j) p.push_back(pop.p(j));
  for (double u : {3.0, 17.0, 250.0, 9999.0, 1e5}) {
    EXPECT_EQ(pop.alpha0(u), oracle::count_at_least(p, u)) << u;
  }
}

TEST(Population, AtomsDecreaseAndTailsAgree) {
  std::vector<Population> pops{Population::power_law(2.0), Population::power_law(3.0),
                               Population::synthetic(0.5, 1.0), Population::synthetic(0.5, -1.0),
                               Population::synthetic(0.3, 0.0)};
  for (const auto& pop : pops) {
    double prev = 1.0;
    for (std::uint64_t j = 1; j < 3000; ++j) {
      const double pj = pop.p(j);
      EXPECT_GT(pj, 0.0);
      EXPECT_LE(pj, prev);
      EXPECT_NEAR(pop.tail_mass(j - 1) - pop.tail_mass(j), pj, 1e-13) << pop.describe() << " j=" << j;
      prev = pj;
    }
    EXPECT_NEAR(pop.tail_mass(0), 1.0, 1e-12) << pop.describe();
  }
}

TEST(Population, SampleIndexInvertsTail) {
  const auto pop = Population::synthetic(0.5, 1.0);
  for (double v : {1.0, 0.9, 0.5, 0.1, 1e-3, 1e-6, 1e-9}) {
    const auto j = pop.sample_index(v);
    EXPECT_LT(pop.tail_mass(j), v);
    if (j > 1) EXPECT_GE(pop.tail_mass(j - 1), v);
  }
  EXPECT_THROW(pop.sample_index(0.0), std::domain_error);
}

TEST(Synthetic, ZeroRMatchesPowerLawUpToConstant) {
  const auto syn = Population::synthetic(0.5, 0.0);
  const auto pl = Population::power_law(2.0);
  std::vector<double> ratio;
  for (double u : {1e3, 1e4, 1e5, 1e6, 1e7}) {
    ratio.push_back(static_cast<double>(syn.alpha0(u)) / static_cast<double>(pl.alpha0(u)));
  }
  for (std::size_t i = 1; i < ratio.size(); ++i) EXPECT_NEAR(ratio[i], ratio.back(), 0.05 * ratio.back());
}

TEST(Synthetic, LogFactorRegularity) {
  const auto pop = Population::synthetic(0.5, 1.0);
  const auto& L0 = pop.rv().L0;
  EXPECT_EQ(L0.family, SlowlyVarying::Family::LogPower);
  EXPECT_DOUBLE_EQ(L0.r, 1.0);
  // With Z the normaliser, α₀(u) = ⌊(u/Z)^{1/2} (1 + ln(u/Z))⌋ exactly.
  const double Z = std::exp(L0.log_shift);
  EXPECT_NEAR(L0.scale, 1.0 / std::sqrt(Z), 1e-15);
  for (double u : {1e3, 1e4, 1e5, 1e6, 1e8}) {
    const double A = std::sqrt(u / Z) * (1.0 + std::log(u / Z));
    EXPECT_LE(std::abs(static_cast<double>(pop.alpha0(u)) - A), 1.0) << u;
  }
}

TEST(Explicit, ValidationAndCounting) {
  const auto pop = Population::explicit_probs({0.5, 0.3, 0.2});
  EXPECT_EQ(pop.support_size().value(), 3u);
  EXPECT_EQ(pop.alpha0(4.0), 2u);
  EXPECT_THROW(pop.rv(), std::logic_error);
  EXPECT_THROW(Population::explicit_probs({0.5, 0.4}), std::domain_error);
  EXPECT_THROW(Population::explicit_probs({}), std::invalid_argument);
}

TEST(Population, JsonRoundTrip) {
  for (const auto& spec : {nlohmann::json{{"kind", "power_law"}, {"alpha", 2.5}},
                           nlohmann::json{{"kind", "synthetic"}, {"gamma", 0.4}, {"r", -1.0}},
                           nlohmann::json{{"kind", "explicit"}, {"p", {0.6, 0.4}}}}) {
    const auto pop = Population::from_json(spec);
    const auto again = Population::from_json(pop.to_json());
    for (std::uint64_t j = 1; j <= 2; ++j) EXPECT_DOUBLE_EQ(pop.p(j), again.p(j));
  }
  EXPECT_THROW(Population::from_json({{"kind", "zipf"}}), std::invalid_argument);
  EXPECT_THROW(Population::from_json({{"kind", "power_law"}, {"alpha", 1.0}}), std::domain_error);
}
