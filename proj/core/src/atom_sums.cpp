#include "pytype/atom_sums.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pytype/numerics.hpp"

namespace pytype {

namespace {

// Number of atoms with p_j ≥ thresh (p is nonincreasing).
std::uint64_t count_atoms_above(const Population& pop, double thresh) {
  if (pop.p(1) < thresh) return 0;
  std::uint64_t lo = 1;
  std::uint64_t hi = 2;
  while (pop.p(hi) >= thresh) {
    lo = hi;
    if (hi >= (std::uint64_t{1} << 61)) return hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pop.p(mid) >= thresh) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

AtomSums compute(const Population& pop, double n, double sigma, const AtomSumOptions& opts,
                 bool full) {
  if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("atom sums: n must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::domain_error("atom sums: sigma must lie in (0,1)");
  if (!(opts.eps > 0.0 && opts.eps < 0.1)) throw std::invalid_argument("atom sums: eps out of range");

  AtomSums out;
  std::uint64_t J = count_atoms_above(pop, opts.eps / n);
  out.eps_used = opts.eps;
  if (J > opts.max_atoms) {
    J = opts.max_atoms;
    out.eps_used = n * pop.p(J + 1);
  }
  out.head_atoms = J;

  // g and ġ tables over the range any head atom can reach.
  const double lam_max = n * pop.p(1);
  const auto kmax = static_cast<std::size_t>(std::ceil(lam_max + 10.0 * std::sqrt(lam_max) + 60.0));
  std::vector<double> g(kmax + 1, 0.0);
  std::vector<double> gd(kmax + 1, 0.0);
  {
    numerics::KahanSum a;
    numerics::KahanSum b;
    for (std::size_t k = 2; k <= kmax; ++k) {
      const double d = static_cast<double>(k - 1) - sigma;
      a += 1.0 / d;
      b += 1.0 / (d * d);
      g[k] = a.value();
      gd[k] = b.value();
    }
  }

  std::array<numerics::KahanSum, 8> acc;
  for (std::uint64_t j = J; j >= 1; --j) {
    const double lam = n * pop.p(j);
    const double mode = std::floor(lam);
    const double w = std::ceil(10.0 * std::sqrt(lam) + 30.0);
    const auto lo = static_cast<std::size_t>(std::max(0.0, mode - w));
    const auto hi = static_cast<std::size_t>(std::min(static_cast<double>(kmax), mode + w));
    const auto km = static_cast<std::size_t>(mode);
    const double pm = std::exp(mode * std::log(lam) - lam - numerics::log_gamma(mode + 1.0));
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, ed = 0.0;
    auto visit = [&](std::size_t k, double pk) {
      const double gk = g[k];
      e1 += pk * gk;
      ed += pk * gd[k];
      if (full) {
        e2 += pk * gk * gk;
        e3 += pk * gk * gk * gk;
      }
    };
    visit(km, pm);
    double pk = pm;
    for (std::size_t k = km; k > lo; --k) {
      pk *= static_cast<double>(k) / lam;
      visit(k - 1, pk);
    }
    pk = pm;
    for (std::size_t k = km; k < hi; ++k) {
      pk *= lam / static_cast<double>(k + 1);
      visit(k + 1, pk);
    }
    const double em = std::exp(-lam);
    const double one_minus = -std::expm1(-lam);
    acc[0] += one_minus;
    acc[2] += e1;
    acc[3] += ed;
    if (full) {
      acc[1] += em * one_minus;
      acc[4] += e2;
      acc[5] += e1 * e1;
      acc[6] += em * e1;
      acc[7] += e3;
    }
  }

  // Cubic expansion for the atoms with λ < eps, through S_k = Σ λ_j^k.
  const double S1 = n * pop.tail_power_sum(J, 1);
  const double S2 = n * n * pop.tail_power_sum(J, 2);
  const double S3 = n * n * n * pop.tail_power_sum(J, 3);
  const double g2 = 1.0 / (1.0 - sigma);
  const double g3 = g2 + 1.0 / (2.0 - sigma);
  const double gd2 = g2 * g2;
  const double gd3 = gd2 + 1.0 / ((2.0 - sigma) * (2.0 - sigma));
  auto moment = [&](double a2, double a3) { return a2 / 2.0 * S2 + (a3 / 6.0 - a2 / 2.0) * S3; };
  acc[0] += S1 - S2 / 2.0 + S3 / 6.0;
  acc[2] += moment(g2, g3);
  acc[3] += moment(gd2, gd3);
  if (full) {
    acc[1] += S1 - 1.5 * S2 + 7.0 / 6.0 * S3;
    acc[4] += moment(g2 * g2, g3 * g3);
    acc[6] += g2 / 2.0 * S2 + (g3 / 6.0 - g2) * S3;
    acc[7] += moment(g2 * g2 * g2, g3 * g3 * g3);
  }
  for (std::size_t i = 0; i < 8; ++i) out.value[i] = acc[i].value();
  return out;
}

}  // namespace

AtomSums atom_sums(const Population& pop, double n, double sigma, const AtomSumOptions& opts) {
  return compute(pop, n, sigma, opts, true);
}

AtomSums atom_sums_first_order(const Population& pop, double n, double sigma,
                               const AtomSumOptions& opts) {
  return compute(pop, n, sigma, opts, false);
}

}  // namespace pytype
