#include "pytype/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "pytype/numerics.hpp"

namespace pytype {

namespace {

void check_py(double sigma, double M) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw std::domain_error("sigma must lie in [0,1)");
  if (!(M >= 0.0) || !std::isfinite(M)) throw std::domain_error("M must be finite and ≥ 0");
  if (!(M + sigma > 0.0)) throw std::domain_error("M + sigma must be positive");
}

OccupancyCounts to_counts(std::unordered_map<std::uint64_t, std::uint64_t>& tally,
                          OccupancyRegime regime, std::uint64_t n) {
  OccupancyCounts out;
  out.regime = regime;
  out.n = n;
  out.counts.assign(tally.begin(), tally.end());
  std::sort(out.counts.begin(), out.counts.end());
  return out;
}

}  // namespace

std::vector<std::uint64_t> sample_py_sequence(double sigma, double M, std::uint64_t n, Rng& rng) {
  check_py(sigma, M);
  std::vector<std::uint64_t> labels;
  labels.reserve(n);
  // Joining an existing block has total weight Σ(N_i − σ) = (k − K) + K(1 − σ).
  // The first part picks the block of a uniform non-founding customer (weight N_i − 1),
  // the second a uniform block.
  std::vector<std::uint64_t> non_founders;
  std::uint64_t K = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    std::uint64_t block;
    if (k == 0) {
      block = ++K;
    } else {
      const double kd = static_cast<double>(k);
      const double Kd = static_cast<double>(K);
      const double u = rng.uniform() * (M + kd);
      if (u < kd - Kd) {
        block = non_founders[rng.below(non_founders.size())];
        non_founders.push_back(block);
      } else if (u < kd - Kd + Kd * (1.0 - sigma)) {
        block = rng.below(K) + 1;
        non_founders.push_back(block);
      } else {
        block = ++K;
      }
    }
    labels.push_back(block);
  }
  return labels;
}

PartitionStats sample_py_partition(double sigma, double M, std::uint64_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_py_partition: n must be positive");
  const auto seq = sample_py_sequence(sigma, M, n, rng);
  std::vector<std::uint64_t> sizes;
  for (auto b : seq) {
    if (b > sizes.size()) sizes.push_back(0);
    ++sizes[b - 1];
  }
  return PartitionStats::from_block_sizes(std::move(sizes));
}

PartitionStats sample_py_partition(double sigma, double M, std::uint64_t n, RngStream stream) {
  Rng rng(stream);
  return sample_py_partition(sigma, M, n, rng);
}

std::vector<double> ppf_weights(const PartitionStats& stats, double sigma, double M) {
  check_py(sigma, M);
  if (stats.n() == 0) throw std::invalid_argument("ppf_weights: empty partition");
  const double denom = M + static_cast<double>(stats.n());
  std::vector<double> w;
  w.reserve(stats.K() + 1);
  numerics::KahanSum total;
  for (auto s : stats.block_sizes()) {
    w.push_back((static_cast<double>(s) - sigma) / denom);
    total += w.back();
  }
  w.push_back((M + static_cast<double>(stats.K()) * sigma) / denom);
  total += w.back();
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw std::logic_error("ppf_weights: weights do not sum to one");
  }
  return w;
}

std::vector<double> stick_breaking_weights(double sigma, double M, std::uint64_t k_trunc, Rng& rng) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw std::domain_error("sigma must lie in [0,1)");
  if (!(M > -sigma) || !std::isfinite(M)) throw std::domain_error("M must exceed -sigma");
  if (k_trunc == 0) throw std::invalid_argument("k_trunc must be positive");
  std::vector<double> w;
  w.reserve(k_trunc + 1);
  double remaining = 1.0;
  for (std::uint64_t i = 1; i <= k_trunc; ++i) {
    const auto [v, one_minus_v] = rng.beta_pair(1.0 - sigma, M + static_cast<double>(i) * sigma);
    w.push_back(remaining * v);
    remaining *= one_minus_v;
  }
  w.push_back(remaining);
  return w;
}

std::vector<std::uint64_t> sample_iid_sequence(const Population& pop, std::uint64_t n, Rng& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(pop.sample_index(rng.uniform_pos()));
  return out;
}

OccupancyCounts sample_iid(const Population& pop, std::uint64_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_iid: n must be positive");
  std::unordered_map<std::uint64_t, std::uint64_t> tally;
  for (std::uint64_t i = 0; i < n; ++i) ++tally[pop.sample_index(rng.uniform_pos())];
  return to_counts(tally, OccupancyRegime::Multinomial, n);
}

OccupancyCounts sample_iid(const Population& pop, std::uint64_t n, RngStream stream) {
  Rng rng(stream);
  return sample_iid(pop, n, rng);
}

OccupancyCounts sample_poissonized(const Population& pop, std::uint64_t n, Rng& rng) {
  std::unordered_map<std::uint64_t, std::uint64_t> tally;
  if (n == 0) return to_counts(tally, OccupancyRegime::Poissonized, 0);
  const double nd = static_cast<double>(n);
  const auto support = pop.support_size();
  // Head: p_j is nonincreasing, so walk until n p_j drops below the threshold.
  std::uint64_t J = 0;
  for (;;) {
    if (support && J >= *support) break;
    const double lam = nd * pop.p(J + 1);
    if (lam < kPoissonHeadMean) break;
    ++J;
    const auto c = rng.poisson(lam);
    if (c > 0) tally[J] += c;
  }
  const double tail = pop.tail_mass(J);
  if (tail > 0.0) {
    const std::uint64_t extra = rng.poisson(nd * tail);
    for (std::uint64_t i = 0; i < extra; ++i) {
      const std::uint64_t j = pop.sample_index(tail * rng.uniform_pos());
      ++tally[std::max(j, J + 1)];
    }
  }
  return to_counts(tally, OccupancyRegime::Poissonized, n);
}

OccupancyCounts sample_poissonized(const Population& pop, std::uint64_t n, RngStream stream) {
  Rng rng(stream);
  return sample_poissonized(pop, n, rng);
}

}  // namespace pytype
