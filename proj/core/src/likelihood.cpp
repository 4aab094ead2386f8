#include "pytype/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pytype/numerics.hpp"

namespace pytype {

namespace {

constexpr std::uint64_t kDirectRun = 32;

void check(const PartitionStats& stats, const PYParams& p) {
  if (stats.n() == 0) throw std::invalid_argument("likelihood: empty partition");
  if (!(p.M >= 0.0) || !std::isfinite(p.M)) throw std::domain_error("M must be finite and ≥ 0");
  if (std::isnan(p.sigma)) throw std::domain_error("sigma is NaN");
}

// Visit the runs l = lo..hi on which Z_{l+1} is constant and positive.
template <class F>
void for_each_run(const PartitionStats& stats, F&& f) {
  const auto& hist = stats.size_histogram();
  std::uint64_t remaining = stats.K();
  std::uint64_t prev = 1;
  for (const auto& [size, count] : hist) {
    if (size > prev) f(prev, size - 1, remaining);
    prev = std::max(prev, size);
    remaining -= count;
  }
}

}  // namespace

void PYParams::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::domain_error("sigma must lie in (0,1)");
  if (!(M >= 0.0) || !std::isfinite(M)) throw std::domain_error("M must be finite and ≥ 0");
}

bool in_sigma_window(double sigma) { return sigma >= kSigmaLo && sigma <= kSigmaHi; }

double log_eppf(const PartitionStats& stats, const PYParams& params) {
  check(stats, params);
  if (!in_sigma_window(params.sigma)) return -std::numeric_limits<double>::infinity();
  const double s = params.sigma;
  const double M = params.M;
  numerics::KahanSum acc;
  for (std::uint64_t l = 1; l < stats.K(); ++l) acc += std::log(M + static_cast<double>(l) * s);
  for_each_run(stats, [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t z) {
    acc += static_cast<double>(z) *
           numerics::log_ascending_factorial(static_cast<double>(lo) - s, hi - lo + 1);
  });
  const auto n = static_cast<double>(stats.n());
  if (stats.n() > 1) {
    // Σ_{i=1}^{n−1} ln(M+i) = ln Γ(n+M) − ln Γ(M+1).
    const double tail = numerics::log_gamma_ratio(n, M, 0.0) + numerics::log_gamma(n) -
                        numerics::log_gamma(M + 1.0);
    acc += -tail;
  }
  return acc.value();
}

double tie_sum(const PartitionStats& stats, double sigma) {
  numerics::KahanSum acc;
  for_each_run(stats, [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t z) {
    double run;
    if (hi - lo + 1 <= kDirectRun) {
      numerics::KahanSum r;
      for (std::uint64_t l = lo; l <= hi; ++l) r += 1.0 / (static_cast<double>(l) - sigma);
      run = r.value();
    } else {
      run = numerics::digamma(static_cast<double>(hi) + 1.0 - sigma) -
            numerics::digamma(static_cast<double>(lo) - sigma);
    }
    acc += static_cast<double>(z) * run;
  });
  return acc.value();
}

double score_sigma(const PartitionStats& stats, const PYParams& params) {
  check(stats, params);
  if (!in_sigma_window(params.sigma)) throw std::domain_error("score_sigma: sigma outside window");
  numerics::KahanSum acc;
  for (std::uint64_t l = 1; l < stats.K(); ++l) {
    const double ld = static_cast<double>(l);
    acc += ld / (params.M + ld * params.sigma);
  }
  acc += -tie_sum(stats, params.sigma);
  return acc.value();
}

double hess_sigma(const PartitionStats& stats, const PYParams& params) {
  check(stats, params);
  if (!in_sigma_window(params.sigma)) throw std::domain_error("hess_sigma: sigma outside window");
  const double s = params.sigma;
  numerics::KahanSum acc;
  for (std::uint64_t l = 1; l < stats.K(); ++l) {
    const double ld = static_cast<double>(l);
    const double t = ld / (params.M + ld * s);
    acc += -t * t;
  }
  for_each_run(stats, [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t z) {
    double run;
    if (hi - lo + 1 <= kDirectRun) {
      numerics::KahanSum r;
      for (std::uint64_t l = lo; l <= hi; ++l) {
        const double d = static_cast<double>(l) - s;
        r += 1.0 / (d * d);
      }
      run = r.value();
    } else {
      run = numerics::trigamma(static_cast<double>(lo) - s) -
            numerics::trigamma(static_cast<double>(hi) + 1.0 - s);
    }
    acc += -static_cast<double>(z) * run;
  });
  return acc.value();
}

double h_precision(std::uint64_t k, double sigma, double M) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::domain_error("sigma must lie in (0,1)");
  if (!(M >= 0.0) || !std::isfinite(M)) throw std::domain_error("M must be finite and ≥ 0");
  if (k == 0) throw std::invalid_argument("h_precision: k must be positive");
  numerics::KahanSum acc;
  acc += 1.0;
  if (M > 0.0) {
    for (std::uint64_t l = 1; l < k; ++l) acc += M / (M + static_cast<double>(l) * sigma);
  }
  return acc.value();
}

}  // namespace pytype
