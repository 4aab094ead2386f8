#pragma once

#include <cstdint>

#include "pytype/partition.hpp"

namespace pytype {

struct PYParams {
  double sigma = 0.5;
  double M = 0.0;

  void validate() const;
};

/// σ values outside [kSigmaLo, kSigmaHi] are outside the evaluation window.
inline constexpr double kSigmaLo = 1e-9;
inline constexpr double kSigmaHi = 1.0 - 1e-9;

bool in_sigma_window(double sigma);

/// Log marginal likelihood Λ_n(σ, M) in occupancy form. Returns −∞ outside the σ window.
double log_eppf(const PartitionStats& stats, const PYParams& params);

/// ∂Λ_n/∂σ = Σ_{l<K} l/(M+lσ) − Σ_l Z_{l+1}/(l−σ). Throws outside the σ window.
double score_sigma(const PartitionStats& stats, const PYParams& params);

/// ∂²Λ_n/∂σ² = −Σ_{l<K} l²/(M+lσ)² − Σ_l Z_{l+1}/(l−σ)².
double hess_sigma(const PartitionStats& stats, const PYParams& params);

/// G_n(σ) = Σ_l Z_{l+1}/(l−σ).
double tie_sum(const PartitionStats& stats, double sigma);

/// h_{σ,M}(k) = 1 + Σ_{l=1}^{k−1} M/(M+lσ).
double h_precision(std::uint64_t k, double sigma, double M);

}  // namespace pytype
