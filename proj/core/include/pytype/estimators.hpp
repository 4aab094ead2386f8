#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pytype/likelihood.hpp"
#include "pytype/partition.hpp"

namespace pytype {

enum class Boundary { Interior, LowerSigma, UpperSigma, LowerM, UpperM };

std::string to_string(Boundary b);

struct EstimateOptions {
  double root_tol = 1e-10;    // in σ
  double golden_tol = 1e-6;   // in M
  int grid_points = 64;       // log-spaced M grid above 0.01, plus M = 0
  bool compute_sandwich = false;
};

struct EstimateResult {
  double sigma_hat = 0.0;
  std::optional<double> M_hat;
  Boundary boundary = Boundary::Interior;         // σ direction
  Boundary m_boundary = Boundary::Interior;       // M direction, profile fits only
  double score_at_opt = 0.0;
  double log_lik = 0.0;
  std::optional<double> se_sandwich;
  std::optional<double> se_curvature;
  std::map<std::string, double> diagnostics;
  std::uint64_t n = 0;
  std::uint64_t K = 0;

  bool interior() const { return boundary == Boundary::Interior; }
  nlohmann::json to_json() const;
};

/// Maximizer of σ ↦ Λₙ(σ, M) for fixed M.
EstimateResult mle_sigma(const PartitionStats& stats, double M, const EstimateOptions& opts = {});

/// Joint (σ̂, M̂) by maximizing the profile M ↦ Λₙ(σ̂_M, M) over [0, M_max].
EstimateResult profile_mle(const PartitionStats& stats, double M_max = 50.0,
                           const EstimateOptions& opts = {});

/// τ̂₁/(τ̂₂² √α̂ₙ) with τ̂'s at σ₀ = sigma_hat and α̂ₙ = Kₙ/Γ(1−sigma_hat).
double sandwich_se(const PartitionStats& stats, double sigma_hat);
/// Same, with τ₁², τ₂² supplied.
double sandwich_se(const PartitionStats& stats, double sigma_hat, double tau1_sq, double tau2_sq);

/// 1/√(−Λₙ″(σ̂)).
double se_curvature(const PartitionStats& stats, double sigma_hat, double M);

/// α̂ₙ = Kₙ/Γ(1−σ̂).
double alpha_hat(const PartitionStats& stats, double sigma_hat);

}  // namespace pytype
