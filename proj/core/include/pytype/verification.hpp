#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pytype {

struct VerificationResult {
  std::string name;
  bool passed = false;
  std::string summary;
  nlohmann::json details;
  double seconds = 0.0;
};

/// Σ over all set partitions of [n] of exp(log_eppf) equals 1, n ≤ n_max, on the
/// grid σ ∈ {0.25, 0.5, 0.75} × M ∈ {0, 0.5, 1, 5}.
VerificationResult verify_eppf_normalization(int n_max = 8, double tol = 1e-10);

/// Exact path probabilities of the sequential construction equal exp(log_eppf), per set
/// partition, for n ≤ n_max.
VerificationResult verify_sampler_law(int n_max = 5, double tol = 1e-12);

/// E₀(σ₀; σ₀) = 0 and Σ Γ(m−γ)/m! = Γ(1−γ)/γ.
VerificationResult verify_series_identities(double tol = 1e-7);

/// τ₂² against a central difference of E₀, and score/hessian against differences of
/// log_eppf on random partitions.
VerificationResult verify_derivatives(std::uint64_t seed = 20240611);

/// Σ_{m=l+1}^{n} C(n,m)p^{m−1}(1−p)^{n−m−1}(m−np) = (n−l)C(n,l)p^l(1−p)^{n−l−1}.
VerificationResult verify_binomial_identity(double tol = 1e-10);

/// Γ(n−γ)n^γ/Γ(n) ∈ [1 − c/n, 1 + c/n] with a bounded fitted c.
VerificationResult verify_stirling_ratio(double c_cap = 1.0);

/// Σ_{m≥1} s^m m^δ/m! ≤ s^δ e^s and Σ_{m≥2} s^m m^δ/m! ≤ s^δ(e^s − 1).
VerificationResult verify_poisson_moment_inequalities(double rel_slack = 1e-12);

/// Expansion of Σ_{i=1}^{K−1} ln(M+iσ) with remainder ≤ c(M/σ+1)²/K.
VerificationResult verify_log_sum_expansion(double c_cap = 1.0);

/// E₀,ₙ by the atom identity against piecewise quadrature on a finite population.
VerificationResult verify_E0n_quadrature(double tol = 1e-6);

/// Chi-square test of sampled PY(σ, M) partitions of size 4 against the EPPF.
VerificationResult verify_sampler_frequencies(std::uint64_t seed = 20240612);

/// The full invariant suite. `fast` omits the Monte Carlo and quadrature cross-checks.
std::vector<VerificationResult> run_verification(bool fast);

}  // namespace pytype
