#pragma once

#include <array>
#include <cstdint>

#include "pytype/population.hpp"

namespace pytype {

struct AtomSumOptions {
  /// Atoms with mean n p_j below eps are handled by a cubic expansion in n p_j.
  double eps = 1e-3;
  /// Cap on atoms evaluated one by one; eps is raised to respect it.
  std::uint64_t max_atoms = 4'000'000;
};

/// Deterministic sums over atoms of Poisson(λ_j = n p_j) expectations, X_j ~ Poisson(λ_j):
///   [0] Σ (1 − e^{−λ})          [1] Σ e^{−λ}(1 − e^{−λ})
///   [2] Σ E g_σ(X)              [3] Σ E ġ_σ(X)
///   [4] Σ E g_σ(X)²             [5] Σ (E g_σ(X))²
///   [6] Σ e^{−λ} E g_σ(X)       [7] Σ E g_σ(X)³
struct AtomSums {
  std::array<double, 8> value{};
  std::uint64_t head_atoms = 0;
  double eps_used = 0.0;
};

AtomSums atom_sums(const Population& pop, double n, double sigma, const AtomSumOptions& opts = {});

/// Only entries [0], [2] and [3]; the rest are zero. Cheaper, used for root finding.
AtomSums atom_sums_first_order(const Population& pop, double n, double sigma,
                               const AtomSumOptions& opts = {});

}  // namespace pytype
