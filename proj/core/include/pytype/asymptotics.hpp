#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "pytype/atom_sums.hpp"
#include "pytype/numerics.hpp"
#include "pytype/population.hpp"

namespace pytype {

/// Σ_{m≥1} Γ(m−γ)/m!, which equals Γ(1−γ)/γ.
double sum_gamma_ratio(double gamma, const numerics::SeriesTolerance& tol = {});

/// Limit function E₀(σ) = Γ(1−σ₀)/σ − Σ_{m≥1} Γ(m+1−σ₀)/(m!(m−σ)).
double E0_series(double sigma, double sigma0, const numerics::SeriesTolerance& tol = {});
/// dE₀/dσ = −Γ(1−σ₀)/σ² − Σ_{m≥1} Γ(m+1−σ₀)/(m!(m−σ)²).
double E0_series_derivative(double sigma, double sigma0, const numerics::SeriesTolerance& tol = {});

/// τ₂² = −E₀′(σ₀).
double tau2_sq(double sigma0, const numerics::SeriesTolerance& tol = {});

/// The four terms of τ₁²: c1 + c2 − c3 − c4.
struct Tau1Components {
  double c1 = 0.0;  // (2^{σ₀}−1)Γ(1−σ₀)/σ₀²
  double c2 = 0.0;  // Σ Γ(m−σ₀)(g(m+1)+g(m))/m!
  double c3 = 0.0;  // double series over k ≥ 2, m ≥ 1
  double c4 = 0.0;  // Σ_{m≥2} g(m)Γ(m−σ₀)/(m! 2^{m−σ₀−1})
  double total() const { return c1 + c2 - c3 - c4; }
};

Tau1Components tau1_components(double sigma0, const numerics::SeriesTolerance& tol = {});
double tau1_sq(double sigma0, const numerics::SeriesTolerance& tol = {});

/// Limits of the eight atom sums (see AtomSums) divided by α(n), for regular variation
/// of order γ, evaluated at σ.
std::array<double, 8> lemma_rhs(double sigma, double gamma, const numerics::SeriesTolerance& tol = {});

/// Σ_{k≥2, m≥1} g_σ(k)Γ(k+m+1−γ)/(k! m! 2^{k+m−γ}(m−σ)), summed by diagonals N = k+m.
/// Diagonals up to head_diagonals are summed exactly, the rest by a smooth tail model.
double lemma_double_series(double sigma, double gamma, std::uint64_t head_diagonals = 10000,
                           double rel_tol = 1e-12);

/// Finite-n centering function E₀,ₙ(σ) = ∫₀ⁿ α₀(n/s)[e^{−s}/σ − T(s,σ)] ds, evaluated
/// exactly as Σ_j [(1 − e^{−n p_j})/σ − E g_σ(Poisson(n p_j))].
double E0n(const Population& pop, double n, double sigma, const AtomSumOptions& opts = {});
double E0n_derivative(const Population& pop, double n, double sigma, const AtomSumOptions& opts = {});

/// The same integral by piecewise adaptive quadrature between the jumps of α₀(n/s).
/// Only for finite populations with at most 10⁴ atoms.
double E0n_quadrature(const Population& pop, double n, double sigma, double rel_tol = 1e-8);

/// Zero σ₀,ₙ of E₀,ₙ in [0.01, 0.99]. Throws std::runtime_error when the bracket fails.
double sigma0n_root(const Population& pop, double n, const AtomSumOptions& opts = {});

struct PrecisionLimit {
  double K0 = 0.0;  // may be ±∞
  double M0 = 0.0;
  double c0 = 0.0;
  std::string rule;  // "log_L0", "K0=+inf", "K0=-inf"
};

/// K₀ from the L₀ descriptor and M₀ = argmax over [0, M_max] of
/// f(M) = (M/σ₀)(K₀ + ln Γ(1−σ₀)) + ln Γ(1+M) − ln Γ(1+M/σ₀).
PrecisionLimit precision_limit(double sigma0, const SlowlyVarying& L0, double M_max, double tau2_sq);

/// f(M) above, exposed for checks.
double precision_objective(double M, double sigma0, double K0);

struct AsymptoticConstants {
  double sigma0 = 0.0;
  double sigma0n = 0.0;
  double n = 0.0;
  double alpha_n = 0.0;
  double tau1_sq = 0.0;
  double tau2_sq = 0.0;
  double c0 = 0.0;
  double K0 = 0.0;
  double M0 = 0.0;
  double M_max = 0.0;

  /// Asymptotic sd of σ̂ₙ: τ₁/(τ₂² √α₀(n)).
  double sigma_sd() const;
  nlohmann::json to_json() const;
};

/// All constants for a population with a regular-variation descriptor.
AsymptoticConstants compute_constants(const Population& pop, double n, double M_max = 50.0);

}  // namespace pytype
