#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace pytype::numerics {

struct SeriesTolerance {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  std::uint64_t max_terms = 10'000'000;

  void validate() const;
};

/// Thrown when adaptive quadrature cannot meet its tolerance. Carries what it got.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// A truncated series whose remainder bound exceeds the requested tolerance.
class SeriesError : public std::runtime_error {
 public:
  SeriesError(const std::string& what, double estimate, double achieved)
      : std::runtime_error(what), estimate_(estimate), achieved_(achieved) {}
  double estimate() const noexcept { return estimate_; }
  double achieved_bound() const noexcept { return achieved_; }

 private:
  double estimate_;
  double achieved_;
};

// Kahan-Babuska (Neumaier) compensated accumulator.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  KahanSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);
double polygamma(int order, double x);

/// ln Γ(x+a) − ln Γ(x+b) without cancellation for large x.
double log_gamma_ratio(double x, double a, double b);

/// ln a^{[n]} = Σ_{i<n} ln(a+i).
double log_ascending_factorial(double a, std::uint64_t n);

/// g_σ(m) = Σ_{l=1}^{m-1} 1/(l−σ), with g_σ(0) = g_σ(1) = 0.
double g_sigma(std::uint64_t m, double sigma);

/// ∂g_σ(m)/∂σ = Σ_{l=1}^{m-1} 1/(l−σ)².
double g_sigma_dot(std::uint64_t m, double sigma);

/// Smooth extension ψ(x−σ) − ψ(1−σ) of g_σ to real x ≥ 1.
double g_sigma_real(double x, double sigma);

/// T(s,σ) = E[1/(X−σ); X ≥ 1] for X ~ Poisson(s).
double poisson_weighted_reciprocal(double s, double sigma, const SeriesTolerance& tol = {});

/// E[1/(X−σ)²; X ≥ 1] for X ~ Poisson(s).
double poisson_weighted_reciprocal_sq(double s, double sigma, const SeriesTolerance& tol = {});

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_panels = 5000;
  int initial_geometric_panels = 24;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [a,b]. The initial panel
/// list is geometric toward a, so integrable power singularities at a are fine.
/// Throws IntegrationError when the panel budget runs out.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10);

double log_sum_exp(std::span<const double> values);

/// Hurwitz zeta Σ_{k≥0} (q+k)^{-s}, s > 1, q > 0.
double hurwitz_zeta(double s, double q);
double riemann_zeta(double s);

/// Σ_{m ≥ start} f(m) for a smooth, eventually monotone f decaying like
/// x^{-1-decay} (log x)^k, via Euler-Maclaurin: integral plus f/2, f'/12 and f'''/720
/// corrections. f must accept real arguments. start should be large (≳ 100).
double series_tail(const std::function<double(double)>& f, double start, double decay,
                   double rel_tol = 1e-12);

/// ln C(n,k) for real n ≥ k ≥ 0.
double log_binomial(double n, double k);

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace pytype::numerics
