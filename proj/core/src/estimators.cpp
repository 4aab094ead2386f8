#include "pytype/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pytype/asymptotics.hpp"
#include "pytype/numerics.hpp"

namespace pytype {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::Interior:
      return "Interior";
    case Boundary::LowerSigma:
      return "LowerSigma";
    case Boundary::UpperSigma:
      return "UpperSigma";
    case Boundary::LowerM:
      return "LowerM";
    case Boundary::UpperM:
      return "UpperM";
  }
  return "Unknown";
}

nlohmann::json EstimateResult::to_json() const {
  nlohmann::json j;
  j["sigma_hat"] = sigma_hat;
  j["M_hat"] = M_hat ? nlohmann::json(*M_hat) : nlohmann::json(nullptr);
  j["boundary"] = to_string(boundary);
  if (M_hat) j["m_boundary"] = to_string(m_boundary);
  j["se_sandwich"] = se_sandwich ? nlohmann::json(*se_sandwich) : nlohmann::json(nullptr);
  j["se_curvature"] = se_curvature ? nlohmann::json(*se_curvature) : nlohmann::json(nullptr);
  j["K"] = K;
  j["n"] = n;
  j["log_lik"] = log_lik;
  j["score_at_opt"] = score_at_opt;
  j["diagnostics"] = diagnostics;
  return j;
}

double alpha_hat(const PartitionStats& stats, double sigma_hat) {
  return static_cast<double>(stats.K()) / std::exp(numerics::log_gamma(1.0 - sigma_hat));
}

double se_curvature(const PartitionStats& stats, double sigma_hat, double M) {
  const double h = hess_sigma(stats, {sigma_hat, M});
  if (!(h < 0.0)) throw std::logic_error("se_curvature: nonnegative curvature");
  return 1.0 / std::sqrt(-h);
}

double sandwich_se(const PartitionStats& stats, double sigma_hat, double t1, double t2) {
  if (!(sigma_hat > 0.0 && sigma_hat < 1.0) || !in_sigma_window(sigma_hat)) {
    throw std::domain_error("sandwich_se: sigma_hat must be interior");
  }
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw std::domain_error("sandwich_se: constants must be positive");
  return std::sqrt(t1) / (t2 * std::sqrt(alpha_hat(stats, sigma_hat)));
}

double sandwich_se(const PartitionStats& stats, double sigma_hat) {
  if (!(sigma_hat > 0.0 && sigma_hat < 1.0) || !in_sigma_window(sigma_hat)) {
    throw std::domain_error("sandwich_se: sigma_hat must be interior");
  }
  return sandwich_se(stats, sigma_hat, tau1_sq(sigma_hat), tau2_sq(sigma_hat));
}

EstimateResult mle_sigma(const PartitionStats& stats, double M, const EstimateOptions& opts) {
  if (stats.n() < 2) throw std::invalid_argument("mle_sigma: need at least two observations");
  if (!(M >= 0.0) || !std::isfinite(M)) throw std::domain_error("mle_sigma: M must be finite and ≥ 0");
  EstimateResult r;
  r.n = stats.n();
  r.K = stats.K();
  auto score = [&](double s) { return score_sigma(stats, {s, M}); };

  const double s_lo = score(kSigmaLo);
  const double s_hi = score(kSigmaHi);
  if (s_lo <= 0.0 || s_hi >= 0.0) {
    r.boundary = s_lo <= 0.0 ? Boundary::LowerSigma : Boundary::UpperSigma;
    r.sigma_hat = s_lo <= 0.0 ? kSigmaLo : kSigmaHi;
    r.score_at_opt = s_lo <= 0.0 ? s_lo : s_hi;
    r.log_lik = log_eppf(stats, {r.sigma_hat, M});
    return r;
  }

  double lo = kSigmaLo;
  double hi = kSigmaHi;
  double x = 0.5;
  int it = 0;
  for (; it < 200; ++it) {
    const double f = score(x);
    if (f == 0.0) break;
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double h = hess_sigma(stats, {x, M});
    double next = x - f / h;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= opts.root_tol || hi - lo <= opts.root_tol) break;
  }
  r.sigma_hat = x;
  r.score_at_opt = score(x);
  r.log_lik = log_eppf(stats, {x, M});
  r.se_curvature = se_curvature(stats, x, M);
  if (opts.compute_sandwich) r.se_sandwich = sandwich_se(stats, x);
  r.diagnostics["iterations"] = it + 1;
  return r;
}

EstimateResult profile_mle(const PartitionStats& stats, double M_max, const EstimateOptions& opts) {
  if (stats.n() < 2) throw std::invalid_argument("profile_mle: need at least two observations");
  if (!(M_max > 0.0) || !std::isfinite(M_max)) throw std::domain_error("profile_mle: M_max must be positive");
  if (opts.grid_points < 2) throw std::invalid_argument("profile_mle: grid too small");

  EstimateOptions inner = opts;
  inner.compute_sandwich = false;
  int evaluations = 0;
  auto profile = [&](double M) {
    ++evaluations;
    const auto fit = mle_sigma(stats, M, inner);
    return fit.log_lik;
  };

  std::vector<double> grid{0.0};
  const double lo = std::min(0.01, M_max / 2.0);
  const double ratio = std::log(M_max / lo) / (opts.grid_points - 1);
  for (int i = 0; i < opts.grid_points; ++i) grid.push_back(lo * std::exp(ratio * i));
  grid.back() = M_max;

  std::vector<double> values;
  values.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.push_back(profile(grid[i]));
    if (values[i] > values[best]) best = i;  // strict: ties go to the smaller M
  }

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[best + 1 < grid.size() ? best + 1 : best];
  double M_hat = grid[best];
  double f_hat = values[best];
  if (b > a) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = profile(x1);
    double f2 = profile(x2);
    while (b - a > opts.golden_tol) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = profile(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = profile(x1);
      }
    }
    const double xm = 0.5 * (a + b);
    const double fm = profile(xm);
    if (fm > f_hat) {
      M_hat = xm;
      f_hat = fm;
    }
  }
  // Snap to an end point when the optimum sits within tolerance of it.
  if (M_hat > 0.0 && M_hat <= 2.0 * opts.golden_tol && values[0] >= f_hat) M_hat = 0.0;
  if (M_hat < M_max && M_max - M_hat <= 2.0 * opts.golden_tol && values.back() >= f_hat) M_hat = M_max;

  EstimateResult r = mle_sigma(stats, M_hat, opts);
  r.M_hat = M_hat;
  r.m_boundary = M_hat == 0.0 ? Boundary::LowerM : (M_hat == M_max ? Boundary::UpperM : Boundary::Interior);
  r.diagnostics["profile_evaluations"] = evaluations;
  r.diagnostics["M_max"] = M_max;
  return r;
}

}  // namespace pytype
