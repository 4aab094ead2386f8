#include "pytype/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pytype {

namespace {

constexpr std::uint64_t kSeriesHead = 100000;

void check_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in (0,1)");
  }
}

std::uint64_t head_terms(const numerics::SeriesTolerance& tol) {
  tol.validate();
  return std::max<std::uint64_t>(
      1000, std::min<std::uint64_t>(kSeriesHead, static_cast<std::uint64_t>(tol.max_terms)));
}

// Γ(x+1−γ)/Γ(x+1) for real x ≥ 1.
double weight_real(double x, double gamma) {
  return std::exp(numerics::log_gamma_ratio(x, 1.0 - gamma, 1.0));
}

// Σ_{m≥1} w_m h(m, g(m), g(m+1)) with w_m = Γ(m+1−γ)/m!, head summed exactly and the
// tail by Euler-Maclaurin on the smooth extension h_real.
double weighted_series(double sigma, double gamma, double decay,
                       const std::function<double(double, double, double)>& h,
                       const std::function<double(double)>& h_real,
                       const numerics::SeriesTolerance& tol) {
  const std::uint64_t head = head_terms(tol);
  numerics::KahanSum acc;
  numerics::KahanSum g;  // g(m), starting from g(1) = 0
  double w = std::exp(numerics::log_gamma(2.0 - gamma));  // w_1 = Γ(2−γ)
  for (std::uint64_t m = 1; m <= head; ++m) {
    const double md = static_cast<double>(m);
    const double gm = g.value();
    g += 1.0 / (md - sigma);
    acc += w * h(md, gm, g.value());
    w *= (md + 1.0 - gamma) / (md + 1.0);
  }
  const double tail = numerics::series_tail(
      [&](double x) { return weight_real(x, gamma) * h_real(x); }, static_cast<double>(head + 1),
      decay, tol.rel_tol);
  return acc.value() + tail;
}

double series_r3(double sigma, double gamma, const numerics::SeriesTolerance& tol) {
  return weighted_series(
      sigma, gamma, gamma, [sigma](double m, double, double) { return 1.0 / (m - sigma); },
      [sigma](double x) { return 1.0 / (x - sigma); }, tol);
}

double series_r4(double sigma, double gamma, const numerics::SeriesTolerance& tol) {
  return weighted_series(
      sigma, gamma, 1.0 + gamma,
      [sigma](double m, double, double) { return 1.0 / ((m - sigma) * (m - sigma)); },
      [sigma](double x) { return 1.0 / ((x - sigma) * (x - sigma)); }, tol);
}

double series_r5(double sigma, double gamma, const numerics::SeriesTolerance& tol) {
  return weighted_series(
      sigma, gamma, gamma,
      [sigma](double m, double g0, double g1) { return (g1 + g0) / (m - sigma); },
      [sigma](double x) {
        return (numerics::g_sigma_real(x + 1.0, sigma) + numerics::g_sigma_real(x, sigma)) /
               (x - sigma);
      },
      tol);
}

double series_r8(double sigma, double gamma, const numerics::SeriesTolerance& tol) {
  return weighted_series(
      sigma, gamma, gamma,
      [sigma](double m, double g0, double g1) {
        return (g1 * g1 + g1 * g0 + g0 * g0) / (m - sigma);
      },
      [sigma](double x) {
        const double g1 = numerics::g_sigma_real(x + 1.0, sigma);
        const double g0 = numerics::g_sigma_real(x, sigma);
        return (g1 * g1 + g1 * g0 + g0 * g0) / (x - sigma);
      },
      tol);
}

// Σ_{m≥2} g(m) γ Γ(m−γ)/(m! 2^{m−γ}); geometric decay, summed directly.
double series_r7(double sigma, double gamma) {
  numerics::KahanSum acc;
  double t = std::exp(numerics::log_gamma(2.0 - gamma)) / 2.0;  // Γ(2−γ)/2!
  double g = 1.0 / (1.0 - sigma);                                // g(2)
  double pow2 = std::pow(2.0, gamma - 2.0);
  for (int m = 2; m < 4000; ++m) {
    const double term = g * gamma * t * pow2;
    acc += term;
    if (m > 20 && std::abs(term) < 1e-18 * std::abs(acc.value())) break;
    const double md = m;
    t *= (md - gamma) / (md + 1.0);
    g += 1.0 / (md - sigma);
    pow2 *= 0.5;
  }
  return acc.value();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

nlohmann::json extended(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

}  // namespace

double sum_gamma_ratio(double gamma, const numerics::SeriesTolerance& tol) {
  check_unit(gamma, "gamma");
  const std::uint64_t head = head_terms(tol);
  numerics::KahanSum acc;
  double t = std::exp(numerics::log_gamma(1.0 - gamma));  // Γ(1−γ)/1!
  for (std::uint64_t m = 1; m <= head; ++m) {
    acc += t;
    const double md = static_cast<double>(m);
    t *= (md - gamma) / (md + 1.0);
  }
  const double tail = numerics::series_tail(
      [gamma](double x) { return std::exp(numerics::log_gamma_ratio(x, -gamma, 1.0)); },
      static_cast<double>(head + 1), gamma, tol.rel_tol);
  return acc.value() + tail;
}

double E0_series(double sigma, double sigma0, const numerics::SeriesTolerance& tol) {
  check_unit(sigma, "sigma");
  check_unit(sigma0, "sigma0");
  return std::exp(numerics::log_gamma(1.0 - sigma0)) / sigma - series_r3(sigma, sigma0, tol);
}

double E0_series_derivative(double sigma, double sigma0, const numerics::SeriesTolerance& tol) {
  check_unit(sigma, "sigma");
  check_unit(sigma0, "sigma0");
  return -std::exp(numerics::log_gamma(1.0 - sigma0)) / (sigma * sigma) -
         series_r4(sigma, sigma0, tol);
}

double tau2_sq(double sigma0, const numerics::SeriesTolerance& tol) {
  return -E0_series_derivative(sigma0, sigma0, tol);
}

double lemma_double_series(double sigma, double gamma, std::uint64_t head_diagonals,
                           double rel_tol) {
  check_unit(sigma, "sigma");
  check_unit(gamma, "gamma");
  if (head_diagonals < 100) throw std::invalid_argument("lemma_double_series: head too short");
  const std::uint64_t H = head_diagonals;
  std::vector<double> g(H + 1, 0.0);
  {
    numerics::KahanSum a;
    for (std::uint64_t k = 2; k <= H; ++k) {
      a += 1.0 / (static_cast<double>(k - 1) - sigma);
      g[k] = a.value();
    }
  }
  const double two_gamma = std::pow(2.0, gamma);
  const double ln2 = std::log(2.0);
  numerics::KahanSum acc;
  for (std::uint64_t N = 3; N <= H; ++N) {
    const double Nd = static_cast<double>(N);
    const std::uint64_t k0 = N / 2;
    const auto w = static_cast<std::uint64_t>(std::ceil(8.0 * std::sqrt(Nd) + 40.0));
    const std::uint64_t klo = k0 > w + 2 ? k0 - w : 2;
    const std::uint64_t khi = std::min(N - 1, k0 + w);
    const double b0 = std::exp(numerics::log_binomial(Nd, static_cast<double>(k0)) - Nd * ln2);
    numerics::KahanSum inner;
    auto term = [&](std::uint64_t k, double b) {
      return b * g[k] / (Nd - static_cast<double>(k) - sigma);
    };
    if (k0 >= klo && k0 <= khi) inner += term(k0, b0);
    double b = b0;
    for (std::uint64_t k = k0; k > klo; --k) {
      b *= static_cast<double>(k) / (Nd - static_cast<double>(k) + 1.0);
      if (k - 1 <= khi) inner += term(k - 1, b);
    }
    b = b0;
    for (std::uint64_t k = k0; k < khi; ++k) {
      b *= (Nd - static_cast<double>(k)) / static_cast<double>(k + 1);
      if (k + 1 >= klo) inner += term(k + 1, b);
    }
    acc += two_gamma * weight_real(Nd, gamma) * inner.value();
  }
  // Smooth diagonal model: binomial(x, 1/2) delta method on φ(k) = g(k)/(x−k−σ) at k = x/2.
  auto model = [&](double x) {
    const double mu = x / 2.0;
    const double u = 1.0 / (mu - sigma);
    const double G = numerics::g_sigma_real(mu, sigma);
    const double d2 = numerics::polygamma(2, mu - sigma) * u +
                      2.0 * numerics::trigamma(mu - sigma) * u * u + 2.0 * G * u * u * u;
    return two_gamma * weight_real(x, gamma) * (G * u + d2 * x / 8.0);
  };
  const double tail = numerics::series_tail(model, static_cast<double>(H + 1), gamma, rel_tol);
  return acc.value() + tail;
}

std::array<double, 8> lemma_rhs(double sigma, double gamma, const numerics::SeriesTolerance& tol) {
  check_unit(sigma, "sigma");
  check_unit(gamma, "gamma");
  const double G = std::exp(numerics::log_gamma(1.0 - gamma));
  return {G,
          (std::pow(2.0, gamma) - 1.0) * G,
          series_r3(sigma, gamma, tol),
          series_r4(sigma, gamma, tol),
          series_r5(sigma, gamma, tol),
          lemma_double_series(sigma, gamma, 10000, tol.rel_tol),
          series_r7(sigma, gamma),
          series_r8(sigma, gamma, tol)};
}

Tau1Components tau1_components(double sigma0, const numerics::SeriesTolerance& tol) {
  check_unit(sigma0, "sigma0");
  Tau1Components c;
  const double G = std::exp(numerics::log_gamma(1.0 - sigma0));
  c.c1 = (std::pow(2.0, sigma0) - 1.0) * G / (sigma0 * sigma0);
  c.c2 = series_r5(sigma0, sigma0, tol);
  c.c3 = lemma_double_series(sigma0, sigma0, 10000, tol.rel_tol);
  c.c4 = 2.0 / sigma0 * series_r7(sigma0, sigma0);
  return c;
}

double tau1_sq(double sigma0, const numerics::SeriesTolerance& tol) {
  const double v = tau1_components(sigma0, tol).total();
  if (!(v > 0.0)) throw std::logic_error("tau1_sq: nonpositive value " + fmt(v));
  return v;
}

double E0n(const Population& pop, double n, double sigma, const AtomSumOptions& opts) {
  const auto s = atom_sums_first_order(pop, n, sigma, opts);
  return s.value[0] / sigma - s.value[2];
}

double E0n_derivative(const Population& pop, double n, double sigma, const AtomSumOptions& opts) {
  const auto s = atom_sums_first_order(pop, n, sigma, opts);
  return -s.value[0] / (sigma * sigma) - s.value[3];
}

double E0n_quadrature(const Population& pop, double n, double sigma, double rel_tol) {
  check_unit(sigma, "sigma");
  const auto support = pop.support_size();
  if (!support || *support > 10000) {
    throw std::invalid_argument("E0n_quadrature: needs a finite population with ≤ 10⁴ atoms");
  }
  const std::uint64_t K = *support;
  auto f = [sigma](double s) {
    return std::exp(-s) / sigma - numerics::poisson_weighted_reciprocal(s, sigma);
  };
  // α₀(n/s) = j on (n p_{j+1}, n p_j].
  numerics::KahanSum acc;
  numerics::QuadratureOptions qo;
  qo.rel_tol = rel_tol;
  for (std::uint64_t j = 1; j <= K; ++j) {
    const double hi = n * pop.p(j);
    const double lo = j < K ? n * pop.p(j + 1) : 0.0;
    if (hi <= lo) continue;
    acc += static_cast<double>(j) * numerics::integrate(f, lo, hi, qo).value;
  }
  return acc.value();
}

double sigma0n_root(const Population& pop, double n, const AtomSumOptions& opts) {
  if (!(n >= 2.0)) throw std::invalid_argument("sigma0n_root: n must be at least 2");
  double lo = 0.01;
  double hi = 0.99;
  const double flo = E0n(pop, n, lo, opts);
  const double fhi = E0n(pop, n, hi, opts);
  if (!(flo > 0.0 && fhi < 0.0)) {
    throw std::runtime_error("sigma0n_root: bracket [0.01, 0.99] fails, E0n(0.01) = " + fmt(flo) +
                             ", E0n(0.99) = " + fmt(fhi));
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (E0n(pop, n, mid, opts) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 30; ++it) {
    const auto s = atom_sums_first_order(pop, n, x, opts);
    const double fx = s.value[0] / x - s.value[2];
    const double dfx = -s.value[0] / (x * x) - s.value[3];
    if (fx > 0.0) lo = std::max(lo, x);
    if (fx < 0.0) hi = std::min(hi, x);
    double next = x - fx / dfx;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step < 1e-13 || fx == 0.0) break;
  }
  return x;
}

double precision_objective(double M, double sigma0, double K0) {
  return M / sigma0 * (K0 + numerics::log_gamma(1.0 - sigma0)) + numerics::log_gamma(1.0 + M) -
         numerics::log_gamma(1.0 + M / sigma0);
}

PrecisionLimit precision_limit(double sigma0, const SlowlyVarying& L0, double M_max,
                               double tau2_sq_value) {
  check_unit(sigma0, "sigma0");
  if (!(M_max > 0.0) || !std::isfinite(M_max)) throw std::domain_error("M_max must be positive");
  if (!(tau2_sq_value > 0.0)) throw std::domain_error("tau2_sq must be positive");
  PrecisionLimit out;
  out.c0 = std::exp(numerics::log_gamma(1.0 - sigma0)) * (1.0 + sigma0) / (sigma0 * tau2_sq_value);
  const bool log_power = L0.family == SlowlyVarying::Family::LogPower && L0.r != 0.0;
  if (!log_power) {
    if (!(L0.scale > 0.0)) throw std::domain_error("L0 scale must be positive");
    out.K0 = std::log(L0.scale);
    out.rule = "log_L0";
  } else if (L0.r > 0.0) {
    out.K0 = std::numeric_limits<double>::infinity();
    out.M0 = M_max;
    out.rule = "K0=+inf";
    return out;
  } else {
    out.K0 = -std::numeric_limits<double>::infinity();
    out.M0 = 0.0;
    out.rule = "K0=-inf";
    return out;
  }
  // Concave objective: golden section, then compare with the end points.
  auto f = [&](double M) { return precision_objective(M, sigma0, out.K0); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0;
  double b = M_max;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-10 * std::max(1.0, M_max)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  double best = 0.5 * (a + b);
  double fbest = f(best);
  if (f(0.0) >= fbest) {
    best = 0.0;
    fbest = f(0.0);
  }
  if (f(M_max) > fbest) best = M_max;
  out.M0 = best;
  return out;
}

double AsymptoticConstants::sigma_sd() const {
  return std::sqrt(tau1_sq) / (tau2_sq * std::sqrt(alpha_n));
}

nlohmann::json AsymptoticConstants::to_json() const {
  return {{"sigma0", sigma0}, {"sigma0n", sigma0n}, {"n", n},           {"alpha_n", alpha_n},
          {"tau1_sq", tau1_sq}, {"tau2_sq", tau2_sq}, {"c0", c0},       {"K0", extended(K0)},
          {"M0", M0},           {"M_max", M_max}};
}

AsymptoticConstants compute_constants(const Population& pop, double n, double M_max) {
  const auto& rv = pop.rv();
  AsymptoticConstants c;
  c.sigma0 = rv.sigma0;
  c.n = n;
  c.M_max = M_max;
  c.sigma0n = sigma0n_root(pop, n);
  c.alpha_n = static_cast<double>(pop.alpha0(n));
  c.tau1_sq = tau1_sq(rv.sigma0);
  c.tau2_sq = tau2_sq(rv.sigma0);
  const auto pl = precision_limit(rv.sigma0, rv.L0, M_max, c.tau2_sq);
  c.c0 = pl.c0;
  c.K0 = pl.K0;
  c.M0 = pl.M0;
  return c;
}

}  // namespace pytype
