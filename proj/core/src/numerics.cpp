#include "pytype/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace pytype::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_sigma(double sigma, const char* who) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw std::domain_error(std::string(who) + ": sigma must lie in (0,1)");
  }
}

// Bernoulli polynomials B_2..B_8, used by the large-x expansion of ln Γ(x+a).
double bernoulli_poly(int k, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t2 * t2;
  switch (k) {
    case 2: return t2 - t + 1.0 / 6.0;
    case 3: return t3 - 1.5 * t2 + 0.5 * t;
    case 4: return t4 - 2.0 * t3 + t2 - 1.0 / 30.0;
    case 5: return t4 * t - 2.5 * t4 + (5.0 / 3.0) * t3 - t / 6.0;
    case 6: return t4 * t2 - 3.0 * t4 * t + 2.5 * t4 - 0.5 * t2 + 1.0 / 42.0;
    case 7:
      return t4 * t3 - 3.5 * t4 * t2 + 3.5 * t4 * t - (7.0 / 6.0) * t3 + t / 6.0;
    case 8:
      return t4 * t4 - 4.0 * t4 * t3 + (14.0 / 3.0) * t4 * t2 - (7.0 / 3.0) * t4 +
             (2.0 / 3.0) * t2 - 1.0 / 30.0;
    default: return 0.0;
  }
}

double poisson_weighted(double s, double sigma, int power, const SeriesTolerance& tol,
                        const char* who) {
  require_sigma(sigma, who);
  tol.validate();
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw std::domain_error(std::string(who) + ": s must be finite and nonnegative");
  }
  if (s == 0.0) return 0.0;

  auto weight = [&](double m) {
    const double d = m - sigma;
    return power == 1 ? 1.0 / d : 1.0 / (d * d);
  };
  const double w_max = weight(1.0);

  double mode = std::floor(s);
  if (mode < 1.0) mode = 1.0;
  const double p_mode = std::exp(mode * std::log(s) - s - log_gamma(mode + 1.0));

  KahanSum up;
  std::uint64_t terms = 0;
  const double m_stop = s + 10.0 * std::sqrt(s) + 50.0;
  double p = p_mode;
  double m = mode;
  for (;;) {
    up += p * weight(m);
    ++terms;
    m += 1.0;
    p *= s / m;
    if (m > m_stop && (p * weight(m) <= tol.rel_tol * up.value() || p == 0.0)) break;
    if (terms > tol.max_terms) {
      throw SeriesError(std::string(who) + ": term budget exhausted", up.value(), p);
    }
  }

  KahanSum down;
  p = p_mode;
  m = mode;
  while (m > 1.0) {
    p *= m / s;
    m -= 1.0;
    const double t = p * weight(m);
    down += t;
    ++terms;
    // Remaining terms are bounded by (m-1) * p * w_max and p keeps shrinking.
    if ((m - 1.0) * p * w_max <= tol.rel_tol * (up.value() + down.value()) || p == 0.0) break;
    if (terms > tol.max_terms) {
      throw SeriesError(std::string(who) + ": term budget exhausted",
                        up.value() + down.value(), p);
    }
  }
  return down.value() + up.value();
}

// 15-point Kronrod nodes (nonnegative half) and weights, with the embedded 7-point Gauss weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  const double fc = f(center);
  if (!std::isfinite(fc)) {
    throw IntegrationError("integrand is not finite inside the interval", 0.0, kInf);
  }
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    if (!std::isfinite(f1) || !std::isfinite(f2)) {
      throw IntegrationError("integrand is not finite inside the interval", 0.0, kInf);
    }
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, result, err};
}

struct PanelLess {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  }
};

}  // namespace

void SeriesTolerance::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_terms < 1) {
    throw std::invalid_argument("SeriesTolerance: rel_tol, abs_tol must be positive, max_terms >= 1");
  }
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  if (std::isinf(x)) return kInf;
  return boost::math::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: argument must be positive");
  return boost::math::trigamma(x);
}

double polygamma(int order, double x) {
  if (!(x > 0.0)) throw std::domain_error("polygamma: argument must be positive");
  return boost::math::polygamma(order, x);
}

double log_gamma_ratio(double x, double a, double b) {
  if (!(x + a > 0.0) || !(x + b > 0.0)) {
    throw std::domain_error("log_gamma_ratio: arguments must be positive");
  }
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (x >= 200.0 * scale && scale <= 4.0) {
    double acc = 0.0;
    double xp = 1.0;
    for (int k = 1; k <= 7; ++k) {
      xp *= x;
      const double term = (bernoulli_poly(k + 1, a) - bernoulli_poly(k + 1, b)) /
                          (static_cast<double>(k) * (k + 1) * xp);
      acc += (k % 2 == 1) ? term : -term;
    }
    return (a - b) * std::log(x) + acc;
  }
  return log_gamma(x + a) - log_gamma(x + b);
}

double log_ascending_factorial(double a, std::uint64_t n) {
  if (!(a > 0.0)) throw std::domain_error("log_ascending_factorial: a must be positive");
  if (n == 0) return 0.0;
  if (n <= 32) {
    KahanSum acc;
    for (std::uint64_t i = 0; i < n; ++i) acc += std::log(a + static_cast<double>(i));
    return acc.value();
  }
  return log_gamma(a + static_cast<double>(n)) - log_gamma(a);
}

double g_sigma(std::uint64_t m, double sigma) {
  require_sigma(sigma, "g_sigma");
  if (m <= 1) return 0.0;
  if (m <= 64) {
    KahanSum acc;
    for (std::uint64_t l = 1; l < m; ++l) acc += 1.0 / (static_cast<double>(l) - sigma);
    return acc.value();
  }
  return digamma(static_cast<double>(m) - sigma) - digamma(1.0 - sigma);
}

double g_sigma_dot(std::uint64_t m, double sigma) {
  require_sigma(sigma, "g_sigma_dot");
  if (m <= 1) return 0.0;
  if (m <= 64) {
    KahanSum acc;
    for (std::uint64_t l = 1; l < m; ++l) {
      const double d = static_cast<double>(l) - sigma;
      acc += 1.0 / (d * d);
    }
    return acc.value();
  }
  return trigamma(1.0 - sigma) - trigamma(static_cast<double>(m) - sigma);
}

double g_sigma_real(double x, double sigma) {
  require_sigma(sigma, "g_sigma_real");
  if (!(x >= 1.0)) throw std::domain_error("g_sigma_real: x must be >= 1");
  return digamma(x - sigma) - digamma(1.0 - sigma);
}

double poisson_weighted_reciprocal(double s, double sigma, const SeriesTolerance& tol) {
  return poisson_weighted(s, sigma, 1, tol, "poisson_weighted_reciprocal");
}

double poisson_weighted_reciprocal_sq(double s, double sigma, const SeriesTolerance& tol) {
  return poisson_weighted(s, sigma, 2, tol, "poisson_weighted_reciprocal_sq");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("integrate: need finite a < b");
  }
  if (!(opts.rel_tol > 0.0 || opts.abs_tol > 0.0)) {
    throw std::invalid_argument("integrate: a positive tolerance is required");
  }

  std::priority_queue<Panel, std::vector<Panel>, PanelLess> heap;
  // Geometric panels: [a, a+h 2^-P], ..., [a+h/4, a+h/2], [a+h/2, b].
  const double width = b - a;
  double right = b;
  for (int k = 1; k <= opts.initial_geometric_panels; ++k) {
    const double left = a + width * std::ldexp(1.0, -k);
    if (!(left > a) || !(left < right)) break;
    heap.push(gk15(f, left, right));
    right = left;
  }
  heap.push(gk15(f, a, right));

  auto totals = [&heap]() {
    // priority_queue hides its container; copy out to sum deterministically by position.
    auto copy = heap;
    std::vector<Panel> panels;
    panels.reserve(copy.size());
    while (!copy.empty()) {
      panels.push_back(copy.top());
      copy.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    KahanSum v;
    KahanSum e;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair<double, double>{v.value(), e.value()};
  };

  double value = 0.0;
  double error = 0.0;
  // Running sums are refreshed from scratch periodically to keep drift out.
  {
    auto t = totals();
    value = t.first;
    error = t.second;
  }
  int panels = static_cast<int>(heap.size());
  int since_refresh = 0;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
    if (panels >= opts.max_panels) {
      auto t = totals();
      throw IntegrationError("integrate: panel budget exhausted before tolerance was met",
                             t.first, t.second);
    }
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      auto t = totals();
      throw IntegrationError("integrate: panels reached floating-point resolution", t.first,
                             t.second);
    }
    heap.pop();
    const Panel left = gk15(f, worst.a, mid);
    const Panel right_panel = gk15(f, mid, worst.b);
    heap.push(left);
    heap.push(right_panel);
    ++panels;
    value += left.value + right_panel.value - worst.value;
    error += left.error + right_panel.error - worst.error;
    if (++since_refresh == 64) {
      auto t = totals();
      value = t.first;
      error = t.second;
      since_refresh = 0;
    }
  }
  auto t = totals();
  return {t.first, t.second, panels};
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 0.0;
  return integrate(f, a, b, opts).value;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double top = *std::max_element(values.begin(), values.end());
  if (std::isnan(top)) return top;
  if (top == -kInf) return -kInf;
  if (top == kInf) return kInf;
  KahanSum acc;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc.value());
}

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta: s must exceed 1");
  if (!(q > 0.0)) throw std::domain_error("hurwitz_zeta: q must be positive");
  constexpr std::array<double, 9> kB2j = {1.0 / 6.0,        -1.0 / 30.0, 1.0 / 42.0,
                                          -1.0 / 30.0,      5.0 / 66.0,  -691.0 / 2730.0,
                                          7.0 / 6.0,        -3617.0 / 510.0,
                                          43867.0 / 798.0};
  KahanSum head;
  double a = q;
  while (a < 20.0) {
    head += std::pow(a, -s);
    a += 1.0;
  }
  // Euler-Maclaurin remainder from a.
  double tail = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = s;         // s (s+1) ... (s+2j-2)
  double apow = std::pow(a, -s - 1.0);
  double fact = 2.0;         // (2j)!
  for (int j = 1; j <= 9; ++j) {
    tail += kB2j[j - 1] / fact * rising * apow;
    rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    apow /= a * a;
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return head.value() + tail;
}

double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

double series_tail(const std::function<double(double)>& f, double start, double decay,
                   double rel_tol) {
  if (!(start >= 2.0)) throw std::invalid_argument("series_tail: start must be >= 2");
  if (!(decay > 0.0)) throw std::invalid_argument("series_tail: decay must be positive");
  // x = start e^t turns the power tail into an exponentially decaying integrand.
  const double t_max = std::min(45.0 / decay, 680.0 - std::log(start));
  auto g = [&](double t) {
    const double x = start * std::exp(t);
    return f(x) * x;
  };
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.initial_geometric_panels = 0;
  opts.max_panels = 20000;
  // Split so each piece covers a few e-folds; the integrand is smooth.
  const int pieces = std::max(1, static_cast<int>(std::ceil(t_max * decay / 4.0)));
  KahanSum integral;
  for (int i = 0; i < pieces; ++i) {
    const double lo = t_max * i / pieces;
    const double hi = t_max * (i + 1) / pieces;
    opts.abs_tol = 0.0;
    integral += integrate(g, lo, hi, opts).value;
  }
  const double x_end = start * std::exp(t_max);
  integral += f(x_end) * x_end / decay;

  const double h = 1e-3 * start;
  const double fprime = (f(start + h) - f(start - h)) / (2.0 * h);
  // Third derivative needs a wider stencil to keep cancellation in check.
  const double h3 = 0.02 * start;
  const double f3 = (f(start + 2 * h3) - 2 * f(start + h3) + 2 * f(start - h3) - f(start - 2 * h3)) / (2 * h3 * h3 * h3);
  return integral.value() + 0.5 * f(start) - fprime / 12.0 + f3 / 720.0;
}

double log_binomial(double n, double k) {
  if (!(k >= 0.0) || !(n >= k)) throw std::domain_error("log_binomial: need n >= k >= 0");
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

}  // namespace pytype::numerics
