#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pytype::oracle {

std::vector<std::vector<int>> set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  // Odometer over restricted growth strings: a[i] ≤ 1 + max(a[0..i-1]).
  while (true) {
    out.push_back(a);
    int i = n - 1;
    for (; i > 0; --i) {
      const int mx = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= mx) {
        ++a[i];
        std::fill(a.begin() + i + 1, a.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

std::vector<std::uint64_t> sizes_of(const std::vector<int>& rgs) {
  std::vector<std::uint64_t> s;
  for (int b : rgs) {
    if (b >= static_cast<int>(s.size())) s.resize(b + 1, 0);
    ++s[b];
  }
  return s;
}

long double ascending_direct(long double a, std::uint64_t n) {
  long double p = 1.0L;
  for (std::uint64_t i = 0; i < n; ++i) p *= a + static_cast<long double>(i);
  return p;
}

long double eppf_product(const std::vector<std::uint64_t>& sizes, double sigma, double M) {
  std::uint64_t n = 0;
  long double num = 1.0L;
  for (std::size_t i = 1; i < sizes.size(); ++i) num *= M + static_cast<long double>(i) * sigma;
  for (auto s : sizes) {
    num *= ascending_direct(1.0L - sigma, s - 1);
    n += s;
  }
  return num / ascending_direct(M + 1.0L, n - 1);
}

long double crp_path_probability(const std::vector<int>& rgs, double sigma, double M) {
  std::vector<long double> occ;
  long double p = 1.0L;
  for (std::size_t k = 0; k < rgs.size(); ++k) {
    const int b = rgs[k];
    if (k > 0) {
      if (b == static_cast<int>(occ.size())) {
        p *= (M + sigma * static_cast<long double>(occ.size())) / (M + static_cast<long double>(k));
      } else {
        p *= (occ[b] - sigma) / (M + static_cast<long double>(k));
      }
    }
    if (b == static_cast<int>(occ.size())) occ.push_back(0.0L);
    occ[b] += 1.0L;
  }
  return p;
}

long double g_direct(std::uint64_t m, long double sigma) {
  long double g = 0.0L;
  for (std::uint64_t l = 1; l < m; ++l) g += 1.0L / (static_cast<long double>(l) - sigma);
  return g;
}

long double poisson_reciprocal_direct(long double s, long double sigma, int terms) {
  long double w = std::exp(-s);  // e^{-s} s^m / m!
  long double acc = 0.0L;
  for (int m = 1; m <= terms; ++m) {
    w *= s / m;
    acc += w / (m - sigma);
  }
  return acc;
}

namespace {

constexpr std::uint64_t kHead = 1'000'000;

// Σ_{m>N} t_N (m/N)^{-b} Σ_k c_k m^{-k}, by the midpoint rule in closed form.
long double power_tail(long double tN, long double b, const std::vector<long double>& c) {
  const long double N = kHead;
  const long double X = N + 0.5L;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const long double e = b + static_cast<long double>(k) - 1.0L;
    acc += c[k] * std::pow(X, -e) / e;
  }
  return tN * std::pow(N, b) * acc;
}

// Σ_{m≥1} Γ(m+1−a)/m! · f(m), t_m = Γ(m+1−a)/m! by recursion, with f(m) expanded as
// Σ_k c_k m^{-k} for the tail.
template <class F>
long double weighted_series(long double a, F f, const std::vector<long double>& c) {
  long double t = std::tgamma(1.0L - a);
  long double acc = 0.0L;
  long double comp = 0.0L;
  for (std::uint64_t m = 1; m <= kHead; ++m) {
    t *= (static_cast<long double>(m) - a) / static_cast<long double>(m);
    const long double y = t * f(static_cast<long double>(m)) - comp;
    const long double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  // Γ(m+1−a)/m! ≈ m^{-a}(1 + a(a−1)/(2m)); fold the correction into the coefficients.
  std::vector<long double> cc(c.size() + 1, 0.0L);
  const long double N = kHead;
  const long double norm = 1.0L / (1.0L + a * (a - 1.0L) / (2.0L * N));
  for (std::size_t k = 0; k < c.size(); ++k) {
    cc[k] += c[k] * norm;
    cc[k + 1] += c[k] * norm * a * (a - 1.0L) / 2.0L;
  }
  return acc + power_tail(t, a, cc);
}

}  // namespace

long double gamma_ratio_sum_series(long double gamma) {
  // Γ(m−γ)/m! = Γ(m+1−γ)/m! · 1/(m−γ).
  return weighted_series(
      gamma, [gamma](long double m) { return 1.0L / (m - gamma); }, {0.0L, 1.0L, gamma, gamma * gamma});
}

long double E0_series_direct(long double sigma, long double sigma0) {
  const long double s = weighted_series(
      sigma0, [sigma](long double m) { return 1.0L / (m - sigma); }, {0.0L, 1.0L, sigma, sigma * sigma});
  return std::tgamma(1.0L - sigma0) / sigma - s;
}

long double tau2_series_direct(long double sigma0) {
  const long double s0 = sigma0;
  const long double s = weighted_series(
      sigma0, [s0](long double m) { return 1.0L / ((m - s0) * (m - s0)); },
      {0.0L, 0.0L, 1.0L, 2.0L * s0, 3.0L * s0 * s0});
  return std::tgamma(1.0L - sigma0) / (sigma0 * sigma0) + s;
}

long double tau1_poisson_integral(long double sigma0) {
  const long double s_lo = 1e-10L;
  const long double s_hi = 1e4L;
  const int cap = static_cast<int>(s_hi + 15.0L * std::sqrt(s_hi) + 60.0L);
  std::vector<long double> y(cap + 1);
  {
    long double g = 0.0L;  // g(m)
    for (int m = 0; m <= cap; ++m) {
      if (m >= 2) g += 1.0L / (static_cast<long double>(m - 1) - sigma0);
      y[m] = (m >= 1 ? 1.0L / sigma0 : 0.0L) - g;
    }
  }
  auto variance = [&](long double s) {
    const int top = static_cast<int>(s + 15.0L * std::sqrt(s) + 60.0L);
    std::vector<long double> p(top + 1);
    p[0] = std::exp(-s);
    for (int m = 1; m <= top; ++m) p[m] = p[m - 1] * s / m;
    long double mean = 0.0L;
    for (int m = 0; m <= top; ++m) mean += p[m] * y[m];
    long double var = 0.0L;
    for (int m = 0; m <= top; ++m) var += p[m] * (y[m] - mean) * (y[m] - mean);
    return var;
  };
  // Simpson in t = ln s.
  const long double a = std::log(s_lo);
  const long double b = std::log(s_hi);
  const int panels = 4000;
  const long double h = (b - a) / panels;
  long double acc = 0.0L;
  for (int i = 0; i <= panels; ++i) {
    const long double s = std::exp(a + h * i);
    const long double f = variance(s) * std::pow(s, -sigma0);
    const long double w = (i == 0 || i == panels) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    acc += w * f;
  }
  acc *= h / 3.0L;
  // Below s_lo the variance is s/σ₀²; above s_hi it is about 1/s.
  acc += std::pow(s_lo, 1.0L - sigma0) / (sigma0 * sigma0 * (1.0L - sigma0));
  acc += std::pow(s_hi, -1.0L - sigma0) / (1.0L + sigma0);
  return sigma0 * acc;
}

std::uint64_t count_at_least(const std::vector<double>& p, double u) {
  std::uint64_t c = 0;
  for (double x : p) c += (x >= 1.0 / u) ? 1 : 0;
  return c;
}

double normal_shift_tv(double d) { return std::erf(std::abs(d) / (2.0 * std::sqrt(2.0))); }

std::vector<std::uint64_t> PartitionGen::sizes(int k_max, int size_max) {
  const int K = std::uniform_int_distribution<int>(1, k_max)(eng_);
  std::vector<std::uint64_t> s(K);
  std::bernoulli_distribution single(0.5);
  std::uniform_int_distribution<int> big(2, std::max(2, size_max));
  for (auto& x : s) x = single(eng_) ? 1 : static_cast<std::uint64_t>(big(eng_));
  // A lone singleton carries no information about σ.
  if (K == 1 && s[0] == 1) s[0] = 2;
  return s;
}

std::vector<std::string> PartitionGen::labels(const std::vector<std::uint64_t>& sizes) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    for (std::uint64_t i = 0; i < sizes[j]; ++i) out.push_back("x" + std::to_string(j));
  }
  std::shuffle(out.begin(), out.end(), eng_);
  return out;
}

}  // namespace pytype::oracle
