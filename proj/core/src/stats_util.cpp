#include "pytype/stats_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pytype/numerics.hpp"

namespace pytype::stats {

Moments moments(std::span<const double> x) {
  Moments m;
  m.count = x.size();
  if (x.empty()) throw std::invalid_argument("moments: empty sample");
  numerics::KahanSum s;
  for (double v : x) s += v;
  m.mean = s.value() / static_cast<double>(x.size());
  if (x.size() < 2) return m;
  numerics::KahanSum ss;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.variance = ss.value() / static_cast<double>(x.size() - 1);
  m.mean_se = std::sqrt(m.variance / static_cast<double>(x.size()));
  m.variance_se = x.size() >= 3 ? jackknife_variance_se(x) : 0.0;
  return m;
}

double jackknife_variance_se(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("jackknife: need at least three values");
  const double nd = static_cast<double>(n);
  numerics::KahanSum s;
  numerics::KahanSum s2;
  for (double v : x) s += v;
  const double mean = s.value() / nd;
  for (double v : x) s2 += (v - mean) * (v - mean);
  // Leave-one-out variance in closed form.
  std::vector<double> loo(n);
  numerics::KahanSum lsum;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    const double ss_i = s2.value() - d * d * nd / (nd - 1.0);
    loo[i] = ss_i / (nd - 2.0);
    lsum += loo[i];
  }
  const double lmean = lsum.value() / nd;
  numerics::KahanSum dev;
  for (double v : loo) dev += (v - lmean) * (v - lmean);
  return std::sqrt((nd - 1.0) / nd * dev.value());
}

double ks_normal(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("ks_normal: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = numerics::normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_01(std::size_t R) {
  if (R == 0) throw std::invalid_argument("ks_critical_01: R must be positive");
  const double s = std::sqrt(static_cast<double>(R));
  return 1.628 / (s + 0.12 + 0.11 / s);
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile: q must lie in [0,1]");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= x.size()) return x.back();
  const double t = pos - static_cast<double>(i);
  return x[i] + t * (x[i + 1] - x[i]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double median_se(std::vector<double> x) {
  if (x.size() < 2) return 0.0;
  std::sort(x.begin(), x.end());
  const double R = static_cast<double>(x.size());
  const double half = 0.98 * std::sqrt(R);
  const auto j = static_cast<std::size_t>(std::max(0.0, std::floor(R / 2.0 - half)));
  const auto k = static_cast<std::size_t>(std::min(R - 1.0, std::ceil(R / 2.0 + half) - 1.0));
  return (x[k] - x[j]) / (2.0 * 1.96);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t err_index = count;
  std::exception_ptr err;
  auto run = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace pytype::stats
