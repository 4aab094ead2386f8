#include "pytype/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pytype/asymptotics.hpp"
#include "pytype/likelihood.hpp"
#include "pytype/numerics.hpp"
#include "pytype/partition.hpp"
#include "pytype/population.hpp"
#include "pytype/rng.hpp"
#include "pytype/sampler.hpp"

namespace pytype {

namespace {

using Clock = std::chrono::steady_clock;
using Sizes = std::vector<std::uint64_t>;

const double kSigmaGrid[] = {0.25, 0.5, 0.75};
const double kMGrid[] = {0.0, 0.5, 1.0, 5.0};

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

template <class F>
VerificationResult timed(const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  VerificationResult r = body();
  r.name = name;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

// Calls visit(block sizes in order of first appearance) once per set partition of [n].
void for_each_set_partition(int n, const std::function<void(const Sizes&)>& visit) {
  Sizes sizes;
  std::function<void(int)> rec = [&](int t) {
    if (t == n) {
      visit(sizes);
      return;
    }
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      ++sizes[b];
      rec(t + 1);
      --sizes[b];
    }
    sizes.push_back(1);
    rec(t + 1);
    sizes.pop_back();
  };
  rec(0);
}

double eppf(const Sizes& sizes, double sigma, double M) {
  return std::exp(log_eppf(PartitionStats::from_block_sizes(sizes), {sigma, M}));
}

}  // namespace

VerificationResult verify_eppf_normalization(int n_max, double tol) {
  return timed("eppf_normalization", [&] {
    VerificationResult r;
    double worst = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      // Set partitions grouped by their multiset of block sizes.
      std::map<Sizes, std::uint64_t> shapes;
      for_each_set_partition(n, [&](const Sizes& s) {
        Sizes key = s;
        std::sort(key.begin(), key.end());
        ++shapes[key];
      });
      for (double sigma : kSigmaGrid) {
        for (double M : kMGrid) {
          numerics::KahanSum total;
          for (const auto& [key, mult] : shapes) total += static_cast<double>(mult) * eppf(key, sigma, M);
          worst = std::max(worst, std::abs(total.value() - 1.0));
        }
      }
    }
    r.passed = worst <= tol;
    r.details = {{"n_max", n_max}, {"max_abs_error", worst}, {"tolerance", tol}};
    r.summary = "max |sum - 1| = " + sci(worst);
    return r;
  });
}

VerificationResult verify_sampler_law(int n_max, double tol) {
  return timed("sampler_law", [&] {
    VerificationResult r;
    double worst = 0.0;
    std::uint64_t paths = 0;
    for (double sigma : kSigmaGrid) {
      for (double M : kMGrid) {
        for (int n = 1; n <= n_max; ++n) {
          Sizes sizes{1};
          std::function<void(int, double)> walk = [&](int t, double prob) {
            if (t == n) {
              ++paths;
              worst = std::max(worst, std::abs(prob - eppf(sizes, sigma, M)));
              return;
            }
            const auto st = PartitionStats::from_block_sizes(sizes);
            const auto w = ppf_weights(st, sigma, M);
            const auto& sorted = st.block_sizes();
            for (std::size_t b = 0; b < sizes.size(); ++b) {
              const auto pos = std::find(sorted.begin(), sorted.end(), sizes[b]) - sorted.begin();
              const double wb = w[static_cast<std::size_t>(pos)];
              ++sizes[b];
              walk(t + 1, prob * wb);
              --sizes[b];
            }
            sizes.push_back(1);
            walk(t + 1, prob * w.back());
            sizes.pop_back();
          };
          walk(1, 1.0);
        }
      }
    }
    r.passed = worst <= tol;
    r.details = {{"n_max", n_max}, {"paths", paths}, {"max_abs_error", worst}, {"tolerance", tol}};
    r.summary = "max |path prob - eppf| = " + sci(worst) + " over " + std::to_string(paths) + " paths";
    return r;
  });
}

VerificationResult verify_series_identities(double tol) {
  return timed("series_identities", [&] {
    VerificationResult r;
    double e0 = 0.0;
    double sg = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (double g : {0.2, 0.35, 0.5, 0.65, 0.8}) {
      const double z = std::abs(E0_series(g, g));
      const double exact = std::exp(numerics::log_gamma(1.0 - g)) / g;
      const double rel = std::abs(sum_gamma_ratio(g) - exact) / exact;
      e0 = std::max(e0, z);
      sg = std::max(sg, rel);
      rows.push_back({{"gamma", g}, {"E0_at_gamma", z}, {"gamma_sum_rel_error", rel}});
    }
    r.passed = e0 <= tol && sg <= tol;
    r.details = {{"rows", rows}, {"tolerance", tol}};
    r.summary = "max |E0| = " + sci(e0) + ", max rel error of gamma sum = " + sci(sg);
    return r;
  });
}

VerificationResult verify_derivatives(std::uint64_t seed) {
  return timed("derivatives", [&] {
    VerificationResult r;
    double tau_err = 0.0;
    for (double s0 : kSigmaGrid) {
      const double h = 1e-4;
      const double fd = -(E0_series(s0 + h, s0) - E0_series(s0 - h, s0)) / (2.0 * h);
      tau_err = std::max(tau_err, std::abs(tau2_sq(s0) - fd) / tau2_sq(s0));
    }
    Rng rng({seed, 0});
    double score_err = 0.0;
    double hess_err = 0.0;
    for (int t = 0; t < 24; ++t) {
      const double s_true = 0.1 + 0.8 * rng.uniform();
      const double M_true = 5.0 * rng.uniform();
      const std::uint64_t n = 10 + rng.below(490);
      const auto st = sample_py_partition(s_true, M_true, n, rng);
      const double s = 0.15 + 0.7 * rng.uniform();
      const double M = 3.0 * rng.uniform();
      auto L = [&](double x) { return log_eppf(st, {x, M}); };
      const double h1 = 1e-5;
      const double fd1 = (L(s + h1) - L(s - h1)) / (2.0 * h1);
      const double sc = score_sigma(st, {s, M});
      score_err = std::max(score_err, std::abs(sc - fd1) / std::max(1.0, std::abs(sc)));
      const double h2 = 1e-3;
      const double fd2 = (L(s + h2) - 2.0 * L(s) + L(s - h2)) / (h2 * h2);
      const double he = hess_sigma(st, {s, M});
      hess_err = std::max(hess_err, std::abs(he - fd2) / std::max(1.0, std::abs(he)));
    }
    r.passed = tau_err <= 1e-4 && score_err <= 1e-5 && hess_err <= 1e-4;
    r.details = {{"tau2_rel_error", tau_err}, {"score_rel_error", score_err}, {"hess_rel_error", hess_err}};
    r.summary = "tau2 " + sci(tau_err) + ", score " + sci(score_err) + ", hessian " + sci(hess_err);
    return r;
  });
}

VerificationResult verify_binomial_identity(double tol) {
  // The alternating sum cancels about 98 digits at n = 100, p = 0.9, l = 0.
  using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<250>>;
  return timed("binomial_identity", [&] {
    VerificationResult r;
    double worst = 0.0;
    int cases = 0;
    for (int n : {5, 20, 100}) {
      for (double pd : {0.01, 0.3, 0.9}) {
        const mp p = pd;
        const mp q = mp(1) - p;
        // C(n, m) for all m, exactly.
        std::vector<mp> C(static_cast<std::size_t>(n) + 1);
        C[0] = 1;
        for (int m = 1; m <= n; ++m) C[static_cast<std::size_t>(m)] = C[static_cast<std::size_t>(m - 1)] * (n - m + 1) / m;
        for (int l = 0; l < n; ++l) {
          mp lhs = 0;
          for (int m = l + 1; m <= n; ++m) {
            lhs += C[static_cast<std::size_t>(m)] * pow(p, m - 1) * pow(q, n - m - 1) * (mp(m) - mp(n) * p);
          }
          const double rhs = std::exp(std::log(static_cast<double>(n - l)) + numerics::log_binomial(n, l) +
                                      l * std::log(pd) + (n - l - 1) * std::log1p(-pd));
          const double rel = std::abs(lhs.convert_to<double>() - rhs) / rhs;
          worst = std::max(worst, rel);
          ++cases;
        }
      }
    }
    r.passed = worst <= tol;
    r.details = {{"cases", cases}, {"max_rel_error", worst}, {"tolerance", tol}};
    r.summary = "max rel error " + sci(worst) + " over " + std::to_string(cases) + " cases";
    return r;
  });
}

VerificationResult verify_stirling_ratio(double c_cap) {
  return timed("stirling_ratio", [&] {
    VerificationResult r;
    double c_fit = 0.0;
    double limit_err = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (double g : {0.2, 0.5, 0.8}) {
      double c_g = 0.0;
      double last = 0.0;
      for (int k = 4; k <= 24; ++k) {  // n = 10^(k/4)
        const double n = std::round(std::pow(10.0, k / 4.0));
        const double dev = std::expm1(numerics::log_gamma_ratio(n, -g, 0.0) + g * std::log(n));
        last = n * dev;
        c_g = std::max(c_g, std::abs(last));
      }
      // The scaled deviation settles at γ(1+γ)/2, so the O(1/n) order is sharp.
      const double lim = g * (1.0 + g) / 2.0;
      limit_err = std::max(limit_err, std::abs(last - lim) / lim);
      c_fit = std::max(c_fit, c_g);
      rows.push_back({{"gamma", g}, {"fitted_c", c_g}, {"scaled_deviation_at_1e6", last}, {"limit", lim}});
    }
    r.passed = c_fit <= c_cap && limit_err <= 1e-3;
    r.details = {{"rows", rows}, {"fitted_c", c_fit}, {"c_cap", c_cap}, {"limit_rel_error", limit_err}};
    r.summary = "fitted c = " + sci(c_fit) + ", limit rel error " + sci(limit_err);
    return r;
  });
}

VerificationResult verify_poisson_moment_inequalities(double rel_slack) {
  return timed("poisson_moment_inequalities", [&] {
    VerificationResult r;
    double worst = -1.0;  // max of lhs/rhs − 1
    for (double s : {0.01, 0.1, 1.0, 3.0, 10.0, 30.0}) {
      for (double d : {0.25, 0.5, 1.0}) {
        // Work with e^{−s}-weighted sums so large s stays finite.
        numerics::KahanSum from1;
        numerics::KahanSum from2;
        const int top = static_cast<int>(s + 20.0 * std::sqrt(s) + 60.0);
        for (int m = 1; m <= top; ++m) {
          const double term = std::exp(m * std::log(s) - s - numerics::log_gamma(m + 1.0)) * std::pow(m, d);
          from1 += term;
          if (m >= 2) from2 += term;
        }
        const double rhs1 = std::pow(s, d);
        const double rhs2 = std::pow(s, d) * -std::expm1(-s);
        worst = std::max({worst, from1.value() / rhs1 - 1.0, from2.value() / rhs2 - 1.0});
      }
    }
    r.passed = worst <= rel_slack;
    r.details = {{"max_excess", worst}, {"relative_slack", rel_slack}};
    r.summary = "max lhs/rhs - 1 = " + sci(worst);
    return r;
  });
}

VerificationResult verify_log_sum_expansion(double c_cap) {
  return timed("log_sum_expansion", [&] {
    VerificationResult r;
    double c_fit = 0.0;
    const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);
    for (double M : {0.0, 1.0, 10.0}) {
      for (double s : kSigmaGrid) {
        numerics::KahanSum direct;
        std::uint64_t K = 1;
        for (std::uint64_t next : {10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000}) {
          for (; K < next; ++K) direct += std::log(M + static_cast<double>(K) * s);
          // direct now holds Σ_{i=1}^{K−1}, with K = next
          const double k = static_cast<double>(K);
          const double expansion = k * std::log(k) + k * (std::log(s) - 1.0) + (M / s - 0.5) * std::log(k) +
                                   half_log_2pi - std::log(s) - numerics::log_gamma(1.0 + M / s);
          const double rem = direct.value() - expansion;
          c_fit = std::max(c_fit, std::abs(rem) * k / ((M / s + 1.0) * (M / s + 1.0)));
        }
      }
    }
    r.passed = c_fit <= c_cap;
    r.details = {{"fitted_c", c_fit}, {"c_cap", c_cap}};
    r.summary = "fitted c = " + sci(c_fit);
    return r;
  });
}

VerificationResult verify_E0n_quadrature(double tol) {
  return timed("E0n_quadrature", [&] {
    VerificationResult r;
    std::vector<double> p(200);
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) total += p[j] = 1.0 / ((j + 1.0) * (j + 1.0));
    for (double& x : p) x /= total;
    const Population pop = Population::explicit_probs(p);
    double worst = 0.0;
    for (double n : {50.0, 1000.0}) {
      for (double s : {0.3, 0.5, 0.7}) {
        const double a = E0n(pop, n, s);
        const double b = E0n_quadrature(pop, n, s);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
    }
    r.passed = worst <= tol;
    r.details = {{"max_rel_error", worst}, {"tolerance", tol}};
    r.summary = "max rel difference " + sci(worst);
    return r;
  });
}

VerificationResult verify_sampler_frequencies(std::uint64_t seed) {
  return timed("sampler_frequencies", [&] {
    VerificationResult r;
    // Integer partitions of 4 with the number of set partitions of each shape.
    const std::vector<std::pair<Sizes, double>> shapes = {
        {{4}, 1}, {{3, 1}, 4}, {{2, 2}, 3}, {{2, 1, 1}, 6}, {{1, 1, 1, 1}, 1}};
    const double critical = 18.467;  // chi-square, 4 df, level 0.001
    const std::uint64_t draws = 100000;
    double worst = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    int id = 0;
    for (auto [sigma, M] : {std::pair{0.5, 1.0}, std::pair{0.3, 0.0}, std::pair{0.8, 5.0}}) {
      std::map<Sizes, double> seen;
      Rng rng({seed, static_cast<std::uint64_t>(id++)});
      for (std::uint64_t i = 0; i < draws; ++i) seen[sample_py_partition(sigma, M, 4, rng).block_sizes()] += 1.0;
      double chi = 0.0;
      for (const auto& [sz, mult] : shapes) {
        const double expected = static_cast<double>(draws) * mult * eppf(sz, sigma, M);
        const double o = seen[sz];
        chi += (o - expected) * (o - expected) / expected;
      }
      worst = std::max(worst, chi);
      rows.push_back({{"sigma", sigma}, {"M", M}, {"chi_square", chi}});
    }
    r.passed = worst <= critical;
    r.details = {{"rows", rows}, {"critical", critical}, {"draws", draws}};
    r.summary = "max chi-square " + sci(worst) + " (critical " + sci(critical) + ")";
    return r;
  });
}

std::vector<VerificationResult> run_verification(bool fast) {
  std::vector<VerificationResult> out;
  out.push_back(verify_eppf_normalization());
  out.push_back(verify_sampler_law());
  out.push_back(verify_series_identities());
  out.push_back(verify_derivatives());
  out.push_back(verify_binomial_identity());
  out.push_back(verify_stirling_ratio());
  out.push_back(verify_poisson_moment_inequalities());
  out.push_back(verify_log_sum_expansion());
  if (!fast) {
    out.push_back(verify_E0n_quadrature());
    out.push_back(verify_sampler_frequencies());
  }
  return out;
}

}  // namespace pytype
