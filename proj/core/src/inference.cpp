#include "pytype/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pytype/likelihood.hpp"
#include "pytype/numerics.hpp"

namespace pytype {

PriorSpec PriorSpec::uniform(double M_fixed) {
  PriorSpec p;
  p.M_fixed = M_fixed;
  return p;
}

PriorSpec PriorSpec::beta(double a, double b, double M_fixed) {
  PriorSpec p;
  p.sigma_prior = Sigma::Beta;
  p.a = a;
  p.b = b;
  p.M_fixed = M_fixed;
  return p;
}

void PriorSpec::validate() const {
  if (sigma_prior == Sigma::Beta && (!(a > 0.0) || !(b > 0.0))) {
    throw std::domain_error("Beta prior shapes must be positive");
  }
  if (m_prior == M::Fixed && (!(M_fixed >= 0.0) || !std::isfinite(M_fixed))) {
    throw std::domain_error("fixed M must be finite and ≥ 0");
  }
  if (m_prior == M::UniformInterval && (!(M_max > 0.0) || !std::isfinite(M_max))) {
    throw std::domain_error("M_max must be positive");
  }
}

double PriorSpec::log_density_sigma(double sigma) const {
  if (!(sigma > 0.0 && sigma < 1.0)) return -std::numeric_limits<double>::infinity();
  if (sigma_prior == Sigma::Uniform01) return 0.0;
  return (a - 1.0) * std::log(sigma) + (b - 1.0) * std::log1p(-sigma) -
         (numerics::log_gamma(a) + numerics::log_gamma(b) - numerics::log_gamma(a + b));
}

nlohmann::json PriorSpec::to_json() const {
  nlohmann::json j;
  if (sigma_prior == Sigma::Uniform01) {
    j["sigma"] = {{"kind", "uniform"}};
  } else {
    j["sigma"] = {{"kind", "beta"}, {"a", a}, {"b", b}};
  }
  if (m_prior == M::Fixed) {
    j["M"] = {{"kind", "fixed"}, {"value", M_fixed}};
  } else {
    j["M"] = {{"kind", "uniform"}, {"max", M_max}};
  }
  return j;
}

PriorSpec PriorSpec::from_json(const nlohmann::json& j) {
  PriorSpec p;
  if (j.contains("sigma")) {
    const auto& s = j.at("sigma");
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "uniform") {
      p.sigma_prior = Sigma::Uniform01;
    } else if (kind == "beta") {
      p.sigma_prior = Sigma::Beta;
      p.a = s.at("a").get<double>();
      p.b = s.at("b").get<double>();
    } else {
      throw std::invalid_argument("unknown sigma prior kind: " + kind);
    }
  }
  if (j.contains("M")) {
    const auto& m = j.at("M");
    const auto kind = m.at("kind").get<std::string>();
    if (kind == "fixed") {
      p.m_prior = M::Fixed;
      p.M_fixed = m.at("value").get<double>();
    } else if (kind == "uniform") {
      p.m_prior = M::UniformInterval;
      p.M_max = m.at("max").get<double>();
    } else {
      throw std::invalid_argument("unknown M prior kind: " + kind);
    }
  }
  p.validate();
  return p;
}

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  x.back() = hi;
  return x;
}

PosteriorGrid evaluate(const PartitionStats& stats, const PriorSpec& prior,
                       std::vector<double> nodes, const GridOptions& opts) {
  PosteriorGrid g;
  const std::size_t S = nodes.size();
  g.sigma_nodes = std::move(nodes);
  g.edges.resize(S + 1);
  g.edges[0] = g.sigma_nodes.front();
  g.edges[S] = g.sigma_nodes.back();
  for (std::size_t i = 1; i < S; ++i) g.edges[i] = 0.5 * (g.sigma_nodes[i - 1] + g.sigma_nodes[i]);

  std::vector<double> log_joint;
  std::size_t Mn = 0;
  g.log_density.resize(S);
  if (prior.m_prior == PriorSpec::M::Fixed) {
    for (std::size_t i = 0; i < S; ++i) {
      const double s = g.sigma_nodes[i];
      g.log_density[i] = log_eppf(stats, {s, prior.M_fixed}) + prior.log_density_sigma(s);
    }
  } else {
    g.M_nodes = linspace(0.0, prior.M_max, opts.m_nodes);
    Mn = g.M_nodes.size();
    const double h = prior.M_max / static_cast<double>(Mn - 1);
    std::vector<double> log_w(Mn, std::log(h / prior.M_max));
    log_w.front() = log_w.back() = std::log(0.5 * h / prior.M_max);
    log_joint.resize(S * Mn);
    std::vector<double> row(Mn);
    for (std::size_t i = 0; i < S; ++i) {
      const double s = g.sigma_nodes[i];
      const double lp = prior.log_density_sigma(s);
      for (std::size_t j = 0; j < Mn; ++j) {
        row[j] = log_eppf(stats, {s, g.M_nodes[j]}) + lp + log_w[j];
        log_joint[i * Mn + j] = row[j];
      }
      g.log_density[i] = numerics::log_sum_exp(row);
    }
  }

  std::vector<double> log_cell(S);
  for (std::size_t i = 0; i < S; ++i) {
    const double width = g.edges[i + 1] - g.edges[i];
    log_cell[i] = g.log_density[i] + std::log(width);
  }
  g.log_normalizer = numerics::log_sum_exp(log_cell);
  g.cell_mass.resize(S);
  numerics::KahanSum m1;
  std::size_t imode = 0;
  for (std::size_t i = 0; i < S; ++i) {
    g.cell_mass[i] = std::exp(log_cell[i] - g.log_normalizer);
    m1 += g.cell_mass[i] * g.sigma_nodes[i];
    if (g.log_density[i] > g.log_density[imode]) imode = i;
  }
  g.mean = m1.value();
  numerics::KahanSum m2;
  for (std::size_t i = 0; i < S; ++i) {
    const double d = g.sigma_nodes[i] - g.mean;
    m2 += g.cell_mass[i] * d * d;
  }
  g.sd = std::sqrt(m2.value());
  g.mode = g.sigma_nodes[imode];
  g.outer_mass = g.cell_mass.front() + (S > 1 ? g.cell_mass.back() : 0.0);
  g.degenerate = g.cell_mass.front() > 0.99 || g.cell_mass.back() > 0.99;
  if (Mn > 0) {
    g.joint_mass.resize(S * Mn);
    for (std::size_t i = 0; i < S; ++i) {
      const double lw = std::log(g.edges[i + 1] - g.edges[i]) - g.log_normalizer;
      for (std::size_t j = 0; j < Mn; ++j) g.joint_mass[i * Mn + j] = std::exp(log_joint[i * Mn + j] + lw);
    }
  }
  return g;
}

}  // namespace

double PosteriorGrid::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile level must lie in [0,1]");
  double cum = 0.0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i) {
    const double next = cum + cell_mass[i];
    if (next >= q && cell_mass[i] > 0.0) {
      const double t = std::clamp((q - cum) / cell_mass[i], 0.0, 1.0);
      return edges[i] + t * (edges[i + 1] - edges[i]);
    }
    cum = next;
  }
  return edges.back();
}

nlohmann::json PosteriorGrid::summary_json() const {
  return {{"mean", mean},
          {"sd", sd},
          {"mode", mode},
          {"q025", quantile(0.025)},
          {"q975", quantile(0.975)},
          {"grid_lo", edges.front()},
          {"grid_hi", edges.back()},
          {"nodes", sigma_nodes.size()},
          {"m_nodes", M_nodes.size()},
          {"outer_mass", outer_mass},
          {"degenerate", degenerate}};
}

PosteriorGrid posterior_sigma(const PartitionStats& stats, const PriorSpec& prior,
                              const GridOptions& opts) {
  if (stats.n() < 2) throw std::invalid_argument("posterior_sigma: need at least two observations");
  prior.validate();
  if (opts.coarse_nodes < 3 || opts.dense_nodes < 3 || opts.m_nodes < 2) {
    throw std::invalid_argument("posterior_sigma: grid too small");
  }
  if (!(opts.eps > kSigmaLo && opts.eps < 0.1)) throw std::invalid_argument("posterior_sigma: bad eps");
  const double lo_lim = opts.eps;
  const double hi_lim = 1.0 - opts.eps;

  const PosteriorGrid coarse = evaluate(stats, prior, linspace(lo_lim, hi_lim, opts.coarse_nodes), opts);
  double spread = coarse.sd;
  double M_ref = prior.m_prior == PriorSpec::M::Fixed ? prior.M_fixed : 0.5 * prior.M_max;
  const double h = hess_sigma(stats, {coarse.mode, M_ref});
  if (h < 0.0) spread = std::max(spread, 1.0 / std::sqrt(-h));
  spread = std::max(spread, 1e-9);

  double lo = std::max(lo_lim, coarse.mode - opts.span_sd * spread);
  double hi = std::min(hi_lim, coarse.mode + opts.span_sd * spread);
  PosteriorGrid g;
  for (int round = 0; round < 8; ++round) {
    g = evaluate(stats, prior, linspace(lo, hi, opts.dense_nodes), opts);
    const double need_lo = std::max(lo_lim, g.mean - opts.span_sd * g.sd);
    const double need_hi = std::min(hi_lim, g.mean + opts.span_sd * g.sd);
    if (need_lo >= lo && need_hi <= hi) break;
    lo = std::max(lo_lim, std::min(lo, g.mean - (opts.span_sd + 2.0) * g.sd));
    hi = std::min(hi_lim, std::max(hi, g.mean + (opts.span_sd + 2.0) * g.sd));
  }
  return g;
}

double cell_tv(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("cell_tv: size mismatch");
  numerics::KahanSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc.value();
}

double bvm_gap(const PosteriorGrid& post, double sigma_hat, double var_bvm) {
  if (!(var_bvm > 0.0)) throw std::domain_error("bvm_gap: variance must be positive");
  const double sd = std::sqrt(var_bvm);
  std::vector<double> q(post.cell_mass.size());
  double prev = numerics::normal_cdf((post.edges.front() - sigma_hat) / sd);
  const double first = prev;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double next = numerics::normal_cdf((post.edges[i + 1] - sigma_hat) / sd);
    q[i] = next - prev;
    prev = next;
  }
  const double outside = first + (1.0 - prev);
  return std::min(1.0, cell_tv(post.cell_mass, q) + 0.5 * outside);
}

PosteriorSummary posterior_mean_and_interval(const PosteriorGrid& post, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("level must lie in (0,1)");
  return {post.mean, post.sd, post.quantile(0.5 * (1.0 - level)), post.quantile(0.5 * (1.0 + level))};
}

ForensicResult forensic_lr(const PartitionStats& stats, const PriorSpec& prior, const GridOptions& opts) {
  if (stats.singletons() == 0) {
    throw std::invalid_argument("forensic_lr: the crime-scene profile must be a singleton in the data");
  }
  const PosteriorGrid post = posterior_sigma(stats, prior, opts);
  const double n1 = static_cast<double>(stats.n());  // database size plus one
  numerics::KahanSum e1;
  numerics::KahanSum e2;
  const std::size_t S = post.sigma_nodes.size();
  if (post.M_nodes.empty()) {
    for (std::size_t i = 0; i < S; ++i) {
      const double phi = (1.0 - post.sigma_nodes[i]) / (prior.M_fixed + n1);
      e1 += post.cell_mass[i] * phi;
      e2 += post.cell_mass[i] * phi * phi;
    }
  } else {
    const std::size_t Mn = post.M_nodes.size();
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t j = 0; j < Mn; ++j) {
        const double phi = (1.0 - post.sigma_nodes[i]) / (post.M_nodes[j] + n1);
        const double w = post.joint_mass[i * Mn + j];
        e1 += w * phi;
        e2 += w * phi * phi;
      }
    }
  }
  ForensicResult r;
  r.phi_mean = e1.value();
  r.phi_sd = std::sqrt(std::max(0.0, e2.value() - r.phi_mean * r.phi_mean));
  r.lr = 1.0 / r.phi_mean;
  r.database_size = stats.n() - 1;
  r.sigma_summary = posterior_mean_and_interval(post, 0.95);
  r.degenerate = post.degenerate;
  return r;
}

}  // namespace pytype
