#include "pytype/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pytype/asymptotics.hpp"
#include "pytype/atom_sums.hpp"
#include "pytype/estimators.hpp"
#include "pytype/numerics.hpp"
#include "pytype/partition.hpp"
#include "pytype/rng.hpp"
#include "pytype/sampler.hpp"
#include "pytype/stats_util.hpp"
#include "pytype/version.hpp"

namespace pytype {

namespace {

constexpr Check kAllChecks[] = {Check::Normality,        Check::BvM,    Check::PosteriorMean,
                                Check::LemmaLimits,      Check::RootRate, Check::PrecisionProfile,
                                Check::Tau1MC,           Check::Forensic};

nlohmann::json stat(double value, double se) { return {{"value", value}, {"se", se}}; }

RngStream stream_for(std::uint64_t seed, Check c, std::size_t n_index, std::uint64_t rep) {
  return {derive_seed(seed, static_cast<std::uint64_t>(c) + 1, n_index), rep};
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool nondecreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) return false;
  }
  return true;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Failure reasons are accumulated as "reason; reason; ".
std::string finish(std::string why) {
  while (!why.empty() && (why.back() == ' ' || why.back() == ';')) why.pop_back();
  return why.empty() ? "ok" : why;
}

struct Exclusions {
  std::size_t count = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total); }
  nlohmann::json to_json() const {
    const double p = rate();
    const double se = total == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(total));
    return {{"excluded", count}, {"replications", total}, {"rate", stat(p, se)}};
  }
};

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<char>& keep) {
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (keep[i]) out.push_back(v[i]);
  }
  return out;
}

ExperimentReport single(CheckReport c, std::uint64_t seed) {
  ExperimentReport r;
  r.seed = seed;
  r.checks.push_back(std::move(c));
  return r;
}

void add_constants(ExperimentReport& r, const AsymptoticConstants& c) { r.constants.push_back(c.to_json()); }

double tau1_at(const AsymptoticConstants& c) { return std::sqrt(c.tau1_sq); }

}  // namespace

std::string to_string(Check c) {
  switch (c) {
    case Check::Normality:
      return "Normality";
    case Check::BvM:
      return "BvM";
    case Check::PosteriorMean:
      return "PosteriorMean";
    case Check::LemmaLimits:
      return "LemmaLimits";
    case Check::RootRate:
      return "RootRate";
    case Check::PrecisionProfile:
      return "PrecisionProfile";
    case Check::Tau1MC:
      return "Tau1MC";
    case Check::Forensic:
      return "Forensic";
  }
  return "Unknown";
}

Check check_from_string(const std::string& s) {
  for (Check c : kAllChecks) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown check '" + s + "'");
}

nlohmann::json Tolerances::to_json() const {
  return {{"normality_variance", normality_variance},
          {"mean_se_multiple", mean_se_multiple},
          {"bvm_final_gap", bvm_final_gap},
          {"lemma", lemma},
          {"root_slope_halfwidth", root_slope_halfwidth},
          {"tau1", tau1},
          {"forensic_variance", forensic_variance},
          {"boundary_fraction", boundary_fraction},
          {"agreement_multiple", agreement_multiple},
          {"exclusion_rate", exclusion_rate}};
}

Tolerances Tolerances::from_json(const nlohmann::json& j) {
  Tolerances t;
  if (!j.is_object()) throw std::invalid_argument("tolerances must be an object");
  const nlohmann::json known = t.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown tolerance '" + key + "'");
    if (!value.is_number() || !(value.get<double>() >= 0.0)) {
      throw std::invalid_argument("tolerance '" + key + "' must be a nonnegative number");
    }
  }
  t.normality_variance = j.value("normality_variance", t.normality_variance);
  t.mean_se_multiple = j.value("mean_se_multiple", t.mean_se_multiple);
  t.bvm_final_gap = j.value("bvm_final_gap", t.bvm_final_gap);
  t.lemma = j.value("lemma", t.lemma);
  t.root_slope_halfwidth = j.value("root_slope_halfwidth", t.root_slope_halfwidth);
  t.tau1 = j.value("tau1", t.tau1);
  t.forensic_variance = j.value("forensic_variance", t.forensic_variance);
  t.boundary_fraction = j.value("boundary_fraction", t.boundary_fraction);
  t.agreement_multiple = j.value("agreement_multiple", t.agreement_multiple);
  t.exclusion_rate = j.value("exclusion_rate", t.exclusion_rate);
  return t;
}

void ExperimentConfig::validate() const {
  if (replications < 2) throw std::invalid_argument("experiment: replications must be at least 2");
  if (n_grid.empty()) throw std::invalid_argument("experiment: n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw std::invalid_argument("experiment: sample sizes must be at least 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("experiment: n_grid must be ascending");
  }
  if (M_values.empty()) throw std::invalid_argument("experiment: M_values must be nonempty");
  for (double M : M_values) {
    if (!(M >= 0.0) || !std::isfinite(M)) throw std::invalid_argument("experiment: M values must be finite and >= 0");
  }
  if (!(M_max > 0.0) || !std::isfinite(M_max)) throw std::invalid_argument("experiment: M_max must be positive");
  if (checks.empty()) throw std::invalid_argument("experiment: no checks requested");
  if (lemma_sigma && !(*lemma_sigma > 0.0 && *lemma_sigma < 1.0)) {
    throw std::invalid_argument("experiment: lemma_sigma must lie in (0,1)");
  }
  prior.validate();
  if (alt_prior) alt_prior->validate();
  (void)Population::from_json(population);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["population"] = Population::from_json(population).to_json();
  j["n_grid"] = n_grid;
  j["replications"] = replications;
  j["M_values"] = M_values;
  j["M_max"] = M_max;
  j["prior"] = prior.to_json();
  j["alt_prior"] = alt_prior ? alt_prior->to_json() : nlohmann::json(nullptr);
  j["seed"] = seed;
  nlohmann::json cs = nlohmann::json::array();
  for (Check c : checks) cs.push_back(to_string(c));
  j["checks"] = cs;
  j["lemma_sigma"] = lemma_sigma ? nlohmann::json(*lemma_sigma) : nlohmann::json(nullptr);
  j["tolerances"] = tol.to_json();
  j["record_timing"] = record_timing;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  static const char* known[] = {"population", "n_grid", "replications", "M_values", "M_max",
                                "prior", "alt_prior", "seed", "checks", "lemma_sigma",
                                "tolerances", "record_timing"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw std::invalid_argument("experiment config: unknown field '" + key + "'");
    }
  }
  ExperimentConfig c;
  if (!j.contains("population")) throw std::invalid_argument("experiment config: missing population");
  c.population = j.at("population");
  if (!j.contains("n_grid") || !j.at("n_grid").is_array()) {
    throw std::invalid_argument("experiment config: n_grid must be an array");
  }
  for (const auto& v : j.at("n_grid")) {
    if (v.is_number_unsigned()) {
      c.n_grid.push_back(v.get<std::uint64_t>());
    } else if (v.is_number() && v.get<double>() >= 0.0 && v.get<double>() == std::floor(v.get<double>())) {
      c.n_grid.push_back(static_cast<std::uint64_t>(v.get<double>()));
    } else {
      throw std::invalid_argument("experiment config: n_grid entries must be nonnegative integers");
    }
  }
  if (j.contains("replications")) {
    if (!j.at("replications").is_number_integer() || j.at("replications").get<long long>() < 0) {
      throw std::invalid_argument("experiment config: replications must be a positive integer");
    }
    c.replications = j.at("replications").get<std::uint64_t>();
  }
  if (j.contains("M_values")) c.M_values = j.at("M_values").get<std::vector<double>>();
  if (j.contains("M_max")) c.M_max = j.at("M_max").get<double>();
  if (j.contains("prior")) c.prior = PriorSpec::from_json(j.at("prior"));
  if (j.contains("alt_prior") && !j.at("alt_prior").is_null()) c.alt_prior = PriorSpec::from_json(j.at("alt_prior"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw std::invalid_argument("experiment config: seed must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (!j.contains("checks") || !j.at("checks").is_array()) {
    throw std::invalid_argument("experiment config: checks must be an array");
  }
  for (const auto& v : j.at("checks")) c.checks.push_back(check_from_string(v.get<std::string>()));
  if (j.contains("lemma_sigma") && !j.at("lemma_sigma").is_null()) c.lemma_sigma = j.at("lemma_sigma").get<double>();
  if (j.contains("tolerances")) c.tol = Tolerances::from_json(j.at("tolerances"));
  if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
  c.validate();
  return c;
}

nlohmann::json CheckReport::to_json() const {
  return {{"check", to_string(check)}, {"passed", passed}, {"diagnostic", diagnostic}, {"details", details}};
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.passed; });
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config"] = config;
  j["constants"] = constants;
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  j["checks"] = cs;
  j["passed"] = passed();
  if (wall_seconds) j["wall_seconds"] = *wall_seconds;
  return j;
}

// ---------------------------------------------------------------------------------------

ExperimentReport run_normality(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const Population pop = Population::from_json(cfg.population);
  const double M = cfg.M_values.front();
  const std::size_t R = cfg.replications;
  ExperimentReport rep;
  rep.seed = cfg.seed;
  CheckReport c;
  c.check = Check::Normality;
  c.details["M"] = M;
  c.details["per_n"] = nlohmann::json::array();
  bool ok = true;
  std::string why;

  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    const std::uint64_t n = cfg.n_grid[k];
    const AsymptoticConstants C = compute_constants(pop, static_cast<double>(n), cfg.M_max);
    add_constants(rep, C);
    std::vector<double> sh(R, 0.0);
    std::vector<char> keep(R, 0);
    stats::parallel_for(R, threads, [&](std::size_t i) {
      const auto occ = sample_iid(pop, n, stream_for(cfg.seed, Check::Normality, k, i));
      const auto fit = mle_sigma(PartitionStats::from_occupancy(occ), M);
      sh[i] = fit.sigma_hat;
      keep[i] = fit.interior() ? 1 : 0;
    });
    Exclusions ex{static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 0)), R};
    nlohmann::json row;
    row["n"] = n;
    row["exclusions"] = ex.to_json();
    const bool last = k + 1 == cfg.n_grid.size();
    if (ex.rate() > cfg.tol.exclusion_rate) {
      ok = false;
      why += "n=" + std::to_string(n) + ": exclusion rate " + fmt(ex.rate()) + " above limit; ";
    }
    const auto kept = pick(sh, keep);
    if (kept.size() < 2) {
      ok = false;
      why += "n=" + std::to_string(n) + ": fewer than two interior estimates; ";
      c.details["per_n"].push_back(row);
      continue;
    }
    const double scale = std::sqrt(C.alpha_n);
    const double target = C.tau1_sq / (C.tau2_sq * C.tau2_sq);
    std::vector<double> y(kept.size());
    std::vector<double> z(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      y[i] = scale * (kept[i] - C.sigma0n);
      z[i] = y[i] * C.tau2_sq / tau1_at(C);
    }
    const auto my = stats::moments(y);
    const auto mz = stats::moments(z);
    const double ks = stats::ks_normal(z);
    const double crit = stats::ks_critical_01(z.size());
    const double ratio = my.variance / target;
    row["scaled_mean"] = stat(my.mean, my.mean_se);
    row["scaled_variance"] = stat(my.variance, my.variance_se);
    row["target_variance"] = target;
    row["variance_ratio"] = stat(ratio, my.variance_se / target);
    row["z_mean"] = stat(mz.mean, mz.mean_se);
    row["z_variance"] = stat(mz.variance, mz.variance_se);
    row["ks"] = {{"value", ks}, {"critical_0.01", crit}, {"se", 0.5 / std::sqrt(static_cast<double>(z.size()))}};
    if (last) {
      const bool var_ok = std::abs(ratio - 1.0) <= cfg.tol.normality_variance;
      const bool mean_ok = std::abs(mz.mean) <= cfg.tol.mean_se_multiple * mz.mean_se;
      const bool ks_ok = ks <= crit;
      row["gates"] = {{"variance", var_ok}, {"mean", mean_ok}, {"ks", ks_ok}};
      if (!var_ok) why += "variance ratio " + fmt(ratio) + " outside tolerance; ";
      if (!mean_ok) why += "mean " + fmt(mz.mean) + " beyond " + fmt(cfg.tol.mean_se_multiple) + " SE; ";
      if (!ks_ok) why += "KS " + fmt(ks) + " above critical " + fmt(crit) + "; ";
      ok = ok && var_ok && mean_ok && ks_ok;
    }
    c.details["per_n"].push_back(row);
  }
  c.passed = ok;
  c.diagnostic = finish(why);
  rep.checks.push_back(std::move(c));
  return rep;
}

namespace {

struct BvmRun {
  std::vector<double> gap_median, gap_se, dist_median, dist_se, diff_median, diff_se;
  std::vector<Exclusions> exclusions;
  nlohmann::json constants = nlohmann::json::array();
};

BvmRun bvm_core(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const Population pop = Population::from_json(cfg.population);
  const std::size_t R = cfg.replications;
  BvmRun out;
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    const std::uint64_t n = cfg.n_grid[k];
    const AsymptoticConstants C = compute_constants(pop, static_cast<double>(n), cfg.M_max);
    out.constants.push_back(C.to_json());
    const double var_bvm = 1.0 / (C.alpha_n * C.tau2_sq);
    std::vector<double> gap(R, 0.0), dist(R, 0.0), diff(R, 0.0);
    std::vector<char> keep(R, 0);
    stats::parallel_for(R, threads, [&](std::size_t i) {
      const auto occ = sample_iid(pop, n, stream_for(cfg.seed, Check::BvM, k, i));
      const auto st = PartitionStats::from_occupancy(occ);
      const EstimateResult fit = cfg.prior.m_prior == PriorSpec::M::Fixed ? mle_sigma(st, cfg.prior.M_fixed)
                                                                         : profile_mle(st, cfg.prior.M_max);
      if (!fit.interior()) return;
      const PosteriorGrid post = posterior_sigma(st, cfg.prior);
      if (post.degenerate) return;
      keep[i] = 1;
      gap[i] = bvm_gap(post, fit.sigma_hat, var_bvm);
      dist[i] = std::sqrt(C.alpha_n) * std::abs(post.mean - fit.sigma_hat);
      if (cfg.alt_prior) {
        const PosteriorGrid alt = posterior_sigma(st, *cfg.alt_prior);
        diff[i] = std::abs(gap[i] - bvm_gap(alt, fit.sigma_hat, var_bvm));
      }
    });
    out.exclusions.push_back({static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 0)), R});
    const auto g = pick(gap, keep);
    const auto d = pick(dist, keep);
    const auto f = pick(diff, keep);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.gap_median.push_back(g.empty() ? nan : stats::median(g));
    out.gap_se.push_back(g.empty() ? nan : stats::median_se(g));
    out.dist_median.push_back(d.empty() ? nan : stats::median(d));
    out.dist_se.push_back(d.empty() ? nan : stats::median_se(d));
    out.diff_median.push_back(f.empty() ? nan : stats::median(f));
    out.diff_se.push_back(f.empty() ? nan : stats::median_se(f));
  }
  return out;
}

std::string exclusion_problems(const ExperimentConfig& cfg, const std::vector<Exclusions>& ex) {
  std::string why;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    if (ex[k].rate() > cfg.tol.exclusion_rate) {
      why += "n=" + std::to_string(cfg.n_grid[k]) + ": exclusion rate " + fmt(ex[k].rate()) + " above limit; ";
    }
  }
  return why;
}

CheckReport bvm_report(const ExperimentConfig& cfg, const BvmRun& run) {
  CheckReport c;
  c.check = Check::BvM;
  c.details["per_n"] = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    nlohmann::json row{{"n", cfg.n_grid[k]},
                       {"median_gap", stat(run.gap_median[k], run.gap_se[k])},
                       {"exclusions", run.exclusions[k].to_json()}};
    if (cfg.alt_prior) row["median_prior_gap_difference"] = stat(run.diff_median[k], run.diff_se[k]);
    c.details["per_n"].push_back(row);
  }
  std::string why = exclusion_problems(cfg, run.exclusions);
  const bool dec = strictly_decreasing(run.gap_median);
  const bool fin = run.gap_median.back() < cfg.tol.bvm_final_gap;
  if (!dec) why += "median gaps not strictly decreasing; ";
  if (!fin) why += "final median gap " + fmt(run.gap_median.back()) + " not below " + fmt(cfg.tol.bvm_final_gap) + "; ";
  bool prior_ok = true;
  if (cfg.alt_prior && run.diff_median.size() >= 2) {
    prior_ok = run.diff_median.back() < run.diff_median.front();
    if (!prior_ok) why += "prior gap difference did not shrink; ";
  }
  c.details["gates"] = {{"decreasing", dec}, {"final_gap", fin}, {"prior_washout", prior_ok}};
  c.passed = why.empty();
  c.diagnostic = finish(why);
  return c;
}

CheckReport posterior_mean_report(const ExperimentConfig& cfg, const BvmRun& run) {
  CheckReport c;
  c.check = Check::PosteriorMean;
  c.details["per_n"] = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    c.details["per_n"].push_back({{"n", cfg.n_grid[k]},
                                  {"median_scaled_distance", stat(run.dist_median[k], run.dist_se[k])},
                                  {"exclusions", run.exclusions[k].to_json()}});
  }
  std::string why = exclusion_problems(cfg, run.exclusions);
  const bool dec = strictly_decreasing(run.dist_median);
  if (!dec) why += "median scaled distance not decreasing; ";
  c.passed = why.empty();
  c.diagnostic = finish(why);
  return c;
}

}  // namespace

ExperimentReport run_bvm(const ExperimentConfig& cfg, unsigned threads) {
  const BvmRun run = bvm_core(cfg, threads);
  ExperimentReport r = single(bvm_report(cfg, run), cfg.seed);
  r.constants = run.constants;
  return r;
}

ExperimentReport run_posterior_mean(const ExperimentConfig& cfg, unsigned threads) {
  const BvmRun run = bvm_core(cfg, threads);
  ExperimentReport r = single(posterior_mean_report(cfg, run), cfg.seed);
  r.constants = run.constants;
  return r;
}

ExperimentReport run_lemma_limits(const Population& pop, double sigma, const std::vector<std::uint64_t>& n_grid,
                                  double tol) {
  if (n_grid.empty()) throw std::invalid_argument("lemma limits: empty n_grid");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::domain_error("lemma limits: sigma must lie in (0,1)");
  const double gamma = pop.rv().sigma0;
  const auto rhs = lemma_rhs(sigma, gamma);
  CheckReport c;
  c.check = Check::LemmaLimits;
  c.details["sigma"] = sigma;
  c.details["gamma"] = gamma;
  c.details["limits"] = rhs;
  c.details["per_n"] = nlohmann::json::array();
  static const char* labels[] = {"i", "ii", "iii", "iv", "v", "vi", "vii", "viii"};
  std::string why;
  bool ok = true;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const double n = static_cast<double>(n_grid[k]);
    const AtomSums s = atom_sums(pop, n, sigma);
    const double a = static_cast<double>(pop.alpha0(n));
    nlohmann::json ratios;
    for (int i = 0; i < 8; ++i) {
      const double ratio = s.value[i] / (a * rhs[i]);
      ratios[labels[i]] = stat(ratio, 0.0);
      if (k + 1 == n_grid.size() && !(std::abs(ratio - 1.0) <= tol)) {
        ok = false;
        why += std::string("(") + labels[i] + ") ratio " + fmt(ratio) + " outside tolerance; ";
      }
    }
    c.details["per_n"].push_back({{"n", n_grid[k]}, {"alpha0", a}, {"ratios", ratios}});
  }
  c.details["tolerance"] = tol;
  c.passed = ok;
  c.diagnostic = ok ? "ok" : finish(why);
  return single(std::move(c), 0);
}

ExperimentReport run_root_rate(const Population& pop, const std::vector<std::uint64_t>& n_grid,
                               double slope_halfwidth) {
  if (n_grid.empty()) throw std::invalid_argument("root rate: empty n_grid");
  const RegularVariation& rv = pop.rv();
  CheckReport c;
  c.check = Check::RootRate;
  c.details["per_n"] = nlohmann::json::array();
  std::vector<double> lx, ly;
  for (std::uint64_t n : n_grid) {
    const double root = sigma0n_root(pop, static_cast<double>(n));
    const double d = std::abs(root - rv.sigma0);
    c.details["per_n"].push_back({{"n", n}, {"sigma0n", root}, {"abs_diff", d},
                                  {"abs_diff_times_log_n", d * std::log(static_cast<double>(n))}});
    if (d > 0.0) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(d));
    }
  }
  if (lx.size() < 2) {
    c.details["slope"] = nullptr;
    c.passed = true;
    c.diagnostic = "slope undefined: fewer than two sample sizes with a nonzero offset";
    return single(std::move(c), 0);
  }
  const auto fit = stats::linear_fit(lx, ly);
  c.details["slope"] = stat(fit.slope, fit.slope_se);
  if (rv.L0.family == SlowlyVarying::Family::Constant) {
    const double lo = -rv.sigma0 - slope_halfwidth;
    const double hi = -rv.sigma0 + slope_halfwidth;
    c.details["band"] = {lo, hi};
    c.passed = fit.slope >= lo && fit.slope <= hi;
    c.diagnostic = c.passed ? "ok" : "slope " + fmt(fit.slope) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]";
  } else {
    c.passed = true;
    c.diagnostic = "slowly varying L0: rate reported without a bound";
  }
  return single(std::move(c), 0);
}

ExperimentReport run_tau1_mc(const Population& pop, std::uint64_t n, std::uint64_t R, std::uint64_t seed,
                             double tol, unsigned threads) {
  if (R < 2) throw std::invalid_argument("tau1 check: R must be at least 2");
  if (n < 1) throw std::invalid_argument("tau1 check: n must be positive");
  const double nd = static_cast<double>(n);
  const double s0n = sigma0n_root(pop, nd);
  const double t1 = tau1_sq(pop.rv().sigma0);
  const double a = static_cast<double>(pop.alpha0(nd));
  std::vector<double> V(R, 0.0);
  stats::parallel_for(R, threads, [&](std::size_t i) {
    const auto occ = sample_poissonized(pop, n, stream_for(seed, Check::Tau1MC, 0, i));
    numerics::KahanSum v;
    for (const auto& [idx, cnt] : occ.counts) {
      if (cnt >= 1) v += 1.0 / s0n - numerics::g_sigma(cnt, s0n);
    }
    V[i] = v.value();
  });
  const auto m = stats::moments(V);
  const double ratio = m.variance / (a * t1);
  const AtomSums s = atom_sums(pop, nd, s0n);
  const double exact = s.value[1] / (s0n * s0n) - 2.0 / s0n * s.value[6] + s.value[4] - s.value[5];

  CheckReport c;
  c.check = Check::Tau1MC;
  c.details = {{"n", n},
               {"replications", R},
               {"sigma0n", s0n},
               {"alpha0", a},
               {"tau1_sq", t1},
               {"score_mean", stat(m.mean, m.mean_se)},
               {"score_variance", stat(m.variance, m.variance_se)},
               {"variance_ratio", stat(ratio, m.variance_se / (a * t1))},
               {"exact_finite_n_ratio", stat(exact / (a * t1), 0.0)},
               {"tolerance", tol}};
  c.passed = std::abs(ratio - 1.0) <= tol;
  c.diagnostic = c.passed ? "ok" : "variance ratio " + fmt(ratio) + " outside tolerance";
  return single(std::move(c), seed);
}

ExperimentReport run_precision_profile(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const Population pop = Population::from_json(cfg.population);
  const std::size_t R = cfg.replications;
  ExperimentReport rep;
  rep.seed = cfg.seed;
  CheckReport c;
  c.check = Check::PrecisionProfile;
  c.details["per_n"] = nlohmann::json::array();
  std::vector<double> fractions;
  bool symbolic = false;
  bool agree_all = true;
  std::string why;
  std::vector<Exclusions> exs;

  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    const std::uint64_t n = cfg.n_grid[k];
    const AsymptoticConstants C = compute_constants(pop, static_cast<double>(n), cfg.M_max);
    add_constants(rep, C);
    symbolic = std::isinf(C.K0);
    const Boundary predicted = C.K0 > 0 ? Boundary::UpperM : Boundary::LowerM;
    std::vector<double> Mhat(R, 0.0), dev(R, 0.0);
    std::vector<char> keep(R, 0), at_boundary(R, 0);
    stats::parallel_for(R, threads, [&](std::size_t i) {
      const auto occ = sample_iid(pop, n, stream_for(cfg.seed, Check::PrecisionProfile, k, i));
      const auto st = PartitionStats::from_occupancy(occ);
      const auto fit = profile_mle(st, cfg.M_max);
      if (!fit.interior()) return;
      keep[i] = 1;
      Mhat[i] = *fit.M_hat;
      at_boundary[i] = fit.m_boundary == predicted ? 1 : 0;
      const double ref = mle_sigma(st, cfg.M_values.front()).sigma_hat;
      double worst = 0.0;
      for (double M : cfg.M_values) worst = std::max(worst, std::abs(mle_sigma(st, M).sigma_hat - ref));
      dev[i] = worst;
    });
    exs.push_back({static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 0)), R});
    const auto m = pick(Mhat, keep);
    const auto d = pick(dev, keep);
    const auto b = pick(at_boundary, keep);
    nlohmann::json row{{"n", n}, {"exclusions", exs.back().to_json()}, {"M0", C.M0}, {"K0", C.to_json()["K0"]}};
    if (!m.empty()) {
      const double kept = static_cast<double>(m.size());
      const double limit = cfg.tol.agreement_multiple / std::sqrt(C.alpha_n);
      const auto agree = static_cast<double>(std::count_if(d.begin(), d.end(), [&](double x) { return x <= limit; }));
      if (agree < kept) agree_all = false;
      row["M_hat_quartiles"] = {stats::quantile(m, 0.25), stats::quantile(m, 0.5), stats::quantile(m, 0.75)};
      row["M_hat_median"] = stat(stats::median(m), stats::median_se(m));
      row["sigma_agreement_fraction"] = stat(agree / kept, std::sqrt(agree / kept * (1 - agree / kept) / kept));
      row["sigma_agreement_limit"] = limit;
      row["max_sigma_deviation"] = *std::max_element(d.begin(), d.end());
      if (symbolic) {
        const double f = static_cast<double>(std::count(b.begin(), b.end(), 1)) / kept;
        fractions.push_back(f);
        row["predicted_boundary"] = to_string(predicted);
        row["boundary_fraction"] = stat(f, std::sqrt(f * (1 - f) / kept));
      }
    } else {
      agree_all = false;
      if (symbolic) fractions.push_back(0.0);
    }
    c.details["per_n"].push_back(row);
  }
  why += exclusion_problems(cfg, exs);
  if (!agree_all) why += "sigma estimates disagree across M values; ";
  if (symbolic) {
    if (!nondecreasing(fractions)) why += "boundary fraction decreases along n_grid; ";
    if (fractions.back() < cfg.tol.boundary_fraction) {
      why += "final boundary fraction " + fmt(fractions.back()) + " below " + fmt(cfg.tol.boundary_fraction) + "; ";
    }
  }
  c.passed = why.empty();
  c.diagnostic = finish(why);
  rep.checks.push_back(std::move(c));
  return rep;
}

ExperimentReport run_forensic(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const Population pop = Population::from_json(cfg.population);
  const std::size_t R = cfg.replications;
  ExperimentReport rep;
  rep.seed = cfg.seed;
  CheckReport c;
  c.check = Check::Forensic;
  c.details["per_n"] = nlohmann::json::array();
  bool ok = true;
  std::string why;

  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    const std::uint64_t n = cfg.n_grid[k];
    const AsymptoticConstants C = compute_constants(pop, static_cast<double>(n), cfg.M_max);
    add_constants(rep, C);
    const double s0 = C.sigma0;
    const double scale = std::sqrt(C.alpha_n) * (1 - s0) * (1 - s0) * C.tau2_sq / tau1_at(C);
    const double centre = 1.0 / (1.0 - C.sigma0n);
    std::vector<double> z(R, 0.0);
    std::vector<char> keep(R, 0), lr_ok(R, 0);
    stats::parallel_for(R, threads, [&](std::size_t i) {
      const auto occ = sample_iid(pop, n, stream_for(cfg.seed, Check::Forensic, k, i));
      auto sizes = PartitionStats::from_occupancy(occ).block_sizes();
      sizes.push_back(1);  // the crime-scene profile, new to the database
      const auto fr = forensic_lr(PartitionStats::from_block_sizes(std::move(sizes)), cfg.prior);
      lr_ok[i] = fr.lr > static_cast<double>(n) + 1.0 ? 1 : 0;
      if (fr.degenerate) return;
      keep[i] = 1;
      z[i] = scale * (1.0 / (static_cast<double>(n) * fr.phi_mean) - centre);
    });
    Exclusions ex{static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 0)), R};
    const auto lr_hits = static_cast<std::size_t>(std::count(lr_ok.begin(), lr_ok.end(), 1));
    nlohmann::json row{{"n", n}, {"exclusions", ex.to_json()}, {"lr_above_n_plus_1", lr_hits}};
    if (lr_hits != R) {
      ok = false;
      why += "n=" + std::to_string(n) + ": lr <= n+1 in " + std::to_string(R - lr_hits) + " replications; ";
    }
    if (ex.rate() > cfg.tol.exclusion_rate) {
      ok = false;
      why += "n=" + std::to_string(n) + ": exclusion rate " + fmt(ex.rate()) + " above limit; ";
    }
    const auto kept = pick(z, keep);
    if (kept.size() >= 2) {
      const auto m = stats::moments(kept);
      const double ks = stats::ks_normal(kept);
      const double crit = stats::ks_critical_01(kept.size());
      row["z_mean"] = stat(m.mean, m.mean_se);
      row["variance_ratio"] = stat(m.variance, m.variance_se);
      row["ks"] = {{"value", ks}, {"critical_0.01", crit}, {"se", 0.5 / std::sqrt(static_cast<double>(kept.size()))}};
      if (k + 1 == cfg.n_grid.size() && !(std::abs(m.variance - 1.0) <= cfg.tol.forensic_variance)) {
        ok = false;
        why += "variance ratio " + fmt(m.variance) + " outside tolerance; ";
      }
    } else {
      ok = false;
      why += "n=" + std::to_string(n) + ": fewer than two usable replications; ";
    }
    c.details["per_n"].push_back(row);
  }
  c.passed = ok;
  c.diagnostic = ok ? "ok" : finish(why);
  rep.checks.push_back(std::move(c));
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport out;
  out.seed = cfg.seed;
  out.config = cfg.to_json();
  const Population pop = Population::from_json(cfg.population);
  auto merge = [&](ExperimentReport r) {
    for (auto& c : r.checks) out.checks.push_back(std::move(c));
    for (auto& k : r.constants) {
      if (std::find(out.constants.begin(), out.constants.end(), k) == out.constants.end()) out.constants.push_back(k);
    }
  };
  const bool want_bvm = std::count(cfg.checks.begin(), cfg.checks.end(), Check::BvM) > 0;
  const bool want_pm = std::count(cfg.checks.begin(), cfg.checks.end(), Check::PosteriorMean) > 0;
  std::optional<BvmRun> bvm;
  if (want_bvm || want_pm) bvm = bvm_core(cfg, threads);

  for (Check c : cfg.checks) {
    switch (c) {
      case Check::Normality:
        merge(run_normality(cfg, threads));
        break;
      case Check::BvM:
      case Check::PosteriorMean: {
        ExperimentReport r = single(c == Check::BvM ? bvm_report(cfg, *bvm) : posterior_mean_report(cfg, *bvm), cfg.seed);
        r.constants = bvm->constants;
        merge(std::move(r));
        break;
      }
      case Check::LemmaLimits:
        merge(run_lemma_limits(pop, cfg.lemma_sigma.value_or(pop.rv().sigma0), cfg.n_grid, cfg.tol.lemma));
        break;
      case Check::RootRate:
        merge(run_root_rate(pop, cfg.n_grid, cfg.tol.root_slope_halfwidth));
        break;
      case Check::PrecisionProfile:
        merge(run_precision_profile(cfg, threads));
        break;
      case Check::Tau1MC:
        merge(run_tau1_mc(pop, cfg.n_grid.back(), cfg.replications, cfg.seed, cfg.tol.tau1, threads));
        break;
      case Check::Forensic:
        merge(run_forensic(cfg, threads));
        break;
    }
  }
  if (cfg.record_timing) {
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

}  // namespace pytype
