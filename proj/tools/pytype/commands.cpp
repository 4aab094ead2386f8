#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "io.hpp"
#include "pytype/estimators.hpp"
#include "pytype/experiments.hpp"
#include "pytype/inference.hpp"
#include "pytype/population.hpp"
#include "pytype/rng.hpp"
#include "pytype/sampler.hpp"
#include "pytype/verification.hpp"
#include "pytype/version.hpp"

namespace pytype::cli {

namespace {

nlohmann::json provenance(const std::string& command, const nlohmann::json& config,
                          std::optional<std::uint64_t> seed, const std::vector<InputDigest>& inputs) {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& d : inputs) in.push_back(d.to_json());
  return {{"tool", kToolName},
          {"version", kVersion},
          {"command", command},
          {"config", config},
          {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
          {"inputs", in}};
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& flag) {
  std::istringstream in(text);
  double a = 0.0, b = 0.0;
  char comma = 0;
  if (!(in >> a >> comma >> b) || comma != ',' || !(in >> std::ws).eof()) {
    throw UsageError(flag + " expects two numbers separated by a comma, got '" + text + "'");
  }
  return {a, b};
}

PriorSpec parse_prior(const PriorOptions& o) {
  PriorSpec p;
  if (o.prior == "uniform") {
    p.sigma_prior = PriorSpec::Sigma::Uniform01;
  } else if (o.prior.rfind("beta:", 0) == 0) {
    const auto [a, b] = parse_pair(o.prior.substr(5), "--prior beta:");
    p.sigma_prior = PriorSpec::Sigma::Beta;
    p.a = a;
    p.b = b;
  } else {
    throw UsageError("--prior must be 'uniform' or 'beta:A,B', got '" + o.prior + "'");
  }
  if (o.m && o.m_uniform) throw UsageError("--m and --m-uniform are exclusive");
  if (o.m_uniform) {
    p.m_prior = PriorSpec::M::UniformInterval;
    p.M_max = *o.m_uniform;
  } else {
    p.m_prior = PriorSpec::M::Fixed;
    p.M_fixed = o.m.value_or(1.0);
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return p;
}

std::vector<std::string> boundary_warnings(const EstimateResult& r) {
  std::vector<std::string> w;
  if (r.boundary == Boundary::UpperSigma) {
    w.push_back("sigma estimate at the upper end of the window: the likelihood increases towards sigma = 1 "
                "(typical when nearly all observations are distinct)");
  } else if (r.boundary == Boundary::LowerSigma) {
    w.push_back("sigma estimate at the lower end of the window: the likelihood decreases in sigma "
                "(typical when there are very few distinct species)");
  }
  if (r.M_hat && r.m_boundary == Boundary::UpperM) w.push_back("M estimate at the upper end of [0, m_max]");
  if (r.M_hat && r.m_boundary == Boundary::LowerM) w.push_back("M estimate at zero");
  return w;
}

}  // namespace

int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g) {
  const int sources = !o.py.empty() + o.power_law.has_value() + !o.synthetic.empty() + !o.population_file.empty();
  if (sources != 1) throw UsageError("give exactly one of --py, --power-law, --synthetic, --population");
  if (o.n == 0) throw UsageError("--n must be positive");
  if (o.out.empty()) throw UsageError("--out is required");
  const std::string stats_path =
      o.stats_out.empty() ? std::filesystem::path(o.out).replace_extension(".stats.json").string() : o.stats_out;
  ensure_writable(o.out, o.force);
  ensure_writable(stats_path, o.force);

  nlohmann::json config{{"n", o.n}, {"occupancy", o.occupancy}};
  std::vector<InputDigest> inputs;
  Rng rng({o.seed, 0});
  LabeledCounts rows;
  std::vector<std::string> labels;

  if (!o.py.empty()) {
    const auto [sigma, M] = parse_pair(o.py, "--py");
    if (!(sigma >= 0.0 && sigma < 1.0) || !(M >= 0.0) || !(M + sigma > 0.0)) {
      throw UsageError("--py needs sigma in [0,1), M >= 0 and M + sigma > 0");
    }
    config["model"] = {{"kind", "pitman_yor"}, {"sigma", sigma}, {"M", M}};
    const auto seq = sample_py_sequence(sigma, M, o.n, rng);
    std::vector<std::uint64_t> counts;
    for (auto b : seq) {
      if (b > counts.size()) counts.resize(b, 0);
      ++counts[b - 1];
      if (!o.occupancy) labels.push_back("b" + std::to_string(b));
    }
    for (std::size_t i = 0; i < counts.size(); ++i) rows.emplace_back("b" + std::to_string(i + 1), counts[i]);
  } else {
    nlohmann::json spec;
    if (o.power_law) {
      spec = {{"kind", "power_law"}, {"alpha", *o.power_law}};
    } else if (!o.synthetic.empty()) {
      const auto [gamma, r] = parse_pair(o.synthetic, "--synthetic");
      spec = {{"kind", "synthetic"}, {"gamma", gamma}, {"r", r}};
    } else {
      const std::string text = read_file(o.population_file);
      inputs.push_back(digest_of(o.population_file, text));
      try {
        spec = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw IoError(o.population_file + ": " + e.what());
      }
    }
    Population pop = [&] {
      try {
        return Population::from_json(spec);
      } catch (const std::exception& e) {
        if (!o.population_file.empty()) throw IoError(o.population_file + ": " + e.what());
        throw UsageError(e.what());
      }
    }();
    config["model"] = pop.to_json();
    const auto seq = sample_iid_sequence(pop, o.n, rng);
    std::map<std::uint64_t, std::uint64_t> counts;
    for (auto j : seq) {
      ++counts[j];
      if (!o.occupancy) labels.push_back("s" + std::to_string(j));
    }
    for (const auto& [j, c] : counts) rows.emplace_back("s" + std::to_string(j), c);
  }

  std::ostringstream csv;
  if (o.occupancy) {
    write_occupancy_csv(csv, rows);
  } else {
    write_species_csv(csv, labels);
  }
  const PartitionStats stats = stats_from_labeled_counts(rows);
  nlohmann::json sj = stats.to_json();
  sj["provenance"] = provenance("simulate", config, o.seed, inputs);
  write_text(o.out, csv.str(), o.force);
  write_text(stats_path, sj.dump(2) + "\n", o.force);

  std::cout << "n=" << stats.n() << " K=" << stats.K() << " singletons=" << stats.singletons()
            << " largest_block=" << stats.max_block() << "\n";
  if (g.verbose) std::cerr << "wrote " << o.out << " and " << stats_path << "\n";
  return 0;
}

int cmd_fit(const FitOptions& o, const GlobalOptions& g) {
  if (o.m && o.profile) throw UsageError("--m and --profile are exclusive");
  if (o.m && (!(*o.m >= 0.0) || !std::isfinite(*o.m))) throw UsageError("--m must be finite and >= 0");
  if (o.profile && (!(o.m_max > 0.0) || !std::isfinite(o.m_max))) throw UsageError("--m-max must be positive");
  if (!o.out.empty()) ensure_writable(o.out, o.force);
  const LoadedSample s = load_sample(o.input);
  if (s.stats.n() < 2) throw IoError(o.input + ": need at least two observations");

  EstimateOptions opts;
  EstimateResult r = o.profile ? profile_mle(s.stats, o.m_max, opts) : mle_sigma(s.stats, o.m.value_or(0.0), opts);
  std::vector<std::string> warnings = boundary_warnings(r);
  if (o.sandwich) {
    if (r.interior()) {
      r.se_sandwich = sandwich_se(s.stats, r.sigma_hat);
    } else {
      warnings.push_back("sandwich standard error not defined at a boundary estimate");
    }
  }
  nlohmann::json config{{"input_format", s.format}, {"profile", o.profile}, {"sandwich", o.sandwich}};
  if (o.profile) {
    config["m_max"] = o.m_max;
  } else {
    config["m"] = o.m.value_or(0.0);
  }
  nlohmann::json out{{"result", r.to_json()},
                     {"warnings", warnings},
                     {"provenance", provenance("fit", config, std::nullopt, {s.digest})}};
  if (r.interior()) out["alpha_hat"] = alpha_hat(s.stats, r.sigma_hat);
  emit_json(out, o.out, o.force);
  if (g.verbose) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  }
  return 0;
}

int cmd_posterior(const PosteriorOptions& o, const GlobalOptions& g) {
  const PriorSpec prior = parse_prior(o.prior);
  if (!(o.level > 0.0 && o.level < 1.0)) throw UsageError("--level must lie in (0,1)");
  if (!o.out.empty()) ensure_writable(o.out, o.force);
  const LoadedSample s = load_sample(o.input);
  if (s.stats.n() < 2) throw IoError(o.input + ": need at least two observations");
  const PosteriorGrid post = posterior_sigma(s.stats, prior);
  const PosteriorSummary sum = posterior_mean_and_interval(post, o.level);
  std::vector<std::string> warnings;
  if (post.degenerate) warnings.push_back("posterior mass is concentrated in an end cell of the sigma grid");
  nlohmann::json config{{"prior", prior.to_json()}, {"level", o.level}, {"input_format", s.format}};
  nlohmann::json out{{"posterior", post.summary_json()},
                     {"interval", {{"level", o.level}, {"lower", sum.lower}, {"upper", sum.upper}}},
                     {"warnings", warnings},
                     {"provenance", provenance("posterior", config, std::nullopt, {s.digest})}};
  emit_json(out, o.out, o.force);
  if (g.verbose) std::cerr << "grid nodes: " << post.sigma_nodes.size() << "\n";
  return 0;
}

int cmd_lr(const LrOptions& o, const GlobalOptions& g) {
  const PriorSpec prior = parse_prior(o.prior);
  if (o.crime_profile.empty()) throw UsageError("--crime-profile must be nonempty");
  if (!o.out.empty()) ensure_writable(o.out, o.force);
  const LoadedSample s = load_sample(o.db);
  if (s.format == "stats_json") {
    throw IoError(o.db + ": the database must be a CSV so the crime-scene profile can be looked up");
  }
  LabeledCounts rows = s.labeled;
  for (const auto& [label, c] : rows) {
    if (label == o.crime_profile && c > 0) {
      throw IoError("profile '" + o.crime_profile + "' already occurs in the database; the likelihood ratio here "
                    "covers profiles new to the database");
    }
  }
  rows.emplace_back(o.crime_profile, 1);
  const PartitionStats stats = stats_from_labeled_counts(rows);
  const ForensicResult fr = forensic_lr(stats, prior);
  const double n = static_cast<double>(fr.database_size);
  std::vector<std::string> warnings;
  if (fr.degenerate) warnings.push_back("posterior mass is concentrated in an end cell of the sigma grid");

  // Plug-in comparison of 1/(n phi) with 1/(1 - sigma_hat).
  nlohmann::json plug;
  const EstimateResult fit = prior.m_prior == PriorSpec::M::Fixed ? mle_sigma(stats, prior.M_fixed)
                                                                   : profile_mle(stats, prior.M_max);
  plug["sigma_hat"] = fit.sigma_hat;
  plug["sigma_hat_boundary"] = to_string(fit.boundary);
  plug["inverse_n_phi"] = 1.0 / (n * fr.phi_mean);
  plug["plug_in_centre"] = 1.0 / (1.0 - fit.sigma_hat);

  nlohmann::json config{{"prior", prior.to_json()}, {"crime_profile", o.crime_profile}, {"input_format", s.format}};
  nlohmann::json out{{"lr", fr.lr},
                     {"log10_lr", std::log10(fr.lr)},
                     {"phi_mean", fr.phi_mean},
                     {"phi_sd", fr.phi_sd},
                     {"database_size", fr.database_size},
                     {"sigma_posterior",
                      {{"mean", fr.sigma_summary.mean},
                       {"sd", fr.sigma_summary.sd},
                       {"lower_95", fr.sigma_summary.lower},
                       {"upper_95", fr.sigma_summary.upper}}},
                     {"plug_in", plug},
                     {"warnings", warnings},
                     {"provenance", provenance("lr", config, std::nullopt, {s.digest})}};
  emit_json(out, o.out, o.force);
  if (g.verbose) std::cerr << "lr = " << fr.lr << " (n + 1 = " << n + 1.0 << ")\n";
  return 0;
}

int cmd_verify(const VerifyOptions& o, const GlobalOptions& g) {
  if (!o.out.empty()) ensure_writable(o.out, o.force);
  const auto results = run_verification(o.fast);
  bool ok = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::printf("%-30s %-4s %9.3fs  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds, r.summary.c_str());
    arr.push_back({{"name", r.name}, {"passed", r.passed}, {"summary", r.summary}, {"details", r.details},
                   {"seconds", r.seconds}});
  }
  std::fflush(stdout);
  if (!o.out.empty()) {
    nlohmann::json out{{"checks", arr}, {"passed", ok},
                       {"provenance", provenance("verify", {{"fast", o.fast}}, std::nullopt, {})}};
    emit_json(out, o.out, o.force);
  }
  if (g.verbose) std::cerr << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok ? 0 : 1;
}

int cmd_experiment(const ExperimentOptions& o, const GlobalOptions& g) {
  if (!o.out.empty()) ensure_writable(o.out, o.force);
  const std::string text = read_file(o.config);
  const InputDigest digest = digest_of(o.config, text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(o.config + ": " + e.what());
  }
  if (!j.is_object()) throw IoError(o.config + ": config must be a JSON object");
  // Flags override file values.
  if (o.seed) j["seed"] = *o.seed;
  if (o.replications) j["replications"] = *o.replications;
  if (o.timing) j["record_timing"] = true;
  if (!o.checks.empty()) {
    nlohmann::json cs = nlohmann::json::array();
    std::istringstream in(o.checks);
    for (std::string c; std::getline(in, c, ',');) cs.push_back(c);
    j["checks"] = cs;
  }
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(o.config + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(o.config + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw IoError(o.config + ": " + e.what());
  }
  const ExperimentReport rep = run_experiment(cfg, g.threads);
  nlohmann::json out = rep.to_json();
  // The worker count and output path are deliberately absent so reruns compare byte for byte.
  out["provenance"] = provenance("experiment", rep.config, cfg.seed, {digest});
  for (const auto& c : rep.checks) {
    std::fprintf(stderr, "%-18s %s  %s\n", to_string(c.check).c_str(), c.passed ? "PASS" : "FAIL",
                 c.diagnostic.c_str());
  }
  emit_json(out, o.out, o.force);
  return rep.passed() ? 0 : 1;
}

}  // namespace pytype::cli
