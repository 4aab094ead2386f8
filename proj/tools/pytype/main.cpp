#include <algorithm>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "io.hpp"
#include "pytype/version.hpp"

using namespace pytype::cli;

namespace {

void add_prior_flags(CLI::App* cmd, PriorOptions& p) {
  cmd->add_option("--prior", p.prior, "Prior on sigma: 'uniform' or 'beta:A,B'")->capture_default_str();
  auto* m = cmd->add_option("--m", p.m, "Fix the precision M (default 1)");
  auto* mu = cmd->add_option("--m-uniform", p.m_uniform, "Uniform prior on M over [0, MAX]");
  m->excludes(mu);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pitman-Yor type-parameter estimation: simulate, fit, posterior, likelihood ratios, checks"};
  app.set_version_flag("--version", std::string(pytype::kToolName) + " " + pytype::kVersion);
  app.require_subcommand(1);

  GlobalOptions global;
  global.threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", global.threads, "Worker threads for Monte Carlo replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-v,--verbose", global.verbose, "Progress and warnings on stderr");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a sample and write it with its statistics");
  simulate->add_option("--py", sim.py, "Pitman-Yor partition with parameters SIGMA,M");
  simulate->add_option("--power-law", sim.power_law, "i.i.d. sample from p_j proportional to j^-ALPHA");
  simulate->add_option("--synthetic", sim.synthetic, "i.i.d. sample from the synthetic population GAMMA,R");
  simulate->add_option("--population", sim.population_file, "i.i.d. sample from a population spec JSON file");
  simulate->add_option("--n", sim.n, "Sample size")->required();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Sample CSV to write")->required();
  simulate->add_option("--stats", sim.stats_out, "Stats JSON to write (default: <out>.stats.json)");
  simulate->add_flag("--occupancy", sim.occupancy, "Write species,count rows instead of one row per draw");
  simulate->add_flag("--force", sim.force, "Overwrite existing outputs");

  FitOptions fit;
  auto* fitc = app.add_subcommand("fit", "Maximum marginal likelihood estimate of sigma (and M)");
  fitc->add_option("--input", fit.input, "Species CSV, occupancy CSV or stats JSON")->required();
  auto* fit_m = fitc->add_option("--m", fit.m, "Fixed precision M (default 0)");
  auto* fit_profile = fitc->add_flag("--profile", fit.profile, "Estimate M too by profile likelihood");
  fit_m->excludes(fit_profile);
  fitc->add_option("--m-max", fit.m_max, "Upper end of the M range for --profile")->capture_default_str();
  fitc->add_flag("--sandwich", fit.sandwich, "Add the plug-in sandwich standard error");
  fitc->add_option("--out", fit.out, "Result JSON (default: stdout)");
  fitc->add_flag("--force", fit.force, "Overwrite an existing output");

  PosteriorOptions post;
  auto* postc = app.add_subcommand("posterior", "Grid posterior of sigma");
  postc->add_option("--input", post.input, "Species CSV, occupancy CSV or stats JSON")->required();
  add_prior_flags(postc, post.prior);
  postc->add_option("--level", post.level, "Credible interval level")->capture_default_str();
  postc->add_option("--out", post.out, "Result JSON (default: stdout)");
  postc->add_flag("--force", post.force, "Overwrite an existing output");

  LrOptions lr;
  auto* lrc = app.add_subcommand("lr", "Likelihood ratio for a crime-scene profile new to the database");
  lrc->add_option("--db", lr.db, "Database as species CSV or occupancy CSV")->required();
  lrc->add_option("--crime-profile", lr.crime_profile, "Label of the crime-scene profile")->required();
  add_prior_flags(lrc, lr.prior);
  lrc->add_option("--out", lr.out, "Result JSON (default: stdout)");
  lrc->add_flag("--force", lr.force, "Overwrite an existing output");

  VerifyOptions ver;
  auto* verc = app.add_subcommand("verify", "Run the invariant suite; exits 1 if any check fails");
  verc->add_flag("--fast", ver.fast, "Skip the Monte Carlo and quadrature cross-checks");
  verc->add_option("--out", ver.out, "Also write the results as JSON");
  verc->add_flag("--force", ver.force, "Overwrite an existing output");

  ExperimentOptions exp;
  auto* expc = app.add_subcommand("experiment", "Run a Monte Carlo experiment; exits 1 if any check fails");
  expc->add_option("--config", exp.config, "Experiment config JSON")->required();
  expc->add_option("--seed", exp.seed, "Override the config seed");
  expc->add_option("--replications", exp.replications, "Override the replication count");
  expc->add_option("--checks", exp.checks, "Override the checks, comma-separated");
  expc->add_flag("--timing", exp.timing, "Record wall-clock time in the report");
  expc->add_option("--out", exp.out, "Report JSON (default: stdout)");
  expc->add_flag("--force", exp.force, "Overwrite an existing output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, global);
    if (fitc->parsed()) return cmd_fit(fit, global);
    if (postc->parsed()) return cmd_posterior(post, global);
    if (lrc->parsed()) return cmd_lr(lr, global);
    if (verc->parsed()) return cmd_verify(ver, global);
    if (expc->parsed()) return cmd_experiment(exp, global);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
