#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pytype/inference.hpp"
#include "pytype/population.hpp"

namespace pytype {

enum class Check { Normality, BvM, PosteriorMean, LemmaLimits, RootRate, PrecisionProfile, Tau1MC, Forensic };

std::string to_string(Check c);
Check check_from_string(const std::string& s);

struct Tolerances {
  double normality_variance = 0.15;  // relative
  double mean_se_multiple = 3.0;
  double bvm_final_gap = 0.1;
  double lemma = 0.05;  // relative, at the largest n
  double root_slope_halfwidth = 0.15;
  double tau1 = 0.10;
  double forensic_variance = 0.20;
  double boundary_fraction = 0.6;
  double agreement_multiple = 3.0;
  double exclusion_rate = 0.05;

  nlohmann::json to_json() const;
  static Tolerances from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  nlohmann::json population;  // Population spec
  std::vector<std::uint64_t> n_grid;
  std::uint64_t replications = 2;
  std::vector<double> M_values{0.0};
  double M_max = 50.0;
  PriorSpec prior;
  std::optional<PriorSpec> alt_prior;  // BvM: second prior whose gaps are compared
  std::uint64_t seed = 1;
  std::vector<Check> checks;
  std::optional<double> lemma_sigma;  // defaults to σ₀
  Tolerances tol;
  bool record_timing = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct CheckReport {
  Check check = Check::Normality;
  bool passed = false;
  std::string diagnostic;
  nlohmann::json details;

  nlohmann::json to_json() const;
};

struct ExperimentReport {
  std::vector<CheckReport> checks;
  nlohmann::json config;  // resolved config, set by run_experiment
  nlohmann::json constants = nlohmann::json::array();  // AsymptoticConstants per n
  std::uint64_t seed = 0;
  std::optional<double> wall_seconds;

  bool passed() const;
  nlohmann::json to_json() const;
};

ExperimentReport run_normality(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_bvm(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_posterior_mean(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_lemma_limits(const Population& pop, double sigma, const std::vector<std::uint64_t>& n_grid,
                                  double tol = 0.05);
ExperimentReport run_root_rate(const Population& pop, const std::vector<std::uint64_t>& n_grid,
                               double slope_halfwidth = 0.15);
ExperimentReport run_tau1_mc(const Population& pop, std::uint64_t n, std::uint64_t R, std::uint64_t seed,
                             double tol = 0.10, unsigned threads = 1);
ExperimentReport run_precision_profile(const ExperimentConfig& cfg, unsigned threads = 1);
ExperimentReport run_forensic(const ExperimentConfig& cfg, unsigned threads = 1);

/// Runs every configured check in order and merges the reports.
ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

}  // namespace pytype
