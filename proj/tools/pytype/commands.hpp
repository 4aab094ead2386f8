#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pytype::cli {

struct GlobalOptions {
  unsigned threads = 1;
  bool verbose = false;
};

struct SimulateOptions {
  std::string py;               // "sigma,M"
  std::optional<double> power_law;
  std::string synthetic;        // "gamma,r"
  std::string population_file;  // population spec JSON
  std::uint64_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string stats_out;
  bool occupancy = false;
  bool force = false;
};

struct FitOptions {
  std::string input;
  std::optional<double> m;
  bool profile = false;
  double m_max = 50.0;
  bool sandwich = false;
  std::string out;
  bool force = false;
};

struct PriorOptions {
  std::string prior = "uniform";  // "uniform" or "beta:A,B"
  std::optional<double> m;
  std::optional<double> m_uniform;
};

struct PosteriorOptions {
  std::string input;
  PriorOptions prior;
  double level = 0.95;
  std::string out;
  bool force = false;
};

struct LrOptions {
  std::string db;
  std::string crime_profile;
  PriorOptions prior;
  std::string out;
  bool force = false;
};

struct VerifyOptions {
  bool fast = false;
  std::string out;
  bool force = false;
};

struct ExperimentOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::string checks;  // comma-separated override
  bool timing = false;
  std::string out;
  bool force = false;
};

int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g);
int cmd_fit(const FitOptions& o, const GlobalOptions& g);
int cmd_posterior(const PosteriorOptions& o, const GlobalOptions& g);
int cmd_lr(const LrOptions& o, const GlobalOptions& g);
int cmd_verify(const VerifyOptions& o, const GlobalOptions& g);
int cmd_experiment(const ExperimentOptions& o, const GlobalOptions& g);

}  // namespace pytype::cli
