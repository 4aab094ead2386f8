#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "pytype/partition.hpp"

namespace pytype {

struct PriorSpec {
  enum class Sigma { Uniform01, Beta };
  enum class M { Fixed, UniformInterval };

  Sigma sigma_prior = Sigma::Uniform01;
  double a = 1.0;  // Beta shapes
  double b = 1.0;
  M m_prior = M::Fixed;
  double M_fixed = 1.0;
  double M_max = 50.0;

  static PriorSpec uniform(double M_fixed = 1.0);
  static PriorSpec beta(double a, double b, double M_fixed = 1.0);

  double log_density_sigma(double sigma) const;
  void validate() const;
  nlohmann::json to_json() const;
  static PriorSpec from_json(const nlohmann::json& j);
};

struct GridOptions {
  int coarse_nodes = 512;
  int dense_nodes = 2049;
  int m_nodes = 65;
  double eps = 1e-6;
  double span_sd = 10.0;
};

/// Discretized posterior on a σ grid. Cell i is [edges[i], edges[i+1]] around node i,
/// with edges at midpoints between nodes (trapezoid weights).
struct PosteriorGrid {
  std::vector<double> sigma_nodes;
  std::vector<double> edges;
  std::vector<double> M_nodes;          // empty when M is fixed
  std::vector<double> log_density;      // marginal in σ, unnormalized
  std::vector<double> cell_mass;        // normalized, sums to 1
  std::vector<double> joint_mass;       // σ-major, σ × M, when M_nodes is nonempty
  double log_normalizer = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
  double outer_mass = 0.0;  // mass of the first plus last cell
  bool degenerate = false;

  double quantile(double q) const;
  nlohmann::json summary_json() const;
};

PosteriorGrid posterior_sigma(const PartitionStats& stats, const PriorSpec& prior,
                              const GridOptions& opts = {});

/// Total variation between the grid posterior and N(sigma_hat, var_bvm).
double bvm_gap(const PosteriorGrid& post, double sigma_hat, double var_bvm);

/// Total variation between two distributions given as cell masses on the same cells.
double cell_tv(const std::vector<double>& p, const std::vector<double>& q);

struct PosteriorSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

PosteriorSummary posterior_mean_and_interval(const PosteriorGrid& post, double level = 0.95);

struct ForensicResult {
  double lr = 0.0;
  double phi_mean = 0.0;
  double phi_sd = 0.0;
  std::uint64_t database_size = 0;
  PosteriorSummary sigma_summary;
  bool degenerate = false;
};

/// stats must include the crime-scene profile as a singleton.
ForensicResult forensic_lr(const PartitionStats& stats, const PriorSpec& prior,
                           const GridOptions& opts = {});

}  // namespace pytype
