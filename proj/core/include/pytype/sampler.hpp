#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pytype/partition.hpp"
#include "pytype/population.hpp"
#include "pytype/rng.hpp"

namespace pytype {

/// Sequential (Chinese restaurant) construction of a PY(σ, M) partition of size n.
PartitionStats sample_py_partition(double sigma, double M, std::uint64_t n, Rng& rng);
PartitionStats sample_py_partition(double sigma, double M, std::uint64_t n, RngStream stream);

/// Same construction, returning the block index (1-based, order of appearance) of each draw.
std::vector<std::uint64_t> sample_py_sequence(double sigma, double M, std::uint64_t n, Rng& rng);

/// Predictive weights: (N_i − σ)/(M+n) for each block, then (M + Kσ)/(M+n) for a new one.
std::vector<double> ppf_weights(const PartitionStats& stats, double sigma, double M);

/// (W_1, …, W_k, residual) with W_i = V_i Π_{j<i}(1−V_j), V_i ~ Beta(1−σ, M+iσ).
std::vector<double> stick_breaking_weights(double sigma, double M, std::uint64_t k_trunc, Rng& rng);

/// Multinomial sample of size n from the population, by inverse CDF.
OccupancyCounts sample_iid(const Population& pop, std::uint64_t n, Rng& rng);
OccupancyCounts sample_iid(const Population& pop, std::uint64_t n, RngStream stream);

/// Atom indices of an i.i.d. sample, in draw order.
std::vector<std::uint64_t> sample_iid_sequence(const Population& pop, std::uint64_t n, Rng& rng);

/// Independent Poisson(n p_j) occupancy counts. Atoms with n p_j ≥ kPoissonHeadMean are
/// drawn one by one; the rest are drawn exactly as a Poisson(n · tail) number of
/// observations placed by the tail law (superposition of independent Poisson processes).
OccupancyCounts sample_poissonized(const Population& pop, std::uint64_t n, Rng& rng);
OccupancyCounts sample_poissonized(const Population& pop, std::uint64_t n, RngStream stream);

inline constexpr double kPoissonHeadMean = 0.1;

}  // namespace pytype
