#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace pytype {

enum class OccupancyRegime { Multinomial, Poissonized };

/// Species-index → occupancy count. Indices are 1-based atom indices of the population
/// (or arbitrary labels' ordinals when read from a file). Zero counts are allowed.
struct OccupancyCounts {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;
  OccupancyRegime regime = OccupancyRegime::Multinomial;
  std::uint64_t n = 0;  // nominal sample size (Poisson mean for the Poissonized regime)

  std::uint64_t total() const;
};

/// Sufficient statistic of a sample: n, K, block sizes N (descending) and
/// occupancy counts Z_l = #{j : N_j ≥ l}, l = 1..max N.
class PartitionStats {
 public:
  PartitionStats() = default;

  static PartitionStats from_block_sizes(std::vector<std::uint64_t> sizes);
  static PartitionStats from_observations(std::span<const std::string> labels);
  static PartitionStats from_occupancy(const OccupancyCounts& counts);
  static PartitionStats from_json(const nlohmann::json& j);

  std::uint64_t n() const { return n_; }
  std::uint64_t K() const { return sizes_.size(); }
  const std::vector<std::uint64_t>& block_sizes() const { return sizes_; }
  const std::vector<std::uint64_t>& occupancy() const { return Z_; }
  /// Z_l with Z_l = 0 past the largest block. l ≥ 1.
  std::uint64_t Z(std::uint64_t l) const;
  std::uint64_t max_block() const { return Z_.size(); }
  std::uint64_t singletons() const;

  /// Distinct block sizes ascending, each with its multiplicity.
  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& size_histogram() const {
    return histogram_;
  }

  /// Emit N_j copies of label "b<j>" for each block, blocks in canonical order.
  std::vector<std::string> expand() const;

  nlohmann::json to_json() const;

  friend bool operator==(const PartitionStats& a, const PartitionStats& b) {
    return a.n_ == b.n_ && a.sizes_ == b.sizes_;
  }

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> sizes_;
  std::vector<std::uint64_t> Z_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> histogram_;
};

/// Labeled occupancy rows, as read from a `species,count` file.
using LabeledCounts = std::vector<std::pair<std::string, std::uint64_t>>;

PartitionStats stats_from_labeled_counts(const LabeledCounts& rows);

// CSV ingestion and export. Files need a header row.
std::vector<std::string> read_species_csv(std::istream& in);
LabeledCounts read_occupancy_csv(std::istream& in);
void write_species_csv(std::ostream& out, std::span<const std::string> labels);
void write_occupancy_csv(std::ostream& out, const LabeledCounts& rows);

}  // namespace pytype
