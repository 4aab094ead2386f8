#include <algorithm>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pytype/partition.hpp"

using namespace pytype;

TEST(PartitionStats, HandCountedExample) {
  const std::vector<std::string> obs{"a", "b", "a"};
  const auto st = PartitionStats::from_observations(obs);
  EXPECT_EQ(st.n(), 3u);
  EXPECT_EQ(st.K(), 2u);
  EXPECT_EQ(st.block_sizes(), (std::vector<std::uint64_t>{2, 1}));
  EXPECT_EQ(st.occupancy(), (std::vector<std::uint64_t>{2, 1}));
  EXPECT_EQ(st.singletons(), 1u);
  EXPECT_EQ(st.Z(5), 0u);
}

TEST(PartitionStats, InvariantsOnRandomPartitions) {
  oracle::PartitionGen gen(31);
  for (int t = 0; t < 500; ++t) {
    const auto sizes = gen.sizes(40, 60);
    const auto st = PartitionStats::from_block_sizes(sizes);
    std::uint64_t n = 0;
    for (auto s : sizes) n += s;
    EXPECT_EQ(st.n(), n);
    EXPECT_EQ(st.Z(1), st.K());
    std::uint64_t zsum = 0;
    std::uint64_t weighted = 0;
    for (std::uint64_t l = 1; l <= st.max_block(); ++l) {
      EXPECT_GE(st.Z(l), st.Z(l + 1));
      const auto direct = std::count_if(sizes.begin(), sizes.end(), [l](auto s) { return s >= l; });
      EXPECT_EQ(st.Z(l), static_cast<std::uint64_t>(direct));
      zsum += st.Z(l);
      weighted += l * (st.Z(l) - st.Z(l + 1));
    }
    EXPECT_EQ(zsum, n);
    EXPECT_EQ(weighted, n);
    EXPECT_TRUE(std::is_sorted(st.block_sizes().rbegin(), st.block_sizes().rend()));
  }
}

TEST(PartitionStats, ExpandRoundTripAndOrderInvariance) {
  oracle::PartitionGen gen(32);
  for (int t = 0; t < 200; ++t) {
    const auto sizes = gen.sizes(25, 30);
    const auto st = PartitionStats::from_block_sizes(sizes);
    const auto labels = st.expand();
    EXPECT_EQ(PartitionStats::from_observations(labels), st);
    auto shuffled = gen.labels(sizes);
    EXPECT_EQ(PartitionStats::from_observations(shuffled), st);
    std::shuffle(shuffled.begin(), shuffled.end(), gen.engine());
    EXPECT_EQ(PartitionStats::from_observations(shuffled), st);
  }
}

TEST(PartitionStats, JsonRoundTrip) {
  const auto st = PartitionStats::from_block_sizes({5, 3, 3, 1, 1, 1});
  EXPECT_EQ(PartitionStats::from_json(st.to_json()), st);
  auto extra = st.to_json();
  extra["provenance"] = {{"tool", "x"}};
  EXPECT_EQ(PartitionStats::from_json(extra), st);
}

TEST(PartitionStats, OccupancyCountsDropZeros) {
  OccupancyCounts oc;
  oc.counts = {{1, 4}, {2, 0}, {7, 1}};
  oc.n = 5;
  const auto st = PartitionStats::from_occupancy(oc);
  EXPECT_EQ(st.K(), 2u);
  EXPECT_EQ(st.n(), 5u);
}

TEST(Csv, SpeciesRoundTrip) {
  const std::vector<std::string> labels{"A12", "B7", "A12", "C1"};
  std::ostringstream out;
  write_species_csv(out, labels);
  std::istringstream in(out.str());
  EXPECT_EQ(read_species_csv(in), labels);
}

TEST(Csv, OccupancyRoundTrip) {
  const LabeledCounts rows{{"x", 3}, {"y", 1}, {"z", 0}};
  std::ostringstream out;
  write_occupancy_csv(out, rows);
  std::istringstream in(out.str());
  EXPECT_EQ(read_occupancy_csv(in), rows);
  const auto st = stats_from_labeled_counts(rows);
  EXPECT_EQ(st.block_sizes(), (std::vector<std::uint64_t>{3, 1}));
}

TEST(Csv, MalformedInputIsRejected) {
  std::istringstream bad_count("species,count\na,-2\n");
  EXPECT_ANY_THROW(read_occupancy_csv(bad_count));
  std::istringstream dup("species,count\na,2\na,1\n");
  EXPECT_ANY_THROW(read_occupancy_csv(dup));
  std::istringstream empty("");
  EXPECT_ANY_THROW(read_species_csv(empty));
}
