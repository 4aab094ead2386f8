#include "pytype/partition.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pytype {

std::uint64_t OccupancyCounts::total() const {
  std::uint64_t t = 0;
  for (const auto& [idx, c] : counts) t += c;
  return t;
}

PartitionStats PartitionStats::from_block_sizes(std::vector<std::uint64_t> sizes) {
  if (sizes.empty()) throw std::invalid_argument("partition needs at least one block");
  PartitionStats s;
  for (auto v : sizes) {
    if (v == 0) throw std::invalid_argument("block sizes must be positive");
    s.n_ += v;
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  const std::uint64_t top = sizes.front();
  s.Z_.assign(top, 0);
  // sizes descending: Z_l counts blocks of size ≥ l.
  std::size_t idx = 0;
  for (std::uint64_t l = top; l >= 1; --l) {
    while (idx < sizes.size() && sizes[idx] >= l) ++idx;
    s.Z_[l - 1] = idx;
  }
  for (auto it = sizes.rbegin(); it != sizes.rend(); ++it) {
    if (s.histogram_.empty() || s.histogram_.back().first != *it) {
      s.histogram_.emplace_back(*it, 1);
    } else {
      ++s.histogram_.back().second;
    }
  }
  s.sizes_ = std::move(sizes);
  return s;
}

PartitionStats PartitionStats::from_observations(std::span<const std::string> labels) {
  if (labels.empty()) throw std::invalid_argument("from_observations: empty sample");
  std::unordered_map<std::string, std::uint64_t> counts;
  counts.reserve(labels.size());
  for (const auto& l : labels) ++counts[l];
  std::vector<std::uint64_t> sizes;
  sizes.reserve(counts.size());
  for (const auto& [label, c] : counts) sizes.push_back(c);
  return from_block_sizes(std::move(sizes));
}

PartitionStats PartitionStats::from_occupancy(const OccupancyCounts& counts) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(counts.counts.size());
  for (const auto& [idx, c] : counts.counts) {
    if (c > 0) sizes.push_back(c);
  }
  if (sizes.empty()) throw std::invalid_argument("from_occupancy: all counts are zero");
  return from_block_sizes(std::move(sizes));
}

PartitionStats PartitionStats::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("N")) {
    throw std::invalid_argument("stats JSON must be an object with an \"N\" array");
  }
  auto sizes = j.at("N").get<std::vector<std::uint64_t>>();
  PartitionStats s = from_block_sizes(std::move(sizes));
  if (j.contains("n") && j.at("n").get<std::uint64_t>() != s.n()) {
    throw std::invalid_argument("stats JSON: n does not equal the sum of N");
  }
  if (j.contains("K") && j.at("K").get<std::uint64_t>() != s.K()) {
    throw std::invalid_argument("stats JSON: K does not equal the length of N");
  }
  if (j.contains("Z") && j.at("Z").get<std::vector<std::uint64_t>>() != s.occupancy()) {
    throw std::invalid_argument("stats JSON: Z is inconsistent with N");
  }
  return s;
}

std::uint64_t PartitionStats::Z(std::uint64_t l) const {
  if (l == 0) throw std::out_of_range("occupancy index starts at 1");
  return l <= Z_.size() ? Z_[l - 1] : 0;
}

std::uint64_t PartitionStats::singletons() const {
  if (histogram_.empty() || histogram_.front().first != 1) return 0;
  return histogram_.front().second;
}

std::vector<std::string> PartitionStats::expand() const {
  std::vector<std::string> out;
  out.reserve(n_);
  for (std::size_t j = 0; j < sizes_.size(); ++j) {
    const std::string label = "b" + std::to_string(j + 1);
    for (std::uint64_t c = 0; c < sizes_[j]; ++c) out.push_back(label);
  }
  return out;
}

nlohmann::json PartitionStats::to_json() const {
  return {{"n", n_}, {"K", K()}, {"N", sizes_}, {"Z", Z_}};
}

PartitionStats stats_from_labeled_counts(const LabeledCounts& rows) {
  OccupancyCounts oc;
  std::uint64_t i = 0;
  for (const auto& [label, c] : rows) oc.counts.emplace_back(++i, c);
  oc.n = oc.total();
  return PartitionStats::from_occupancy(oc);
}

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Split one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) throw std::invalid_argument("CSV: unterminated quoted field");
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV: missing header row");
  line = strip_cr(line);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  return line;
}

}  // namespace

std::vector<std::string> read_species_csv(std::istream& in) {
  const std::string header = read_header(in);
  if (header != "species") {
    throw std::invalid_argument("species CSV: header must be exactly \"species\"");
  }
  std::vector<std::string> labels;
  std::string line;
  std::uint64_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 1) {
      throw std::invalid_argument("species CSV: row " + std::to_string(row) +
                                  " has more than one column");
    }
    labels.push_back(std::move(fields[0]));
  }
  if (labels.empty()) throw std::invalid_argument("species CSV: no observations");
  return labels;
}

LabeledCounts read_occupancy_csv(std::istream& in) {
  const std::string header = read_header(in);
  if (header != "species,count") {
    throw std::invalid_argument("occupancy CSV: header must be exactly \"species,count\"");
  }
  LabeledCounts rows;
  std::unordered_set<std::string> seen;
  std::string line;
  std::uint64_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 2) {
      throw std::invalid_argument("occupancy CSV: row " + std::to_string(row) +
                                  " must have two columns");
    }
    std::uint64_t c = 0;
    const auto& f = fields[1];
    const auto res = std::from_chars(f.data(), f.data() + f.size(), c);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      throw std::invalid_argument("occupancy CSV: row " + std::to_string(row) +
                                  " has a malformed count");
    }
    if (!seen.insert(fields[0]).second) {
      throw std::invalid_argument("occupancy CSV: duplicate species label at row " +
                                  std::to_string(row));
    }
    rows.emplace_back(std::move(fields[0]), c);
  }
  return rows;
}

void write_species_csv(std::ostream& out, std::span<const std::string> labels) {
  out << "species\n";
  for (const auto& l : labels) out << quote_if_needed(l) << '\n';
}

void write_occupancy_csv(std::ostream& out, const LabeledCounts& rows) {
  out << "species,count\n";
  for (const auto& [label, c] : rows) out << quote_if_needed(label) << ',' << c << '\n';
}

}  // namespace pytype
