#include "io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace pytype::cli {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return os.str();
}

std::string sha256_hex(const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

InputDigest digest_of(const std::string& path, const std::string& contents) {
  return {path, sha256_hex(contents), contents.size()};
}

LoadedSample load_sample(const std::string& path) {
  const std::string text = read_file(path);
  LoadedSample s;
  s.digest = digest_of(path, text);
  const auto ext = std::filesystem::path(path).extension().string();
  try {
    if (ext == ".json") {
      s.stats = PartitionStats::from_json(nlohmann::json::parse(text));
      s.format = "stats_json";
      return s;
    }
    // CSV: the header decides between one row per observation and species,count.
    std::istringstream probe(text);
    std::string header;
    std::getline(probe, header);
    if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
    while (!header.empty() && (header.back() == '\r' || header.back() == ' ')) header.pop_back();
    std::istringstream in(text);
    if (header.find(',') != std::string::npos) {
      s.labeled = read_occupancy_csv(in);
      s.stats = stats_from_labeled_counts(s.labeled);
      s.format = "occupancy_csv";
    } else {
      const auto labels = read_species_csv(in);
      s.stats = PartitionStats::from_observations(labels);
      std::map<std::string, std::uint64_t> counts;
      for (const auto& l : labels) ++counts[l];
      s.labeled.assign(counts.begin(), counts.end());
      s.format = "species_csv";
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return s;
}

void ensure_writable(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw IoError("refusing to overwrite " + path + " (pass --force)");
  }
}

void write_text(const std::string& path, const std::string& text, bool force) {
  ensure_writable(path, force);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("error writing " + path);
}

void emit_json(const nlohmann::json& j, const std::string& path, bool force) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text, force);
  }
}

}  // namespace pytype::cli
