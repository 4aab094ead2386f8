#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pytype {

/// Slowly varying part L₀ of α₀(u) ≈ u^{σ₀} L₀(u).
/// Constant: L₀(u) = scale. LogPower: L₀(u) = scale · (1 + ln u − log_shift)^r.
struct SlowlyVarying {
  enum class Family { Constant, LogPower };
  Family family = Family::Constant;
  double scale = 1.0;
  double r = 0.0;
  double log_shift = 0.0;

  double value(double u) const;
  double derivative(double u) const;
  nlohmann::json to_json() const;
};

struct RegularVariation {
  double sigma0 = 0.5;
  SlowlyVarying L0;
  double beta0 = 0.0;  // |α₀(u) − u^{σ₀}L₀(u)| ≤ C u^{β₀}
  double C = 1.0;

  nlohmann::json to_json() const;
};

enum class PopulationKind { PowerLaw, Synthetic, Explicit };

std::string to_string(PopulationKind kind);

namespace detail {
class PopulationImpl;
}

struct PopulationOptions {
  // Number of leading atoms whose probabilities and tail masses are tabulated at
  // construction. Zero picks a family default.
  std::uint64_t head_atoms = 0;
};

/// A true sampling distribution P₀ with atoms p₁ ≥ p₂ ≥ … (1-based).
/// Cheap to copy; the underlying tables are immutable and shared.
class Population {
 public:
  static Population power_law(double alpha, const PopulationOptions& opts = {});
  static Population synthetic(double gamma, double r, const PopulationOptions& opts = {});
  static Population explicit_probs(std::vector<double> probs);
  static Population from_json(const nlohmann::json& spec);

  nlohmann::json to_json() const;
  PopulationKind kind() const;
  std::string describe() const;

  double p(std::uint64_t j) const;
  /// Σ_{i>j} p_i.
  double tail_mass(std::uint64_t j) const;
  /// Σ_{i>j} p_i^k for k ∈ {1,2,3}.
  double tail_power_sum(std::uint64_t j, int k) const;
  /// #{j : p_j ≥ 1/u}.
  std::uint64_t alpha0(double u) const;
  std::optional<std::uint64_t> support_size() const;
  /// Smallest j ≥ 1 with tail_mass(j) < v, for v ∈ (0, 1]. Inverse-CDF lookup.
  std::uint64_t sample_index(double v) const;
  /// Number of atoms with a tabulated tail mass.
  std::uint64_t head_size() const;

  bool has_regular_variation() const;
  /// Throws std::logic_error for Explicit populations.
  const RegularVariation& rv() const;

  /// Family parameters, for reports.
  double alpha() const;  // PowerLaw
  double gamma() const;  // Synthetic
  double r() const;      // Synthetic
  /// Synthetic normalizer Z = Σ 1/u_j.
  double normalizer() const;

 private:
  explicit Population(std::shared_ptr<const detail::PopulationImpl> impl);
  std::shared_ptr<const detail::PopulationImpl> impl_;
};

}  // namespace pytype
