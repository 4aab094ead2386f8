#pragma once

#include <cstdint>
#include <limits>
#include <utility>

namespace pytype {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Counter-based generator: output i is mix(mix(i + k1) ^ k2), with (k1, k2) derived
/// from (seed, stream_id) and mix the 64-bit murmur3 finalizer. Streams with different
/// ids are unrelated; draw i never depends on earlier draws.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngStream stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  std::uint64_t counter() const { return counter_; }

  /// Uniform on [0,1) with 53 random bits.
  double uniform();
  /// Uniform on (0,1].
  double uniform_pos();
  /// Uniform integer in [0, n), n ≥ 1.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double gamma(double shape);
  /// ln of a Gamma(shape, 1) draw; stays finite when shape is tiny.
  double log_gamma_variate(double shape);
  /// Beta(a, b) draw returned together with its complement, each computed without cancellation.
  std::pair<double, double> beta_pair(double a, double b);
  double beta(double a, double b) { return beta_pair(a, b).first; }
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t k1_;
  std::uint64_t k2_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// Derive a seed for a sub-experiment from a parent seed and tags.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b = 0);

}  // namespace pytype
