#include "pytype/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "pytype/numerics.hpp"

namespace pytype {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b) {
  std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (tag_a + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (tag_b + 0x85157af5ULL));
  return h;
}

Rng::Rng(RngStream stream) {
  k1_ = mix64(stream.seed + 0x9e3779b97f4a7c15ULL);
  k2_ = mix64(mix64(stream.stream_id ^ 0xd1b54a32d192ed03ULL) + k1_);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t i = counter_++;
  return mix64(mix64(i + k1_) ^ k2_);
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::uniform_pos() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

__extension__ using u128 = unsigned __int128;

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Lemire's multiply-shift with rejection.
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  // Marsaglia polar method; the second variate is discarded to keep the state trivial.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("gamma variate: shape must be positive and finite");
  }
  if (shape < 1.0) {
    // G(a) = G(a+1) U^{1/a}, done in logs so tiny shapes do not underflow.
    return log_gamma_variate(shape + 1.0) + std::log(uniform_pos()) / shape;
  }
  // Marsaglia and Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

std::pair<double, double> Rng::beta_pair(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta: shapes must be positive");
  const double lx = log_gamma_variate(a);
  const double ly = log_gamma_variate(b);
  // X/(X+Y) = 1/(1+e^{ly-lx}), and the complement symmetrically.
  const double d = ly - lx;
  const double v = 1.0 / (1.0 + std::exp(d));
  const double w = 1.0 / (1.0 + std::exp(-d));
  return {v, w};
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::domain_error("poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Inversion by sequential search from 0.
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf <= u) break;  // roundoff guard, probability ~1e-17
    }
    return k;
  }
  // Hormann (1993) transformed rejection with squeeze (PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double U = uniform() - 0.5;
    const double V = uniform_pos();
    const double us = 0.5 - std::abs(U);
    const double kf = std::floor((2.0 * a / us + b) * U + mean + 0.43);
    if (kf < 0.0) continue;
    if (us >= 0.07 && V <= vr) return static_cast<std::uint64_t>(kf);
    if (us < 0.013 && V > us) continue;
    if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + kf * loglam - numerics::log_gamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace pytype
