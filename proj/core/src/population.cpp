#include "pytype/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pytype/numerics.hpp"

namespace pytype {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Atom indices saturate here; no realistic sample reaches that far.
constexpr std::uint64_t kMaxIndex = std::uint64_t{1} << 62;

std::uint64_t clamp_index(double x) {
  if (!(x > 0.0)) return 0;
  if (x >= static_cast<double>(kMaxIndex)) return kMaxIndex;
  return static_cast<std::uint64_t>(x);
}

}  // namespace

double SlowlyVarying::value(double u) const {
  if (family == Family::Constant) return scale;
  const double base = 1.0 + std::log(u) - log_shift;
  if (!(base > 0.0)) return 0.0;
  return scale * std::pow(base, r);
}

double SlowlyVarying::derivative(double u) const {
  if (family == Family::Constant) return 0.0;
  const double base = 1.0 + std::log(u) - log_shift;
  if (!(base > 0.0)) return 0.0;
  return scale * r * std::pow(base, r - 1.0) / u;
}

nlohmann::json SlowlyVarying::to_json() const {
  nlohmann::json j;
  j["family"] = family == Family::Constant ? "constant" : "log_power";
  j["scale"] = scale;
  if (family == Family::LogPower) {
    j["r"] = r;
    j["log_shift"] = log_shift;
  }
  return j;
}

nlohmann::json RegularVariation::to_json() const {
  return {{"sigma0", sigma0}, {"L0", L0.to_json()}, {"beta0", beta0}, {"C", C}};
}

std::string to_string(PopulationKind kind) {
  switch (kind) {
    case PopulationKind::PowerLaw: return "power_law";
    case PopulationKind::Synthetic: return "synthetic";
    case PopulationKind::Explicit: return "explicit";
  }
  return "unknown";
}

namespace detail {

class PopulationImpl {
 public:
  virtual ~PopulationImpl() = default;

  virtual PopulationKind kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual std::string describe() const = 0;
  virtual double p(std::uint64_t j) const = 0;
  virtual double tail_beyond_head(std::uint64_t j) const = 0;
  virtual double tail_power_sum(std::uint64_t j, int k) const = 0;
  virtual std::uint64_t alpha0(double u) const = 0;
  virtual std::optional<std::uint64_t> support_size() const { return std::nullopt; }
  virtual std::uint64_t search_beyond_head(double v) const = 0;

  double tail_mass(std::uint64_t j) const {
    if (j < tail_.size()) return tail_[j];
    return tail_beyond_head(j);
  }

  std::uint64_t sample_index(double v) const {
    if (!(v > 0.0) || !(v <= 1.0)) {
      throw std::domain_error("sample_index: v must lie in (0,1]");
    }
    if (tail_.back() >= v) return search_beyond_head(v);
    const auto it = std::partition_point(tail_.begin(), tail_.end(),
                                         [v](double t) { return t >= v; });
    const auto idx = static_cast<std::uint64_t>(it - tail_.begin());
    return std::max<std::uint64_t>(idx, 1);
  }

  std::uint64_t head_size() const { return tail_.size() - 1; }

  // Integer bisection for the first j > lo with tail_mass(j) < v, given tail_mass(lo) ≥ v.
  std::uint64_t bisect_tail(std::uint64_t lo, std::uint64_t guess, double v) const {
    std::uint64_t hi = std::max(guess, lo + 1);
    while (tail_mass(hi) >= v) {
      lo = hi;
      if (hi >= kMaxIndex / 2) return kMaxIndex;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (tail_mass(mid) < v) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  std::optional<RegularVariation> rv;

 protected:
  // Fill tail_[j] = Σ_{i>j} p_i for j = 0..H, starting from the analytic tail at H.
  void build_tail_table(std::uint64_t head, double tail_at_head) {
    tail_.assign(head + 1, 0.0);
    long double acc = tail_at_head;
    tail_[head] = tail_at_head;
    for (std::uint64_t j = head; j >= 1; --j) {
      acc += p(j);
      tail_[j - 1] = static_cast<double>(acc);
    }
  }

  std::vector<double> tail_;
};

namespace {

class PowerLawImpl final : public PopulationImpl {
 public:
  PowerLawImpl(double alpha, std::uint64_t head) : alpha_(alpha) {
    c_ = 1.0 / numerics::riemann_zeta(alpha);
    RegularVariation v;
    v.sigma0 = 1.0 / alpha;
    v.L0.family = SlowlyVarying::Family::Constant;
    v.L0.scale = std::pow(c_, 1.0 / alpha);
    v.beta0 = 0.0;
    v.C = 1.0;
    rv = v;
    build_tail_table(head, c_ * numerics::hurwitz_zeta(alpha_, static_cast<double>(head) + 1.0));
  }

  PopulationKind kind() const override { return PopulationKind::PowerLaw; }
  nlohmann::json to_json() const override {
    return {{"kind", "power_law"}, {"alpha", alpha_}};
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "power_law(alpha=" << alpha_ << ")";
    return os.str();
  }
  double p(std::uint64_t j) const override {
    if (j == 0) throw std::out_of_range("atom indices start at 1");
    return c_ * std::pow(static_cast<double>(j), -alpha_);
  }
  double tail_beyond_head(std::uint64_t j) const override {
    return c_ * numerics::hurwitz_zeta(alpha_, static_cast<double>(j) + 1.0);
  }
  double tail_power_sum(std::uint64_t j, int k) const override {
    if (k < 1) throw std::invalid_argument("tail_power_sum: k must be >= 1");
    if (k == 1) return tail_mass(j);
    return std::pow(c_, k) * numerics::hurwitz_zeta(k * alpha_, static_cast<double>(j) + 1.0);
  }
  std::uint64_t alpha0(double u) const override {
    std::uint64_t cnt = clamp_index(std::floor(std::pow(c_ * u, 1.0 / alpha_)));
    while (cnt >= 1 && p(cnt) * u < 1.0) --cnt;
    while (cnt < kMaxIndex && p(cnt + 1) * u >= 1.0) ++cnt;
    return cnt;
  }
  std::uint64_t search_beyond_head(double v) const override {
    const double guess = std::pow(c_ / ((alpha_ - 1.0) * v), 1.0 / (alpha_ - 1.0));
    return bisect_tail(head_size(), clamp_index(guess), v);
  }

  double alpha() const { return alpha_; }

 private:
  double alpha_;
  double c_ = 0.0;
};

// Atoms 1/p_j ∝ u_j where A(u_j) = j, A(u) = u^γ (1 + ln u)^r on its increasing branch.
class SyntheticImpl final : public PopulationImpl {
 public:
  SyntheticImpl(double gamma, double r, std::uint64_t head) : gamma_(gamma), r_(r) {
    t_branch_ = std::max(-1.0, -r_ / gamma_ - 1.0);
    t_.resize(head + 1);
    t_[0] = 0.0;
    numerics::KahanSum z;
    double prev = t_branch_;
    for (std::uint64_t j = 1; j <= head; ++j) {
      t_[j] = solve_t(static_cast<double>(j), prev);
      prev = t_[j];
      z += std::exp(-t_[j]);
    }
    z += em_tail(head, 1);
    Z_ = z.value();

    RegularVariation v;
    v.sigma0 = gamma_;
    if (r_ == 0.0) {
      v.L0.family = SlowlyVarying::Family::Constant;
    } else {
      v.L0.family = SlowlyVarying::Family::LogPower;
      v.L0.r = r_;
      v.L0.log_shift = std::log(Z_);
    }
    v.L0.scale = std::pow(Z_, -gamma_);
    v.beta0 = 0.0;
    v.C = 1.0;
    rv = v;
    build_tail_table(head, em_tail(head, 1) / Z_);
  }

  PopulationKind kind() const override { return PopulationKind::Synthetic; }
  nlohmann::json to_json() const override {
    return {{"kind", "synthetic"}, {"gamma", gamma_}, {"r", r_}};
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "synthetic(gamma=" << gamma_ << ", r=" << r_ << ")";
    return os.str();
  }
  double p(std::uint64_t j) const override {
    if (j == 0) throw std::out_of_range("atom indices start at 1");
    return std::exp(-t_of(j)) / Z_;
  }
  double tail_beyond_head(std::uint64_t j) const override { return em_tail(j, 1) / Z_; }
  double tail_power_sum(std::uint64_t j, int k) const override {
    if (k < 1) throw std::invalid_argument("tail_power_sum: k must be >= 1");
    if (k == 1) return tail_mass(j);
    const std::uint64_t head = head_size();
    numerics::KahanSum acc;
    std::uint64_t from = j;
    if (j < head) {
      for (std::uint64_t i = j + 1; i <= head; ++i) acc += std::exp(-k * t_[i]);
      from = head;
    }
    acc += em_tail(from, k);
    return acc.value() / std::pow(Z_, k);
  }
  std::uint64_t alpha0(double u) const override {
    const double T = std::log(u / Z_);
    std::uint64_t cnt = 0;
    if (T > t_branch_) cnt = clamp_index(std::floor(std::exp(log_A(T))));
    while (cnt >= 1 && p(cnt) * u < 1.0) --cnt;
    while (cnt < kMaxIndex && p(cnt + 1) * u >= 1.0) ++cnt;
    return cnt;
  }
  std::uint64_t search_beyond_head(double v) const override {
    // Continuous guess: tail(j) ≈ j^{1-1/γ}/((1/γ − 1) Z u-scale); bisection fixes it up.
    const std::uint64_t head = head_size();
    const double ratio = tail_mass(head) / v;
    const double guess = static_cast<double>(head) * std::pow(ratio, gamma_ / (1.0 - gamma_));
    return bisect_tail(head, clamp_index(guess), v);
  }

  double gamma() const { return gamma_; }
  double r() const { return r_; }
  double Z() const { return Z_; }

 private:
  double log_A(double t) const { return gamma_ * t + r_ * std::log1p(t); }

  double t_of(std::uint64_t j) const {
    if (j < t_.size()) return t_[j];
    return solve_t(static_cast<double>(j), t_.back());
  }

  // Root of γt + r ln(1+t) = ln j on the increasing branch t > t_branch_.
  double solve_t(double j, double hint) const {
    const double target = std::log(j);
    auto F = [&](double t) { return log_A(t) - target; };
    auto dF = [&](double t) { return gamma_ + r_ / (1.0 + t); };
    double lo = t_branch_;
    double hi = std::max(hint, lo) + 1.0;
    while (F(hi) < 0.0) hi = lo + 2.0 * (hi - lo) + 1.0;
    double t = std::clamp(hint, lo, hi);
    if (!(t > lo)) t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double f = F(t);
      if (f == 0.0) return t;
      if (f < 0.0) {
        lo = t;
      } else {
        hi = t;
      }
      double next = t - f / dF(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
      t = next;
    }
    return t;
  }

  // Σ_{j > J} e^{-k t_j} by Euler-Maclaurin in j with the integral done in t.
  double em_tail(std::uint64_t J, int k) const {
    const double x0 = static_cast<double>(J) + 1.0;
    const double t0 = solve_t(x0, t_of(J));
    const double decay = static_cast<double>(k) - gamma_;
    auto h = [&](double t) {
      return std::exp(-k * t + log_A(t)) * (gamma_ + r_ / (1.0 + t));
    };
    const double span = 50.0 / decay;
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-13;
    opts.initial_geometric_panels = 0;
    numerics::KahanSum integral;
    const int pieces = 8;
    for (int i = 0; i < pieces; ++i) {
      integral += numerics::integrate(h, t0 + span * i / pieces, t0 + span * (i + 1) / pieces, opts)
                      .value;
    }
    const double f0 = std::exp(-k * t0);
    const double dxdt = std::exp(log_A(t0)) * (gamma_ + r_ / (1.0 + t0));
    const double fprime = -k * f0 / dxdt;
    return integral.value() + 0.5 * f0 - fprime / 12.0;
  }

  double gamma_;
  double r_;
  double t_branch_ = -1.0;
  double Z_ = 1.0;
  std::vector<double> t_;
};

class ExplicitImpl final : public PopulationImpl {
 public:
  explicit ExplicitImpl(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("explicit population needs at least one atom");
    numerics::KahanSum total;
    for (double q : probs_) {
      if (!(q > 0.0 && q <= 1.0) || !std::isfinite(q)) {
        throw std::domain_error("explicit population: every probability must lie in (0,1]");
      }
      total += q;
    }
    if (std::abs(total.value() - 1.0) > 1e-10) {
      throw std::domain_error("explicit population: probabilities must sum to 1 within 1e-10");
    }
    for (double& q : probs_) q /= total.value();
    std::sort(probs_.begin(), probs_.end(), std::greater<>());
    build_tail_table(probs_.size(), 0.0);
  }

  PopulationKind kind() const override { return PopulationKind::Explicit; }
  nlohmann::json to_json() const override { return {{"kind", "explicit"}, {"p", probs_}}; }
  std::string describe() const override {
    std::ostringstream os;
    os << "explicit(" << probs_.size() << " atoms)";
    return os.str();
  }
  double p(std::uint64_t j) const override {
    if (j == 0) throw std::out_of_range("atom indices start at 1");
    return j <= probs_.size() ? probs_[j - 1] : 0.0;
  }
  double tail_beyond_head(std::uint64_t) const override { return 0.0; }
  double tail_power_sum(std::uint64_t j, int k) const override {
    if (k < 1) throw std::invalid_argument("tail_power_sum: k must be >= 1");
    numerics::KahanSum acc;
    for (std::uint64_t i = j + 1; i <= probs_.size(); ++i) acc += std::pow(probs_[i - 1], k);
    return acc.value();
  }
  std::uint64_t alpha0(double u) const override {
    const auto it = std::partition_point(probs_.begin(), probs_.end(),
                                         [u](double q) { return q * u >= 1.0; });
    return static_cast<std::uint64_t>(it - probs_.begin());
  }
  std::optional<std::uint64_t> support_size() const override { return probs_.size(); }
  std::uint64_t search_beyond_head(double) const override { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

const PowerLawImpl* as_power_law(const PopulationImpl* impl) {
  return dynamic_cast<const PowerLawImpl*>(impl);
}
const SyntheticImpl* as_synthetic(const PopulationImpl* impl) {
  return dynamic_cast<const SyntheticImpl*>(impl);
}

}  // namespace
}  // namespace detail

Population::Population(std::shared_ptr<const detail::PopulationImpl> impl) : impl_(std::move(impl)) {}

Population Population::power_law(double alpha, const PopulationOptions& opts) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::domain_error("power_law: alpha must exceed 1");
  }
  const std::uint64_t head = opts.head_atoms ? opts.head_atoms : (std::uint64_t{1} << 18);
  return Population(std::make_shared<detail::PowerLawImpl>(alpha, head));
}

Population Population::synthetic(double gamma, double r, const PopulationOptions& opts) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("synthetic: gamma must lie in (0,1)");
  if (!(r >= -2.0 && r <= 2.0)) throw std::domain_error("synthetic: r must lie in [-2,2]");
  const std::uint64_t head = opts.head_atoms ? opts.head_atoms : (std::uint64_t{1} << 20);
  return Population(std::make_shared<detail::SyntheticImpl>(gamma, r, head));
}

Population Population::explicit_probs(std::vector<double> probs) {
  return Population(std::make_shared<detail::ExplicitImpl>(std::move(probs)));
}

Population Population::from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) {
    throw std::invalid_argument("population spec must be an object with a \"kind\" field");
  }
  const std::string kind = spec.at("kind").get<std::string>();
  PopulationOptions opts;
  if (spec.contains("head_atoms")) opts.head_atoms = spec.at("head_atoms").get<std::uint64_t>();
  if (kind == "power_law") return power_law(spec.at("alpha").get<double>(), opts);
  if (kind == "synthetic") {
    return synthetic(spec.at("gamma").get<double>(), spec.value("r", 0.0), opts);
  }
  if (kind == "explicit") return explicit_probs(spec.at("p").get<std::vector<double>>());
  throw std::invalid_argument("unknown population kind: " + kind);
}

nlohmann::json Population::to_json() const { return impl_->to_json(); }
PopulationKind Population::kind() const { return impl_->kind(); }
std::string Population::describe() const { return impl_->describe(); }
double Population::p(std::uint64_t j) const { return impl_->p(j); }
double Population::tail_mass(std::uint64_t j) const { return impl_->tail_mass(j); }
double Population::tail_power_sum(std::uint64_t j, int k) const {
  return impl_->tail_power_sum(j, k);
}

std::uint64_t Population::alpha0(double u) const {
  if (!(u > 0.0) || std::isnan(u)) throw std::domain_error("alpha0: u must be positive");
  return impl_->alpha0(u);
}

std::optional<std::uint64_t> Population::support_size() const { return impl_->support_size(); }
std::uint64_t Population::sample_index(double v) const { return impl_->sample_index(v); }
std::uint64_t Population::head_size() const { return impl_->head_size(); }
bool Population::has_regular_variation() const { return impl_->rv.has_value(); }

const RegularVariation& Population::rv() const {
  if (!impl_->rv) {
    throw std::logic_error("explicit populations carry no regular-variation descriptor");
  }
  return *impl_->rv;
}

double Population::alpha() const {
  if (const auto* pl = detail::as_power_law(impl_.get())) return pl->alpha();
  throw std::logic_error("alpha(): not a power-law population");
}

double Population::gamma() const {
  if (const auto* s = detail::as_synthetic(impl_.get())) return s->gamma();
  throw std::logic_error("gamma(): not a synthetic population");
}

double Population::r() const {
  if (const auto* s = detail::as_synthetic(impl_.get())) return s->r();
  throw std::logic_error("r(): not a synthetic population");
}

double Population::normalizer() const {
  if (const auto* s = detail::as_synthetic(impl_.get())) return s->Z();
  return 1.0;
}

}  // namespace pytype
