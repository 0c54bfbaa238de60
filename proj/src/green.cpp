#include "nonauto/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nonauto/parallel.hpp"

namespace nonauto {

namespace {

constexpr double kUnitRoundoff = 0x1p-53;
constexpr double kAsymptoticSlack = 46.0;  // ln(1e20)
constexpr double kPlainLimit = 1e150;
// Above this ln|w| the model Green functions equal ln|w| + Robin constant to
// far below double resolution.
constexpr double kLogAsymptotic = 700.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double horner_gamma(int degree) {
  const double nu = 4.0 * degree * kUnitRoundoff;
  return nu / (1.0 - nu);
}

double green_segment(Complex z) {
  if (z.imag() == 0.0 && std::fabs(z.real()) <= 1.0) return 0.0;
  double g;
  if (std::abs(z) > 2.0) {
    // z (1 + sqrt(1 - z^-2)) avoids overflow of z^2 and picks |.| >= 1.
    const Complex inv = 1.0 / z;
    g = std::log(std::abs(z)) + std::log(std::abs(1.0 + std::sqrt(1.0 - inv * inv)));
  } else {
    g = std::log(std::abs(z + joukowski_root(z)));
  }
  return std::max(0.0, g);
}

// Green function of K at a point with ln|w| = L far outside every model set.
double green_from_log(const ModelSet& K, double L) {
  return std::visit(
      overloaded{
          [&](const ModelSet::Disk& d) { return L - std::log(d.radius); },
          [&](const ModelSet::Segment&) { return L + std::numbers::ln2; },
          [&](const ModelSet::Ellipse& e) { return L + std::numbers::ln2 - std::log(e.R); },
          [&](const ModelSet::Preimage& p) {
            const int d = p.map.degree();
            return green_from_log(*p.inner, d * L + p.map.log_abs_leading()) / d;
          },
      },
      K.variant());
}

double divide_by_degree_product(double g, double log_D) {
  if (g <= 0.0) return 0.0;
  return std::exp(std::log(g) - log_D);
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelSet

ModelSet ModelSet::disk(Complex center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("disk radius must be positive");
  if (!detail::finite(center)) throw ValidationError("disk center must be finite");
  return ModelSet(Disk{center, radius});
}

ModelSet ModelSet::segment() { return ModelSet(Segment{}); }

ModelSet ModelSet::ellipse(double R) {
  if (!(R > 1.0) || !std::isfinite(R)) throw ValidationError("ellipse parameter R must exceed 1");
  return ModelSet(Ellipse{R});
}

ModelSet ModelSet::preimage(const ModelSet& inner, Poly map) {
  if (map.degree() < 1) throw ValidationError("preimage map must be non-constant");
  return ModelSet(Preimage{std::make_shared<const ModelSet>(inner), std::move(map)});
}

double ModelSet::robin_constant() const {
  return std::visit(
      overloaded{
          [](const Disk& d) { return -std::log(d.radius); },
          [](const Segment&) { return std::numbers::ln2; },
          [](const Ellipse& e) { return std::numbers::ln2 - std::log(e.R); },
          [](const Preimage& p) {
            return (p.map.log_abs_leading() + p.inner->robin_constant()) / p.map.degree();
          },
      },
      variant_);
}

double ModelSet::capacity() const { return std::exp(-robin_constant()); }

double ModelSet::containment_radius() const {
  return std::visit(
      overloaded{
          [](const Disk& d) { return std::abs(d.center) + d.radius; },
          [](const Segment&) { return 1.0; },
          [](const Ellipse& e) { return 0.5 * (e.R + 1.0 / e.R); },
          [](const Preimage& p) {
            // |z| >= 1: |f(z)| >= |z|^{d-1} (|a_d||z| - sum_{j<d} |a_j|).
            const Poly& f = p.map;
            double lower_sum = 0.0;
            const double lead = std::abs(f.leading());
            for (int j = 0; j < f.degree(); ++j) lower_sum += std::abs(f.coeffs()[j]) / lead;
            const double rho = p.inner->containment_radius() * std::exp(-f.log_abs_leading());
            return std::max(1.0, rho + lower_sum);
          },
      },
      variant_);
}

std::string ModelSet::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Disk& d) {
                   os << "disk(" << d.center.real();
                   if (d.center.imag() != 0.0) os << (d.center.imag() > 0 ? "+" : "") << d.center.imag() << "i";
                   os << ", " << d.radius << ")";
                 },
                 [&](const Segment&) { os << "segment[-1,1]"; },
                 [&](const Ellipse& e) { os << "ellipse(" << e.R << ")"; },
                 [&](const Preimage& p) {
                   os << "preimage(" << p.inner->describe() << ", deg " << p.map.degree() << ")";
                 },
             },
             variant_);
  return os.str();
}

bool operator==(const ModelSet& a, const ModelSet& b) {
  if (a.variant_.index() != b.variant_.index()) return false;
  return std::visit(
      overloaded{
          [&](const ModelSet::Disk& d) {
            const auto& e = std::get<ModelSet::Disk>(b.variant_);
            return d.center == e.center && d.radius == e.radius;
          },
          [&](const ModelSet::Segment&) { return true; },
          [&](const ModelSet::Ellipse& d) { return d.R == std::get<ModelSet::Ellipse>(b.variant_).R; },
          [&](const ModelSet::Preimage& p) {
            const auto& q = std::get<ModelSet::Preimage>(b.variant_);
            return p.map == q.map && *p.inner == *q.inner;
          },
      },
      a.variant_);
}

ModelSet model_from_name(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        args.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ValidationError("bad number in model set '" + spec + "'");
      }
    }
  }
  if (head == "segment" && args.empty()) return ModelSet::segment();
  if (head == "ellipse" && args.size() == 1) return ModelSet::ellipse(args[0]);
  if (head == "disk") {
    if (args.size() == 1) return ModelSet::disk(Complex(0), args[0]);
    if (args.size() == 2) return ModelSet::disk(Complex(args[0]), args[1]);
    if (args.size() == 3) return ModelSet::disk(Complex(args[0], args[1]), args[2]);
  }
  throw ValidationError("unknown model set '" + spec + "' (disk:[re,[im,]]r | segment | ellipse:R)");
}

Complex joukowski_root(Complex z) {
  Complex s = std::sqrt(z * z - 1.0);
  if (std::abs(z + s) < std::abs(z - s)) s = -s;
  return s;
}

double green_model(const ModelSet& K, Complex z) {
  return std::visit(
      overloaded{
          [&](const ModelSet::Disk& d) {
            const double r = std::abs(z - d.center);
            return r <= d.radius ? 0.0 : std::log(r / d.radius);
          },
          [&](const ModelSet::Segment&) { return green_segment(z); },
          [&](const ModelSet::Ellipse& e) { return std::max(0.0, green_segment(z) - std::log(e.R)); },
          [&](const ModelSet::Preimage& p) {
            return green_model_scaled(*p.inner, eval_scaled(p.map, ScaledComplex(z))) / p.map.degree();
          },
      },
      K.variant());
}

double green_model_scaled(const ModelSet& K, const ScaledComplex& w) {
  const double L = w.log_abs();
  if (L > kLogAsymptotic) return green_from_log(K, L);
  return green_model(K, w.to_complex_saturating());
}

double green_preimage(const ModelSet& K, const Poly& f, Complex z) {
  if (f.degree() < 1) throw ValidationError("green_preimage needs a non-constant map");
  return green_model_scaled(K, eval_scaled(f, ScaledComplex(z))) / f.degree();
}

bool sublevel_membership(const ModelSet& K, Complex z, double eps) {
  if (!(eps > 0.0)) throw ValidationError("sublevel parameter must be positive");
  return green_model(K, z) <= eps;
}

// ---------------------------------------------------------------------------
// Orbit

Orbit::Orbit(const SequencePrefix& prefix, Complex z, bool track_error, bool allow_asymptotic)
    : prefix_(&prefix), track_error_(track_error), allow_asymptotic_(allow_asymptotic), w_(z) {
  if (!detail::finite(z)) throw ValidationError("orbit start must be finite");
}

double Orbit::log_D() const { return prefix_->ledger(k_).log_D; }

void Orbit::step() {
  if (k_ >= prefix_->size()) throw ValidationError("orbit ran past the materialized sequence prefix");
  ++k_;
  const Poly& p = prefix_->at(k_);
  const double lD = prefix_->ledger(k_).log_D;
  switch (phase_) {
    case Phase::plain: step_plain(p, lD); break;
    case Phase::scaled: step_scaled(p, lD); break;
    case Phase::log: step_log(lD); break;
  }
}

void Orbit::step_plain(const Poly& p, double lD) {
  if (prefix_->plain_safe(k_)) {
    if (auto v = try_eval(p, w_); v && std::abs(*v) < kPlainLimit) {
      if (track_error_) {
        const double eta = horner_gamma(p.degree()) * eval_abs(p, std::abs(w_));
        roundoff_ += eta / std::max(1.0, std::abs(*v)) * std::exp(-lD);
      }
      w_ = *v;
      return;
    }
  }
  ws_ = ScaledComplex(w_);
  phase_ = Phase::scaled;
  step_scaled(p, lD);
}

void Orbit::step_scaled(const Poly& p, double lD) {
  const double L_prev = ws_.log_abs();
  ScaledComplex v;
  try {
    v = eval_scaled(p, ws_);
  } catch (const MagnitudeOverflow&) {
    if (!allow_asymptotic_) throw;
    // Exponent range exhausted: continue on the log scale from the previous point.
    lambda_ = L_prev * std::exp(-prefix_->ledger(k_ - 1).log_D);
    phase_ = Phase::log;
    step_log(lD);
    return;
  }
  if (track_error_) {
    const double log_cond = log_eval_abs(p, L_prev) - std::max(0.0, v.log_abs());
    roundoff_ += horner_gamma(p.degree()) * std::exp(log_cond - lD);
  }
  ws_ = v;
  const double L = ws_.log_abs();
  if (allow_asymptotic_ && k_ < prefix_->size()) {
    const double next_log_ratio = prefix_->log_ratio(k_ + 1);
    if (L > 1.0 && L > std::numbers::ln2 + next_log_ratio + kAsymptoticSlack) {
      lambda_ = L * std::exp(-lD);
      phase_ = Phase::log;
      return;
    }
  }
  if (ws_.exponent() > -900 && ws_.exponent() < 300 && k_ < prefix_->size() &&
      prefix_->plain_safe(k_ + 1)) {
    w_ = ws_.to_complex_saturating();
    phase_ = Phase::plain;
  }
}

void Orbit::step_log(double lD) {
  const double lD_prev = prefix_->ledger(k_ - 1).log_D;
  const double L_prev = lambda_ * std::exp(lD_prev);  // may be +inf: then delta is 0
  const double s = std::exp(std::numbers::ln2 + prefix_->log_ratio(k_) - L_prev);
  lambda_ += prefix_->log_leading(k_) * std::exp(-lD);
  const double delta = s < 0.5 ? -std::log1p(-s) : 1.0;
  asymptotic_ += delta * std::exp(-lD);
  if (track_error_) roundoff_ += 2.0 * kUnitRoundoff * std::fabs(lambda_);
}

double Orbit::log_abs() const {
  switch (phase_) {
    case Phase::plain: return std::log(std::abs(w_));
    case Phase::scaled: return ws_.log_abs();
    case Phase::log: return lambda_ * std::exp(log_D());
  }
  return 0.0;
}

std::optional<ScaledComplex> Orbit::scaled_point() const {
  switch (phase_) {
    case Phase::plain: return ScaledComplex(w_);
    case Phase::scaled: return ws_;
    case Phase::log: return std::nullopt;
  }
  return std::nullopt;
}

double Orbit::potential(const ModelSet& E) const {
  const double lD = log_D();
  switch (phase_) {
    case Phase::plain: return divide_by_degree_product(green_model(E, w_), lD);
    case Phase::scaled: return divide_by_degree_product(green_model_scaled(E, ws_), lD);
    case Phase::log: return lambda_ + E.robin_constant() * std::exp(-lD);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

namespace {

void validate_orbit_request(std::size_t n_steps, double escape_radius) {
  if (n_steps == 0) throw ValidationError("n_steps must be >= 1");
  if (!(escape_radius > 0.0)) throw ValidationError("escape radius must be positive");
}

}  // namespace

GreenValue green_nonauto(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                         const OrbitOptions& options) {
  validate_orbit_request(n_steps, options.escape_radius);
  if (n_steps > prefix.size()) throw ValidationError("n_steps exceeds the materialized prefix");
  Orbit orbit(prefix, z, options.track_error);
  GreenValue out;
  const double log_R = std::log(options.escape_radius);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    orbit.step();
    if (!out.escaped_at && orbit.log_abs() > log_R) out.escaped_at = k;
  }
  out.value = orbit.potential(options.target);
  out.ledger = prefix.ledger(n_steps);
  out.asymptotic_engaged = orbit.asymptotic_engaged();
  out.roundoff = orbit.roundoff() + 4.0 * kUnitRoundoff * (out.value + std::exp(-out.ledger.log_D));
  out.asymptotic = orbit.asymptotic_error();
  if (options.tail_constant) {
    out.truncation = std::exp(std::log(2.0 * std::max(*options.tail_constant, 0.0)) - out.ledger.log_D);
    out.truncation_included = true;
  }
  out.error_bound = out.roundoff + out.asymptotic + out.truncation;
  return out;
}

GreenValue green_nonauto(const PolySequence& seq, Complex z, std::size_t n_steps,
                         const OrbitOptions& options) {
  validate_orbit_request(n_steps, options.escape_radius);
  return green_nonauto(SequencePrefix(seq, n_steps), z, n_steps, options);
}

std::vector<double> green_trace(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                                const OrbitOptions& options) {
  validate_orbit_request(n_steps, options.escape_radius);
  if (n_steps > prefix.size()) throw ValidationError("n_steps exceeds the materialized prefix");
  Orbit orbit(prefix, z, false);
  std::vector<double> out;
  out.reserve(n_steps);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    orbit.step();
    out.push_back(orbit.potential(options.target));
  }
  return out;
}

OrbitResult orbit_bounded(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                          double escape_radius) {
  validate_orbit_request(n_steps, escape_radius);
  if (n_steps > prefix.size()) throw ValidationError("n_steps exceeds the materialized prefix");
  Orbit orbit(prefix, z, false);
  const double log_R = std::log(escape_radius);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    orbit.step();
    const double la = orbit.log_abs();
    if (la > log_R || std::isnan(la)) return {false, k};
  }
  return {true, std::nullopt};
}

OrbitResult orbit_bounded(const PolySequence& seq, Complex z, std::size_t n_steps,
                          double escape_radius) {
  validate_orbit_request(n_steps, escape_radius);
  return orbit_bounded(SequencePrefix(seq, n_steps), z, n_steps, escape_radius);
}

ScaledComplex orbit_point(const SequencePrefix& prefix, Complex z, std::size_t n_steps) {
  if (n_steps > prefix.size()) throw ValidationError("n_steps exceeds the materialized prefix");
  Orbit orbit(prefix, z, false, false);
  for (std::size_t k = 1; k <= n_steps; ++k) orbit.step();
  return *orbit.scaled_point();
}

// ---------------------------------------------------------------------------
// Capacity

CapacityEstimate capacity_estimate(const GreenEvaluator& g, const std::vector<double>& probe_radii,
                                   int samples, Complex center) {
  if (probe_radii.size() < 2) throw ValidationError("capacity_estimate needs at least 2 probe radii");
  for (std::size_t i = 0; i < probe_radii.size(); ++i) {
    if (!(probe_radii[i] > 0.0)) throw ValidationError("probe radii must be positive");
    if (i > 0 && !(probe_radii[i] > probe_radii[i - 1]))
      throw ValidationError("probe radii must be strictly increasing");
  }
  if (samples < 8) throw ValidationError("capacity_estimate needs at least 8 samples per circle");
  const std::size_t m = static_cast<std::size_t>(samples);
  std::vector<double> values(probe_radii.size() * m);
  parallel_for(values.size(), [&](std::size_t idx) {
    const double r = probe_radii[idx / m];
    const Complex z = center + std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(idx % m) / samples);
    values[idx] = g(z) - std::log(r);
  });
  CapacityEstimate out;
  for (std::size_t i = 0; i < probe_radii.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += values[i * m + k];
    out.gamma_per_radius.push_back(sum / samples);
  }
  const auto [lo, hi] = std::minmax_element(out.gamma_per_radius.begin(), out.gamma_per_radius.end());
  out.gamma = out.gamma_per_radius.back();
  out.spread = *hi - *lo;
  out.value = std::exp(-out.gamma);
  return out;
}

CapacityEstimate capacity_estimate(const ModelSet& K, std::vector<double> probe_radii, int samples) {
  if (probe_radii.empty()) {
    const double r = K.containment_radius();
    probe_radii = {2.0 * r, 4.0 * r, 8.0 * r};
  }
  return capacity_estimate([&K](Complex z) { return green_model(K, z); }, probe_radii, samples);
}

}  // namespace nonauto
