#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nonauto/poly.hpp"
#include "nonauto/scaled.hpp"
#include "nonauto/sequences.hpp"

namespace nonauto {

/// Compacta with closed-form Green functions: disks, [-1,1], filled ellipses with
/// foci +-1, and polynomial preimages of any of these.
class ModelSet {
 public:
  struct Disk {
    Complex center;
    double radius;
  };
  struct Segment {};
  struct Ellipse {
    double R;  // semiaxes (R + 1/R)/2 and (R - 1/R)/2
  };
  struct Preimage {
    std::shared_ptr<const ModelSet> inner;
    Poly map;
  };
  using Variant = std::variant<Disk, Segment, Ellipse, Preimage>;

  static ModelSet disk(Complex center, double radius);
  static ModelSet unit_disk() { return disk(Complex(0), 1.0); }
  static ModelSet segment();
  static ModelSet ellipse(double R);
  static ModelSet preimage(const ModelSet& inner, Poly map);

  const Variant& variant() const { return variant_; }

  /// Robin constant: lim g(z) - ln|z| at infinity.
  double robin_constant() const;
  double capacity() const;
  /// A radius r with the set inside the closed disk |z| <= r.
  double containment_radius() const;
  std::string describe() const;
  /// Structural identity (same variant, parameters and maps).
  friend bool operator==(const ModelSet& a, const ModelSet& b);

 private:
  explicit ModelSet(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// disk:a,r | disk:r | segment | ellipse:R
ModelSet model_from_name(const std::string& spec);

/// sqrt(z^2 - 1) with the root chosen so that |z + sqrt(z^2 - 1)| >= 1.
Complex joukowski_root(Complex z);

/// Closed-form Green function with pole at infinity; exactly 0 on the set.
double green_model(const ModelSet& K, Complex z);
/// Same, for a point stored in scaled form (orbit values far outside double range).
double green_model_scaled(const ModelSet& K, const ScaledComplex& w);

/// (1/deg f) * g_K(f(z)), the Green function of f^{-1}(K).
double green_preimage(const ModelSet& K, const Poly& f, Complex z);

/// g_K(z) <= eps.
bool sublevel_membership(const ModelSet& K, Complex z, double eps);

/// Walks w_k = (p_k o ... o p_1)(z), switching from double to scaled arithmetic
/// when the orbit leaves the double range, and to the asymptotic log-update
/// ln|w_{k+1}| = d_k ln|w_k| + ln|a_{d_k}| + delta_k once |delta_k| is below 1e-20.
class Orbit {
 public:
  Orbit(const SequencePrefix& prefix, Complex z, bool track_error = false,
        bool allow_asymptotic = true);

  /// Applies p_{index()+1}.
  void step();
  std::size_t index() const { return k_; }
  /// ln|w_k|; may be +inf deep in the asymptotic regime.
  double log_abs() const;
  /// w_k while it is tracked exactly (not in the asymptotic regime).
  std::optional<ScaledComplex> scaled_point() const;
  /// (1/D_k) g_E(w_k).
  double potential(const ModelSet& E) const;

  bool asymptotic_engaged() const { return phase_ == Phase::log; }
  double roundoff() const { return roundoff_; }
  double asymptotic_error() const { return asymptotic_; }

 private:
  enum class Phase { plain, scaled, log };
  void step_plain(const Poly& p, double log_D);
  void step_scaled(const Poly& p, double log_D);
  void step_log(double log_D);
  double log_D() const;

  const SequencePrefix* prefix_;
  bool track_error_;
  bool allow_asymptotic_;
  Phase phase_ = Phase::plain;
  Complex w_{};
  ScaledComplex ws_{};
  double lambda_ = 0.0;  // ln|w_k| / D_k in the asymptotic regime
  std::size_t k_ = 0;
  double roundoff_ = 0.0;
  double asymptotic_ = 0.0;
};

/// Normalized potential (1/D_N) g_E(P_N(z)) with an error estimate.
struct GreenValue {
  double value = 0.0;
  double error_bound = 0.0;
  std::optional<std::size_t> escaped_at;
  DegreeLedger ledger;
  bool truncation_included = false;
  bool asymptotic_engaged = false;
  // Components of error_bound.
  double roundoff = 0.0;
  double asymptotic = 0.0;
  double truncation = 0.0;
};

struct OrbitOptions {
  double escape_radius = 2.0;
  /// Target compactum E; g_{E_N} = (1/D_N) g_E o P_N.
  ModelSet target = ModelSet::unit_disk();
  /// Tail constant for the truncation term 2 C / D_N; excluded when absent.
  std::optional<double> tail_constant;
  bool track_error = true;
};

GreenValue green_nonauto(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                         const OrbitOptions& options);
GreenValue green_nonauto(const PolySequence& seq, Complex z, std::size_t n_steps,
                         const OrbitOptions& options);

/// Normalized potentials after every step 1..n_steps (entry k-1 holds step k).
std::vector<double> green_trace(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                                const OrbitOptions& options);

struct OrbitResult {
  bool bounded = true;
  std::optional<std::size_t> escaped_at;
};

/// |w_k| <= R for k = 1..n_steps; escape past R certifies non-membership.
OrbitResult orbit_bounded(const SequencePrefix& prefix, Complex z, std::size_t n_steps,
                          double escape_radius);
OrbitResult orbit_bounded(const PolySequence& seq, Complex z, std::size_t n_steps,
                          double escape_radius);

/// P_N(z) in scaled form, for membership tests against arbitrary targets.
ScaledComplex orbit_point(const SequencePrefix& prefix, Complex z, std::size_t n_steps);

struct CapacityEstimate {
  double value = 0.0;
  double gamma = 0.0;
  double spread = 0.0;
  std::vector<double> gamma_per_radius;
};

using GreenEvaluator = std::function<double(Complex)>;

inline constexpr int kCapacitySamples = 256;

/// Robin constant from circle averages of g(z) - ln|z - center| at increasing radii.
CapacityEstimate capacity_estimate(const GreenEvaluator& g, const std::vector<double>& probe_radii,
                                   int samples = kCapacitySamples, Complex center = Complex(0));
/// Probe radii default to {2, 4, 8} times the containment radius.
CapacityEstimate capacity_estimate(const ModelSet& K, std::vector<double> probe_radii = {},
                                   int samples = kCapacitySamples);

}  // namespace nonauto
