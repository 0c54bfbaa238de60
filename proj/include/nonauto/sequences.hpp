#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonauto/poly.hpp"

namespace nonauto {

enum class SequenceKind {
  minimal_chebyshev,
  classical_chebyshev,
  power,
  n_pow_n,
  two_pow_neg_n_sq,
  n_exp_z2,
  z2_minus_1_then_n_exp_z2,
  z2_minus_2_then_powers,
  custom,
};

std::string_view kind_name(SequenceKind kind);

/// Degree bookkeeping for the product d_1 * ... * d_n.
struct DegreeLedger {
  std::size_t n = 0;
  double log_D = 0.0;
  std::optional<std::uint64_t> D_exact = std::uint64_t{1};
};

DegreeLedger extend(const DegreeLedger& ledger, int degree);

/// Indexed generator n -> p_n (n >= 1) with deg p_1 >= 1 and deg p_n >= 2 for n >= 2.
///
/// Generators are pure functions of n.  The degree hypothesis is checked on every
/// access, and eagerly over the whole list for finite custom sequences.
class PolySequence {
 public:
  using Generator = std::function<Poly(std::size_t)>;
  using DegreeFn = std::function<int(std::size_t)>;

  PolySequence(SequenceKind kind, std::string name, Generator generator,
               std::optional<std::size_t> length = std::nullopt, DegreeFn degree_fn = {});

  SequenceKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// nullopt for infinite sequences.
  std::optional<std::size_t> length() const { return length_; }

  Poly get(std::size_t n) const;
  int degree(std::size_t n) const;
  DegreeLedger ledger(std::size_t n) const;

 private:
  SequenceKind kind_;
  std::string name_;
  Generator generator_;
  std::optional<std::size_t> length_;
  DegreeFn degree_fn_;
};

/// p_1..p_N materialized once, with the per-step constants the orbit engine needs.
class SequencePrefix {
 public:
  SequencePrefix(const PolySequence& seq, std::size_t n);

  std::size_t size() const { return polys_.size(); }
  /// 1-based access, matching p_n.
  const Poly& at(std::size_t n) const { return polys_.at(n - 1); }
  const DegreeLedger& ledger(std::size_t n) const { return ledgers_.at(n); }
  /// ln |a_{n,d_n}| including the power-of-two scale.
  double log_leading(std::size_t n) const { return log_leading_.at(n - 1); }
  /// ln max_{j<d} |a_{n,j}|/|a_{n,d}|, or -inf for monomials.
  double log_ratio(std::size_t n) const { return log_ratio_.at(n - 1); }
  /// true when plain double Horner is safe for p_n on moderate arguments.
  bool plain_safe(std::size_t n) const { return plain_safe_.at(n - 1) != 0; }

 private:
  std::vector<Poly> polys_;
  std::vector<DegreeLedger> ledgers_;
  std::vector<double> log_leading_;
  std::vector<double> log_ratio_;
  std::vector<char> plain_safe_;
};

/// Degree pattern for power maps and classical Chebyshev sequences: the listed
/// degrees in order, the last one repeating forever; or d_n = n.
struct DegreePattern {
  std::vector<int> degrees;
  bool index_degree = false;

  int at(std::size_t n) const;
  static DegreePattern constant(int d) { return {{d}, false}; }
  static DegreePattern index() { return {{}, true}; }
};

/// Built-in sequences.  `pattern` is used by power and classical_chebyshev only.
PolySequence builtin(SequenceKind kind, const DegreePattern& pattern = DegreePattern::index());

enum class Repeat { cycle, none };

/// Sequence from an explicit list; validated eagerly.  `cycle` gives a periodic sequence.
PolySequence custom_sequence(std::vector<Poly> polys, Repeat repeat);

/// Parses {"polynomials": [[[re,im],...], ...], "repeat": "cycle"|"none"}.
PolySequence custom_sequence_from_json(const std::string& text);
PolySequence custom_sequence_from_file(const std::string& path);

/// Kebab-case identifiers: minimal-chebyshev, classical-chebyshev[:d,...], power:d[,d...],
/// n-pow-n, two-pow-neg-n-sq, n-exp-z2, z2-minus-1-then-n-exp-z2,
/// z2-minus-2-then-powers, custom:<path.json>.
PolySequence sequence_from_name(std::string_view spec);

/// Coefficient list literal [[re,im], ...] in ascending powers.
Poly parse_polynomial(const std::string& text);

// ---------------------------------------------------------------------------
// Checkers

struct Witness {
  std::size_t n = 0;
  Complex point{};
  double value = 0.0;
};

struct CheckReport {
  bool passed = false;
  std::size_t n_from = 0;
  std::size_t n_to = 0;
  std::optional<Witness> witness;
  double margin = 0.0;
  std::optional<double> sup;
  bool heuristic = false;
  std::string detail;
};

inline constexpr int kDefaultCircleSamples = 1024;
inline constexpr std::size_t kDefaultNMax = 100;

/// True when every zero of p lies in the open disk |z| < radius.  Uses the
/// Cauchy bound when it suffices, else the sampled winding number on the circle.
bool zeros_inside_disk(const Poly& p, double radius, int samples = kDefaultCircleSamples);

/// min_{|zeta| = radius} ln|p(zeta)| over equi-spaced samples, with the argmin.
std::pair<double, Complex> min_log_modulus_on_circle(const Poly& p, double radius, int samples);

/// Guidedness through the preimage condition p_n^{-1}(closed disk R) inside disk R,
/// tested on 2 <= n <= n_max at `samples` and 4 * `samples` points per circle.
CheckReport check_guided(const PolySequence& seq, double radius, std::size_t n_max = kDefaultNMax,
                         int samples = kDefaultCircleSamples);

/// Uniform escape condition at one radius: for 2 <= n <= n_max,
/// zeros inside the disk and min |p_n| >= e * radius on the circle.
CheckReport escape_radius_verify(const PolySequence& seq, double radius,
                                 std::size_t n_max = kDefaultNMax,
                                 int samples = kDefaultCircleSamples);

struct EscapeSearchOptions {
  std::size_t n_max = kDefaultNMax;
  int samples = kDefaultCircleSamples;
  double start = 1.0;
  double growth = 1.25;
  double ceiling = 1e6;
  double relative_tolerance = 1e-10;
};

/// Smallest radius (geometric bracket, then bisection) passing escape_radius_verify at
/// both `samples` and 4 * `samples`.  Throws CheckFailure naming the violating n.
double escape_radius_search(const PolySequence& seq, const EscapeSearchOptions& options = {});

/// |a_{n,j}| <= A |a_{n,d_n}| for j < d_n and n <= n_max; witness carries the largest ratio.
CheckReport check_P2(const PolySequence& seq, double A, std::size_t n_max = kDefaultNMax);

/// Largest coefficient ratio max_{j<d}|a_j|/|a_d| of p_n.
double coefficient_ratio(const PolySequence& seq, std::size_t n);

struct FiniteConditionOptions {
  std::size_t n_max = kDefaultNMax;
  int samples = kDefaultCircleSamples;
  double threshold = 1e6;
  double growth_tolerance = 1e-9;
};

/// sup over n <= n_max and a polar net of the disk of (1/deg p_n) log+|p_n|.
/// Passes when the sup is below the threshold and does not grow over the last
/// tenth of the index range (a heuristic flag, reported as such).
CheckReport check_finite_condition(const PolySequence& seq, Complex center, double radius,
                                   const FiniteConditionOptions& options = {});

}  // namespace nonauto
