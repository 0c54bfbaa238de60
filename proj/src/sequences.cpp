#include "nonauto/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nonauto/parallel.hpp"
#include "nonauto/scaled.hpp"

namespace nonauto {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string index_str(std::size_t n) { return std::to_string(n); }

void check_degree_hypothesis(std::size_t n, int degree, const std::string& name) {
  if (n == 1 && degree < 1)
    throw ValidationError(name + ": p_1 must have degree >= 1");
  if (n >= 2 && degree < 2)
    throw ValidationError(name + ": p_" + index_str(n) + " has degree " + std::to_string(degree) +
                          " but only p_1 may have degree below 2");
}

// c z^d with log2|c| given; the integer part of the exponent goes into the scale.
Poly scaled_monomial(int degree, long double log2_coeff) {
  if (!(std::fabs(log2_coeff) < 9.0e18L))
    throw ValidationError("coefficient exponent exceeds the 64-bit scale range");
  const long double whole = std::floor(log2_coeff);
  const double mantissa = static_cast<double>(std::exp2(log2_coeff - whole));
  return Poly::monomial(degree, Complex(mantissa), static_cast<std::int64_t>(whole));
}

Poly n_exp_z2_term(std::size_t n) {
  if (n == 1) return Poly::monomial(2);
  if (n > 60) throw ValidationError("n^(2^n) z^2: exponent of p_" + index_str(n) + " exceeds 64 bits");
  const long double log2c = std::ldexp(std::log2(static_cast<long double>(n)), static_cast<int>(n));
  return scaled_monomial(2, log2c);
}

Poly n_pow_n_term(std::size_t n) {
  if (n <= 140) return Poly::monomial(static_cast<int>(n), Complex(std::pow(double(n), double(n))));
  return scaled_monomial(static_cast<int>(n),
                         static_cast<long double>(n) * std::log2(static_cast<long double>(n)));
}

// ln|p(z)| and arg p(z), falling back to scaled arithmetic outside the double range.
std::pair<double, double> log_modulus_and_arg(const Poly& p, Complex z) {
  if (p.scale_exponent() == 0) {
    if (auto v = try_eval(p, z)) {
      const double a = std::abs(*v);
      if (a > 1e-290) return {std::log(a), std::arg(*v)};
    }
  }
  const ScaledComplex v = eval_scaled(p, ScaledComplex(z));
  return {v.log_abs(), std::arg(v.mantissa())};
}

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= kTwoPi;
  while (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

std::optional<long> winding_number(const Poly& p, double radius, int samples) {
  std::vector<double> args(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const Complex z = std::polar(radius, kTwoPi * k / samples);
    auto [la, arg] = log_modulus_and_arg(p, z);
    if (!std::isfinite(la)) return std::nullopt;  // zero on the circle
    args[static_cast<std::size_t>(k)] = arg;
  }
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double d = wrap_angle(args[static_cast<std::size_t>((k + 1) % samples)] -
                                args[static_cast<std::size_t>(k)]);
    if (std::fabs(d) > std::numbers::pi / 2) return std::nullopt;  // under-resolved
    total += d;
  }
  return std::lround(total / kTwoPi);
}

struct CircleResult {
  bool zeros_inside = false;
  double min_log = 0.0;
  Complex argmin{};
};

CircleResult circle_test(const Poly& p, double radius, int samples) {
  CircleResult out;
  out.zeros_inside = zeros_inside_disk(p, radius, samples);
  auto [lm, at] = min_log_modulus_on_circle(p, radius, samples);
  auto [lm4, at4] = min_log_modulus_on_circle(p, radius, 4 * samples);
  out.min_log = std::min(lm, lm4);
  out.argmin = lm4 < lm ? at4 : at;
  return out;
}

// Evaluates the escape condition ln min|p_n| >= ln radius + slope_log for 2 <= n <= n_max.
CheckReport circle_condition(const std::vector<Poly>& polys, double radius, int samples,
                             double slope_log, bool fail_fast) {
  CheckReport report;
  report.n_from = 2;
  report.n_to = polys.size();
  const double target = std::log(radius) + slope_log;
  double min_gap = std::numeric_limits<double>::infinity();
  auto evaluate = [&](std::size_t n) { return circle_test(polys[n - 1], radius, samples); };

  std::vector<CircleResult> results;
  if (!fail_fast) {
    results.resize(polys.size() + 1);
    parallel_for(polys.size() >= 2 ? polys.size() - 1 : 0,
                 [&](std::size_t i) { results[i + 2] = evaluate(i + 2); });
  }
  report.passed = true;
  for (std::size_t n = 2; n <= polys.size(); ++n) {
    const CircleResult r = fail_fast ? evaluate(n) : results[n];
    const double gap = r.min_log - target;
    min_gap = std::min(min_gap, gap);
    if (!r.zeros_inside || gap < 0.0) {
      report.passed = false;
      report.witness = Witness{n, r.argmin, std::exp(r.min_log)};
      report.detail = !r.zeros_inside
                          ? "zeros of p_" + index_str(n) + " not certified inside the disk"
                          : "min |p_" + index_str(n) + "| on the circle below the bound";
      break;
    }
  }
  report.margin = std::isfinite(min_gap) ? std::expm1(min_gap) : 0.0;
  return report;
}

std::vector<Poly> materialize(const PolySequence& seq, std::size_t n_max) {
  std::vector<Poly> polys;
  polys.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) polys.push_back(seq.get(n));
  return polys;
}

}  // namespace

std::string_view kind_name(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::minimal_chebyshev: return "minimal-chebyshev";
    case SequenceKind::classical_chebyshev: return "classical-chebyshev";
    case SequenceKind::power: return "power";
    case SequenceKind::n_pow_n: return "n-pow-n";
    case SequenceKind::two_pow_neg_n_sq: return "two-pow-neg-n-sq";
    case SequenceKind::n_exp_z2: return "n-exp-z2";
    case SequenceKind::z2_minus_1_then_n_exp_z2: return "z2-minus-1-then-n-exp-z2";
    case SequenceKind::z2_minus_2_then_powers: return "z2-minus-2-then-powers";
    case SequenceKind::custom: return "custom";
  }
  return "unknown";
}

DegreeLedger extend(const DegreeLedger& ledger, int degree) {
  DegreeLedger out;
  out.n = ledger.n + 1;
  out.log_D = ledger.log_D + std::log(static_cast<double>(degree));
  if (ledger.D_exact) {
    std::uint64_t product = 0;
    if (!__builtin_mul_overflow(*ledger.D_exact, static_cast<std::uint64_t>(degree), &product))
      out.D_exact = product;
    else
      out.D_exact = std::nullopt;
  } else {
    out.D_exact = std::nullopt;
  }
  return out;
}

// ---------------------------------------------------------------------------

PolySequence::PolySequence(SequenceKind kind, std::string name, Generator generator,
                           std::optional<std::size_t> length, DegreeFn degree_fn)
    : kind_(kind),
      name_(std::move(name)),
      generator_(std::move(generator)),
      length_(length),
      degree_fn_(std::move(degree_fn)) {
  if (!generator_) throw ValidationError("sequence generator is empty");
  if (length_ && *length_ == 0) throw ValidationError(name_ + ": empty sequence");
}

Poly PolySequence::get(std::size_t n) const {
  if (n == 0) throw ValidationError("sequence index starts at 1");
  if (length_ && n > *length_)
    throw ValidationError(name_ + ": index " + index_str(n) + " beyond the finite length " +
                          index_str(*length_));
  Poly p = generator_(n);
  check_degree_hypothesis(n, p.degree(), name_);
  return p;
}

int PolySequence::degree(std::size_t n) const {
  if (degree_fn_) {
    if (n == 0) throw ValidationError("sequence index starts at 1");
    const int d = degree_fn_(n);
    check_degree_hypothesis(n, d, name_);
    return d;
  }
  return get(n).degree();
}

DegreeLedger PolySequence::ledger(std::size_t n) const {
  DegreeLedger l;
  for (std::size_t k = 1; k <= n; ++k) l = extend(l, degree(k));
  return l;
}

SequencePrefix::SequencePrefix(const PolySequence& seq, std::size_t n) {
  polys_.reserve(n);
  ledgers_.reserve(n + 1);
  ledgers_.emplace_back();
  for (std::size_t k = 1; k <= n; ++k) {
    polys_.push_back(seq.get(k));
    const Poly& p = polys_.back();
    ledgers_.push_back(extend(ledgers_.back(), p.degree()));
    log_leading_.push_back(p.log_abs_leading());
    const double ratio = p.max_coefficient_ratio();
    log_ratio_.push_back(ratio > 0 ? std::log(ratio) : -std::numeric_limits<double>::infinity());
    double max_abs = 0;
    for (Eigen::Index j = 0; j < p.coeffs().size(); ++j)
      max_abs = std::max(max_abs, std::abs(p.coeffs()[j]));
    plain_safe_.push_back(p.scale_exponent() == 0 && max_abs < 1e100 ? 1 : 0);
  }
}

int DegreePattern::at(std::size_t n) const {
  if (index_degree) return static_cast<int>(n);
  if (degrees.empty()) throw ValidationError("empty degree pattern");
  return degrees[std::min(n, degrees.size()) - 1];
}

PolySequence builtin(SequenceKind kind, const DegreePattern& pattern) {
  const std::string name(kind_name(kind));
  switch (kind) {
    case SequenceKind::minimal_chebyshev:
      return PolySequence(kind, name, [](std::size_t n) { return chebyshev_minimal(static_cast<int>(n)); },
                          std::nullopt, [](std::size_t n) { return static_cast<int>(n); });
    case SequenceKind::classical_chebyshev:
    case SequenceKind::power: {
      if (!pattern.index_degree) {
        if (pattern.degrees.empty()) throw ValidationError(name + ": empty degree list");
        for (std::size_t i = 0; i < pattern.degrees.size(); ++i)
          check_degree_hypothesis(i + 1, pattern.degrees[i], name);
        if (pattern.degrees.back() < 2)
          throw ValidationError(name + ": the repeating last degree must be >= 2");
      }
      auto degree_fn = [pattern](std::size_t n) { return pattern.at(n); };
      if (kind == SequenceKind::power)
        return PolySequence(kind, name, [pattern](std::size_t n) { return Poly::monomial(pattern.at(n)); },
                            std::nullopt, degree_fn);
      return PolySequence(kind, name, [pattern](std::size_t n) { return chebyshev_T(pattern.at(n)); },
                          std::nullopt, degree_fn);
    }
    case SequenceKind::n_pow_n:
      return PolySequence(kind, name, n_pow_n_term, std::nullopt,
                          [](std::size_t n) { return static_cast<int>(n); });
    case SequenceKind::two_pow_neg_n_sq:
      return PolySequence(
          kind, name,
          [](std::size_t n) {
            const auto k = static_cast<std::int64_t>(n);
            return Poly::monomial(static_cast<int>(n), Complex(1), -k * k);
          },
          std::nullopt, [](std::size_t n) { return static_cast<int>(n); });
    case SequenceKind::n_exp_z2:
      return PolySequence(kind, name, n_exp_z2_term, std::nullopt, [](std::size_t) { return 2; });
    case SequenceKind::z2_minus_1_then_n_exp_z2:
      return PolySequence(
          kind, name,
          [](std::size_t n) { return n == 1 ? Poly{-1.0, 0.0, 1.0} : n_exp_z2_term(n); },
          std::nullopt, [](std::size_t) { return 2; });
    case SequenceKind::z2_minus_2_then_powers:
      return PolySequence(
          kind, name,
          [](std::size_t n) { return n == 1 ? Poly{-2.0, 0.0, 1.0} : Poly::monomial(static_cast<int>(n)); },
          std::nullopt, [](std::size_t n) { return n == 1 ? 2 : static_cast<int>(n); });
    case SequenceKind::custom:
      throw ValidationError("custom sequences are built with custom_sequence()");
  }
  throw ValidationError("unknown sequence kind");
}

PolySequence custom_sequence(std::vector<Poly> polys, Repeat repeat) {
  if (polys.empty()) throw ValidationError("custom sequence: empty polynomial list");
  const std::string name = "custom";
  for (std::size_t i = 0; i < polys.size(); ++i) check_degree_hypothesis(i + 1, polys[i].degree(), name);
  if (repeat == Repeat::cycle && polys.front().degree() < 2)
    throw ValidationError("custom sequence: a cycled p_1 reappears later and needs degree >= 2");
  const std::size_t count = polys.size();
  auto shared = std::make_shared<const std::vector<Poly>>(std::move(polys));
  auto generator = [shared, count](std::size_t n) { return (*shared)[(n - 1) % count]; };
  auto degree_fn = [shared, count](std::size_t n) { return (*shared)[(n - 1) % count].degree(); };
  std::optional<std::size_t> length;
  if (repeat == Repeat::none) length = count;
  return PolySequence(SequenceKind::custom, name, generator, length, degree_fn);
}

namespace {

Poly polynomial_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("polynomial must be a nonempty list of [re, im] pairs");
  std::vector<Complex> coeffs;
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw ValidationError("coefficient must be an [re, im] pair of numbers");
    coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
  }
  return Poly::from_vector(coeffs);
}

}  // namespace

Poly parse_polynomial(const std::string& text) {
  try {
    return polynomial_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("polynomial literal: ") + e.what());
  }
}

PolySequence custom_sequence_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sequence spec: ") + e.what());
  }
  if (!j.is_object() || !j.contains("polynomials") || !j["polynomials"].is_array())
    throw ValidationError("sequence spec needs a \"polynomials\" list");
  std::vector<Poly> polys;
  for (const auto& p : j["polynomials"]) polys.push_back(polynomial_from_json(p));
  Repeat repeat = Repeat::none;
  if (j.contains("repeat")) {
    const auto r = j["repeat"].is_string() ? j["repeat"].get<std::string>() : std::string();
    if (r == "cycle") repeat = Repeat::cycle;
    else if (r == "none") repeat = Repeat::none;
    else throw ValidationError("sequence spec: repeat must be \"cycle\" or \"none\"");
  }
  return custom_sequence(std::move(polys), repeat);
}

PolySequence custom_sequence_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read sequence spec " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return custom_sequence_from_json(buffer.str());
}

namespace {

DegreePattern parse_pattern(std::string_view args) {
  DegreePattern pattern;
  std::string item;
  std::stringstream ss{std::string(args)};
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int d = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      pattern.degrees.push_back(d);
    } catch (const std::exception&) {
      throw ValidationError("bad degree in pattern: '" + item + "'");
    }
  }
  if (pattern.degrees.empty()) throw ValidationError("empty degree pattern");
  return pattern;
}

}  // namespace

PolySequence sequence_from_name(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "custom") {
    if (args.empty()) throw ValidationError("custom sequence needs a path: custom:<file.json>");
    return custom_sequence_from_file(std::string(args));
  }
  if (head == "power" || head == "classical-chebyshev") {
    const auto kind = head == "power" ? SequenceKind::power : SequenceKind::classical_chebyshev;
    return builtin(kind, args.empty() ? DegreePattern::index() : parse_pattern(args));
  }
  for (auto kind : {SequenceKind::minimal_chebyshev, SequenceKind::n_pow_n, SequenceKind::two_pow_neg_n_sq,
                    SequenceKind::n_exp_z2, SequenceKind::z2_minus_1_then_n_exp_z2,
                    SequenceKind::z2_minus_2_then_powers}) {
    if (head == kind_name(kind)) {
      if (!args.empty()) throw ValidationError(std::string(head) + " takes no parameters");
      return builtin(kind);
    }
  }
  throw ValidationError("unknown sequence '" + std::string(spec) + "'");
}

// ---------------------------------------------------------------------------
// Checkers

std::pair<double, Complex> min_log_modulus_on_circle(const Poly& p, double radius, int samples) {
  double best = std::numeric_limits<double>::infinity();
  Complex at{};
  for (int k = 0; k < samples; ++k) {
    const Complex z = std::polar(radius, kTwoPi * k / samples);
    const double la = log_modulus_and_arg(p, z).first;
    if (la < best) {
      best = la;
      at = z;
    }
  }
  return {best, at};
}

bool zeros_inside_disk(const Poly& p, double radius, int samples) {
  if (p.degree() < 1) return false;
  if (cauchy_root_bound(p) < radius) return true;
  int m = std::max(samples, 16 * p.degree());
  for (int attempt = 0; attempt < 6; ++attempt, m *= 2) {
    if (auto w = winding_number(p, radius, m)) return *w == p.degree();
  }
  return false;
}

CheckReport check_guided(const PolySequence& seq, double radius, std::size_t n_max, int samples) {
  if (!(radius > 1.0)) throw ValidationError("check_guided: R must exceed 1");
  if (n_max < 2) throw ValidationError("check_guided: n_max must be >= 2");
  if (samples < 64) throw ValidationError("check_guided: at least 64 samples per circle");
  return circle_condition(materialize(seq, n_max), radius, samples, 0.0, false);
}

namespace {

CheckReport escape_condition(const std::vector<Poly>& polys, double radius, int samples) {
  return circle_condition(polys, radius, samples, 1.0, true);
}

}  // namespace

CheckReport escape_radius_verify(const PolySequence& seq, double radius, std::size_t n_max,
                                 int samples) {
  if (!(radius > 0.0)) throw ValidationError("escape radius must be positive");
  if (n_max < 2) throw ValidationError("escape radius check needs n_max >= 2");
  return escape_condition(materialize(seq, n_max), radius, samples);
}

double escape_radius_search(const PolySequence& seq, const EscapeSearchOptions& options) {
  if (options.n_max < 2) throw ValidationError("escape_radius_search: n_max must be >= 2");
  if (!(options.start > 0.0) || !(options.growth > 1.0))
    throw ValidationError("escape_radius_search: bad search grid");
  const auto polys = materialize(seq, options.n_max);
  CheckReport last;
  auto passes = [&](double r) {
    last = escape_condition(polys, r, options.samples);
    return last.passed;
  };
  double lo = 0.0;
  double hi = options.start;
  while (!passes(hi)) {
    lo = hi;
    hi *= options.growth;
    if (hi > options.ceiling) {
      const std::string n = last.witness ? std::to_string(last.witness->n) : "?";
      throw CheckFailure("no escape radius below " + std::to_string(options.ceiling) +
                         " (violated at n = " + n + ")");
    }
  }
  if (lo == 0.0) return hi;
  while ((hi - lo) > options.relative_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

double coefficient_ratio(const PolySequence& seq, std::size_t n) {
  return seq.get(n).max_coefficient_ratio();
}

CheckReport check_P2(const PolySequence& seq, double A, std::size_t n_max) {
  if (!(A >= 0.0)) throw ValidationError("check_P2: A must be nonnegative");
  if (n_max < 1) throw ValidationError("check_P2: n_max must be >= 1");
  CheckReport report;
  report.n_from = 1;
  report.n_to = n_max;
  double worst = -1.0;
  std::size_t worst_n = 1;
  std::optional<std::size_t> first_fail;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double r = coefficient_ratio(seq, n);
    if (r > A && !first_fail) first_fail = n;
    if (r > worst) {
      worst = r;
      worst_n = n;
    }
  }
  report.passed = !first_fail.has_value();
  report.margin = A - worst;
  report.sup = worst;
  if (!report.passed) {
    report.witness = Witness{worst_n, Complex{}, worst};
    report.detail = "first violation at n = " + std::to_string(*first_fail);
  }
  return report;
}

CheckReport check_finite_condition(const PolySequence& seq, Complex center, double radius,
                                   const FiniteConditionOptions& options) {
  if (!(radius > 0.0)) throw ValidationError("check_finite_condition: radius must be positive");
  if (options.n_max < 1) throw ValidationError("check_finite_condition: n_max must be >= 1");
  // Polar net: rings out to the boundary circle, where the subharmonic sup lives.
  const int rings = 16;
  const int spokes = std::max(8, options.samples / rings);
  std::vector<Complex> net{center};
  for (int i = 1; i <= rings; ++i)
    for (int k = 0; k < spokes; ++k)
      net.push_back(center + std::polar(radius * i / rings, kTwoPi * k / spokes));

  const auto polys = materialize(seq, options.n_max);
  struct Best {
    double value = 0.0;
    Complex at{};
  };
  std::vector<Best> per_n(options.n_max);
  parallel_for(options.n_max, [&](std::size_t i) {
    const Poly& p = polys[i];
    Best best{0.0, center};
    for (const Complex& z : net) {
      const double v = std::max(0.0, log_modulus_and_arg(p, z).first) / p.degree();
      if (v > best.value) best = {v, z};
    }
    per_n[i] = best;
  });

  CheckReport report;
  report.n_from = 1;
  report.n_to = options.n_max;
  report.heuristic = true;
  std::vector<double> running(options.n_max);
  std::size_t arg_n = 1;
  double sup = 0.0;
  for (std::size_t i = 0; i < options.n_max; ++i) {
    if (per_n[i].value > sup) {
      sup = per_n[i].value;
      arg_n = i + 1;
    }
    running[i] = sup;
  }
  const std::size_t tail = std::max<std::size_t>(1, options.n_max / 10);
  const double early = options.n_max > tail ? running[options.n_max - 1 - tail] : 0.0;
  const bool growing = sup > early * (1.0 + options.growth_tolerance) + options.growth_tolerance;
  const bool below = sup < options.threshold;
  report.passed = below && !growing;
  report.sup = sup;
  report.margin = options.threshold - sup;
  if (!report.passed) {
    report.witness = Witness{arg_n, per_n[arg_n - 1].at, sup};
    report.detail = growing ? "sup still increasing over the last tenth of the index range"
                            : "sup above threshold";
  }
  return report;
}

}  // namespace nonauto
