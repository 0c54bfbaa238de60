#include "nonauto/klimek.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "nonauto/error.hpp"
#include "nonauto/parallel.hpp"

namespace nonauto {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Boundary points per warm-started root-tracking chunk.  Fixed, so nets do not
// depend on the thread count.
constexpr std::size_t kChunk = 64;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kUnit = 0x1p-53;

// q(z), q'(z) and the Horner rounding bound for the monic q = z^d + sum c_j z^j.
struct MonicValue {
  Complex q, dq;
  double bound;
};

MonicValue eval_monic(const std::vector<Complex>& c, Complex z) {
  Complex q(1.0), dq(0.0);
  double mag = 1.0;
  const double az = std::abs(z);
  for (std::size_t j = c.size(); j-- > 0;) {
    dq = dq * z + q;
    q = q * z + c[j];
    mag = mag * az + std::abs(c[j]);
  }
  return {q, dq, 8.0 * double(c.size() + 1) * kUnit * mag};
}

// Aberth-Ehrlich iteration; a root is frozen once |q| is within rounding noise.
// Returns false when it did not settle.
bool aberth(const std::vector<Complex>& c, std::vector<Complex>& z, int max_iter) {
  const std::size_t d = z.size();
  std::vector<char> done(d, 0);
  for (int it = 0; it < max_iter; ++it) {
    std::size_t open = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (done[i]) continue;
      const MonicValue v = eval_monic(c, z[i]);
      if (std::abs(v.q) <= v.bound) {
        done[i] = 1;
        continue;
      }
      ++open;
      Complex s(0.0);
      for (std::size_t j = 0; j < d; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      const Complex ratio = v.q / v.dq;
      const Complex step = ratio / (1.0 - ratio * s);
      if (!detail::finite(step)) return false;
      z[i] -= step;
      if (std::abs(step) <= 4.0 * kUnit * std::abs(z[i])) done[i] = 1;
    }
    if (open == 0) return true;
  }
  return false;
}

std::vector<Complex> circle_start(const std::vector<Complex>& c) {
  const std::size_t d = c.size();
  double r = 0.0;
  for (std::size_t k = 1; k <= d; ++k) r = std::max(r, std::pow(std::abs(c[d - k]), 1.0 / double(k)));
  r = std::max(2.0 * r, 1e-3);
  std::vector<Complex> z(d);
  for (std::size_t k = 0; k < d; ++k) z[k] = std::polar(r, kTwoPi * double(k) / double(d) + 0.4);
  return z;
}

double max_over(const std::vector<double>& values, const std::vector<Complex>& points, Complex& where) {
  double best = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > best) {
      best = values[i];
      where = points[i];
    }
  }
  return best;
}

// sup over net of g, with the maximizing point.
double sampled_sup(const ModelSet& K, const std::vector<Complex>& net, Complex& where) {
  std::vector<double> values(net.size());
  parallel_for(net.size(), [&](std::size_t i) { values[i] = green_model(K, net[i]); });
  return max_over(values, net, where);
}

void append_circle(std::vector<Complex>& out, Complex c, double r, int m) {
  for (int k = 0; k < m; ++k) out.push_back(c + std::polar(r, kTwoPi * k / m));
}

void append_ellipse(std::vector<Complex>& out, double R, int m) {
  for (int k = 0; k < m; ++k) {
    const Complex w = std::polar(R, kTwoPi * k / m);
    out.push_back(0.5 * (w + 1.0 / w));
  }
}

void append_segment(std::vector<Complex>& out, int m) {
  for (int k = 0; k <= m; ++k) out.push_back(Complex(-1.0 + 2.0 * k / m, 0.0));
}

}  // namespace

std::vector<Complex> solve_preimage(const Poly& f, Complex b, const std::vector<Complex>& start) {
  const int d = f.degree();
  if (d < 1) throw ValidationError("solve_preimage needs a non-constant map");
  const Complex lead = f.leading();
  std::vector<Complex> c(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) c[j] = f.coeffs()[j] / lead;
  c[0] -= detail::ldexp(b, -f.scale_exponent()) / lead;
  for (const auto& v : c)
    if (!detail::finite(v)) throw MagnitudeOverflow("preimage equation leaves the double range");
  if (d == 1) return {-c[0]};

  std::vector<Complex> z = start.size() == static_cast<std::size_t>(d) ? start : circle_start(c);
  if (!aberth(c, z, 50)) {
    z = circle_start(c);
    aberth(c, z, 500);
  }
  return z;
}

std::vector<Complex> boundary_net(const ModelSet& K, int samples) {
  if (samples < 4) throw ValidationError("net needs at least 4 samples");
  return std::visit(
      overloaded{
          [&](const ModelSet::Disk& d) {
            std::vector<Complex> out;
            append_circle(out, d.center, d.radius, samples);
            return out;
          },
          [&](const ModelSet::Segment&) {
            std::vector<Complex> out;
            append_segment(out, samples);
            return out;
          },
          [&](const ModelSet::Ellipse& e) {
            std::vector<Complex> out;
            append_ellipse(out, e.R, samples);
            return out;
          },
          [&](const ModelSet::Preimage& p) {
            const std::vector<Complex> inner = boundary_net(*p.inner, samples);
            const std::size_t d = static_cast<std::size_t>(p.map.degree());
            std::vector<Complex> out(inner.size() * d);
            const std::size_t chunks = (inner.size() + kChunk - 1) / kChunk;
            parallel_for(chunks, [&](std::size_t ch) {
              std::vector<Complex> roots;
              const std::size_t end = std::min(inner.size(), (ch + 1) * kChunk);
              for (std::size_t i = ch * kChunk; i < end; ++i) {
                roots = solve_preimage(p.map, inner[i], roots);
                std::copy(roots.begin(), roots.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
              }
            });
            return out;
          },
      },
      K.variant());
}

std::vector<Complex> model_net(const ModelSet& K, int samples) {
  std::vector<Complex> out = boundary_net(K, samples);
  const int ring = std::max(4, samples / 4);
  std::visit(overloaded{
                 [&](const ModelSet::Disk& d) {
                   out.push_back(d.center);
                   for (int j = 1; j < 4; ++j) append_circle(out, d.center, d.radius * j / 4.0, ring);
                 },
                 [&](const ModelSet::Segment&) {},
                 [&](const ModelSet::Ellipse& e) {
                   append_segment(out, ring);
                   for (int j = 1; j < 4; ++j) append_ellipse(out, std::pow(e.R, j / 4.0), ring);
                 },
                 [&](const ModelSet::Preimage&) {},
             },
             K.variant());
  return out;
}

std::vector<Complex> fill_net(Complex center, double radius, int side) {
  if (side < 2) throw ValidationError("fill net side must be >= 2");
  if (!(radius > 0.0)) throw ValidationError("fill net radius must be positive");
  std::vector<Complex> out;
  const double h = 2.0 * radius / (side - 1);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const Complex off(-radius + i * h, -radius + j * h);
      if (std::abs(off) <= radius * (1.0 + 1e-12)) out.push_back(center + off);
    }
  }
  return out;
}

namespace {

double gamma_once(const ModelSet& E, const ModelSet& F, int samples, Complex& where) {
  Complex wa, wb;
  const double a = sampled_sup(F, model_net(E, samples), wa);
  const double b = sampled_sup(E, model_net(F, samples), wb);
  where = a >= b ? wa : wb;
  return std::max(a, b);
}

}  // namespace

KlimekEstimate gamma_models(const ModelSet& E, const ModelSet& F, int samples, bool refine) {
  KlimekEstimate out;
  if (E == F) return out;
  Complex where;
  const double coarse = gamma_once(E, F, samples, where);
  out.lower = coarse;
  out.samples = samples;
  out.argmax = where;
  if (refine) {
    out.lower = gamma_once(E, F, 4 * samples, where);
    out.samples = 4 * samples;
    out.argmax = where;
    out.refine_delta = std::fabs(out.lower - coarse);
  }
  return out;
}

KlimekEstimate gamma_nonauto(const SequencePrefix& prefix, const ModelSet& E, std::size_t n,
                             std::size_t m, const std::vector<Complex>& net) {
  if (n == 0 || m == 0) throw ValidationError("gamma_nonauto indices must be >= 1");
  KlimekEstimate out;
  out.samples = static_cast<int>(net.size());
  if (n == m) return out;
  const std::size_t top = std::max(n, m);
  if (top > prefix.size()) throw ValidationError("gamma_nonauto index exceeds the materialized prefix");
  OrbitOptions opts;
  opts.target = E;
  opts.track_error = false;
  std::vector<double> diff(net.size());
  parallel_for(net.size(), [&](std::size_t i) {
    const std::vector<double> tr = green_trace(prefix, net[i], top, opts);
    diff[i] = std::fabs(tr[n - 1] - tr[m - 1]);
  });
  out.lower = max_over(diff, net, out.argmax);
  return out;
}

KlimekEstimate gamma_nonauto(const PolySequence& seq, const ModelSet& E, std::size_t n, std::size_t m,
                             const std::vector<Complex>& net) {
  if (n == 0 || m == 0) throw ValidationError("gamma_nonauto indices must be >= 1");
  return gamma_nonauto(SequencePrefix(seq, std::max(n, m)), E, n, m, net);
}

double tail_constant(const PolySequence& seq, const ModelSet& E, std::size_t n_max, int samples) {
  if (n_max < 2) throw ValidationError("tail_constant needs n_max >= 2");
  double C = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const ModelSet pre = ModelSet::preimage(E, seq.get(n + 1));
    C = std::max(C, gamma_models(pre, E, samples, false).lower);
  }
  return C;
}

ContractionResult contraction_check(const Poly& P, const ModelSet& E, const ModelSet& F, int samples) {
  if (P.degree() < 2) throw ValidationError("contraction_check needs deg P >= 2");
  const KlimekEstimate den = gamma_models(E, F, samples);
  if (!(den.lower > 0.0)) throw ValidationError("Gamma(E, F) is zero; the contraction ratio is undefined");
  const KlimekEstimate num = gamma_models(ModelSet::preimage(E, P), ModelSet::preimage(F, P), samples);
  ContractionResult out;
  out.numerator = num.lower;
  out.denominator = den.lower;
  out.ratio = num.lower / den.lower;
  out.expected = 1.0 / P.degree();
  out.slack = (num.refine_delta + out.ratio * den.refine_delta) / den.lower;
  return out;
}

std::vector<TableRow> convergence_table(const PolySequence& seq, const ModelSet& E,
                                        const std::vector<std::size_t>& n_list,
                                        const TableOptions& options) {
  if (n_list.empty()) throw ValidationError("convergence_table needs at least one index");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0) throw ValidationError("table indices must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ValidationError("table indices must be increasing");
  }
  if (!(options.escape_radius > 0.0)) throw ValidationError("escape radius must be positive");
  const std::size_t top = n_list.back() + 1;
  const SequencePrefix prefix(seq, top);
  OrbitOptions opts;
  opts.target = E;
  opts.track_error = false;

  const std::vector<Complex> net = fill_net(Complex(0), options.escape_radius, options.net_side);
  std::vector<std::vector<double>> traces(net.size());
  parallel_for(net.size(), [&](std::size_t i) { traces[i] = green_trace(prefix, net[i], top, opts); });

  const double R = options.escape_radius;
  std::vector<TableRow> rows;
  for (const std::size_t n : n_list) {
    TableRow row;
    row.n = n;
    const DegreeLedger& ledger = prefix.ledger(n);
    row.log_D = ledger.log_D;
    row.D_exact = ledger.D_exact;
    for (const auto& tr : traces) row.gamma = std::max(row.gamma, std::fabs(tr[n - 1] - tr[n]));
    if (options.include_cap) {
      const CapacityEstimate cap = capacity_estimate(
          [&](Complex z) { return green_nonauto(prefix, z, n, opts).value; }, {2 * R, 4 * R, 8 * R},
          options.capacity_samples);
      row.cap = cap.value;
      row.cap_spread = cap.spread;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
  char buf[160];
  os << "n,logD,gamma,cap\n";
  for (const auto& r : rows) {
    if (r.cap)
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.n, r.log_D, r.gamma, *r.cap);
    else
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,\n", r.n, r.log_D, r.gamma);
    os << buf;
  }
}

}  // namespace nonauto
