// Acceptance gate: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance [--only N]

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nonauto/green.hpp"
#include "nonauto/klimek.hpp"
#include "nonauto/parallel.hpp"
#include "nonauto/render.hpp"
#include "nonauto/sequences.hpp"

using namespace nonauto;

namespace {

struct Outcome {
  bool passed = true;
  std::vector<std::string> lines;
  // Serialized numeric results, compared byte-for-byte by the determinism criterion.
  std::string digest;

  void check(bool ok, const std::string& what) {
    passed = passed && ok;
    lines.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  // Extra diagnostics that do not decide the criterion.
  void note(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "info  " : "info! ") + what);
  }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void append_digest(std::string& digest, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a;", v);
  digest += buf;
}

void append_digest(std::string& digest, const Raster& r) {
  digest.append(reinterpret_cast<const char*>(r.values.data()),
                static_cast<std::size_t>(r.values.size()) * sizeof(double));
}

bool mirror_symmetric(const Raster& r) {
  return r.values == r.values.rowwise().reverse().eval() && r.values == r.values.colwise().reverse().eval();
}

double minimal_chebyshev_escape_radius() {
  static const double R = escape_radius_search(builtin(SequenceKind::minimal_chebyshev));
  return R;
}

// ---------------------------------------------------------------------------

Outcome chebyshev_algebra() {
  Outcome o;
  Stopwatch sw;
  bool compose_ok = true;
  int pairs = 0;
  for (int m = 1; m <= 64; ++m)
    for (int k = 1; m * k <= 64; ++k, ++pairs)
      compose_ok = compose_ok && approx_equal(compose(chebyshev_T(m), chebyshev_T(k)), chebyshev_T(m * k), 1e-9, 0.0);
  o.check(compose_ok, fmt("compose(T_m, T_k) = T_mk, relative 1e-9, %d pairs with mk <= 64", pairs));
  bool coeff_ok = true, minimal_ok = true;
  for (int n = 2; n <= 30; ++n) {
    const Poly T = chebyshev_T(n);
    coeff_ok = coeff_ok && T.coefficient(n - 1) == Complex(0) &&
               T.coefficient(n - 2) == Complex(-n * std::ldexp(1.0, n - 3));
    minimal_ok = minimal_ok && chebyshev_minimal(n).coefficient(n - 2) == Complex(-n / 4.0);
  }
  o.check(coeff_ok, "T_n: coefficient of z^{n-1} is 0 and of z^{n-2} is -n 2^{n-3}, exactly, 2 <= n <= 30");
  o.check(minimal_ok, "t_n: coefficient of z^{n-2} is -n/4, exactly, 2 <= n <= 30");
  const double t = sw.seconds();
  o.check(t < 1.0, fmt("runtime %.3f s < 1 s", t));
  return o;
}

Outcome closed_form_potentials() {
  Outcome o;
  Stopwatch sw;
  const double ln2 = std::log(2.0);
  const double g1 = green_model(ModelSet::unit_disk(), 2.0);
  const double g2 = green_model(ModelSet::segment(), 1.25);
  o.check(std::fabs(g1 - ln2) <= 1e-10, fmt("g_disk(0,1)(2) = %.15f vs ln 2", g1));
  o.check(std::fabs(g2 - ln2) <= 1e-10, fmt("g_[-1,1](5/4) = %.15f vs ln 2", g2));
  double worst = 0.0;
  for (int k = 0; k < 1024; ++k) {
    const Complex w = std::polar(2.0, 2 * std::numbers::pi * k / 1024);
    worst = std::max(worst, std::fabs(green_model(ModelSet::ellipse(2.0), 0.5 * (w + 1.0 / w))));
  }
  o.check(worst <= 1e-10, fmt("g_E2 on 1024 boundary points: max %.3g", worst));
  for (double R : {0.5, 2.0, 5.0}) {
    const CapacityEstimate c = capacity_estimate(ModelSet::disk(0, R));
    o.check(std::fabs(c.value - R) <= 1e-6, fmt("cap disk(0,%g) = %.12f", R, c.value));
  }
  const CapacityEstimate s = capacity_estimate(ModelSet::segment());
  o.check(std::fabs(s.value - 0.5) <= 1e-6, fmt("cap [-1,1] = %.12f", s.value));
  for (double R : {2.0, 3.0}) {
    const CapacityEstimate e = capacity_estimate(ModelSet::ellipse(R));
    o.check(std::fabs(e.value - R / 2) <= 1e-6, fmt("cap E_%g = %.12f", R, e.value));
  }
  const double t = sw.seconds();
  o.check(t < 1.0, fmt("runtime %.3f s < 1 s", t));
  return o;
}

std::vector<Complex> annulus_net() {
  std::vector<Complex> net;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 10; ++j)
      net.push_back(std::polar(1.1 + 1.9 * i / 19.0, 2 * std::numbers::pi * (j + 0.5) / 10.0));
  return net;
}

double sup_against_segment(const SequencePrefix& prefix, const std::vector<Complex>& net, std::size_t n) {
  OrbitOptions opts;
  double sup = 0.0;
  for (const Complex& z : net)
    sup = std::max(sup, std::fabs(green_nonauto(prefix, z, n, opts).value - green_model(ModelSet::segment(), z)));
  return sup;
}

Outcome main_theorem_convergence() {
  Outcome o;
  Stopwatch sw;
  const std::vector<Complex> net = annulus_net();
  const SequencePrefix prefix(builtin(SequenceKind::minimal_chebyshev), 40);
  std::vector<double> sups;
  std::string row;
  for (std::size_t n : {4u, 6u, 8u, 10u, 12u}) {
    sups.push_back(sup_against_segment(prefix, net, n));
    append_digest(o.digest, sups.back());
    row += fmt(" n=%zu:%.6g", n, sups.back());
  }
  o.check(sups.back() <= 1e-6, fmt("minimal Chebyshev, sup |g_12 - g_[-1,1]| = %.6g <= 1e-6", sups.back()));
  bool monotone = true;
  for (std::size_t i = 1; i < sups.size(); ++i) monotone = monotone && sups[i] <= sups[i - 1];
  o.check(monotone, "sampled sup non-increasing in n:" + row);
  const double t = sw.seconds();
  o.check(t < 5.0, fmt("runtime %.3f s < 5 s", t));

  // The limit set of (t_n) has capacity 1, so it cannot be [-1,1] (capacity 1/2).
  OrbitOptions opts;
  double self = 0.0, robin_gap = 0.0;
  for (const Complex& z : net) {
    const double g12 = green_nonauto(prefix, z, 12, opts).value;
    self = std::max(self, std::fabs(g12 - green_nonauto(prefix, z, 40, opts).value));
  }
  const Complex far(1e6, 1e6);
  robin_gap = green_model(ModelSet::segment(), far) - green_nonauto(prefix, far, 12, opts).value;
  o.note(self <= 1e-6, fmt("minimal Chebyshev self-convergence sup |g_12 - g_40| = %.3g", self));
  o.note(std::fabs(robin_gap - std::log(2.0)) <= 1e-6,
         fmt("g_[-1,1] - g_12 at z = 1e6(1+i): %.9f (ln 2 = %.9f)", robin_gap, std::log(2.0)));
  const SequencePrefix classical(builtin(SequenceKind::classical_chebyshev), 12);
  const double csup = sup_against_segment(classical, net, 12);
  o.note(csup <= 1e-6, fmt("classical Chebyshev T_n, sup |g_12 - g_[-1,1]| = %.3g", csup));
  return o;
}

Outcome limit_capacity() {
  Outcome o;
  TableOptions opts;
  opts.escape_radius = minimal_chebyshev_escape_radius();
  const auto rows = convergence_table(builtin(SequenceKind::minimal_chebyshev), ModelSet::unit_disk(),
                                      {1, 2, 3, 4, 5, 6, 7, 8}, opts);
  for (const auto& r : rows)
    o.lines.push_back(fmt("      n=%zu logD=%.4f gamma=%.3e cap=%.12f spread=%.2e", r.n, r.log_D, r.gamma, *r.cap,
                          *r.cap_spread));
  const TableRow& last = rows.back();
  o.check(std::fabs(*last.cap - 1.0) <= 1e-3, fmt("cap(E_8) = %.12f within 1e-3 of 1", *last.cap));
  o.check(*last.cap_spread < 1e-4, fmt("probe-radius spread %.3g < 1e-4 (radii 2R,4R,8R, R = %.4f)",
                                       *last.cap_spread, opts.escape_radius));
  return o;
}

Outcome klimek_closed_forms() {
  Outcome o;
  for (double R : {2.0, 4.0, 10.0}) {
    const KlimekEstimate e = gamma_models(ModelSet::unit_disk(), ModelSet::disk(0, R));
    append_digest(o.digest, e.lower);
    o.check(std::fabs(e.lower - std::log(R)) <= 1e-6, fmt("Gamma(disk(0,1), disk(0,%g)) = %.12f vs ln R", R, e.lower));
  }
  // Oracle: dense sampling of the closed form over the unit circle.
  double oracle = 0.0;
  for (int k = 0; k < 1 << 16; ++k)
    oracle = std::max(oracle, green_model(ModelSet::segment(), std::polar(1.0, 2 * std::numbers::pi * k / 65536.0)));
  const KlimekEstimate s = gamma_models(ModelSet::unit_disk(), ModelSet::segment());
  append_digest(o.digest, s.lower);
  o.check(std::fabs(s.lower - oracle) <= 1e-4,
          fmt("Gamma(disk(0,1), [-1,1]) = %.9f vs oracle %.9f (ln(1+sqrt 2) = %.9f)", s.lower, oracle,
              std::log(1 + std::sqrt(2.0))));
  for (int d : {2, 3, 4, 5}) {
    const ContractionResult r = contraction_check(Poly::monomial(d), ModelSet::unit_disk(), ModelSet::disk(0, 4.0));
    append_digest(o.digest, r.ratio);
    o.check(std::fabs(r.ratio - 1.0 / d) <= 1e-6, fmt("contraction ratio for z^%d on disk pair: %.12f", d, r.ratio));
  }
  return o;
}

Outcome toy_properties() {
  Outcome o;
  const PolySequence seq = builtin(SequenceKind::minimal_chebyshev);
  const SequencePrefix prefix(seq, 1000);
  const double R = minimal_chebyshev_escape_radius();
  int bounded = 0;
  for (int k = 0; k <= 100; ++k)
    bounded += orbit_bounded(prefix, Complex(-1.25 + 2.5 * k / 100.0), 1000, R).bounded;
  o.check(bounded == 101, fmt("(a) %d of 101 grid points on [-5/4,5/4] bounded for 1000 steps (R = %.4f)", bounded, R));
  const Complex z0(0, 0.8);
  const bool b = orbit_bounded(prefix, z0, 1000, R).bounded;
  const double g = green_model(ModelSet::ellipse(2.0), z0);
  o.check(b && g > 0.0, fmt("(b) 4i/5 bounded: %s, g_E2(4i/5) = %.6f > 0", b ? "yes" : "no", g));
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const Poly t = chebyshev_minimal(n);
    double mx = 0.0;
    for (int k = 0; k < 4096; ++k) {
      const Complex w = std::polar(2.0, 2 * std::numbers::pi * k / 4096);
      mx = std::max(mx, std::abs(eval(t, 0.5 * (w + 1.0 / w))));
    }
    worst = std::max(worst, std::fabs(mx - (1.0 + std::ldexp(1.0, -2 * n))));
  }
  o.check(worst <= 1e-9, fmt("(c) max |t_n| on boundary of E_2 = 1 + 2^{-2n} for n <= 10, worst error %.3g", worst));
  return o;
}

Outcome degenerate_julia_sets() {
  Outcome o;
  const PolySequence p = builtin(SequenceKind::n_exp_z2);
  const double R = std::exp(1.0) * 1.0001;
  const bool zero = orbit_bounded(p, Complex(0), 60, R).bounded;
  o.check(zero, "n^{2^n} z^2: orbit of 0 bounded for 60 steps");
  bool all_escape = true;
  std::string steps;
  for (const Complex z : {Complex(0.1), Complex(-0.1), Complex(0, 0.1), Complex(0, -0.1)}) {
    const OrbitResult r = orbit_bounded(p, z, 60, R);
    all_escape = all_escape && !r.bounded;
    steps += r.escaped_at ? fmt(" %zu", *r.escaped_at) : std::string(" -");
  }
  o.check(all_escape, "orbits of +-0.1, +-0.1i escape within 60 steps; escape steps:" + steps);
  const PolySequence q = builtin(SequenceKind::z2_minus_1_then_n_exp_z2);
  std::string survivors;
  bool exact = true;
  for (int k = -10; k <= 10; ++k) {
    const double x = k / 10.0;
    const bool b = orbit_bounded(q, Complex(x), 60, R).bounded;
    if (b) survivors += fmt(" %g", x);
    exact = exact && (b == (std::abs(k) == 10));
  }
  o.check(exact, "q-variant on 21-point grid of [-1,1]: bounded exactly at" + survivors);
  return o;
}

Outcome checkers() {
  Outcome o;
  const PolySequence cheb = builtin(SequenceKind::minimal_chebyshev);
  bool p2 = true;
  for (double A : {0.0, 1.0, 5.0, 10.0}) {
    const CheckReport r = check_P2(cheb, A, 60);
    p2 = p2 && !r.passed && r.witness && r.witness->value >= 41.0 / 4.0;
  }
  o.check(p2, "check_P2 fails for minimal Chebyshev at A in {0,1,5,10}, witness ratio >= 41/4 by n_max = 60");
  o.note(true, fmt("ratio |a_{n-2}|/|a_n| of t_41 = %.4f; largest ratio of t_41 = %.4f",
                   std::abs(chebyshev_minimal(41).coefficient(39)), coefficient_ratio(cheb, 41)));
  const CheckReport g = check_guided(cheb, 2.0, 100);
  o.check(g.passed, fmt("check_guided passes for minimal Chebyshev at R = 2, n_max = 100 (margin %.4f)", g.margin));
  const CheckReport bad = check_guided(builtin(SequenceKind::two_pow_neg_n_sq), 2.0, 100);
  o.check(!bad.passed, "check_guided fails for 2^{-n^2} z^n: " + bad.detail);
  const CheckReport f = check_finite_condition(builtin(SequenceKind::n_pow_n), 0, 2.0);
  o.check(!f.passed && f.heuristic,
          fmt("check_finite_condition flags n^n z^n on disk(0,2): sup %.4f, %s", f.sup.value_or(0), f.detail.c_str()));
  return o;
}

Outcome figure_reproduction() {
  Outcome o;
  const PolySequence seq = builtin(SequenceKind::minimal_chebyshev);
  RasterSpec s{-1.5, 1.5, -1, 1, 900, 600, 8, minimal_chebyshev_escape_radius()};
  Stopwatch sw;
  const Raster fig1 = raster_preimage(seq, s, Rect{-1, 1, -0.0005, 0.0005});
  s.n_steps = 5;
  const Raster fig2 = raster_preimage(seq, s, ModelSet::unit_disk());
  s.n_steps = 100;
  const Raster fig3 = raster_preimage(seq, s, ModelSet::unit_disk());
  const double t = sw.seconds();
  o.check(t < 30.0, fmt("three 900x600 renders in %.2f s < 30 s", t));
  for (const Raster* r : {&fig1, &fig2, &fig3}) append_digest(o.digest, *r);
  o.check(mirror_symmetric(fig1) && mirror_symmetric(fig2) && mirror_symmetric(fig3),
          fmt("membership rasters mirror-symmetric in both axes (in-set pixels %zu, %zu, %zu)", fig1.count_in(),
              fig2.count_in(), fig3.count_in()));

  const Raster mem = raster_membership(seq, s);
  o.note(mem.values.cwiseEqual(0.0) == fig3.values.cwiseEqual(0.0),
         "escape-time membership at n = 100 matches the disk preimage raster");

  const ModelSet E = ModelSet::unit_disk();
  const Raster seg = raster_green(ModelSet::segment(), s);
  auto sup_diff = [&](const Raster& a, const Raster& b) {
    double sup = 0.0;
    for (Eigen::Index k = 0; k < a.values.size(); ++k)
      if (seg.values.data()[k] > 0.1) sup = std::max(sup, std::fabs(a.values.data()[k] - b.values.data()[k]));
    return sup;
  };
  s.n_steps = 100;
  const Raster g100 = raster_green(seq, s, E);
  s.n_steps = 5;
  const Raster g5 = raster_green(seq, s, E);
  s.n_steps = 6;
  const Raster g6 = raster_green(seq, s, E);
  append_digest(o.digest, g5);
  append_digest(o.digest, g100);
  const double d5 = sup_diff(g5, g100), d6 = sup_diff(g6, g100);
  o.check(d5 <= 1e-3, fmt("sup |g_5 - g_100| outside the 0.1 sublevel of [-1,1] = %.4g <= 1e-3", d5));
  const double C = tail_constant(seq, E, 50);
  const double bound5 = 2 * C / std::exp(seq.ledger(5).log_D);
  o.note(d5 <= bound5, fmt("the same sup is within the truncation bound 2C/D_5 = %.4g (C = %.6f)", bound5, C));
  o.note(d6 <= 1e-3, fmt("sup |g_6 - g_100| on the same pixels = %.4g", d6));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria();

Outcome determinism() {
  Outcome o;
  const int ids[] = {3, 5, 9};
  for (int id : ids) {
    const auto& c = criteria()[static_cast<std::size_t>(id - 1)];
    std::vector<std::string> digests;
    for (int threads : {1, 4, 4}) {
      set_thread_count(threads);
      digests.push_back(c.run().digest);
    }
    set_thread_count(0);
    const bool same = digests[0] == digests[1] && digests[1] == digests[2] && !digests[0].empty();
    o.check(same, fmt("criterion %d outputs byte-identical over runs with threads 1, 4, 4 (%zu bytes)", id,
                      digests[0].size()));
  }
  return o;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "Chebyshev algebra", chebyshev_algebra},
      {2, "closed-form potentials and capacities", closed_form_potentials},
      {3, "minimal Chebyshev potentials converge to g_[-1,1]", main_theorem_convergence},
      {4, "capacity of the limit set", limit_capacity},
      {5, "Klimek closed forms and contraction ratio", klimek_closed_forms},
      {6, "toy-example properties", toy_properties},
      {7, "degenerate Julia sets", degenerate_julia_sets},
      {8, "checkers", checkers},
      {9, "figure reproduction", figure_reproduction},
      {10, "determinism across thread counts", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Stopwatch sw;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  criterion %2d  %s  (%.2f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.title, sw.seconds());
    for (const auto& line : o.lines) std::printf("      %s\n", line.c_str());
    std::fflush(stdout);
    failed += !o.passed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
