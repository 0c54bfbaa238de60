#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nonauto/klimek.hpp"

using namespace nonauto;

TEST_CASE("preimage root solver") {
  const Poly t = chebyshev_minimal(30);
  const std::vector<Complex> roots = solve_preimage(t, Complex(0.3, 0.9));
  REQUIRE(roots.size() == 30);
  for (const Complex& z : roots) CHECK(std::abs(eval(t, z) - Complex(0.3, 0.9)) <= 1e-9);
  const std::vector<Complex> sq = solve_preimage(Poly::monomial(2, Complex(1), 4), Complex(64));
  REQUIRE(sq.size() == 2);
  for (const Complex& z : sq) CHECK(std::abs(z) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(solve_preimage(Poly{Complex(1), Complex(2)}, Complex(5)) == std::vector<Complex>{Complex(2)});
}

TEST_CASE("nets") {
  CHECK(boundary_net(ModelSet::unit_disk(), 64).size() == 64);
  CHECK(boundary_net(ModelSet::segment(), 64).size() == 65);
  CHECK(model_net(ModelSet::unit_disk(), 64).size() == 64 + 1 + 3 * 16);
  for (const Complex& z : boundary_net(ModelSet::ellipse(2.0), 128))
    CHECK(std::fabs(green_model(ModelSet::segment(), z) - std::log(2.0)) <= 1e-12);
  const ModelSet pre = ModelSet::preimage(ModelSet::unit_disk(), chebyshev_minimal(4));
  const std::vector<Complex> net = boundary_net(pre, 100);
  CHECK(net.size() == 400);
  for (const Complex& z : net) CHECK(std::fabs(std::abs(eval(chebyshev_minimal(4), z)) - 1.0) <= 1e-10);
  for (const Complex& z : fill_net(Complex(1, 1), 2.0, 21)) CHECK(std::abs(z - Complex(1, 1)) <= 2.0 + 1e-12);
}

TEST_CASE("gamma_models closed forms") {
  for (double R : {2.0, 4.0, 10.0}) {
    const KlimekEstimate e = gamma_models(ModelSet::unit_disk(), ModelSet::disk(0, R));
    CHECK(e.lower == doctest::Approx(std::log(R)).epsilon(1e-12));
    CHECK(e.refine_delta >= 0.0);
  }
  const KlimekEstimate s = gamma_models(ModelSet::unit_disk(), ModelSet::segment());
  CHECK(std::fabs(s.lower - std::log(1 + std::sqrt(2.0))) <= 1e-6);
  CHECK(std::fabs(std::fabs(s.argmax.imag()) - 1.0) <= 1e-9);
  for (const ModelSet& K : {ModelSet::unit_disk(), ModelSet::segment(), ModelSet::ellipse(1.7),
                            ModelSet::preimage(ModelSet::segment(), chebyshev_T(3))})
    CHECK(gamma_models(K, K, 256).lower == 0.0);
}

TEST_CASE("gamma_models symmetry and triangle inequality") {
  const std::vector<ModelSet> sets = {ModelSet::disk(0, 1.0), ModelSet::disk(Complex(0.5, 0.2), 1.5),
                                      ModelSet::disk(Complex(-1, 0), 0.7), ModelSet::segment(),
                                      ModelSet::ellipse(2.0)};
  for (const auto& A : sets)
    for (const auto& B : sets) CHECK(gamma_models(A, B, 256).lower == gamma_models(B, A, 256).lower);
  const std::vector<ModelSet> disks(sets.begin(), sets.begin() + 3);
  for (const auto& A : disks)
    for (const auto& B : disks)
      for (const auto& C : disks) {
        const KlimekEstimate ab = gamma_models(A, B, 256), bc = gamma_models(B, C, 256), ac = gamma_models(A, C, 256);
        CHECK(ac.lower <= ab.lower + bc.lower + ab.refine_delta + bc.refine_delta + ac.refine_delta + 1e-9);
      }
}

TEST_CASE("capacity continuity") {
  const std::vector<ModelSet> sets = {ModelSet::disk(0, 1.0), ModelSet::disk(0, 3.0), ModelSet::segment(),
                                      ModelSet::ellipse(1.5), ModelSet::ellipse(4.0),
                                      ModelSet::disk(Complex(0.3, 0.3), 0.8)};
  for (const auto& A : sets)
    for (const auto& B : sets)
      CHECK(std::fabs(std::log(A.capacity()) - std::log(B.capacity())) <= gamma_models(A, B, 256).lower + 1e-6);
}

TEST_CASE("contraction_check") {
  for (int d : {2, 3, 5}) {
    const ContractionResult r = contraction_check(Poly::monomial(d), ModelSet::unit_disk(), ModelSet::disk(0, 4.0));
    CHECK(r.ratio == doctest::Approx(1.0 / d).epsilon(1e-9));
    CHECK(r.expected == 1.0 / d);
  }
  const ContractionResult r = contraction_check(Poly::monomial(2), ModelSet::unit_disk(), ModelSet::disk(0, 4.0));
  CHECK(r.numerator == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.denominator == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  const ContractionResult t = contraction_check(chebyshev_T(2), ModelSet::segment(), ModelSet::ellipse(2.0), 512);
  CHECK(t.ratio <= 0.5 + t.slack + 1e-6);
  CHECK_THROWS_AS(contraction_check(Poly::monomial(2), ModelSet::segment(), ModelSet::segment()), ValidationError);
  CHECK_THROWS_AS(contraction_check(Poly::identity(), ModelSet::segment(), ModelSet::unit_disk()), ValidationError);
}

TEST_CASE("gamma_nonauto") {
  const std::vector<Complex> net = fill_net(Complex(0), 3.0, 41);
  const PolySequence power = builtin(SequenceKind::power, DegreePattern::constant(2));
  CHECK(gamma_nonauto(power, ModelSet::unit_disk(), 2, 9, net).lower <= 1e-14);
  const PolySequence cheb = builtin(SequenceKind::minimal_chebyshev);
  CHECK(gamma_nonauto(cheb, ModelSet::unit_disk(), 5, 5, net).lower == 0.0);
  const SequencePrefix prefix(cheb, 10);
  double prev = gamma_nonauto(prefix, ModelSet::unit_disk(), 1, 10, net).lower;
  for (std::size_t n = 2; n <= 7; ++n) {
    const double g = gamma_nonauto(prefix, ModelSet::unit_disk(), n, 10, net).lower;
    CHECK(g <= 0.5 * prev);
    prev = g;
  }
  CHECK_THROWS_AS(gamma_nonauto(cheb, ModelSet::unit_disk(), 0, 3, net), ValidationError);
}

TEST_CASE("tail_constant") {
  CHECK(tail_constant(builtin(SequenceKind::power, DegreePattern::constant(3)), ModelSet::unit_disk(), 10) <= 1e-14);
  const PolySequence cheb = builtin(SequenceKind::minimal_chebyshev);
  const double c25 = tail_constant(cheb, ModelSet::unit_disk(), 25);
  const double c50 = tail_constant(cheb, ModelSet::unit_disk(), 50);
  CHECK(std::isfinite(c50));
  CHECK(std::fabs(c50 - c25) <= 1e-3 * c50);
  const PolySequence npn = builtin(SequenceKind::n_pow_n);
  const double a = tail_constant(npn, ModelSet::unit_disk(), 5);
  const double b = tail_constant(npn, ModelSet::unit_disk(), 20);
  CHECK(b > a + 1.0);
  CHECK(b == doctest::Approx(std::log(21.0)).epsilon(1e-9));
  CHECK_THROWS_AS(tail_constant(cheb, ModelSet::unit_disk(), 1), ValidationError);
}

TEST_CASE("convergence_table") {
  TableOptions opts;
  opts.escape_radius = 2.9;
  opts.net_side = 41;
  const auto rows = convergence_table(builtin(SequenceKind::minimal_chebyshev), ModelSet::unit_disk(),
                                      {1, 2, 3, 4, 5, 6, 7, 8}, opts);
  REQUIRE(rows.size() == 8);
  CHECK(std::fabs(*rows.back().cap - 1.0) <= 1e-3);
  CHECK(*rows.back().cap_spread < 1e-4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].gamma <= rows[i - 1].gamma);
  double bounded = 0.0;
  for (const auto& r : rows) bounded = std::max(bounded, r.gamma * std::exp(r.log_D));
  CHECK(bounded < 10.0);

  opts.escape_radius = std::exp(1.0);
  const auto power = convergence_table(builtin(SequenceKind::power, DegreePattern::constant(2)),
                                       ModelSet::unit_disk(), {1, 2, 3}, opts);
  for (const auto& r : power) {
    CHECK(r.gamma <= 1e-14);
    CHECK(*r.cap == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::ostringstream os;
  write_table_csv(os, power);
  CHECK(os.str().rfind("n,logD,gamma,cap\n1,", 0) == 0);
  CHECK_THROWS_AS(convergence_table(builtin(SequenceKind::minimal_chebyshev), ModelSet::unit_disk(), {3, 2}),
                  ValidationError);
}

TEST_CASE("convergence_table for classical Chebyshev tracks the Robin constant") {
  TableOptions opts;
  opts.escape_radius = 3.0;
  opts.net_side = 21;
  const auto rows = convergence_table(builtin(SequenceKind::classical_chebyshev, DegreePattern::constant(2)),
                                      ModelSet::unit_disk(), {1, 3, 6}, opts);
  for (const auto& r : rows) {
    const double D = std::exp(r.log_D);
    const double expected = std::exp(-std::log(2.0) * (D - 1) / D);
    CHECK(*r.cap == doctest::Approx(expected).epsilon(1e-6));
  }
}
