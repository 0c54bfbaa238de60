#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "nonauto/green.hpp"
#include "nonauto/sequences.hpp"

namespace nonauto {

/// Sampled lower estimate of Gamma(E, F) = sup |g_E - g_F|.
struct KlimekEstimate {
  double lower = 0.0;
  int samples = 0;
  /// |estimate at 4x samples - estimate at samples|; 0 when not refined.
  double refine_delta = 0.0;
  Complex argmax{};
};

inline constexpr int kDefaultNetSamples = 1024;

/// Roots of f(z) = b, by Aberth iteration.  `start` (size deg f) warm-starts
/// the iteration; pass empty for the default circle start.
std::vector<Complex> solve_preimage(const Poly& f, Complex b, const std::vector<Complex>& start = {});

/// Points whose hull contains the boundary of K: circles, ellipse curves, a uniform
/// segment subdivision, or preimages of the inner boundary net.
std::vector<Complex> boundary_net(const ModelSet& K, int samples);
/// boundary_net plus interior rings for the base sets.
std::vector<Complex> model_net(const ModelSet& K, int samples);

/// Points of a square grid with spacing 2 radius / (side - 1) inside |z - center| <= radius.
std::vector<Complex> fill_net(Complex center, double radius, int side);

/// max( sup over a net of E of g_F, sup over a net of F of g_E ).
KlimekEstimate gamma_models(const ModelSet& E, const ModelSet& F, int samples = kDefaultNetSamples,
                            bool refine = true);

/// sup over `net` of |g_{E_n} - g_{E_m}| where g_{E_k} = (1/D_k) g_E o P_k.
KlimekEstimate gamma_nonauto(const PolySequence& seq, const ModelSet& E, std::size_t n, std::size_t m,
                             const std::vector<Complex>& net);
KlimekEstimate gamma_nonauto(const SequencePrefix& prefix, const ModelSet& E, std::size_t n,
                             std::size_t m, const std::vector<Complex>& net);

/// max over 1 <= n <= n_max of the sampled Gamma(p_{n+1}^{-1}(E), E).
double tail_constant(const PolySequence& seq, const ModelSet& E, std::size_t n_max,
                     int samples = 256);

struct ContractionResult {
  double ratio = 0.0;
  double expected = 0.0;  // 1 / deg P
  double numerator = 0.0;
  double denominator = 0.0;
  /// Sampling slack: sum of the refinement deltas relative to the denominator.
  double slack = 0.0;
};

/// Gamma(P^{-1}E, P^{-1}F) / Gamma(E, F).  Throws ValidationError when Gamma(E, F) = 0.
ContractionResult contraction_check(const Poly& P, const ModelSet& E, const ModelSet& F,
                                    int samples = kDefaultNetSamples);

struct TableRow {
  std::size_t n = 0;
  double log_D = 0.0;
  std::optional<std::uint64_t> D_exact;
  double gamma = 0.0;  // Gamma(E_n, E_{n+1})
  std::optional<double> cap;
  std::optional<double> cap_spread;
};

struct TableOptions {
  /// Escape radius of the sequence; the fill net covers |z| <= radius.
  double escape_radius = 2.0;
  int net_side = 81;
  int capacity_samples = kCapacitySamples;
  bool include_cap = true;
};

std::vector<TableRow> convergence_table(const PolySequence& seq, const ModelSet& E,
                                        const std::vector<std::size_t>& n_list,
                                        const TableOptions& options = {});

/// CSV with header n,logD,gamma,cap (cap left empty when excluded).
void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);

}  // namespace nonauto
