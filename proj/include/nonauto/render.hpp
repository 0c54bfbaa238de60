#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "nonauto/green.hpp"
#include "nonauto/sequences.hpp"

namespace nonauto {

struct RasterSpec {
  double x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0;
  int width = 256, height = 256;
  std::size_t n_steps = 64;
  double escape_radius = 2.0;

  void validate() const;
  /// Center of pixel (column i, row j); row 0 is the top (y_max) edge.  Offsets are
  /// taken from the window center, so symmetric windows mirror exactly.
  Complex pixel(int i, int j) const;
};

/// Axis-aligned closed rectangle target for preimage rasters.
struct Rect {
  double x_min, x_max, y_min, y_max;
  bool contains(const ScaledComplex& w) const;
  double containment_radius() const;
};

using PreimageTarget = std::variant<ModelSet, Rect>;

enum class RasterKind { membership, potential };

using RasterMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Membership rasters store 0 for "in" and the escape step k >= 1 for "out";
/// potential rasters store the field value.
struct Raster {
  RasterSpec spec;
  RasterKind kind = RasterKind::potential;
  RasterMatrix values;

  std::size_t count_in() const;
};

/// Pixel in when |w_k| <= escape_radius for k = 1..n_steps.
Raster raster_membership(const PolySequence& seq, const RasterSpec& spec);
/// Pixel in when P_N(z) lies in the target; the target must fit inside the escape disk
/// so an escaped orbit certifies "out".
Raster raster_preimage(const PolySequence& seq, const RasterSpec& spec, const PreimageTarget& target);
/// (1/D_N) g_E(P_N(z)) per pixel.
Raster raster_green(const PolySequence& seq, const RasterSpec& spec, const ModelSet& target);
/// Closed-form g_K per pixel.
Raster raster_green(const ModelSet& K, const RasterSpec& spec);

/// 16-bit gray levels: min-max normalized potentials, or 0 for "in" and
/// 65535 (1 - (k - 1) / n_steps), at least 1, for pixels escaping at step k.
Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gray_levels(const Raster& r);

void write_pgm(const Raster& r, const std::string& path);
/// bit_depth 8 or 16.
void write_png(const Raster& r, const std::string& path, int bit_depth = 16);
/// Header x,y,value; one row per pixel in raster order.
void write_csv(const Raster& r, const std::string& path);

}  // namespace nonauto
