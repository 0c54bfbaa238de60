#include "nonauto/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "nonauto/error.hpp"
#include "nonauto/parallel.hpp"

namespace nonauto {

void RasterSpec::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) throw ValidationError("raster window must have x_min < x_max and y_min < y_max");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max))
    throw ValidationError("raster window must be finite");
  if (width < 1 || height < 1) throw ValidationError("raster size must be positive");
  if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
  if (!(escape_radius > 0.0) || !std::isfinite(escape_radius)) throw ValidationError("escape radius must be positive");
}

Complex RasterSpec::pixel(int i, int j) const {
  const double dx = (x_max - x_min) / width;
  const double dy = (y_max - y_min) / height;
  const double xc = 0.5 * (x_min + x_max);
  const double yc = 0.5 * (y_min + y_max);
  return {xc + (i - 0.5 * (width - 1)) * dx, yc + (0.5 * (height - 1) - j) * dy};
}

bool Rect::contains(const ScaledComplex& w) const {
  const auto z = w.to_complex();
  return z && z->real() >= x_min && z->real() <= x_max && z->imag() >= y_min && z->imag() <= y_max;
}

double Rect::containment_radius() const {
  return std::hypot(std::max(std::fabs(x_min), std::fabs(x_max)), std::max(std::fabs(y_min), std::fabs(y_max)));
}

std::size_t Raster::count_in() const {
  return static_cast<std::size_t>((values.array() == 0.0).count());
}

namespace {

template <typename PixelFn>
Raster rasterize(const RasterSpec& spec, RasterKind kind, PixelFn&& fn) {
  spec.validate();
  Raster r{spec, kind, RasterMatrix(spec.height, spec.width)};
  parallel_for(static_cast<std::size_t>(spec.height), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < spec.width; ++i) r.values(j, i) = fn(spec.pixel(i, j));
  });
  return r;
}

}  // namespace

Raster raster_membership(const PolySequence& seq, const RasterSpec& spec) {
  spec.validate();
  const SequencePrefix prefix(seq, spec.n_steps);
  return rasterize(spec, RasterKind::membership, [&](Complex z) {
    const OrbitResult o = orbit_bounded(prefix, z, spec.n_steps, spec.escape_radius);
    return o.bounded ? 0.0 : static_cast<double>(*o.escaped_at);
  });
}

Raster raster_preimage(const PolySequence& seq, const RasterSpec& spec, const PreimageTarget& target) {
  spec.validate();
  const double reach = std::visit([](const auto& t) { return t.containment_radius(); }, target);
  if (reach > spec.escape_radius)
    throw ValidationError("preimage target must lie inside the escape disk");
  const SequencePrefix prefix(seq, spec.n_steps);
  const double log_R = std::log(spec.escape_radius);
  return rasterize(spec, RasterKind::membership, [&](Complex z) {
    Orbit orbit(prefix, z);
    for (std::size_t k = 1; k <= spec.n_steps; ++k) {
      orbit.step();
      if (orbit.log_abs() > log_R) return static_cast<double>(k);
    }
    const ScaledComplex w = *orbit.scaled_point();
    const bool in = std::visit(
        [&](const auto& t) {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Rect>)
            return t.contains(w);
          else
            return green_model_scaled(t, w) == 0.0;
        },
        target);
    return in ? 0.0 : static_cast<double>(spec.n_steps);
  });
}

Raster raster_green(const PolySequence& seq, const RasterSpec& spec, const ModelSet& target) {
  spec.validate();
  const SequencePrefix prefix(seq, spec.n_steps);
  OrbitOptions opts;
  opts.escape_radius = spec.escape_radius;
  opts.target = target;
  opts.track_error = false;
  return rasterize(spec, RasterKind::potential,
                   [&](Complex z) { return green_nonauto(prefix, z, spec.n_steps, opts).value; });
}

Raster raster_green(const ModelSet& K, const RasterSpec& spec) {
  return rasterize(spec, RasterKind::potential, [&](Complex z) { return green_model(K, z); });
}

Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gray_levels(const Raster& r) {
  Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(r.values.rows(),
                                                                                    r.values.cols());
  if (r.kind == RasterKind::membership) {
    const double n = static_cast<double>(r.spec.n_steps);
    out = r.values.unaryExpr([n](double k) -> std::uint16_t {
      if (k == 0.0) return 0;
      const double level = std::round(65535.0 * (1.0 - (k - 1.0) / n));
      return static_cast<std::uint16_t>(std::clamp(level, 1.0, 65535.0));
    });
    return out;
  }
  const double lo = r.values.minCoeff();
  const double hi = r.values.maxCoeff();
  if (!(hi > lo)) {
    out.setZero();
    return out;
  }
  out = r.values.unaryExpr([lo, hi](double v) -> std::uint16_t {
    return static_cast<std::uint16_t>(std::lround(65535.0 * (v - lo) / (hi - lo)));
  });
  return out;
}

namespace {

std::string normalization_comment(const Raster& r) {
  char buf[200];
  if (r.kind == RasterKind::membership) {
    std::snprintf(buf, sizeof buf, "# membership: in=0, escaped at step k -> 65535*(1-(k-1)/%zu)",
                  r.spec.n_steps);
  } else {
    std::snprintf(buf, sizeof buf, "# potential: min %.17g -> 0, max %.17g -> 65535", r.values.minCoeff(),
                  r.values.maxCoeff());
  }
  return buf;
}

}  // namespace

void write_pgm(const Raster& r, const std::string& path) {
  const auto levels = gray_levels(r);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "P5\n" << normalization_comment(r) << "\n" << levels.cols() << " " << levels.rows() << "\n65535\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(levels.size()) * 2);
  for (Eigen::Index k = 0; k < levels.size(); ++k) {
    bytes[2 * k] = static_cast<unsigned char>(levels.data()[k] >> 8);
    bytes[2 * k + 1] = static_cast<unsigned char>(levels.data()[k] & 0xff);
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for '" + path + "'");
}

void write_png(const Raster& r, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ValidationError("PNG bit depth must be 8 or 16");
  const auto levels = gray_levels(r);
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed for '" + path + "'");
  }
  const int width = static_cast<int>(levels.cols());
  const int height = static_cast<int>(levels.rows());
  const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
  std::vector<png_byte> row(stride);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed for '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const std::uint16_t v = levels(j, i);
      if (bit_depth == 16) {
        row[2 * i] = static_cast<png_byte>(v >> 8);
        row[2 * i + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        row[i] = static_cast<png_byte>(v >> 8);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_csv(const Raster& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "x,y,value\n";
  char buf[96];
  for (int j = 0; j < r.values.rows(); ++j) {
    for (int i = 0; i < r.values.cols(); ++i) {
      const Complex z = r.spec.pixel(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", z.real(), z.imag(), r.values(j, i));
      os << buf;
    }
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace nonauto
