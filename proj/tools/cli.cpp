#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nonauto/error.hpp"
#include "nonauto/green.hpp"
#include "nonauto/klimek.hpp"
#include "nonauto/parallel.hpp"
#include "nonauto/render.hpp"
#include "nonauto/sequences.hpp"

namespace nonauto::cli {

namespace {

using json = nlohmann::json;

constexpr const char* kSequenceHelp =
    "sequence: minimal-chebyshev | classical-chebyshev[:d,...] | power:d[,d...] | n-pow-n | "
    "two-pow-neg-n-sq | n-exp-z2 | z2-minus-1-then-n-exp-z2 | z2-minus-2-then-powers | custom:<file.json>";
constexpr const char* kModelHelp = "model set: disk:r | disk:re,r | disk:re,im,r | segment | ellipse:R";

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string("bad number in ") + what + ": '" + text + "'");
    }
  }
  return out;
}

Complex parse_point(const std::string& text) {
  const auto v = parse_numbers(text, "--z");
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() == 2) return {v[0], v[1]};
  throw ValidationError("--z expects re or re,im");
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  auto to_index = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 1) throw ValidationError("bad index '" + s + "' in --n");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_index(item));
      continue;
    }
    const std::size_t a = to_index(item.substr(0, dots));
    const std::size_t b = to_index(item.substr(dots + 2));
    if (b < a) throw ValidationError("empty range '" + item + "' in --n");
    for (std::size_t k = a; k <= b; ++k) out.push_back(k);
  }
  if (out.empty()) throw ValidationError("--n must list at least one index");
  return out;
}

json point_json(Complex z) { return json::array({z.real(), z.imag()}); }

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ledger_json(const DegreeLedger& l) {
  return {{"n", l.n}, {"log_D", l.log_D}, {"D", l.D_exact ? json(*l.D_exact) : json(nullptr)}};
}

std::string ledger_text(const DegreeLedger& l) {
  std::ostringstream os;
  os << "n=" << l.n << " log_D=" << l.log_D;
  if (l.D_exact) os << " D=" << *l.D_exact;
  return os.str();
}

json report_json(const CheckReport& r) {
  json w = nullptr;
  if (r.witness) w = {{"n", r.witness->n}, {"point", point_json(r.witness->point)}, {"value", r.witness->value}};
  return {{"passed", r.passed}, {"n_from", r.n_from}, {"n_to", r.n_to}, {"margin", r.margin},
          {"sup", nullable(r.sup)}, {"heuristic", r.heuristic}, {"detail", r.detail},
          {"witness", w}};
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

double resolve_radius(const PolySequence& seq, const std::optional<double>& radius, std::size_t n_max) {
  if (radius) return *radius;
  EscapeSearchOptions opts;
  opts.n_max = std::max<std::size_t>(2, n_max);
  return escape_radius_search(seq, opts);
}

struct Common {
  int threads = 0;
  std::uint64_t seed = 0;
};

// -- render -----------------------------------------------------------------

struct RenderArgs {
  std::string seq, model, window = "-2,2,-2,2", size = "512x512", mode = "membership";
  std::string target = "disk:1", format, output;
  std::size_t n = 64;
  std::optional<double> radius;
  int bit_depth = 16;
};

PreimageTarget parse_target(const std::string& text) {
  if (text.rfind("rect:", 0) == 0) {
    const auto v = parse_numbers(text.substr(5), "--target");
    if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3]))
      throw ValidationError("--target rect expects x_min,x_max,y_min,y_max");
    return Rect{v[0], v[1], v[2], v[3]};
  }
  return model_from_name(text);
}

int cmd_render(const RenderArgs& a, std::ostream& err) {
  RasterSpec spec;
  const auto w = parse_numbers(a.window, "--window");
  if (w.size() != 4) throw ValidationError("--window expects x_min,x_max,y_min,y_max");
  spec.x_min = w[0], spec.x_max = w[1], spec.y_min = w[2], spec.y_max = w[3];
  int width = 0, height = 0;
  char tail = 0;
  if (std::sscanf(a.size.c_str(), "%dx%d%c", &width, &height, &tail) != 2)
    throw ValidationError("--size expects WIDTHxHEIGHT");
  spec.width = width, spec.height = height;
  spec.n_steps = a.n;

  std::string format = a.format;
  if (format.empty()) {
    const auto dot = a.output.rfind('.');
    format = dot == std::string::npos ? "pgm" : a.output.substr(dot + 1);
  }
  if (format != "pgm" && format != "png" && format != "csv")
    throw ValidationError("--format must be pgm, png or csv");

  Raster raster;
  if (!a.model.empty()) {
    if (a.mode != "green") throw ValidationError("--model renders only in --mode green");
    spec.validate();
    raster = raster_green(model_from_name(a.model), spec);
    err << "model " << a.model << "\n";
  } else {
    if (a.seq.empty()) throw ValidationError("render needs --seq or --model");
    const PolySequence seq = sequence_from_name(a.seq);
    spec.validate();
    spec.escape_radius = resolve_radius(seq, a.radius, a.n);
    if (a.mode == "membership") {
      raster = raster_membership(seq, spec);
    } else if (a.mode == "preimage") {
      raster = raster_preimage(seq, spec, parse_target(a.target));
    } else if (a.mode == "green") {
      raster = raster_green(seq, spec, model_from_name(a.target));
    } else {
      throw ValidationError("--mode must be membership, preimage or green");
    }
    err << "escape radius " << spec.escape_radius << "\n"
        << "ledger " << ledger_text(seq.ledger(a.n)) << "\n";
  }
  if (format == "pgm") write_pgm(raster, a.output);
  if (format == "png") write_png(raster, a.output, a.bit_depth);
  if (format == "csv") write_csv(raster, a.output);
  if (raster.kind == RasterKind::membership)
    err << "in-set pixels " << raster.count_in() << " of " << raster.values.size() << "\n";
  return kOk;
}

// -- check ------------------------------------------------------------------

struct CheckArgs {
  std::string seq, which;
  std::optional<double> R, A;
  std::size_t n_max = kDefaultNMax;
  int samples = kDefaultCircleSamples;
  std::string center = "0";
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const PolySequence seq = sequence_from_name(a.seq);
  json j = {{"command", "check"}, {"which", a.which}, {"sequence", a.seq}};
  CheckReport r;
  if (a.which == "guided") {
    if (!a.R) throw ValidationError("--which guided needs --R");
    r = check_guided(seq, *a.R, a.n_max, a.samples);
    j["R"] = *a.R;
  } else if (a.which == "p2") {
    if (!a.A) throw ValidationError("--which p2 needs --A");
    r = check_P2(seq, *a.A, a.n_max);
    j["A"] = *a.A;
  } else if (a.which == "finite") {
    if (!a.R) throw ValidationError("--which finite needs --R (disk radius)");
    FiniteConditionOptions opts;
    opts.n_max = a.n_max;
    opts.samples = a.samples;
    r = check_finite_condition(seq, parse_point(a.center), *a.R, opts);
    j["R"] = *a.R;
  } else if (a.which == "escape") {
    if (a.R) {
      r = escape_radius_verify(seq, *a.R, a.n_max, a.samples);
      j["R"] = *a.R;
    } else {
      EscapeSearchOptions opts;
      opts.n_max = a.n_max;
      opts.samples = a.samples;
      try {
        const double R = escape_radius_search(seq, opts);
        r = escape_radius_verify(seq, R, a.n_max, a.samples);
        j["R"] = R;
      } catch (const CheckFailure& e) {
        r.passed = false;
        r.n_from = 2;
        r.n_to = a.n_max;
        r.detail = e.what();
        j["R"] = nullptr;
      }
    }
  } else {
    throw ValidationError("--which must be guided, p2, finite or escape");
  }
  j.update(report_json(r));
  print_json(out, j);
  return r.passed ? kOk : kCheckFailed;
}

// -- table ------------------------------------------------------------------

struct TableArgs {
  std::string seq, target = "disk:1", n = "1..10", output;
  std::optional<double> radius;
  int net_side = 81;
  bool no_cap = false;
};

int cmd_table(const TableArgs& a, std::ostream& out, std::ostream& err) {
  const PolySequence seq = sequence_from_name(a.seq);
  const std::vector<std::size_t> n_list = parse_index_list(a.n);
  TableOptions opts;
  opts.escape_radius = resolve_radius(seq, a.radius, n_list.back() + 1);
  opts.net_side = a.net_side;
  opts.include_cap = !a.no_cap;
  if (opts.include_cap) {
    FiniteConditionOptions fc;
    fc.n_max = std::max<std::size_t>(n_list.back() + 1, 40);
    fc.samples = 128;
    const CheckReport finite =
        check_finite_condition(seq, Complex(0), std::max(2.0, opts.escape_radius), fc);
    if (!finite.passed) {
      err << "warning: the normalized potentials (1/d_n) log+|p_n| are not uniformly bounded ("
          << finite.detail << "); the limit set is not regular, so the cap column is omitted\n";
      opts.include_cap = false;
    }
  }
  err << "escape radius " << opts.escape_radius << "\n";
  const auto rows = convergence_table(seq, model_from_name(a.target), n_list, opts);
  if (a.output.empty() || a.output == "-") {
    write_table_csv(out, rows);
  } else {
    std::ofstream os(a.output);
    if (!os) throw IoError("cannot open '" + a.output + "' for writing");
    write_table_csv(os, rows);
    if (!os) throw IoError("write failed for '" + a.output + "'");
  }
  return kOk;
}

// -- green / gamma / capacity ------------------------------------------------

struct GreenArgs {
  std::string seq, model, target = "disk:1", z;
  std::size_t n = 64;
  std::optional<double> radius;
  bool tail = false;
  std::size_t tail_n_max = 50;
  bool as_json = false;
};

void print_value(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  out << buf;
}

int cmd_green(const GreenArgs& a, std::ostream& out) {
  const Complex z = parse_point(a.z);
  json j = {{"command", "green"}, {"z", point_json(z)}};
  if (!a.model.empty()) {
    const double v = green_model(model_from_name(a.model), z);
    j["model"] = a.model;
    j["value"] = v;
    j["error_bound"] = 0.0;
    if (a.as_json) {
      print_json(out, j);
    } else {
      print_value(out, v);
      out << "\n";
    }
    return kOk;
  }
  if (a.seq.empty()) throw ValidationError("green needs --seq or --model");
  const PolySequence seq = sequence_from_name(a.seq);
  OrbitOptions opts;
  opts.target = model_from_name(a.target);
  opts.escape_radius = resolve_radius(seq, a.radius, a.n);
  if (a.tail) opts.tail_constant = tail_constant(seq, opts.target, a.tail_n_max);
  const GreenValue g = green_nonauto(seq, z, a.n, opts);
  j.update({{"sequence", a.seq},
            {"target", a.target},
            {"n", a.n},
            {"value", g.value},
            {"error_bound", g.error_bound},
            {"truncation_included", g.truncation_included},
            {"tail_constant", nullable(opts.tail_constant)},
            {"escaped_at", g.escaped_at ? json(*g.escaped_at) : json(nullptr)},
            {"asymptotic_engaged", g.asymptotic_engaged},
            {"escape_radius", opts.escape_radius},
            {"ledger", ledger_json(g.ledger)}});
  if (a.as_json) {
    print_json(out, j);
  } else {
    print_value(out, g.value);
    char buf[64];
    std::snprintf(buf, sizeof buf, " +- %.3g%s", g.error_bound, g.truncation_included ? "" : " (truncation excluded)");
    out << buf << "\n";
  }
  return kOk;
}

struct GammaArgs {
  std::string a, b, seq, target = "disk:1";
  std::size_t n = 0, m = 0;
  int samples = kDefaultNetSamples;
  int net_side = 81;
  std::optional<double> radius;
  bool as_json = false;
};

int cmd_gamma(const GammaArgs& g, std::ostream& out) {
  json j = {{"command", "gamma"}};
  KlimekEstimate e;
  if (!g.seq.empty()) {
    if (g.n == 0 || g.m == 0) throw ValidationError("gamma --seq needs --n and --m");
    const PolySequence seq = sequence_from_name(g.seq);
    const double R = resolve_radius(seq, g.radius, std::max(g.n, g.m));
    e = gamma_nonauto(seq, model_from_name(g.target), g.n, g.m, fill_net(Complex(0), R, g.net_side));
    j.update({{"sequence", g.seq}, {"target", g.target}, {"n", g.n}, {"m", g.m}, {"escape_radius", R}});
  } else {
    if (g.a.empty() || g.b.empty()) throw ValidationError("gamma needs --a and --b, or --seq");
    e = gamma_models(model_from_name(g.a), model_from_name(g.b), g.samples);
    j.update({{"a", g.a}, {"b", g.b}});
  }
  j.update({{"value", e.lower}, {"samples", e.samples}, {"refine_delta", e.refine_delta},
            {"argmax", point_json(e.argmax)}});
  if (g.as_json) {
    print_json(out, j);
  } else {
    print_value(out, e.lower);
    out << "\n";
  }
  return kOk;
}

struct CapacityArgs {
  std::string model, seq, target = "disk:1";
  std::size_t n = 64;
  int samples = kCapacitySamples;
  std::optional<double> radius;
  bool as_json = false;
};

int cmd_capacity(const CapacityArgs& a, std::ostream& out) {
  json j = {{"command", "capacity"}};
  CapacityEstimate c;
  if (!a.model.empty()) {
    const ModelSet K = model_from_name(a.model);
    c = capacity_estimate(K, {}, a.samples);
    j.update({{"model", a.model}, {"exact", K.capacity()}});
  } else {
    if (a.seq.empty()) throw ValidationError("capacity needs --model or --seq");
    const PolySequence seq = sequence_from_name(a.seq);
    const double R = resolve_radius(seq, a.radius, a.n);
    const SequencePrefix prefix(seq, a.n);
    OrbitOptions opts;
    opts.target = model_from_name(a.target);
    opts.track_error = false;
    c = capacity_estimate([&](Complex z) { return green_nonauto(prefix, z, a.n, opts).value; },
                          {2 * R, 4 * R, 8 * R}, a.samples);
    j.update({{"sequence", a.seq}, {"target", a.target}, {"n", a.n}, {"escape_radius", R}});
  }
  j.update({{"value", c.value}, {"gamma", c.gamma}, {"spread", c.spread}});
  if (a.as_json) {
    print_json(out, j);
  } else {
    print_value(out, c.value);
    out << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-autonomous polynomial iteration: filled Julia sets, Green functions, capacity, Klimek metric", "nonauto"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads (0 = NONAUTO_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", common.seed, "seed recorded for randomized nets (all nets are deterministic)");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "rasterize membership, preimage or potential fields");
  render->add_option("--seq", ra.seq, kSequenceHelp);
  render->add_option("--model", ra.model, std::string("closed-form potential of a ") + kModelHelp);
  render->add_option("--n", ra.n, "n_steps")->check(CLI::PositiveNumber);
  render->add_option("--window", ra.window, "x_min,x_max,y_min,y_max");
  render->add_option("--size", ra.size, "WIDTHxHEIGHT");
  render->add_option("--radius", ra.radius, "escape radius (default: searched)")->check(CLI::PositiveNumber);
  render->add_option("--mode", ra.mode, "membership | preimage | green")
      ->check(CLI::IsMember({"membership", "preimage", "green"}));
  render->add_option("--target", ra.target, "preimage/green target: model set or rect:x0,x1,y0,y1");
  render->add_option("--format", ra.format, "pgm | png | csv (default: from the output extension)");
  render->add_option("--bit-depth", ra.bit_depth, "PNG bit depth 8 or 16")->check(CLI::IsMember({8, 16}));
  render->add_option("-o,--output", ra.output, "output path")->required();

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "run a sequence checker; JSON report on stdout");
  check->add_option("--seq", ca.seq, kSequenceHelp)->required();
  check->add_option("--which", ca.which, "guided | p2 | finite | escape")
      ->required()
      ->check(CLI::IsMember({"guided", "p2", "finite", "escape"}));
  check->add_option("--R", ca.R, "disk radius")->check(CLI::PositiveNumber);
  check->add_option("--A", ca.A, "coefficient ratio bound")->check(CLI::PositiveNumber);
  check->add_option("--n-max", ca.n_max, "largest index tested")->check(CLI::PositiveNumber);
  check->add_option("--samples", ca.samples, "samples per circle")->check(CLI::PositiveNumber);
  check->add_option("--center", ca.center, "disk center re[,im] for --which finite");

  TableArgs ta;
  auto* table = app.add_subcommand("table", "convergence table, CSV n,logD,gamma,cap");
  table->add_option("--seq", ta.seq, kSequenceHelp)->required();
  table->add_option("--E", ta.target, kModelHelp);
  table->add_option("--n", ta.n, "indices: 1..10 or 1,2,5");
  table->add_option("--radius", ta.radius, "escape radius (default: searched)")->check(CLI::PositiveNumber);
  table->add_option("--net-side", ta.net_side, "fill net points per side")->check(CLI::PositiveNumber);
  table->add_flag("--no-cap", ta.no_cap, "omit the capacity column");
  table->add_option("-o,--output", ta.output, "CSV path (default: stdout)");

  GreenArgs ga;
  auto* green = app.add_subcommand("green", "Green function value at a point");
  green->add_option("--seq", ga.seq, kSequenceHelp);
  green->add_option("--model", ga.model, kModelHelp);
  green->add_option("--E", ga.target, std::string("target for --seq, ") + kModelHelp);
  green->add_option("--z", ga.z, "point re[,im]")->required();
  green->add_option("--n", ga.n, "n_steps")->check(CLI::PositiveNumber);
  green->add_option("--radius", ga.radius, "escape radius (default: searched)")->check(CLI::PositiveNumber);
  green->add_flag("--tail", ga.tail, "estimate the tail constant and include the truncation bound");
  green->add_option("--tail-n-max", ga.tail_n_max, "indices used for the tail constant")->check(CLI::PositiveNumber);
  green->add_flag("--json", ga.as_json, "JSON output");

  GammaArgs ka;
  auto* gamma = app.add_subcommand("gamma", "Klimek distance estimate");
  gamma->add_option("--a", ka.a, kModelHelp);
  gamma->add_option("--b", ka.b, kModelHelp);
  gamma->add_option("--seq", ka.seq, kSequenceHelp);
  gamma->add_option("--E", ka.target, std::string("target for --seq, ") + kModelHelp);
  gamma->add_option("--n", ka.n, "first index for --seq")->check(CLI::PositiveNumber);
  gamma->add_option("--m", ka.m, "second index for --seq")->check(CLI::PositiveNumber);
  gamma->add_option("--samples", ka.samples, "boundary samples")->check(CLI::PositiveNumber);
  gamma->add_option("--net-side", ka.net_side, "fill net points per side")->check(CLI::PositiveNumber);
  gamma->add_option("--radius", ka.radius, "escape radius (default: searched)")->check(CLI::PositiveNumber);
  gamma->add_flag("--json", ka.as_json, "JSON output");

  CapacityArgs pa;
  auto* capacity = app.add_subcommand("capacity", "logarithmic capacity estimate");
  capacity->add_option("--model", pa.model, kModelHelp);
  capacity->add_option("--seq", pa.seq, kSequenceHelp);
  capacity->add_option("--E", pa.target, std::string("target for --seq, ") + kModelHelp);
  capacity->add_option("--n", pa.n, "n_steps")->check(CLI::PositiveNumber);
  capacity->add_option("--samples", pa.samples, "samples per probe circle")->check(CLI::PositiveNumber);
  capacity->add_option("--radius", pa.radius, "escape radius (default: searched)")->check(CLI::PositiveNumber);
  capacity->add_flag("--json", pa.as_json, "JSON output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  set_thread_count(common.threads);
  try {
    if (*render) return cmd_render(ra, err);
    if (*check) return cmd_check(ca, out);
    if (*table) return cmd_table(ta, out, err);
    if (*green) return cmd_green(ga, out);
    if (*gamma) return cmd_gamma(ka, out);
    if (*capacity) return cmd_capacity(pa, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CheckFailure& e) {
    err << "check failed: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace nonauto::cli
