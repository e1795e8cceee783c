#include "twisttube/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "twisttube/discretize.hpp"
#include "twisttube/errors.hpp"
#include "twisttube/parallel.hpp"

namespace twisttube {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::filesystem::path output_path(const RunConfig& config, const std::string& name) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  const auto path = output_path(config, name);
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

Json shape_json(const ShapeSpec& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        Json j;
        if constexpr (std::is_same_v<T, shape::Disc>) {
          j["type"] = "disc";
        } else if constexpr (std::is_same_v<T, shape::Ellipse>) {
          j["type"] = "ellipse";
          j["eps"] = s.eps;
        } else if constexpr (std::is_same_v<T, shape::Ribbon>) {
          j["type"] = "ribbon";
          j["level"] = s.level;
          j["width"] = s.width;
        } else {
          j["type"] = "polygon";
          Json outer = Json::array();
          for (const auto& p : s.outer) outer.push_back({p.x, p.y});
          j["outer"] = outer;
          Json holes = Json::array();
          for (const auto& ring : s.holes) {
            Json r = Json::array();
            for (const auto& p : ring) r.push_back({p.x, p.y});
            holes.push_back(r);
          }
          j["holes"] = holes;
        }
        return j;
      },
      spec);
}

// Echo of the inputs that determine the numbers. The worker count is left
// out: results do not depend on it.
Json config_json(const RunConfig& c) {
  Json j;
  j["shape"] = shape_json(c.shape);
  j["h"] = c.h;
  j["boundary"] = c.boundary == BoundaryTreatment::fitted ? "fitted" : "staircase";
  j["profile"] = {{"beta0", c.beta0}, {"amplitude", c.amplitude}, {"half_width", c.half_width}};
  Json b;
  b["sigma"] = c.sigma;
  b["c"] = c.c ? Json(*c.c) : Json(nullptr);
  b["n_q"] = c.n_q;
  b["cap"] = c.cap;
  j["bound"] = b;
  j["solver"] = {{"tol", c.tol}, {"max_iterations", c.max_iterations}, {"seed", c.seed}};
  if (c.test_bound_scale != 1.0) j["testing"] = {{"bound_scale", c.test_bound_scale}};
  return j;
}

Json bound_json(const BoundReport& r) {
  Json j;
  j["h"] = r.h;
  j["label"] = r.rigorous ? "RIGOROUS" : "NON-RIGOROUS";
  j["sigma"] = r.sigma;
  j["c"] = r.c;
  j["gamma"] = r.gamma;
  j["alpha_sq"] = r.alpha_sq;
  j["lt_constant"] = r.lt_constant;
  j["d"] = r.d;
  j["energy"] = r.energy;
  j["nodes"] = r.nodes;
  j["ground_state_min"] = r.ground_state_min;
  j["ground_cluster"] = r.ground_cluster;
  j["underflow_nodes"] = r.underflow_nodes;
  j["angular_energy_ratio"] = r.angular_energy_ratio;
  j["integral"] = r.integral;
  j["bound"] = r.bound;
  j["admissibility"] = {{"theorem1_ok", r.admissibility.theorem1_ok},
                        {"theorem2_ok", r.admissibility.theorem2_ok},
                        {"messages", r.admissibility.messages}};
  j["potential_scale"] = {{"ratio_q99", r.potential_scale.ratio_q99},
                          {"second_ratio_q99", r.potential_scale.second_ratio_q99},
                          {"sample_count", r.potential_scale.sample_count},
                          {"used_all_nodes", r.potential_scale.used_all_nodes}};
  j["clamp_total"] = r.clamp_total;
  j["cap_max"] = r.cap_max;
  j["curvature_changes"] = r.curvature_changes;
  j["quadrature_too_coarse"] = r.quadrature_too_coarse;
  j["ribbon_lower_bound"] = r.ribbon_lower_bound ? Json(*r.ribbon_lower_bound) : Json(nullptr);
  Json rows = Json::array();
  for (const auto& row : r.per_s) {
    rows.push_back({{"s", row.s},
                    {"n_neg", row.n_neg},
                    {"trace_power", row.trace_power},
                    {"lowest", row.lowest},
                    {"clamp_count", row.clamp_count},
                    {"cap", row.cap}});
  }
  j["per_s"] = rows;
  j["warnings"] = r.warnings;
  return j;
}

Json gate_json(const ConvergenceGate& g) {
  Json j;
  j["evaluated"] = g.evaluated;
  j["h_coarse"] = g.h_coarse;
  j["h_fine"] = g.h_fine;
  j["bound_coarse"] = g.bound_coarse;
  j["bound_fine"] = g.bound_fine;
  j["extrapolated"] = g.extrapolated;
  j["relative_difference"] = g.relative_difference;
  j["passed"] = g.passed;
  j["note"] = g.note;
  return j;
}

Json direct_json(const DirectResult& d) {
  Json j;
  j["h"] = d.h;
  j["half_length"] = d.half_length;
  j["n_s"] = d.n_s;
  j["axial_spacing"] = 2.0 * d.half_length / (d.n_s + 1);
  j["dimension"] = d.dimension;
  j["threshold"] = d.threshold;
  j["buffer"] = d.buffer;
  j["sigma"] = d.sigma;
  j["lowest"] = d.lowest;
  j["eigenvalues"] = d.eigenvalues;
  j["moment"] = d.moment;
  j["caveats"] = d.caveats;
  return j;
}

Json verdict_json(const Verdict& v, double h) {
  Json j;
  j["h"] = h;
  j["verdict"] = v.passed ? "PASS" : "FAIL";
  j["moment"] = v.moment;
  j["bound"] = v.bound;
  // inf cannot be stored in JSON
  j["ratio"] = std::isfinite(v.ratio) ? Json(v.ratio) : Json(nullptr);
  j["floor"] = v.floor;
  j["note"] = v.note;
  return j;
}

void write_json(const RunConfig& config, const Json& doc) {
  auto out = open_output(config, "report.json");
  out << doc.dump(2) << '\n';
}

void write_per_s(const RunConfig& config, const BoundReport& r) {
  auto out = open_output(config, "per_s.csv");
  out << "s,n_neg,trace_power,h\n";
  for (const auto& row : r.per_s) {
    out << num(row.s) << ',' << row.n_neg << ',' << num(row.trace_power) << ',' << num(r.h)
        << '\n';
  }
}

void write_spectrum(const RunConfig& config, const std::vector<double>& eigenvalues, double h) {
  auto out = open_output(config, "spectrum.csv");
  out << "index,eigenvalue,h\n";
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    out << k << ',' << num(eigenvalues[k]) << ',' << num(h) << '\n';
  }
}

Json base_document(const std::string& command, const RunConfig& config) {
  Json doc;
  doc["command"] = command;
  doc["config"] = config_json(config);
  return doc;
}

BoundReport run_bound(const RunConfig& config) {
  return compute_bound(config.shape, config.h, make_profile(config), make_bound_config(config),
                       config.boundary);
}

void print_bound(std::ostream& out, const BoundReport& r) {
  fmt::print(out, "h = {:g}  E = {:.10g}  d = {:.6g}\n", r.h, r.energy, r.d);
  fmt::print(out, "gamma = {:.6g}  c = {:.6g}  alpha^2 = {:.6g}  L_cl = {:.6g}\n", r.gamma, r.c,
             r.alpha_sq, r.lt_constant);
  fmt::print(out, "integral = {:.10g}  bound = {:.10g}  [{}]\n", r.integral, r.bound,
             r.rigorous ? "RIGOROUS" : "NON-RIGOROUS");
  if (r.gate.evaluated) {
    fmt::print(out, "convergence gate h = {:g} vs {:g}: {} ({})\n", r.gate.h_coarse,
               r.gate.h_fine, r.gate.passed ? "passed" : "failed", r.gate.note);
  }
  for (const auto& w : r.warnings) fmt::print(out, "warning: {}\n", w);
}

bool is_config_error(const std::exception& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidSpec*>(&e) ||
         dynamic_cast<const InvalidC*>(&e) || dynamic_cast<const SigmaOutOfRange*>(&e) ||
         dynamic_cast<const TruncationTooSmall*>(&e);
}

// Row of a sweep: the config with one axis overridden.
RunConfig sweep_point(const RunConfig& base, SweepAxis axis, double value) {
  RunConfig c = base;
  switch (axis) {
    case SweepAxis::ellipse_eps:
      c.shape = shape::Ellipse{value};
      break;
    case SweepAxis::ribbon_k: {
      if (value != std::floor(value) || value < 1.0) {
        throw InvalidSpec(fmt::format("ribbon level must be a positive integer, got {}", value));
      }
      const auto* r = std::get_if<shape::Ribbon>(&base.shape);
      c.shape = shape::Ribbon{static_cast<int>(value), r ? r->width : 0.1};
      break;
    }
    case SweepAxis::resolution:
      if (!(value > 0.0)) throw InvalidSpec(fmt::format("h must be positive, got {}", value));
      c.h = value;
      break;
    case SweepAxis::amplitude:
      c.amplitude = value;
      break;
  }
  c.resolutions = {c.h};  // one resolution per row; the gate is not run
  return c;
}

}  // namespace

TwistProfile make_profile(const RunConfig& config) {
  return TwistProfile(config.beta0, config.amplitude, config.half_width);
}

EigenOptions make_eigen_options(const RunConfig& config) {
  EigenOptions e;
  e.tol = config.tol;
  e.max_iterations = config.max_iterations;
  e.seed = config.seed;
  e.verbosity = config.verbosity;
  return e;
}

BoundConfig make_bound_config(const RunConfig& config) {
  BoundConfig b;
  b.sigma = config.sigma;
  b.c = config.c;
  b.n_q = config.n_q;
  b.eigen = make_eigen_options(config);
  b.cap = config.cap;
  b.resolutions = config.resolutions.empty() ? std::vector<double>{2.0 * config.h, config.h}
                                             : config.resolutions;
  b.workers = resolve_workers(config.workers);
  b.bound_scale = config.test_bound_scale;
  return b;
}

DirectConfig make_direct_config(const RunConfig& config) {
  DirectConfig d;
  d.half_length = config.direct_half_length;
  d.n_s = config.direct_n_s;
  d.cap = config.direct_cap;
  d.sigma = config.sigma;
  d.memory_budget_bytes = config.memory_budget_gib * 1024.0 * 1024.0 * 1024.0;
  d.eigen = make_eigen_options(config);
  return d;
}

std::string bound_report_json(const BoundReport& report) {
  Json j = bound_json(report);
  j["convergence"] = gate_json(report.gate);
  return j.dump(2);
}

std::string direct_result_json(const DirectResult& result) { return direct_json(result).dump(2); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
    if (x[k] > 0.0 && y[k] > 0.0) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  }
  const auto n = static_cast<double>(lx.size());
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

int cmd_cross_section(const RunConfig& config, std::ostream& out) {
  const CrossSection cs = build_cross_section(config.shape, config.h, config.boundary);
  const SparseSymOperator h = assemble_h_beta0(cs, config.beta0);
  const GroundState gs = ground_state(h, make_eigen_options(config));
  const SparseOperator skew = skew_part(assemble_angular(cs));
  const double d = radius(cs);
  const double ratio = angular_energy_ratio(skew, gs.f);

  write_spectrum(config, gs.low.eigenvalues, cs.spacing());
  {
    auto f_out = open_output(config, "field_f.csv");
    f_out << "i,j,t2,t3,f,h\n";
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const GridNode& n = cs.node(k);
      f_out << n.i << ',' << n.j << ',' << num(n.t2) << ',' << num(n.t3) << ','
            << num(gs.f[static_cast<Eigen::Index>(k)]) << ',' << num(cs.spacing()) << '\n';
    }
  }

  Json doc = base_document("cross-section", config);
  Json j;
  j["h"] = cs.spacing();
  j["nodes"] = cs.size();
  j["d"] = d;
  j["energy"] = gs.energy;
  j["ground_state_min"] = gs.min_value;
  j["ground_cluster"] = gs.cluster_size;
  j["underflow_nodes"] = gs.underflow_count;
  j["angular_energy_ratio"] = ratio;
  j["low_spectrum"] = gs.low.eigenvalues;
  doc["cross_section"] = j;
  write_json(config, doc);

  fmt::print(out, "h = {:g}  nodes = {}\n", cs.spacing(), cs.size());
  fmt::print(out, "E = {:.10g}\nd = {:.6g}\n", gs.energy, d);
  fmt::print(out, "||Af||^2/||f||^2 = {:.6g}\n", ratio);
  if (gs.cluster_size > 1) {
    fmt::print(out, "ground level is a cluster of {} near-degenerate states\n", gs.cluster_size);
  }
  return kExitOk;
}

int cmd_bound(const RunConfig& config, std::ostream& out) {
  const BoundReport r = run_bound(config);
  Json doc = base_document("bound", config);
  doc["bound"] = bound_json(r);
  doc["convergence"] = gate_json(r.gate);
  write_json(config, doc);
  write_per_s(config, r);
  print_bound(out, r);
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out) {
  if (!config.sweep_axis) throw ConfigError("sweep needs 'sweep.axis'");
  if (config.sweep_values.empty()) throw ConfigError("sweep needs at least one 'sweep.values' entry");
  const SweepAxis axis = *config.sweep_axis;
  if (axis == SweepAxis::ellipse_eps && !std::holds_alternative<shape::Ellipse>(config.shape) &&
      !std::holds_alternative<shape::Disc>(config.shape)) {
    throw ConfigError("sweep axis ellipse-eps needs an ellipse or disc shape");
  }
  if (axis == SweepAxis::ribbon_k && !std::holds_alternative<shape::Ribbon>(config.shape)) {
    throw ConfigError("sweep axis ribbon-k needs a ribbon shape");
  }

  struct Row {
    double value = 0.0;
    bool ok = false;
    std::string status;
    BoundReport report;
    int n_neg_s0 = 0;
  };
  std::vector<Row> rows;
  for (double value : config.sweep_values) {
    Row row;
    row.value = value;
    try {
      row.report = run_bound(sweep_point(config, axis, value));
      // n_q is odd, so the middle node is s = 0.
      row.n_neg_s0 = row.report.per_s[row.report.per_s.size() / 2].n_neg;
      row.ok = true;
      row.status = row.report.rigorous ? "ok" : "ok NON-RIGOROUS";
    } catch (const std::exception& e) {
      row.status = fmt::format("error: {}", e.what());
    }
    if (config.verbosity > 0) fmt::print(out, "{} = {:g}: {}\n", to_string(axis), value, row.status);
    rows.push_back(std::move(row));
  }

  double slope = std::numeric_limits<double>::quiet_NaN();
  if (axis == SweepAxis::ellipse_eps) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& row : rows) {
      if (!row.ok) continue;
      x.push_back(row.value);
      y.push_back(row.report.bound);
    }
    slope = loglog_slope(x, y);
  }
  const std::string slope_text = std::isfinite(slope) ? num(slope) : "";

  {
    auto csv = open_output(config, "sweep.csv");
    csv << "value,bound,n_neg_s0,E,d,angular_energy_ratio,h,slope,status\n";
    for (const auto& row : rows) {
      const BoundReport& r = row.report;
      const double h = axis == SweepAxis::resolution ? row.value : config.h;
      if (row.ok) {
        csv << num(row.value) << ',' << num(r.bound) << ',' << row.n_neg_s0 << ','
            << num(r.energy) << ',' << num(r.d) << ',' << num(r.angular_energy_ratio) << ','
            << num(h) << ',' << slope_text << ',' << row.status << '\n';
      } else {
        std::string status = row.status;
        for (char& ch : status) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        csv << num(row.value) << ",,,,,," << num(h) << ',' << slope_text << ',' << status
            << '\n';
      }
    }
  }

  Json doc = base_document("sweep", config);
  Json sweep;
  sweep["axis"] = to_string(axis);
  sweep["values"] = config.sweep_values;
  sweep["loglog_slope"] = std::isfinite(slope) ? Json(slope) : Json(nullptr);
  Json jrows = Json::array();
  int failures = 0;
  for (const auto& row : rows) {
    Json jr;
    jr["value"] = row.value;
    jr["status"] = row.status;
    if (row.ok) {
      jr["n_neg_s0"] = row.n_neg_s0;
      jr["report"] = bound_json(row.report);
    } else {
      ++failures;
    }
    jrows.push_back(jr);
  }
  sweep["rows"] = jrows;
  doc["sweep"] = sweep;
  write_json(config, doc);

  for (const auto& row : rows) {
    if (row.ok) {
      fmt::print(out, "{} = {:g}: bound = {:.6g}  n_neg(0) = {}  E = {:.8g}  d = {:.4g}  ratio = {:.6g}\n",
                 to_string(axis), row.value, row.report.bound, row.n_neg_s0, row.report.energy,
                 row.report.d, row.report.angular_energy_ratio);
    } else {
      fmt::print(out, "{} = {:g}: {}\n", to_string(axis), row.value, row.status);
    }
  }
  if (std::isfinite(slope)) fmt::print(out, "log-log slope = {:.4f}\n", slope);
  return failures == static_cast<int>(rows.size()) ? kExitFailure : kExitOk;
}

int cmd_direct(const RunConfig& config, std::ostream& out) {
  const CrossSection cs = build_cross_section(config.shape, config.h, config.boundary);
  const DirectResult d = direct_spectrum(cs, make_profile(config), make_direct_config(config));
  Json doc = base_document("direct", config);
  doc["direct"] = direct_json(d);
  write_json(config, doc);
  write_spectrum(config, d.eigenvalues, d.h);
  fmt::print(out, "h = {:g}  L = {:g}  n_s = {}  dimension = {}\n", d.h, d.half_length, d.n_s,
             d.dimension);
  fmt::print(out, "E = {:.10g}  lowest = {:.10g}  below threshold: {}  moment = {:.6g}\n",
             d.threshold, d.lowest, d.eigenvalues.size(), d.moment);
  for (const auto& c : d.caveats) fmt::print(out, "caveat: {}\n", c);
  return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  if (!config.direct_enabled) throw ConfigError("verify needs 'direct.enabled: true'");
  const BoundReport r = run_bound(config);
  const CrossSection cs = build_cross_section(config.shape, config.h, config.boundary);
  const DirectResult d = direct_spectrum(cs, make_profile(config), make_direct_config(config));
  const Verdict v = verify_inequality(d, r);

  Json doc = base_document("verify", config);
  doc["bound"] = bound_json(r);
  doc["convergence"] = gate_json(r.gate);
  doc["direct"] = direct_json(d);
  doc["verdict"] = verdict_json(v, r.h);
  write_json(config, doc);
  write_per_s(config, r);
  write_spectrum(config, d.eigenvalues, d.h);

  print_bound(out, r);
  fmt::print(out, "direct: {} eigenvalues below E, moment = {:.6g}\n", d.eigenvalues.size(),
             d.moment);
  fmt::print(out, "{}: moment {:.6g} vs bound {:.6g}, ratio {:.4g} ({})\n",
             v.passed ? "PASS" : "FAIL", v.moment, v.bound, v.ratio, v.note);
  return v.passed ? kExitOk : kExitVerifyFail;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "cross-section") return cmd_cross_section(config, out);
    if (name == "bound") return cmd_bound(config, out);
    if (name == "sweep") return cmd_sweep(config, out);
    if (name == "verify") return cmd_verify(config, out);
    if (name == "direct") return cmd_direct(config, out);
    fmt::print(err, "unknown command '{}'\n", name);
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return is_config_error(e) ? kExitConfig : kExitFailure;
  }
}

}  // namespace twisttube
