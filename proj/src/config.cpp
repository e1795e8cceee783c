#include "twisttube/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "twisttube/errors.hpp"

namespace twisttube {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ConfigError(what);
  throw ConfigError(fmt::format("line {}, column {}: {}", mark.line + 1, mark.column + 1, what),
                    mark.line + 1, mark.column + 1);
}

// A mapping whose keys must all be known.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, fmt::format("'{}' must be a mapping", path_));
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, fmt::format("unknown key '{}.{}'", path_, key));
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node get(const std::string& key) const { return node_[key]; }
  std::string field(const std::string& key) const { return path_ + "." + key; }

  template <class T>
  T read(const std::string& key, T fallback) const {
    const YAML::Node v = node_[key];
    if (!v) return fallback;
    return convert<T>(v, field(key));
  }

  template <class T>
  static T convert(const YAML::Node& v, const std::string& name) {
    if (!v.IsScalar()) fail(v, fmt::format("'{}' must be a scalar", name));
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, fmt::format("'{}' has an invalid value '{}'", name, v.Scalar()));
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
};

std::vector<double> read_list(const YAML::Node& v, const std::string& name) {
  if (!v.IsSequence()) fail(v, fmt::format("'{}' must be a list", name));
  std::vector<double> out;
  for (const auto& item : v) out.push_back(Section::convert<double>(item, name));
  return out;
}

Ring read_ring(const YAML::Node& v, const std::string& name) {
  if (!v.IsSequence()) fail(v, fmt::format("'{}' must be a list of [x, y] pairs", name));
  Ring ring;
  for (const auto& p : v) {
    const std::vector<double> xy = read_list(p, name);
    if (xy.size() != 2) fail(p, fmt::format("'{}' vertices need exactly two coordinates", name));
    ring.push_back({xy[0], xy[1]});
  }
  return ring;
}

void require(bool ok, const YAML::Node& node, const std::string& what) {
  if (!ok) fail(node, what);
}

ShapeSpec read_shape(const YAML::Node& node) {
  const Section s(node, "shape", {"type", "eps", "level", "width", "outer", "holes"});
  if (!s.has("type")) fail(node, "'shape.type' is required");
  const auto type = s.read<std::string>("type", "");
  ShapeSpec spec;
  if (type == "disc") {
    spec = shape::Disc{};
  } else if (type == "ellipse") {
    spec = shape::Ellipse{s.read<double>("eps", 0.0)};
  } else if (type == "ribbon") {
    spec = shape::Ribbon{s.read<int>("level", 1), s.read<double>("width", 0.1)};
  } else if (type == "polygon") {
    if (!s.has("outer")) fail(node, "'shape.outer' is required for polygons");
    shape::PolygonWithHoles poly;
    poly.outer = read_ring(s.get("outer"), "shape.outer");
    if (s.has("holes")) {
      const YAML::Node holes = s.get("holes");
      if (!holes.IsSequence()) fail(holes, "'shape.holes' must be a list of rings");
      for (const auto& hole : holes) poly.holes.push_back(read_ring(hole, "shape.holes"));
    }
    spec = poly;
  } else {
    fail(s.get("type"), fmt::format("'shape.type' must be disc, ellipse, ribbon or polygon, got '{}'",
                                    type));
  }
  try {
    validate(spec);
  } catch (const InvalidSpec& e) {
    fail(node, fmt::format("shape: {}", e.what()));
  }
  return spec;
}

}  // namespace

std::optional<SweepAxis> parse_sweep_axis(const std::string& name) {
  if (name == "ellipse-eps") return SweepAxis::ellipse_eps;
  if (name == "ribbon-k") return SweepAxis::ribbon_k;
  if (name == "resolution") return SweepAxis::resolution;
  if (name == "amplitude") return SweepAxis::amplitude;
  return std::nullopt;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::ellipse_eps: return "ellipse-eps";
    case SweepAxis::ribbon_k: return "ribbon-k";
    case SweepAxis::resolution: return "resolution";
    case SweepAxis::amplitude: return "amplitude";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1,
                                  e.msg),
                      e.mark.line + 1, e.mark.column + 1);
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  const Section top(root, "config",
                    {"shape", "grid", "profile", "bound", "solver", "direct", "sweep", "output",
                     "run", "testing"});

  if (top.has("shape")) cfg.shape = read_shape(top.get("shape"));

  if (top.has("grid")) {
    const Section g(top.get("grid"), "grid", {"h", "boundary", "resolutions"});
    cfg.h = g.read<double>("h", cfg.h);
    require(cfg.h > 0.0 && std::isfinite(cfg.h), g.has("h") ? g.get("h") : top.get("grid"),
            fmt::format("'grid.h' must be positive, got {}", cfg.h));
    const auto boundary = g.read<std::string>("boundary", "fitted");
    if (boundary == "fitted") {
      cfg.boundary = BoundaryTreatment::fitted;
    } else if (boundary == "staircase") {
      cfg.boundary = BoundaryTreatment::staircase;
    } else {
      fail(g.get("boundary"), "'grid.boundary' must be fitted or staircase");
    }
    if (g.has("resolutions")) {
      cfg.resolutions = read_list(g.get("resolutions"), "grid.resolutions");
      for (double v : cfg.resolutions) {
        require(v > 0.0 && std::isfinite(v), g.get("resolutions"),
                "'grid.resolutions' entries must be positive");
      }
    }
  }

  if (top.has("profile")) {
    const Section p(top.get("profile"), "profile", {"beta0", "amplitude", "half_width"});
    cfg.beta0 = p.read<double>("beta0", cfg.beta0);
    cfg.amplitude = p.read<double>("amplitude", cfg.amplitude);
    cfg.half_width = p.read<double>("half_width", cfg.half_width);
    require(cfg.beta0 > 0.0, top.get("profile"), "'profile.beta0' must be positive");
    require(cfg.amplitude >= 0.0, top.get("profile"), "'profile.amplitude' must be >= 0");
    require(cfg.half_width > 0.0, top.get("profile"), "'profile.half_width' must be positive");
  }

  if (top.has("bound")) {
    const Section b(top.get("bound"), "bound", {"sigma", "c", "n_q", "cap"});
    cfg.sigma = b.read<double>("sigma", cfg.sigma);
    require(cfg.sigma >= 0.5, top.get("bound"), "'bound.sigma' must be >= 1/2");
    if (b.has("c")) {
      cfg.c = b.read<double>("c", 0.0);
      require(*cfg.c > 0.0, b.get("c"), "'bound.c' must be positive");
    }
    cfg.n_q = b.read<int>("n_q", cfg.n_q);
    require(cfg.n_q >= 3 && cfg.n_q % 2 == 1, top.get("bound"),
            "'bound.n_q' must be odd and at least 3");
    cfg.cap = b.read<int>("cap", cfg.cap);
    require(cfg.cap >= 1, top.get("bound"), "'bound.cap' must be at least 1");
  }

  if (top.has("solver")) {
    const Section s(top.get("solver"), "solver", {"tol", "max_iterations", "seed"});
    cfg.tol = s.read<double>("tol", cfg.tol);
    require(cfg.tol > 0.0, top.get("solver"), "'solver.tol' must be positive");
    cfg.max_iterations = s.read<int>("max_iterations", cfg.max_iterations);
    require(cfg.max_iterations >= 1, top.get("solver"), "'solver.max_iterations' must be >= 1");
    cfg.seed = s.read<std::uint64_t>("seed", cfg.seed);
  }

  if (top.has("direct")) {
    const Section d(top.get("direct"), "direct",
                    {"enabled", "half_length", "n_s", "cap", "memory_budget_gib"});
    cfg.direct_enabled = d.read<bool>("enabled", cfg.direct_enabled);
    cfg.direct_half_length = d.read<double>("half_length", cfg.direct_half_length);
    require(cfg.direct_half_length >= 0.0, top.get("direct"),
            "'direct.half_length' must be >= 0 (0 selects 3 s0)");
    cfg.direct_n_s = d.read<int>("n_s", cfg.direct_n_s);
    require(cfg.direct_n_s == 0 || cfg.direct_n_s >= 16, top.get("direct"),
            "'direct.n_s' must be 0 (automatic) or at least 16");
    cfg.direct_cap = d.read<int>("cap", cfg.direct_cap);
    require(cfg.direct_cap >= 1, top.get("direct"), "'direct.cap' must be at least 1");
    cfg.memory_budget_gib = d.read<double>("memory_budget_gib", cfg.memory_budget_gib);
    require(cfg.memory_budget_gib > 0.0, top.get("direct"),
            "'direct.memory_budget_gib' must be positive");
  }

  if (top.has("sweep")) {
    const Section s(top.get("sweep"), "sweep", {"axis", "values"});
    if (s.has("axis")) {
      const auto name = s.read<std::string>("axis", "");
      cfg.sweep_axis = parse_sweep_axis(name);
      if (!cfg.sweep_axis) {
        fail(s.get("axis"),
             "'sweep.axis' must be ellipse-eps, ribbon-k, resolution or amplitude");
      }
    }
    if (s.has("values")) cfg.sweep_values = read_list(s.get("values"), "sweep.values");
  }

  if (top.has("output")) {
    const Section o(top.get("output"), "output", {"dir"});
    cfg.output_dir = o.read<std::string>("dir", cfg.output_dir);
  }

  if (top.has("run")) {
    const Section r(top.get("run"), "run", {"workers", "verbosity"});
    cfg.workers = r.read<int>("workers", cfg.workers);
    require(cfg.workers >= 1, top.get("run"), "'run.workers' must be at least 1");
    cfg.verbosity = r.read<int>("verbosity", cfg.verbosity);
  }

  if (top.has("testing")) {
    const Section t(top.get("testing"), "testing", {"bound_scale"});
    cfg.test_bound_scale = t.read<double>("bound_scale", cfg.test_bound_scale);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()), e.line(), e.column());
  }
}

}  // namespace twisttube
