#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twisttube/bound.hpp"
#include "twisttube/commands.hpp"
#include "twisttube/config.hpp"
#include "twisttube/direct3d.hpp"
#include "twisttube/discretize.hpp"
#include "twisttube/eigensolve.hpp"
#include "twisttube/errors.hpp"

namespace py = pybind11;
using namespace twisttube;

namespace {

// Node coordinates as an n x 2 array.
Eigen::MatrixX2d coordinates(const CrossSection& cs) {
  Eigen::MatrixX2d xy(cs.size(), 2);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    xy(k, 0) = cs.node(k).t2;
    xy(k, 1) = cs.node(k).t3;
  }
  return xy;
}

py::dict cross_section(const std::string& config_text) {
  const RunConfig c = parse_config(config_text);
  const CrossSection cs = build_cross_section(c.shape, c.h, c.boundary);
  const GroundState gs = ground_state(assemble_h_beta0(cs, c.beta0), make_eigen_options(c));
  py::dict out;
  out["h"] = cs.spacing();
  out["d"] = radius(cs);
  out["energy"] = gs.energy;
  out["f"] = gs.f;
  out["coordinates"] = coordinates(cs);
  out["angular_energy_ratio"] = angular_energy_ratio(cs, gs.f);
  out["ground_cluster"] = gs.cluster_size;
  return out;
}

std::string bound(const std::string& config_text) {
  const RunConfig c = parse_config(config_text);
  BoundReport r;
  {
    py::gil_scoped_release release;
    r = compute_bound(c.shape, c.h, make_profile(c), make_bound_config(c), c.boundary);
  }
  return bound_report_json(r);
}

std::string direct(const std::string& config_text) {
  const RunConfig c = parse_config(config_text);
  const CrossSection cs = build_cross_section(c.shape, c.h, c.boundary);
  DirectResult d;
  {
    py::gil_scoped_release release;
    d = direct_spectrum(cs, make_profile(c), make_direct_config(c));
  }
  return direct_result_json(d);
}

std::tuple<int, std::string, std::string> run(const std::string& command,
                                              const std::string& config_text,
                                              const std::string& out_dir) {
  RunConfig c;
  std::ostringstream out;
  std::ostringstream err;
  try {
    c = parse_config(config_text);
  } catch (const ConfigError& e) {
    return {kExitConfig, "", e.what()};
  }
  if (!out_dir.empty()) c.output_dir = out_dir;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_command(command, c, out, err);
  }
  return {code, out.str(), err.str()};
}

}  // namespace

PYBIND11_MODULE(_twisttube, m) {
  m.doc() = "Lieb-Thirring bounds for twisted-tube Dirichlet Laplacians";

  auto base = py::register_exception<Error>(m, "TwistTubeError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InvalidSpec>(m, "InvalidSpec", base.ptr());
  py::register_exception<InvalidC>(m, "InvalidC", base.ptr());
  py::register_exception<SigmaOutOfRange>(m, "SigmaOutOfRange", base.ptr());

  m.def("gamma_beta0", &gamma_beta0, py::arg("beta0"), py::arg("d"));
  m.def("alpha_sq", &alpha_sq, py::arg("gamma"), py::arg("c"));
  m.def("lt_constant", &lt_constant, py::arg("sigma"));
  m.def(
      "trace_neg_power",
      [](const std::vector<double>& v, double p) { return trace_neg_power(v, p); },
      py::arg("eigenvalues"), py::arg("p"));
  m.def(
      "mu",
      [](double beta0, double amplitude, double half_width, double s) {
        return TwistProfile(beta0, amplitude, half_width).mu(s);
      },
      py::arg("beta0"), py::arg("amplitude"), py::arg("half_width"), py::arg("s"));
  m.def("loglog_slope", &loglog_slope, py::arg("x"), py::arg("y"));

  m.def("cross_section", &cross_section, py::arg("config"),
        "Ground state of the cross-section operator for a YAML config.");
  m.def("bound_json", &bound, py::arg("config"), "BoundReport as JSON text.");
  m.def("direct_json", &direct, py::arg("config"), "Truncated 3D spectrum as JSON text.");
  m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("out_dir") = "",
        "Runs a CLI command; returns (exit code, stdout, stderr).");
}
