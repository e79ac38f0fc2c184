#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qps/duality.hpp"
#include "qps/measure.hpp"
#include "qps/pipeline.hpp"

namespace py = pybind11;
using namespace qps;

namespace {

ModelParams cosine_model(double coupling, const Frequency& frequency, const Phase& phase) {
  return ModelParams::make(cosine_potential(static_cast<int>(frequency.size())), coupling, frequency, phase);
}

}  // namespace

PYBIND11_MODULE(_qps, m) {
  m.doc() = "Quasi-periodic Schrodinger operators and their Aubry duals";

  py::register_exception<Error>(m, "QpsError");

  py::class_<ModelParams>(m, "Model")
      .def(py::init(&cosine_model), py::arg("coupling"), py::arg("frequency"), py::arg("phase"),
           "Cosine sampling function 2 sum_j cos(2 pi y_j) in dimension len(frequency).")
      .def_property_readonly("coupling", [](const ModelParams& p) { return p.coupling; })
      .def_property_readonly("frequency", [](const ModelParams& p) { return p.frequency; })
      .def_property_readonly("phase", [](const ModelParams& p) { return p.phase; })
      .def_property_readonly("dimension", &ModelParams::dimension);

  m.def("dual_matrix", [](const ModelParams& p, int radius) {
    return Matrix(build_dual(p, origin_cube(p.dimension(), radius)).matrix);
  }, py::arg("model"), py::arg("radius"), "Dense dual operator on the cube of the given radius about 0.");

  m.def("dual_spectrum", [](const ModelParams& p, int radius) {
    return Vector(eig_sym(build_dual(p, origin_cube(p.dimension(), radius))).eigenvalues);
  }, py::arg("model"), py::arg("radius"), "Ascending eigenvalues of the dual box.");

  m.def("conjugation_mismatch", [](const ModelParams& p, int theta_points) {
    return fourier_conjugation_check(p, theta_points).mismatch;
  }, py::arg("model"), py::arg("theta_points") = 8);

  m.def("initial_step", [](const ModelParams& p, int radius, double kappa) {
    const auto c = initial_step(p, radius, kappa);
    return py::dict(py::arg("energy") = c.energy, py::arg("energy_diff") = c.energy_diff,
                    py::arg("vector_diff") = c.vector_diff, py::arg("eigenvector") = c.eigenvector);
  }, py::arg("model"), py::arg("radius"), py::arg("kappa"));

  m.def("multiscale", [](const ModelParams& p, std::vector<std::int64_t> scales, double kappa) {
    MultiscaleOptions o;
    o.kappa = kappa;
    const auto t = run_multiscale(p, ScaleSchedule::from_list(std::move(scales), p.coupling), o);
    py::list levels;
    for (const auto& c : t.levels)
      levels.append(py::dict(py::arg("scale") = c.scale, py::arg("energy") = c.energy,
                             py::arg("energy_diff") = c.energy_diff, py::arg("vector_diff") = c.vector_diff,
                             py::arg("residual") = c.residual));
    py::dict out(py::arg("levels") = levels, py::arg("truncated") = t.truncated,
                 py::arg("stop_reason") = t.stop_reason);
    if (!t.levels.empty()) out["gradient"] = eigenvalue_gradient(t.levels.back(), p);
    return out;
  }, py::arg("model"), py::arg("scales"), py::arg("kappa") = 0.05);

  m.def("arcsine_mass", &arcsine_mass, py::arg("a"), py::arg("b"));
  m.def("sha256_hex", &sha256_hex, py::arg("data"));
  m.def("subcommands", &subcommands);

  // Records cross the boundary as JSON text; the package decodes them.
  m.def("_run_json", [](const std::filesystem::path& config, const std::string& subcommand) {
    return run(RunConfig::load(config), subcommand).to_json().dump();
  }, py::arg("config"), py::arg("subcommand"));
}
