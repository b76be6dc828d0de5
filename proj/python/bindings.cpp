#include "donormag/errors.hpp"
#include "donormag/fit.hpp"
#include "donormag/qubit.hpp"
#include "donormag/spincore.hpp"
#include "donormag/thermo.hpp"
#include "donormag/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace donormag;

namespace {

py::dict fit_dict(const FitResult& r) {
  py::dict d;
  d["names"] = r.names;
  d["coefficients"] = r.coefficients;
  d["covariance"] = r.covariance;
  d["rss"] = r.rss;
  d["n"] = r.n;
  d["p"] = r.p;
  d["weighted"] = r.weighted;
  d["residuals"] = r.residuals;
  if (r.ratio) {
    d["ratio"] = r.ratio->value;
    d["ratio_sigma"] = r.ratio->sigma;
  } else {
    d["ratio"] = py::none();
    d["ratio_sigma"] = py::none();
  }
  return d;
}

DataSet make_dataset(const std::vector<double>& T_K, const std::vector<double>& y,
                     const std::optional<std::vector<double>>& sigma) {
  if (T_K.size() != y.size() || (sigma && sigma->size() != y.size())) {
    throw std::invalid_argument("T_K, y and sigma must have the same length");
  }
  DataSet data;
  for (std::size_t i = 0; i < y.size(); ++i) {
    DataRow row{T_K[i], y[i], std::nullopt};
    if (sigma) row.sigma = (*sigma)[i];
    data.rows.push_back(row);
  }
  data.normalize();
  return data;
}

FitModel make_model(const std::vector<SpinSpecies>& species, double B_mT, bool closed_form, bool offset) {
  FitModel m;
  for (const auto& s : species) m.basis.push_back({s, B_mT, closed_form});
  m.include_offset = offset;
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hyperfine donor spins, flux-qubit magnetometry and species decomposition.";
  m.attr("__version__") = std::string(version());

  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
  py::register_exception<UnsupportedSpecies>(m, "UnsupportedSpecies", PyExc_ValueError);
  py::register_exception<DegenerateBasis>(m, "DegenerateBasis", PyExc_ValueError);
  py::register_exception<OutOfBand>(m, "OutOfBand", PyExc_ValueError);

  py::class_<SpinSpecies>(m, "SpinSpecies")
      .def(py::init([](std::string name, double S, double I, double g, double A_MHz) {
             SpinSpecies s{std::move(name), S, I, g, A_MHz};
             s.validate();
             return s;
           }),
           py::arg("name"), py::arg("S"), py::arg("I"), py::arg("g"), py::arg("A_MHz"))
      .def_readonly("name", &SpinSpecies::name)
      .def_readonly("S", &SpinSpecies::S)
      .def_readonly("I", &SpinSpecies::I)
      .def_readonly("g", &SpinSpecies::g)
      .def_readonly("A_MHz", &SpinSpecies::A_MHz)
      .def_property_readonly("dimension", &SpinSpecies::dimension)
      .def("__repr__", [](const SpinSpecies& s) {
        return "SpinSpecies('" + s.name + "', S=" + py::repr(py::float_(s.S)).cast<std::string>() +
               ", I=" + py::repr(py::float_(s.I)).cast<std::string>() + ")";
      });

  m.def("bismuth", &bismuth);
  m.def("bare_spin_half", &bare_spin_half, py::arg("g") = 2.0);
  m.def("bundled_species", &bundled_species, py::arg("name"));

  m.def("hamiltonian", [](const SpinSpecies& s, double B_mT) { return build_hamiltonian(s, FieldPoint(B_mT)); },
        py::arg("species"), py::arg("B_mT"), "Spin Hamiltonian in MHz, product basis |mS, mI>.");
  m.def(
      "eigensystem",
      [](const Eigen::MatrixXd& H) {
        const auto es = eigensystem(H);
        return py::make_tuple(es.energies, es.vectors);
      },
      py::arg("H"), "Cyclic Jacobi diagonalization: (ascending energies, eigenvector columns).");
  m.def(
      "energy_levels",
      [](const SpinSpecies& s, double B_mT) { return eigensystem(build_hamiltonian(s, FieldPoint(B_mT))).energies; },
      py::arg("species"), py::arg("B_mT"));
  m.def(
      "breit_rabi_levels", [](const SpinSpecies& s, double B_mT) { return breit_rabi_levels(s, FieldPoint(B_mT)); },
      py::arg("species"), py::arg("B_mT"));
  m.def("degeneracies", &degeneracies, py::arg("energies"), py::arg("tolerance") = 1e-6);

  py::class_<ResonanceLine>(m, "ResonanceLine")
      .def_readonly("B_mT", &ResonanceLine::B_mT)
      .def_readonly("lower", &ResonanceLine::i)
      .def_readonly("upper", &ResonanceLine::j)
      .def_readonly("intensity", &ResonanceLine::intensity)
      .def_readonly("g_eff", &ResonanceLine::g_eff);
  m.def(
      "resonance_fields",
      [](const SpinSpecies& s, double f_mw_GHz, double B_start_mT, double B_stop_mT, int grid_points,
         double min_relative_intensity) {
        ResonanceSearch search;
        search.B_start_mT = B_start_mT;
        search.B_stop_mT = B_stop_mT;
        search.grid_points = grid_points;
        return strong_lines(resonance_fields(s, f_mw_GHz, search), min_relative_intensity);
      },
      py::arg("species"), py::arg("f_mw_GHz"), py::arg("B_start_mT") = 0.0, py::arg("B_stop_mT") = 1000.0,
      py::arg("grid_points") = 2000, py::arg("min_relative_intensity") = 0.1);

  m.def(
      "populations",
      [](const SpinSpecies& s, double B_mT, double T_K) {
        return populations(eigensystem(build_hamiltonian(s, FieldPoint(B_mT))), T_K);
      },
      py::arg("species"), py::arg("B_mT"), py::arg("T_K"));
  m.def("magnetization", &magnetization_exact, py::arg("species"), py::arg("B_mT"), py::arg("T_K"),
        "Normalized magnetization -<Sz>/S by exact diagonalization.");
  m.def(
      "magnetization_closed_form",
      [](const SpinSpecies& s, double B_mT, double T_K) { return magnetization_closed_form(s, B_mT, T_K).value; },
      py::arg("species"), py::arg("B_mT"), py::arg("T_K"));
  m.def(
      "magnetization_curie", [](double g, double B_mT, double T_K) { return magnetization_curie(g, B_mT, T_K).value; },
      py::arg("g"), py::arg("B_mT"), py::arg("T_K"));
  m.def("reduced_inverse_temperature", &reduced_inverse_temperature, py::arg("species"), py::arg("T_K"));
  m.def(
      "find_kink",
      [](const SpinSpecies& s, double B_mT, double T_lo_K, double T_hi_K) {
        const auto k = find_kink(s, B_mT, T_lo_K, T_hi_K);
        return py::make_tuple(k.T_K, k.x);
      },
      py::arg("species"), py::arg("B_mT"), py::arg("T_lo_K"), py::arg("T_hi_K"), "(T_K, x) of the crossover kink.");

  py::class_<QubitParams>(m, "QubitParams")
      .def(py::init([](double Ip_nA, double Delta_GHz, double loop_area_um2, double effective_depth_um) {
             QubitParams q{Ip_nA, Delta_GHz, loop_area_um2, effective_depth_um};
             q.validate();
             return q;
           }),
           py::arg("Ip_nA") = 459.0, py::arg("Delta_GHz") = 1.91, py::arg("loop_area_um2") = 5.0,
           py::arg("effective_depth_um") = 1.0)
      .def_readonly("Ip_nA", &QubitParams::Ip_nA)
      .def_readonly("Delta_GHz", &QubitParams::Delta_GHz)
      .def_readonly("loop_area_um2", &QubitParams::loop_area_um2)
      .def_readonly("effective_depth_um", &QubitParams::effective_depth_um);
  m.def("flux_slope", &flux_slope, py::arg("qubit"));
  m.def("qubit_frequency", &qubit_frequency, py::arg("qubit"), py::arg("flux_mPhi0"));
  m.def("flux_from_frequency", &flux_from_frequency, py::arg("qubit"), py::arg("f_GHz"));
  m.def("responsivity", &responsivity, py::arg("qubit"), py::arg("flux_mPhi0"));
  m.def("operating_point", &operating_point, py::arg("qubit"), py::arg("fraction") = 0.99);
  m.def("detection_volume", &detection_volume, py::arg("qubit"));
  m.def("volume_sensitivity", &volume_sensitivity, py::arg("spins"), py::arg("volume_um3"));
  m.def(
      "spin_sensitivity",
      [](const QubitParams& q, double flux_noise, double per_spin_flux, double integration_cap_s) {
        SensitivityInputs in{flux_noise, per_spin_flux, integration_cap_s, std::nullopt};
        in.validate();
        const auto r = spin_sensitivity(q, in);
        py::dict d;
        d["spins_per_rtHz"] = r.spins_per_rtHz;
        d["min_detectable_spins"] = r.min_detectable_spins;
        d["operating_point_mPhi0"] = r.operating_point_mPhi0;
        d["operating_frequency_GHz"] = r.operating_frequency_GHz;
        return d;
      },
      py::arg("qubit"), py::arg("flux_noise_uPhi0_per_rtHz"), py::arg("per_spin_flux_uPhi0"),
      py::arg("integration_cap_s") = 1.0);

  m.def(
      "fit",
      [](const std::vector<double>& T_K, const std::vector<double>& y, const std::vector<SpinSpecies>& species,
         double B_mT, std::optional<std::vector<double>> sigma, bool closed_form, bool offset) {
        return fit_dict(fit_linear(make_dataset(T_K, y, sigma), make_model(species, B_mT, closed_form, offset)));
      },
      py::arg("T_K"), py::arg("y"), py::arg("species"), py::arg("B_mT") = 0.2, py::arg("sigma") = py::none(),
      py::arg("closed_form") = false, py::arg("offset") = true,
      "Linear least squares of y on an offset plus one magnetization curve per species.");
  m.def(
      "synthetic",
      [](const std::vector<double>& T_K, const std::vector<SpinSpecies>& species, double ratio, double scale,
         double noise_sd, std::uint64_t seed, double B_mT, double reference_T_K) {
        const auto model = make_model(species, B_mT, false, true);
        const auto truth = referenced_truth(model, ratio, scale, reference_T_K);
        const auto data = generate_synthetic(model, truth, T_K, noise_sd, seed, reference_T_K);
        std::vector<double> T, y;
        for (const auto& row : data.rows) {
          T.push_back(row.T_K);
          y.push_back(row.y);
        }
        return py::make_tuple(T, y);
      },
      py::arg("T_K"), py::arg("species"), py::arg("ratio") = 0.873, py::arg("scale") = 1000.0,
      py::arg("noise_sd") = 0.0036, py::arg("seed") = 20240101, py::arg("B_mT") = 0.2,
      py::arg("reference_T_K") = 0.2, "Seeded two-species flux-shift curve: (T_K, y).");
}
