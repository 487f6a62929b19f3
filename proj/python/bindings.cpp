#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qndsim/circuit.hpp"
#include "qndsim/metrics.hpp"
#include "qndsim/quad_expr.hpp"
#include "qndsim/scenario.hpp"
#include "qndsim/trajectory.hpp"

namespace py = pybind11;
using namespace qndsim;

namespace {

std::map<std::string, double> expr_terms(const LinearQuadExpr& e) { return e.terms(); }

py::dict map_to_dict(const QuadratureMap& m) {
  py::dict d;
  for (std::size_t k = 0; k < 4; ++k) {
    d[py::str(kOutputNames[k])] = expr_terms(m.outputs[k]);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_qndsim, m) {
  m.doc() = "Gaussian simulation of the offline-squeezing QND sum gate";

  py::enum_<Quadrature>(m, "Quadrature").value("X", Quadrature::X).value("P", Quadrature::P);
  py::enum_<Sector>(m, "Sector").value("X", Sector::X).value("P", Sector::P);
  py::enum_<LossPlacement>(m, "LossPlacement")
      .value("PRE_GATE", LossPlacement::PreGate)
      .value("POST_EXIT", LossPlacement::PostExit)
      .value("DISTRIBUTED", LossPlacement::Distributed);

  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init<Vector, Matrix>(), py::arg("mean"), py::arg("cov"))
      .def_property_readonly("n_modes", &GaussianState::n_modes)
      .def_property_readonly("mean", &GaussianState::mean)
      .def_property_readonly("cov", &GaussianState::cov)
      .def("variance", &GaussianState::variance, py::arg("mode"), py::arg("quadrature"))
      .def("mean_of", &GaussianState::mean_of, py::arg("mode"), py::arg("quadrature"))
      .def("reduced", [](const GaussianState& s, const std::vector<std::size_t>& modes) {
        return s.reduced(modes);
      })
      .def("__repr__", [](const GaussianState& s) {
        return "<GaussianState n_modes=" + std::to_string(s.n_modes()) + ">";
      });

  m.def("vacuum_state", &vacuum_state, py::arg("n_modes"));
  m.def("coherent_state", &coherent_state, py::arg("x"), py::arg("p"));
  m.def("squeezed_vacuum", &squeezed_vacuum, py::arg("r"), py::arg("angle") = 0.0,
        py::arg("anti_squeeze_excess") = 1.0);
  m.def("tensor", &tensor);
  m.def("squeeze", &squeeze, py::arg("state"), py::arg("mode"), py::arg("r"), py::arg("angle") = 0.0);
  m.def("displace", &displace, py::arg("state"), py::arg("mode"), py::arg("dx"), py::arg("dp"));
  m.def("beam_splitter",
        [](const GaussianState& s, std::size_t i, std::size_t j, double R) {
          return beam_splitter(s, i, j, R);
        },
        py::arg("state"), py::arg("i"), py::arg("j"), py::arg("reflectivity"));
  m.def("phase_rotate", &phase_rotate, py::arg("state"), py::arg("mode"), py::arg("phi"));
  m.def("loss_channel", &loss_channel, py::arg("state"), py::arg("mode"), py::arg("efficiency"));
  m.def("condition_on_x", &condition_on_x, py::arg("state"), py::arg("mode"), py::arg("readout"),
        py::arg("dark_variance") = 0.0);
  m.def("min_uncertainty_eigenvalue", &min_uncertainty_eigenvalue);
  m.def("is_physical", &is_physical, py::arg("state"), py::arg("tol") = 1e-9);
  m.def("db_to_variance", &db_to_variance);
  m.def("squeeze_parameter_from_db", &squeeze_parameter_from_db);

  m.def("gain_from_reflectivity", &gain_from_reflectivity);
  m.def("reflectivity_from_gain", &reflectivity_from_gain);
  m.def("ideal_qnd_map", [](double g) { return map_to_dict(ideal_qnd_map(g)); });
  m.def("finite_squeezing_map",
        [](double R, double ra, double rb) { return map_to_dict(finite_squeezing_map(R, ra, rb)); },
        py::arg("reflectivity"), py::arg("r_a"), py::arg("r_b"));

  py::class_<GateParams>(m, "GateParams")
      .def(py::init<>())
      .def_static("from_gain", &GateParams::from_gain, py::arg("gain"),
                  py::arg("squeezing_db_a") = -5.0, py::arg("squeezing_db_b") = -5.0)
      .def_readwrite("reflectivity", &GateParams::reflectivity)
      .def_readwrite("squeezing_db_a", &GateParams::squeezing_db_a)
      .def_readwrite("squeezing_db_b", &GateParams::squeezing_db_b)
      .def_readwrite("anti_squeeze_excess", &GateParams::anti_squeeze_excess)
      .def_property_readonly("gain", &GateParams::gain);

  py::class_<ImperfectionModel>(m, "ImperfectionModel")
      .def(py::init<>())
      .def_static("none", &ImperfectionModel::none)
      .def_readwrite("propagation_loss", &ImperfectionModel::propagation_loss)
      .def_readwrite("loss_placement", &ImperfectionModel::loss_placement)
      .def_readwrite("detector_quantum_efficiency", &ImperfectionModel::detector_quantum_efficiency)
      .def_readwrite("visibility", &ImperfectionModel::visibility)
      .def_readwrite("dark_noise_db_below_shot", &ImperfectionModel::dark_noise_db_below_shot)
      .def_readwrite("displacement_coupler_loss", &ImperfectionModel::displacement_coupler_loss)
      .def_readwrite("coupler_loss_enabled", &ImperfectionModel::coupler_loss_enabled)
      .def_readwrite("feedforward_gain_error", &ImperfectionModel::feedforward_gain_error)
      .def_readwrite("extra_inloop_loss", &ImperfectionModel::extra_inloop_loss)
      .def_property_readonly("homodyne_efficiency", &ImperfectionModel::homodyne_efficiency);

  py::class_<Circuit>(m, "Circuit")
      .def_property_readonly("n_inputs", &Circuit::n_inputs)
      .def_property_readonly("n_outputs", &Circuit::n_outputs)
      .def("__len__", [](const Circuit& c) { return c.elements().size(); })
      .def("to_json", [](const Circuit& c) { return circuit_to_json(c).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return circuit_from_json(nlohmann::json::parse(text));
      });

  m.def("build_qnd_gate", &build_qnd_gate, py::arg("params"),
        py::arg("imperfections") = ImperfectionModel::none());
  m.def("circuit_quadrature_map", [](const Circuit& c) { return map_to_dict(circuit_quadrature_map(c)); });
  m.def("run_covariance",
        [](const Circuit& c, const GaussianState& in) { return run_covariance(c, in); },
        py::arg("circuit"), py::arg("input"));

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_readonly("n_trajectories", &EnsembleResult::n_trajectories)
      .def_readonly("mean", &EnsembleResult::mean)
      .def_readonly("cov", &EnsembleResult::cov)
      .def_readonly("se_mean", &EnsembleResult::se_mean)
      .def_readonly("se_cov", &EnsembleResult::se_cov)
      .def_readonly("outcomes", &EnsembleResult::outcomes);
  m.def("run_ensemble",
        [](const Circuit& c, const GaussianState& in, std::size_t n, std::uint64_t seed,
           unsigned threads, bool keep_outcomes) {
          py::gil_scoped_release release;
          return run_ensemble(c, in, n, seed, {threads, keep_outcomes});
        },
        py::arg("circuit"), py::arg("input"), py::arg("n"), py::arg("seed"), py::arg("threads") = 1,
        py::arg("keep_outcomes") = false);
  m.def("max_z_score", [](const EnsembleResult& e, const GaussianState& s) {
    const auto r = z_score_report(e, s);
    return py::make_tuple(r.max_z, r.worst_entry);
  });

  py::class_<TransferCoefficients>(m, "TransferCoefficients")
      .def_readonly("signal", &TransferCoefficients::signal)
      .def_readonly("probe", &TransferCoefficients::probe)
      .def_property_readonly("sum", &TransferCoefficients::sum);
  m.def("transfer_coefficients",
        [](const Circuit& c, Sector s, double a) { return transfer_coefficients(c, s, a); },
        py::arg("gate"), py::arg("sector"), py::arg("amplitude") = 10.0);

  py::class_<ConditionalVariance>(m, "ConditionalVariance")
      .def_readonly("value", &ConditionalVariance::value)
      .def_readonly("g_opt", &ConditionalVariance::g_opt);
  m.def("conditional_variance", &conditional_variance, py::arg("output"), py::arg("sector"));
  m.def("cv_sweep", [](const GaussianState& s, Sector sec, const std::vector<double>& grid) {
    return cv_sweep(s, sec, grid);
  });

  py::class_<DuanResult>(m, "DuanResult")
      .def_readonly("sum", &DuanResult::sum)
      .def_readonly("bound", &DuanResult::bound)
      .def_readonly("entangled", &DuanResult::entangled);
  m.def("duan_simon", &duan_simon, py::arg("output"), py::arg("g"));

  m.def("evaluate_gate",
        [](const Circuit& c, double amplitude) {
          return report_to_json(evaluate_gate(c, {}, {}, amplitude)).dump();
        },
        py::arg("gate"), py::arg("amplitude") = 10.0,
        "Figures of merit as a JSON document.");

  m.def("scenario_defaults", [] { return scenario_to_json(ScenarioConfig{}).dump(); });
  m.def("reproduce_table",
        [](const std::string& scenario, bool calibrate) {
          const auto base = scenario_from_json(nlohmann::json::parse(scenario));
          const auto t = reproduce_table(base, calibrate);
          nlohmann::json rows = nlohmann::json::array();
          for (const auto& r : t.rows) {
            rows.push_back({{"G", r.gain},
                            {"sector", to_string(r.sector)},
                            {"quantity", r.quantity},
                            {"simulated", r.simulated},
                            {"reference", r.reference},
                            {"error", r.error},
                            {"within_band", r.within_band},
                            {"gated", r.gated}});
          }
          return nlohmann::json{{"extra_inloop_loss", t.calibration.extra_inloop_loss},
                                {"objective", t.calibration.objective},
                                {"all_within_band", t.all_within_band()},
                                {"rows", rows}}
              .dump();
        },
        py::arg("scenario") = "{}", py::arg("calibrate") = true);
}
