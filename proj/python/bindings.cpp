#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "axsq/cavity.hpp"
#include "axsq/errors.hpp"
#include "axsq/estimation.hpp"
#include "axsq/langevin.hpp"
#include "axsq/phasespace.hpp"
#include "axsq/scan.hpp"
#include "axsq/welch.hpp"

namespace py = pybind11;
using namespace axsq;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Squeezed-receiver haloscope models";

  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<DegenerateStateError>(m, "DegenerateStateError", numerical.ptr());
  py::register_exception<UnboundedBandwidthError>(m, "UnboundedBandwidthError", numerical.ptr());
  py::register_exception<QuadratureError>(m, "QuadratureError", numerical.ptr());
  py::register_exception<OptimizationError>(m, "OptimizationError", numerical.ptr());

  // Phase space.
  py::enum_<Quadrature>(m, "Quadrature").value("X", Quadrature::X).value("Y", Quadrature::Y);

  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("mean"), py::arg("cov"))
      .def_static("vacuum", &GaussianState::vacuum, py::arg("n_modes"))
      .def_property_readonly("n_modes", &GaussianState::n_modes)
      .def_property_readonly("mean", &GaussianState::mean)
      .def_property_readonly("cov", &GaussianState::cov)
      .def("__repr__", [](const GaussianState& s) {
        return "GaussianState(n_modes=" + std::to_string(s.n_modes()) + ")";
      });

  m.def("gain_from_r", &gain_from_r, py::arg("r"));
  m.def("r_from_gain", &r_from_gain, py::arg("gain"));
  m.def("symplectic_form", &symplectic_form, py::arg("n_modes"));
  m.def("symplectic_eigenvalues", &symplectic_eigenvalues, py::arg("cov"));
  m.def("apply_symplectic", &apply_symplectic, py::arg("state"), py::arg("transform"));
  m.def("displace", &displace, py::arg("state"), py::arg("mode"), py::arg("dx"), py::arg("dy"));
  m.def("squeeze_single", &squeeze_single, py::arg("state"), py::arg("mode"), py::arg("r"));
  m.def("squeeze_two_mode", &squeeze_two_mode, py::arg("state"), py::arg("mode_a"), py::arg("mode_b"),
        py::arg("r"));
  m.def("loss_channel", &loss_channel, py::arg("state"), py::arg("mode"), py::arg("eta"),
        py::arg("n_thermal") = 0.0);
  m.def(
      "measure_quadrature",
      [](const GaussianState& s, int mode, Quadrature q) {
        const auto r = measure_quadrature_stats(s, mode, q);
        return py::make_tuple(r.mean, r.variance);
      },
      py::arg("state"), py::arg("mode"), py::arg("quadrature"), "(mean, variance) of a homodyne measurement");
  m.def("linear_combination_variance", &linear_combination_variance, py::arg("state"), py::arg("coeffs"));
  m.def("wigner", &wigner_eval, py::arg("state"), py::arg("point"));

  // Estimation.
  m.def("csl_variance", &csl_variance, py::arg("t_s"));
  m.def("squeezed_variance", &squeezed_variance, py::arg("gain"), py::arg("t_s"));
  m.def(
      "two_mode_variances",
      [](double r, double t_s) {
        const auto v = two_mode_variances(r, t_s);
        return py::make_tuple(v.var_fy, v.var_fx);
      },
      py::arg("r"), py::arg("t_s"), "(var_fy, var_fx)");
  m.def(
      "dissipative_variance", [](double kappa, double t_s) { return dissipative_variance(kappa, t_s).value; },
      py::arg("kappa"), py::arg("t_s"));
  m.def("steady_state_mean_x", &steady_state_mean_x, py::arg("f_y"), py::arg("kappa"));

  // Cavity.
  py::class_<CavityParams>(m, "CavityParams")
      .def(py::init([](double kappa_m, double kappa_loss, double kappa_ax) {
             CavityParams p{kappa_m, kappa_loss, kappa_ax};
             p.validate();
             return p;
           }),
           py::arg("kappa_m") = 1.0, py::arg("kappa_loss") = 1.0, py::arg("kappa_ax") = 0.0)
      .def_readwrite("kappa_m", &CavityParams::kappa_m)
      .def_readwrite("kappa_loss", &CavityParams::kappa_loss)
      .def_readwrite("kappa_ax", &CavityParams::kappa_ax)
      .def_property_readonly("kappa", &CavityParams::kappa);

  py::class_<ReceiverConfig>(m, "ReceiverConfig")
      .def(py::init([](double gain, double n_thermal, double n_ax) {
             ReceiverConfig c;
             c.gain = GainProfile(gain);
             c.n_thermal = n_thermal;
             if (n_ax > 0.0) c.axion = AxionLineshape::flat(n_ax);
             c.validate();
             return c;
           }),
           py::arg("gain") = 1.0, py::arg("n_thermal") = 0.0, py::arg("n_ax") = 0.0,
           "Flat squeezing gain and, for n_ax > 0, a flat axion spectrum of that occupation.")
      .def_readwrite("n_thermal", &ReceiverConfig::n_thermal);

  m.def("susceptibility", &susceptibility, py::arg("omega"), py::arg("params"));
  m.def("output_spectrum", &output_spectrum, py::arg("omega"), py::arg("params"), py::arg("receiver"));
  m.def("sensitivity", &sensitivity, py::arg("omega"), py::arg("params"), py::arg("receiver"));
  m.def("sensitivity_halfwidth", &sensitivity_halfwidth, py::arg("params"), py::arg("receiver"));
  m.def("thermal_occupation", &thermal_occupation, py::arg("omega_c"), py::arg("temperature"));

  // Scan.
  py::class_<ScanConfig>(m, "ScanConfig")
      .def(py::init([](CavityParams params, ReceiverConfig receiver, double delta_a, double t_av_constant) {
             ScanConfig c{params, receiver, delta_a, t_av_constant};
             c.validate();
             return c;
           }),
           py::arg("params"), py::arg("receiver"), py::arg("delta_a") = 1e-6, py::arg("t_av_constant") = 1.0);
  py::class_<ScanOptimum>(m, "ScanOptimum")
      .def_readonly("kappa_m_opt", &ScanOptimum::kappa_m_opt)
      .def_readonly("gain_opt", &ScanOptimum::gain_opt)
      .def_readonly("rate_opt", &ScanOptimum::rate_opt)
      .def_readonly("advantage", &ScanOptimum::advantage);
  m.def("bandwidth", &bandwidth, py::arg("config"));
  m.def("averaging_time", &averaging_time, py::arg("config"));
  m.def("scan_rate_closed_form", &scan_rate_closed_form, py::arg("gain"), py::arg("kappa_m"), py::arg("config"));
  m.def("scan_rate_numeric", &scan_rate_numeric, py::arg("gain"), py::arg("kappa_m"), py::arg("config"));
  m.def("optimize_kappa_m", &optimize_kappa_m, py::arg("gain"), py::arg("config"));
  m.def("quantum_advantage", &quantum_advantage, py::arg("gain"), py::arg("config"));

  // Langevin Monte Carlo.
  m.def(
      "simulate_output_psd",
      [](const CavityParams& params, const ReceiverConfig& receiver, double dt, std::size_t n_steps,
         std::size_t n_trajectories, std::uint64_t seed, std::size_t segment_length, double overlap) {
        SimulationConfig sim;
        sim.params = params;
        sim.cfg = receiver;
        sim.dt = dt;
        sim.n_steps = n_steps;
        sim.n_trajectories = n_trajectories;
        sim.seed = seed;
        const auto est = [&] {
          py::gil_scoped_release release;
          return simulate_output_psd(sim, {segment_length, overlap});
        }();
        return py::make_tuple(est.spectrum.omegas, est.spectrum.values, est.segments);
      },
      py::arg("params"), py::arg("receiver"), py::arg("dt"), py::arg("n_steps"), py::arg("n_trajectories"),
      py::arg("seed") = 0, py::arg("segment_length") = 1024, py::arg("overlap") = 0.5,
      "Welch estimate of the measurement-port x output: (omegas, psd, segments).");
}
