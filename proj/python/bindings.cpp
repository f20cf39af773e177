#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qgr/errors.hpp"
#include "qgr/fixed_point.hpp"
#include "qgr/invariant_sets.hpp"
#include "qgr/laplace.hpp"
#include "qgr/qg_sim.hpp"
#include "qgr/quadrature.hpp"
#include "qgr/renorm.hpp"
#include "qgr/special_fns.hpp"

namespace py = pybind11;
using namespace qgr;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Renormalization fixed points and blow-up simulation for the 1D QG model";

  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<BracketError>(m, "BracketError", numerical.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", numerical.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", numerical.ptr());
  py::register_exception<DomainError>(m, "DomainError", numerical.ptr());
  py::register_exception<RangeError>(m, "RangeError", numerical.ptr());
  py::register_exception<SingularIntegrand>(m, "SingularIntegrand", numerical.ptr());
  py::register_exception<UnstableInversion>(m, "UnstableInversion", numerical.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<GridSpec>(m, "GridSpec")
      .def_readonly("half_width", &GridSpec::half_width)
      .def_readonly("n_points", &GridSpec::n_points)
      .def_readonly("spacing", &GridSpec::spacing)
      .def("nodes", &GridSpec::nodes);
  m.def("make_grid", &make_grid, py::arg("L"), py::arg("n_points"));
  m.def("default_grid", &default_grid);

  py::enum_<Repr>(m, "Repr").value("Psi", Repr::Psi).value("Phi", Repr::Phi);

  py::class_<EvenFn>(m, "EvenFn")
      .def(py::init<GridSpec, std::vector<double>, double, Repr>(), py::arg("grid"), py::arg("values"),
           py::arg("tail_rate"), py::arg("repr") = Repr::Psi)
      .def_property_readonly("grid", &EvenFn::grid)
      .def_property_readonly("values", [](const EvenFn& f) {
        return std::vector<double>(f.values().begin(), f.values().end());
      })
      .def_property_readonly("tail_rate", &EvenFn::tail_rate)
      .def_property_readonly("repr", &EvenFn::repr)
      .def("__call__", &EvenFn::operator());
  m.def("lp_norm", &lp_norm, py::arg("f"), py::arg("p"));
  m.def("weighted_integral_I", &weighted_integral_I, py::arg("f"), py::arg("sigma"),
        py::arg("local_order_hint") = 0.0);

  py::class_<RenormParams>(m, "RenormParams")
      .def(py::init([](double beta, double gamma) { return RenormParams{beta, gamma}; }), py::arg("beta"),
           py::arg("gamma") = 2.0)
      .def_readwrite("beta", &RenormParams::beta)
      .def_readwrite("gamma", &RenormParams::gamma);
  py::class_<Residual>(m, "Residual").def_readonly("lp", &Residual::lp).def_readonly("sup", &Residual::sup);
  m.def("apply_psi", &apply_psi, py::arg("f"), py::arg("params"));
  m.def("residual_norm", &residual_norm, py::arg("f"), py::arg("params"), py::arg("p") = 2.0);
  m.def("j_profile", &j_profile, py::arg("f"), py::arg("beta"));

  m.def("erf", &qgr::erf);
  m.def("gamma_fn", &gamma_fn);
  m.def("lower_incomplete_gamma", &lower_incomplete_gamma);
  m.def("kummer_m", [](double a, double b, double z) { return kummer_m({a, b, z}); });
  m.def("tricomi_u", [](double a, double b, double z) { return tricomi_u({a, b, z}).value; });
  m.def("mu0_threshold", &mu0_threshold, py::arg("a"), py::arg("k"), py::arg("sigma"), py::arg("beta0"));

  py::enum_<TailClass>(m, "TailClass")
      .value("Decaying", TailClass::Decaying)
      .value("Growing", TailClass::Growing)
      .value("Indeterminate", TailClass::Indeterminate);
  py::class_<LimitOdeSolution>(m, "LimitOdeSolution")
      .def_readonly("nu", &LimitOdeSolution::nu)
      .def_readonly("samples", &LimitOdeSolution::samples)
      .def_readonly("tail_class", &LimitOdeSolution::tail_class)
      .def_readonly("growth_indicator", &LimitOdeSolution::growth_indicator);
  m.def("march_limit_ode", &march_limit_ode, py::arg("nu"), py::arg("grid") = default_grid(),
        py::arg("allow_outside_search_range") = false);
  m.def("find_nu", &find_nu, py::arg("lo"), py::arg("hi"), py::arg("tol"), py::arg("grid") = default_grid());
  m.def(
      "scan_nu",
      [](double lo, double hi, std::size_t count) { return scan_nu(lo, hi, count).transitions; },
      py::arg("lo"), py::arg("hi"), py::arg("count"));

  m.def("numeric_laplace", py::overload_cast<const LimitOdeSolution&, double>(&numeric_laplace));
  m.def("closed_form_hat",
        [](double s, double nu, double c1, double c2) { return closed_form_hat(s, nu, c1, c2); });
  m.def(
      "inverse_laplace",
      [](std::function<double(double)> F, double eta, const std::string& method) {
        LaplaceTransform t{F, nullptr};
        if (method == "stehfest") return inverse_laplace(t, eta, InversionMethod::GaverStehfest);
        if (method != "talbot") throw InvalidArgument("method must be 'stehfest' or 'talbot'");
        throw InvalidArgument("the Talbot contour needs a complex transform; use 'stehfest' from Python");
      },
      py::arg("F"), py::arg("eta"), py::arg("method") = "stehfest");

  m.def("candidate_member", &candidate_member, py::arg("k"), py::arg("nu_exp"), py::arg("a"),
        py::arg("grid") = default_grid());
  m.def(
      "invariance_pass_rate",
      [](std::size_t n_samples, std::uint64_t seed, double mu_factor) {
        InvarianceConfig cfg;
        cfg.n_samples = n_samples;
        cfg.seed = seed;
        cfg.bounds.mu = mu_factor * mu0_threshold(cfg.bounds.a, cfg.bounds.k, cfg.bounds.sigma, cfg.beta0);
        auto rep = invariance_experiment(cfg);
        std::size_t tested = 0, passed = 0;
        for (const auto& t : rep.tallies) {
          tested += t.envelope_tested + t.weighted_tested;
          passed += t.envelope_pass + t.weighted_pass;
        }
        return tested ? static_cast<double>(passed) / static_cast<double>(tested) : 1.0;
      },
      py::arg("n_samples") = 50, py::arg("seed") = 7, py::arg("mu_factor") = 1.05);

  py::class_<ScalingReport>(m, "ScalingReport")
      .def_readonly("T_minus_t", &ScalingReport::T_minus_t)
      .def_readonly("energies", &ScalingReport::energies)
      .def_readonly("enstrophies", &ScalingReport::enstrophies)
      .def_readonly("energy_slope", &ScalingReport::energy_slope)
      .def_readonly("enstrophy_slope", &ScalingReport::enstrophy_slope)
      .def_readonly("reference_energy_slope", &ScalingReport::reference_energy_slope)
      .def_readonly("reference_enstrophy_slope", &ScalingReport::reference_enstrophy_slope)
      .def_readonly("max_profile_error", &ScalingReport::max_profile_error)
      .def_readonly("degenerate", &ScalingReport::degenerate)
      .def_readonly("failed", &ScalingReport::failed);
  m.def(
      "simulate",
      [](const EvenFn& psi, double T, double t_end_frac, std::size_t n_samples, bool nonlinear,
         std::size_t n_y) {
        auto g = default_sim_grid(T);
        if (n_y != 0) g = make_grid(g.half_width, n_y);
        auto st = init_state(psi, T, g);
        st.nonlinear = nonlinear;
        return run_and_fit(st, t_end_frac, n_samples);
      },
      py::arg("psi"), py::arg("T") = 1.0, py::arg("t_end_frac") = 0.9, py::arg("n_samples") = 20,
      py::arg("nonlinear") = true, py::arg("n_y") = 0);
}
