// Python bindings for the jlab core library.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jlab/badset.hpp"
#include "jlab/errors.hpp"
#include "jlab/family.hpp"
#include "jlab/floquet.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/spectral.hpp"
#include "jlab/theta_grid.hpp"
#include "jlab/transport.hpp"
#include "jlab/windowed_state.hpp"

namespace py = pybind11;
using namespace jlab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ballistic-transport laboratory for periodic and limit-periodic "
            "Jacobi matrices";

  // ---- lattice-side basics --------------------------------------------
  py::class_<PeriodicJacobi>(m, "PeriodicJacobi")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("a"), py::arg("b"))
      .def_static("free_operator", &PeriodicJacobi::free_operator, py::arg("q"))
      .def_property_readonly("q", &PeriodicJacobi::q)
      .def_property_readonly("a", &PeriodicJacobi::a)
      .def_property_readonly("b", &PeriodicJacobi::b)
      .def("reinterpret", &PeriodicJacobi::reinterpret, py::arg("q_fine"))
      .def("is_r_bounded", &PeriodicJacobi::is_r_bounded, py::arg("R"))
      .def("tight_r_bound", &PeriodicJacobi::tight_r_bound)
      .def("__eq__", [](const PeriodicJacobi& x, const PeriodicJacobi& y) { return x == y; });

  m.def("coefficient_norm_bound",
        py::overload_cast<const PeriodicJacobi&, const PeriodicJacobi&>(&coefficient_norm_bound),
        py::arg("j1"), py::arg("j2"));

  py::class_<WindowedState>(m, "WindowedState")
      .def(py::init<int, int>(), py::arg("lo"), py::arg("hi"))
      .def_static("delta", &WindowedState::delta, py::arg("site"), py::arg("lo"), py::arg("hi"))
      .def_property_readonly("lo", &WindowedState::lo)
      .def_property_readonly("hi", &WindowedState::hi)
      .def("set", &WindowedState::set, py::arg("n"), py::arg("value"))
      .def("__getitem__", [](const WindowedState& s, int n) { return s[n]; })
      .def("norm", &WindowedState::norm)
      .def("norm_sq", &WindowedState::norm_sq)
      .def("l1_norm", &WindowedState::l1_norm)
      .def("normalize", &WindowedState::normalize)
      .def("inner", &WindowedState::inner, py::arg("other"))
      .def("dist", &WindowedState::dist, py::arg("other"))
      .def("amplitudes", [](const WindowedState& s) {
        std::vector<cplx> out;
        for (int n = s.lo(); n <= s.hi(); ++n) out.push_back(s[n]);
        return out;
      });

  m.def("apply_operator", &apply_operator, py::arg("J"), py::arg("phi"));
  m.def("apply_momentum", &apply_momentum, py::arg("J"), py::arg("phi"));
  m.def("apply_position", &apply_position, py::arg("phi"));
  m.def("qp_local_error", &qp_local_error, py::arg("lip_v"), py::arg("omega"), py::arg("p"),
        py::arg("q"), py::arg("half_width"));

  // ---- theta grids and Floquet fibers ---------------------------------
  py::class_<ThetaGrid>(m, "ThetaGrid")
      .def_static("plain", &ThetaGrid::plain, py::arg("m"))
      .def_static("punctured", &ThetaGrid::punctured, py::arg("m"))
      .def_property_readonly("m", &ThetaGrid::m)
      .def("node", &ThetaGrid::node, py::arg("j"))
      .def("nodes", &ThetaGrid::nodes)
      .def("is_punctured", &ThetaGrid::is_punctured);

  m.def("fiber_matrix", &fiber_matrix, py::arg("J"), py::arg("theta"));
  m.def("fiber_matrix_derivative", &fiber_matrix_derivative, py::arg("J"), py::arg("theta"));
  m.def("momentum_fiber", &momentum_fiber, py::arg("J"), py::arg("theta"));

  py::class_<FloquetFiber>(m, "FloquetFiber")
      .def_readonly("theta", &FloquetFiber::theta)
      .def_readonly("matrix", &FloquetFiber::matrix)
      .def_readonly("eigenvalues", &FloquetFiber::eigenvalues)
      .def_readonly("eigenvectors", &FloquetFiber::eigenvectors)
      .def_readonly("slopes", &FloquetFiber::slopes);

  m.def("diagonalize_fiber", &diagonalize_fiber, py::arg("J"), py::arg("theta"));

  // ---- band structure and slope bounds --------------------------------
  py::class_<BandCurves>(m, "BandCurves")
      .def_readonly("lambda_", &BandCurves::lambda)
      .def_readonly("slope", &BandCurves::slope)
      .def_property_readonly("nodes", [](const BandCurves& bc) { return bc.grid.nodes(); });

  m.def("band_curves", &band_curves, py::arg("J"), py::arg("grid"));
  m.def("discriminant", &discriminant, py::arg("J"), py::arg("lam"));
  m.def("discriminant_derivative", &discriminant_derivative, py::arg("J"), py::arg("lam"));
  m.def("slope_via_discriminant", &slope_via_discriminant, py::arg("J"), py::arg("theta"),
        py::arg("k"));

  py::class_<LastConstant>(m, "LastConstant")
      .def_readonly("c1_emp", &LastConstant::c1_emp)
      .def_readonly("grid_m", &LastConstant::grid_m)
      .def_readonly("attaining_theta", &LastConstant::attaining_theta)
      .def_readonly("attaining_band", &LastConstant::attaining_band)
      .def_readonly("violations", &LastConstant::violations);

  m.def("last_constant", &last_constant, py::arg("J"), py::arg("grid"));

  py::class_<MinimaxReport>(m, "MinimaxReport")
      .def_readonly("max_displacement", &MinimaxReport::max_displacement)
      .def_readonly("fiber_diff_norm", &MinimaxReport::fiber_diff_norm)
      .def_readonly("coeff_bound", &MinimaxReport::coeff_bound)
      .def_readonly("holds", &MinimaxReport::holds);

  m.def("minimax_check", &minimax_check, py::arg("j1"), py::arg("j2"), py::arg("theta"));
  m.def("band_folding", &band_folding, py::arg("J_coarse"), py::arg("q_fine"), py::arg("theta"));

  py::class_<FoldedSlopeReport>(m, "FoldedSlopeReport")
      .def_readonly("min_slope", &FoldedSlopeReport::min_slope)
      .def_readonly("rhs", &FoldedSlopeReport::rhs)
      .def_readonly("c1_used", &FoldedSlopeReport::c1_used)
      .def_readonly("holds", &FoldedSlopeReport::holds);

  m.def("folded_slope_bound", &folded_slope_bound, py::arg("J_coarse"), py::arg("q_fine"),
        py::arg("theta"), py::arg("c1_grid_m") = 1024);
  m.def("torus_norm", &torus_norm, py::arg("x"));

  // ---- limit-periodic families ----------------------------------------
  py::class_<LimitPeriodicFamily>(m, "LimitPeriodicFamily")
      .def("stage", &LimitPeriodicFamily::stage, py::arg("n"))
      .def_property_readonly("n_stages", &LimitPeriodicFamily::n_stages)
      .def_property_readonly("eta", &LimitPeriodicFamily::eta)
      .def_property_readonly("decay_coeff", &LimitPeriodicFamily::decay_coeff)
      .def_property_readonly("r_bound", &LimitPeriodicFamily::r_bound)
      .def_property_readonly("seed", &LimitPeriodicFamily::seed)
      .def("gamma", &LimitPeriodicFamily::gamma, py::arg("n"));

  m.def("build_ec_family", &build_ec_family, py::arg("eta"), py::arg("q_schedule"), py::arg("R"),
        py::arg("seed"), py::arg("decay_coeff") = 0.5);
  m.def("family_to_json", &family_to_json, py::arg("family"));
  m.def("family_from_json", &family_from_json, py::arg("text"));
  m.def("save_family", &save_family, py::arg("family"), py::arg("path"));
  m.def("load_family", &load_family, py::arg("path"));

  // ---- bad sets ---------------------------------------------------------
  py::class_<Interval>(m, "Interval")
      .def_readonly("lo", &Interval::lo)
      .def_readonly("hi", &Interval::hi)
      .def("length", &Interval::length);

  py::class_<BadSetEstimate>(m, "BadSetEstimate")
      .def_readonly("epsilon", &BadSetEstimate::epsilon)
      .def_readonly("measure", &BadSetEstimate::measure)
      .def_readonly("intervals", &BadSetEstimate::intervals)
      .def_readonly("seed_m", &BadSetEstimate::seed_m);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("measured", &BoundReport::measured)
      .def_readonly("bound", &BoundReport::bound)
      .def_readonly("margin", &BoundReport::margin)
      .def_readonly("holds", &BoundReport::holds);

  py::class_<StageBoundReport>(m, "StageBoundReport")
      .def_readonly("bound", &StageBoundReport::bound)
      .def_readonly("gamma_n", &StageBoundReport::gamma_n)
      .def_readonly("c1_coarse", &StageBoundReport::c1_coarse)
      .def_readonly("containment_holds", &StageBoundReport::containment_holds)
      .def_readonly("containment_samples", &StageBoundReport::containment_samples);

  m.def("min_gap_at", &min_gap_at, py::arg("J"), py::arg("theta"));
  m.def(
      "bad_set_measure",
      [](const PeriodicJacobi& J, double eps) { return bad_set_measure(J, eps); },
      py::arg("J"), py::arg("epsilon"));
  m.def("bad_set_measure_dense", &bad_set_measure_dense, py::arg("J"), py::arg("epsilon"),
        py::arg("m"));
  m.def(
      "check_small_gap_bound",
      [](const PeriodicJacobi& J, double eps, const LastConstant& c1) {
        return check_small_gap_bound(J, eps, c1);
      },
      py::arg("J"), py::arg("epsilon"), py::arg("c1"));
  m.def(
      "check_stage_bound",
      [](const LimitPeriodicFamily& fam, std::size_t n, double eps) {
        return check_stage_bound(fam, n, eps);
      },
      py::arg("family"), py::arg("n"), py::arg("epsilon"));

  // ---- dynamics ----------------------------------------------------------
  py::enum_<EvolveMethod>(m, "EvolveMethod")
      .value("FIBERWISE", EvolveMethod::kFiberwise)
      .value("TRUNCATED", EvolveMethod::kTruncated);

  py::class_<EvolvedState>(m, "EvolvedState")
      .def_readonly("t", &EvolvedState::t)
      .def_readonly("psi", &EvolvedState::psi)
      .def_readonly("tail_bound", &EvolvedState::tail_bound);

  m.def("evolve", &evolve, py::arg("J"), py::arg("phi"), py::arg("t"),
        py::arg("method") = EvolveMethod::kFiberwise, py::arg("tau") = 1e-12);
  m.def("light_cone_halfwidth", &light_cone_halfwidth, py::arg("J"), py::arg("phi"), py::arg("t"),
        py::arg("tau") = 1e-12);

  py::class_<MomentValue>(m, "MomentValue")
      .def_readonly("value", &MomentValue::value)
      .def_readonly("tail", &MomentValue::tail);

  m.def("moment", &moment, py::arg("J"), py::arg("phi"), py::arg("t"), py::arg("p"));

  py::class_<MomentSeries>(m, "MomentSeries")
      .def_readonly("p", &MomentSeries::p)
      .def_readonly("times", &MomentSeries::times)
      .def_readonly("values", &MomentSeries::values)
      .def_readonly("running_beta", &MomentSeries::running_beta)
      .def_readonly("final_beta", &MomentSeries::final_beta)
      .def_readonly("fit_beta", &MomentSeries::fit_beta);

  m.def("transport_exponents", &transport_exponents, py::arg("J"), py::arg("phi"), py::arg("p"),
        py::arg("times"));

  py::enum_<QNormalization>(m, "QNormalization")
      .value("VELOCITY", QNormalization::kVelocity)
      .value("PER_TORUS_UNIT", QNormalization::kPerTorusUnit);

  py::class_<QOperator>(m, "QOperator")
      .def_readonly("q", &QOperator::q)
      .def_readonly("normalization", &QOperator::normalization)
      .def("apply", &QOperator::apply, py::arg("phi"))
      .def("fiber", &QOperator::fiber, py::arg("node"));

  m.def("build_q_operator", &build_q_operator, py::arg("J"), py::arg("grid"),
        py::arg("normalization") = QNormalization::kVelocity);
  m.def("time_averaged_A", &time_averaged_A, py::arg("J"), py::arg("theta"), py::arg("t"));

  py::enum_<EstimateVariant>(m, "EstimateVariant")
      .value("I", EstimateVariant::kI)
      .value("II", EstimateVariant::kII);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("variant", &EstimateReport::variant)
      .def_readonly("lhs", &EstimateReport::lhs)
      .def_readonly("rhs", &EstimateReport::rhs)
      .def_readonly("margin", &EstimateReport::margin)
      .def_readonly("holds", &EstimateReport::holds)
      .def_readonly("c1_used", &EstimateReport::c1_used)
      .def_readonly("gamma_n", &EstimateReport::gamma_n);

  m.def("estimate_check", &estimate_I_II_check, py::arg("J_n"), py::arg("J_prev"), py::arg("R"),
        py::arg("t"), py::arg("epsilon"), py::arg("variant"), py::arg("gamma_n") = 0.0,
        py::arg("normalization") = QNormalization::kVelocity, py::arg("grid_m") = 512,
        py::arg("c1_grid_m") = 1024);
  m.def("position_identity_check", &position_identity_check, py::arg("J"), py::arg("phi"),
        py::arg("t"), py::arg("quad_tol") = 1e-8);

  // ---- convergence schedule -------------------------------------------
  py::class_<StageSchedule>(m, "StageSchedule")
      .def_readonly("n", &StageSchedule::n)
      .def_readonly("q_n", &StageSchedule::q_n)
      .def_readonly("q_n1", &StageSchedule::q_n1)
      .def_readonly("t_n", &StageSchedule::t_n)
      .def_readonly("eps_n", &StageSchedule::eps_n)
      .def_readonly("eps_tilde_n", &StageSchedule::eps_tilde_n)
      .def_readonly("gamma_n1", &StageSchedule::gamma_n1);

  py::class_<Schedule>(m, "Schedule")
      .def_readonly("c1", &Schedule::c1)
      .def_readonly("eta", &Schedule::eta)
      .def_readonly("eta0", &Schedule::eta0)
      .def_readonly("window_lo", &Schedule::window_lo)
      .def_readonly("window_hi", &Schedule::window_hi)
      .def_readonly("stages", &Schedule::stages);

  m.def("make_schedule", &make_schedule, py::arg("c1"), py::arg("eta"), py::arg("q_schedule"),
        py::arg("eta0") = -1.0);

  py::class_<QConvergenceRow>(m, "QConvergenceRow")
      .def_readonly("n", &QConvergenceRow::n)
      .def_readonly("q_n", &QConvergenceRow::q_n)
      .def_readonly("q_n1", &QConvergenceRow::q_n1)
      .def_readonly("diff_norm", &QConvergenceRow::diff_norm)
      .def_readonly("series_bound", &QConvergenceRow::series_bound)
      .def_readonly("ratio", &QConvergenceRow::ratio);

  py::class_<QConvergenceTable>(m, "QConvergenceTable")
      .def_readonly("c1", &QConvergenceTable::c1)
      .def_readonly("eta0", &QConvergenceTable::eta0)
      .def_readonly("rows", &QConvergenceTable::rows);

  m.def("q_convergence_experiment", &q_convergence_experiment, py::arg("family"), py::arg("phi"),
        py::arg("normalization") = QNormalization::kPerTorusUnit, py::arg("grid_m") = 512,
        py::arg("c1_grid_m") = 1024);

  py::class_<BallisticRow>(m, "BallisticRow")
      .def_readonly("t", &BallisticRow::t)
      .def_readonly("residual", &BallisticRow::residual);

  py::class_<KernelRow>(m, "KernelRow")
      .def_readonly("n", &KernelRow::n)
      .def_readonly("q_n", &KernelRow::q_n)
      .def_readonly("kernel_lhs", &KernelRow::kernel_lhs)
      .def_readonly("kernel_rhs", &KernelRow::kernel_rhs)
      .def_readonly("holds", &KernelRow::holds);

  py::class_<BallisticWitness>(m, "BallisticWitness")
      .def_readonly("rows", &BallisticWitness::rows)
      .def_readonly("kernel", &BallisticWitness::kernel);

  m.def("ballistic_witness", &ballistic_witness, py::arg("family"), py::arg("phi"),
        py::arg("times"), py::arg("grid_m") = 512, py::arg("c1_grid_m") = 1024);

  // ---- exception mapping -------------------------------------------------
  py::register_exception<WindowOverflowError>(m, "WindowOverflowError", PyExc_RuntimeError);
  py::register_exception<AliasingError>(m, "AliasingError", PyExc_RuntimeError);
  py::register_exception<DegeneratePointError>(m, "DegeneratePointError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
}
