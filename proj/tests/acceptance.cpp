// Acceptance gate: fourteen numbered criteria, one PASS/FAIL line each.
// Exit code 0 iff every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jlab/badset.hpp"
#include "jlab/errors.hpp"
#include "jlab/family.hpp"
#include "jlab/floquet.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/spectral.hpp"
#include "jlab/theta_grid.hpp"
#include "jlab/transport.hpp"
#include "jlab/windowed_state.hpp"

using namespace jlab;

namespace {

int g_failures = 0;
const auto g_start = std::chrono::steady_clock::now();

double elapsed_s(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %02d %s  %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

PeriodicJacobi random_op(int q, double R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ua(1.0 / R, R), ub(-R, R);
  std::vector<double> a(static_cast<std::size_t>(q)), b(static_cast<std::size_t>(q));
  for (int j = 0; j < q; ++j) {
    a[static_cast<std::size_t>(j)] = ua(rng);
    b[static_cast<std::size_t>(j)] = ub(rng);
  }
  return PeriodicJacobi(a, b);
}

WindowedState random_state(int support_radius, int window_radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WindowedState phi(-window_radius, window_radius);
  for (int n = -support_radius; n <= support_radius; ++n)
    phi.set(n, cplx{u(rng), u(rng)});
  phi.normalize();
  return phi;
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_01() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const ThetaGrid grid = ThetaGrid::plain(256);
  double max_parseval = 0.0, max_intertwine = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int q = 3 + trial % 10;  // 3..12
    const PeriodicJacobi J = random_op(q, 2.0, rng);
    const WindowedState phi = random_state(20, 24, rng);
    const FiberVectorField field = floquet_transform(phi, q, grid);
    double mass = 0.0;
    for (int j = 0; j < grid.m(); ++j)
      mass += grid.weight(j) * field.values[static_cast<std::size_t>(j)].squaredNorm();
    max_parseval = std::max(max_parseval, std::abs(mass - phi.norm_sq()));
    const WindowedState via_fibers = apply_fiberwise(FiberOperator::from(J, grid), phi);
    const WindowedState direct = apply_operator(J, phi);
    max_intertwine = std::max(max_intertwine, via_fibers.dist(direct));
  }
  const double dt = elapsed_s(t0);
  report(1, "floquet-unitarity-and-intertwining",
         max_parseval <= 1e-10 && max_intertwine <= 1e-10 && dt <= 10.0,
         "parseval=" + fmt17(max_parseval) + " intertwine=" + fmt17(max_intertwine) +
             " elapsed_s=" + fmt17(dt));
}

void criterion_02_03_04(std::vector<PeriodicJacobi>& instances) {
  // Criterion 2: slope routes agree.
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 10; ++trial)
    instances.push_back(random_op(3 + trial % 6, 2.0, rng));  // q in 3..8
  const ThetaGrid grid = ThetaGrid::punctured(257);
  const double h = 1e-6;
  double max_fd = 0.0, max_disc = 0.0;
  for (const PeriodicJacobi& J : instances) {
    for (int j = 0; j < grid.m(); j += 16) {
      const double theta = grid.node(j);
      const FloquetFiber f = diagonalize_fiber(J, theta);
      const FloquetFiber fp = diagonalize_fiber(J, theta + h);
      const FloquetFiber fm = diagonalize_fiber(J, theta - h);
      for (int k = 0; k < J.q(); ++k) {
        const double hf = f.slopes(k);
        const double fd = (fp.eigenvalues(k) - fm.eigenvalues(k)) / (2.0 * h);
        max_fd = std::max(max_fd, std::abs(hf - fd));
        const double disc = slope_via_discriminant(J, theta, k);
        max_disc = std::max(max_disc, std::abs(hf - disc) / std::max(1e-300, std::abs(disc)));
      }
    }
  }
  const double dt2 = elapsed_s(t0);
  report(2, "slope-route-consistency", max_fd <= 1e-6 && max_disc <= 1e-6 && dt2 <= 30.0,
         "hf_vs_fd=" + fmt17(max_fd) + " hf_vs_disc_rel=" + fmt17(max_disc) +
             " elapsed_s=" + fmt17(dt2));

  // Criterion 3: band ordering, non-overlap, interior monotonicity.
  int violations = 0;
  for (const PeriodicJacobi& J : instances) {
    const BandCurves bc = band_curves(J, grid);
    const int q = J.q();
    std::vector<double> band_min(static_cast<std::size_t>(q), 1e300);
    std::vector<double> band_max(static_cast<std::size_t>(q), -1e300);
    for (int j = 0; j < grid.m(); ++j) {
      for (int k = 0; k < q; ++k) {
        if (k + 1 < q && bc.lambda(j, k) > bc.lambda(j, k + 1) + 1e-12) ++violations;
        band_min[static_cast<std::size_t>(k)] =
            std::min(band_min[static_cast<std::size_t>(k)], bc.lambda(j, k));
        band_max[static_cast<std::size_t>(k)] =
            std::max(band_max[static_cast<std::size_t>(k)], bc.lambda(j, k));
      }
    }
    for (int k = 0; k + 1 < q; ++k)
      if (band_max[static_cast<std::size_t>(k)] >
          band_min[static_cast<std::size_t>(k + 1)] + 1e-12)
        ++violations;
    // each band is strictly monotone on (0, 1/2): constant slope sign there
    for (int k = 0; k < q; ++k) {
      double sign = 0.0;
      for (int j = 0; j < grid.m(); ++j) {
        const double theta = grid.node(j);
        if (theta <= 1e-9 || theta >= 0.5 - 1e-9) continue;
        const double s = bc.slope(j, k);
        if (sign == 0.0) sign = (s >= 0.0) ? 1.0 : -1.0;
        if (sign * s < -1e-12) ++violations;
      }
    }
  }
  report(3, "band-ordering-nonoverlap-monotonicity", violations == 0,
         "violations=" + std::to_string(violations));

  // Criterion 4: slope lower bound with the measured constant; grid stability.
  int bound_violations = 0;
  double max_shift = 0.0;
  for (const PeriodicJacobi& J : instances) {
    const ThetaGrid g1024 = ThetaGrid::punctured(1024);
    const LastConstant c1 = last_constant(J, g1024);
    bound_violations += c1.violations;
    const double floor_factor = std::exp(-c1.c1_emp * J.q());
    const BandCurves bc = band_curves(J, g1024);
    for (int j = 0; j < g1024.m(); ++j) {
      const double rhs = floor_factor * std::abs(std::sin(2.0 * M_PI * g1024.node(j)));
      for (int k = 0; k < J.q(); ++k)
        if (std::abs(bc.slope(j, k)) < rhs - 1e-12) ++bound_violations;
    }
    const LastConstant c1d = last_constant(J, ThetaGrid::punctured(2048));
    max_shift = std::max(max_shift,
                         std::abs(c1d.c1_emp - c1.c1_emp) / std::max(1e-12, c1.c1_emp));
  }
  report(4, "slope-lower-bound-and-grid-stability",
         bound_violations == 0 && max_shift <= 0.05,
         "violations=" + std::to_string(bound_violations) +
             " c1_shift=" + fmt17(max_shift));
}

void criterion_05(const LimitPeriodicFamily& fam48) {
  const auto t0 = std::chrono::steady_clock::now();
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  double max_oracle_gap = 0.0;
  for (double eps : {1e-2, 1e-4}) {
    const double bisect = bad_set_measure(free4, eps).measure;
    const double dense = bad_set_measure_dense(free4, eps, 1 << 20);
    max_oracle_gap = std::max(max_oracle_gap, std::abs(bisect - dense));
  }
  bool bounds_hold = true;
  double min_margin = 1e300;
  const double gamma1 = fam48.gamma(1);
  const LastConstant c1s1 = last_constant(fam48.stage(1), ThetaGrid::punctured(1024));
  for (double mult : {2.0, 20.0, 200.0, 2000.0, 20000.0}) {
    const double eps = mult * gamma1;
    const BoundReport lem = check_small_gap_bound(fam48.stage(1), eps, c1s1);
    const StageBoundReport thm = check_stage_bound(fam48, 1, eps);
    bounds_hold = bounds_hold && lem.holds && lem.margin > 0.0 && thm.bound.holds &&
                  thm.bound.margin > 0.0;
    min_margin = std::min({min_margin, lem.margin, thm.bound.margin});
  }
  const double dt = elapsed_s(t0);
  report(5, "bad-set-measure-and-bounds",
         max_oracle_gap <= 1e-4 && bounds_hold && dt <= 120.0,
         "oracle_gap=" + fmt17(max_oracle_gap) + " min_margin=" + fmt17(min_margin) +
             " elapsed_s=" + fmt17(dt));
}

void criterion_06() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> utheta(0.01, 0.99);
  double max_hausdorff = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool three = trial < 10;
    const PeriodicJacobi J = random_op(three ? 3 : 4, 2.0, rng);
    max_hausdorff =
        std::max(max_hausdorff, band_folding(J, three ? 9 : 8, utheta(rng)));
  }
  report(6, "band-folding-refinement", max_hausdorff <= 1e-9,
         "hausdorff=" + fmt17(max_hausdorff));
}

void criterion_07(const LimitPeriodicFamily& fam48) {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> utheta(0.0, 1.0), upert(-0.05, 0.05);
  int violations = 0;
  int tested = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int q = 3 + trial % 6;
    const PeriodicJacobi J1 = random_op(q, 2.0, rng);
    std::vector<double> a = J1.a(), b = J1.b();
    for (double& x : a) x = std::max(0.51, x + upert(rng));
    for (double& x : b) x += upert(rng);
    const MinimaxReport rep = minimax_check(J1, PeriodicJacobi(a, b), utheta(rng));
    ++tested;
    if (!rep.holds) ++violations;
  }
  for (int j = 0; j < 8; ++j) {
    const MinimaxReport rep = minimax_check(fam48.stage(0).reinterpret(8), fam48.stage(1),
                                            utheta(rng));
    ++tested;
    if (!rep.holds) ++violations;
  }
  report(7, "minimax-displacement-bound", violations == 0,
         "violations=" + std::to_string(violations) + "/" + std::to_string(tested));
}

void criterion_08() {
  const auto t0 = std::chrono::steady_clock::now();
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);
  const EvolvedState ev = evolve(free4, d0, 10.0);
  double max_amp_err = 0.0;
  for (int n = ev.psi.lo(); n <= ev.psi.hi(); ++n) {
    const int m = std::abs(n);
    const cplx phase = std::pow(cplx{0.0, -1.0}, m);
    const cplx expect = phase * std::cyl_bessel_j(m, 20.0);
    max_amp_err = std::max(max_amp_err, std::abs(ev.psi[n] - expect));
  }
  const MomentValue mom = moment(free4, d0, 10.0, 2.0);
  const double mom_rel = std::abs(mom.value - 201.0) / 201.0;
  std::vector<double> times;
  for (double t = 1.0; t <= 50.0; t *= 1.3) times.push_back(t);
  times.push_back(50.0);
  const MomentSeries series = transport_exponents(free4, d0, 2.0, times);
  const double beta_err = std::abs(series.fit_beta - 1.0);
  const double dt = elapsed_s(t0);
  report(8, "free-dynamics-oracle",
         max_amp_err <= 1e-8 && mom_rel <= 1e-6 && beta_err <= 0.03 && dt <= 30.0,
         "amp=" + fmt17(max_amp_err) + " moment_rel=" + fmt17(mom_rel) +
             " beta_err=" + fmt17(beta_err) + " elapsed_s=" + fmt17(dt));
}

void criterion_09() {
  std::mt19937_64 rng(909);
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const PeriodicJacobi J = random_op(4, 2.0, rng);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);
  double worst = 0.0;
  for (const PeriodicJacobi* op : {&free4, &J})
    for (double t : {1.0, 2.0, 5.0})
      worst = std::max(worst, position_identity_check(*op, d0, t));
  report(9, "position-identity", worst <= 1e-6, "residual=" + fmt17(worst));
}

void criterion_10() {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const ThetaGrid grid = ThetaGrid::punctured(1024);
  const QOperator Q = build_q_operator(free4, grid, QNormalization::kVelocity);
  const WindowedState d0 = WindowedState::delta(0, -2044, 2047);  // 1023 periods
  const WindowedState qd0 = Q.apply(d0);
  const double q2 = qd0.norm_sq();  // <delta_0, Q^2 delta_0>
  double herm = 0.0;
  for (const Matrix& f : Q.fibers) herm = std::max(herm, (f - f.adjoint()).norm());
  report(10, "velocity-operator-normalization",
         std::abs(q2 - 2.0) <= 1e-3 && herm <= 1e-10,
         "q2=" + fmt17(q2) + " hermiticity=" + fmt17(herm));
}

void criterion_11(const LimitPeriodicFamily& fam48) {
  const PeriodicJacobi& Jn = fam48.stage(1);
  const PeriodicJacobi& Jprev = fam48.stage(0);
  const double R = fam48.r_bound();
  const double c1 = std::max(last_constant(Jn, ThetaGrid::punctured(1024)).c1_emp,
                             last_constant(Jprev, ThetaGrid::punctured(1024)).c1_emp);
  const Schedule sch = make_schedule(c1, fam48.eta(), {4, 8});
  const StageSchedule& st = sch.stages.front();
  const double gamma1 = fam48.gamma(1);
  bool all_hold = true;
  double min_margin = 1e300;
  std::vector<double> times = {st.t_n, 1e2, 1e4, 1e6};
  for (double t : times) {
    const EstimateReport r1 = estimate_I_II_check(Jn, Jprev, R, t, st.eps_n,
                                                  EstimateVariant::kI, 0.0,
                                                  QNormalization::kPerTorusUnit);
    const EstimateReport r2 = estimate_I_II_check(Jn, Jprev, R, t, st.eps_tilde_n,
                                                  EstimateVariant::kII, gamma1,
                                                  QNormalization::kPerTorusUnit);
    all_hold = all_hold && r1.holds && r1.margin > 0.0 && r2.holds && r2.margin > 0.0;
    min_margin = std::min({min_margin, r1.margin, r2.margin});
  }
  bool precondition_rejected = false;
  try {
    estimate_I_II_check(Jn, Jprev, R, 100.0, 0.5 * gamma1, EstimateVariant::kII, gamma1,
                        QNormalization::kPerTorusUnit);
  } catch (const PreconditionError&) {
    precondition_rejected = true;
  }
  report(11, "time-average-estimates", all_hold && precondition_rejected,
         "min_margin=" + fmt17(min_margin) +
             " precondition_rejected=" + (precondition_rejected ? std::string("yes")
                                                                : std::string("no")));
}

void criterion_12_13(const LimitPeriodicFamily& fam416) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  const Schedule probe = make_schedule(1.0, 8.0, {4, 8, 16});
  ok = ok && std::abs(probe.window_lo - 5.0) <= 1e-12 &&
       std::abs(probe.window_hi - 5.8) <= 1e-12;

  bool boundary_rejected = false;
  try {
    make_schedule(1.0, 7.0, {4, 8, 16});
  } catch (const PreconditionError&) {
    boundary_rejected = true;
  }
  ok = ok && boundary_rejected;

  for (const StageSchedule& st : probe.stages) ok = ok && st.gamma_n1 < st.eps_tilde_n;

  const WindowedState d0 = WindowedState::delta(0, -2, 2);
  const QConvergenceTable table = q_convergence_experiment(fam416, d0);
  double max_ratio = 0.0;
  for (const QConvergenceRow& row : table.rows) {
    ok = ok && row.diff_norm <= row.series_bound;
    max_ratio = std::max(max_ratio, row.ratio);
  }
  ok = ok && !table.rows.empty();
  const double dt = elapsed_s(t0);
  ok = ok && dt <= 180.0;
  report(12, "convergence-schedule", ok,
         "window=(" + fmt17(probe.window_lo) + "," + fmt17(probe.window_hi) +
             ") max_ratio=" + fmt17(max_ratio) + " elapsed_s=" + fmt17(dt));

  const BallisticWitness bw = ballistic_witness(fam416, d0, {});
  bool kernel_ok = !bw.kernel.empty();
  double min_gap = 1e300;
  for (const KernelRow& row : bw.kernel) {
    kernel_ok = kernel_ok && row.holds && row.kernel_lhs >= row.kernel_rhs;
    min_gap = std::min(min_gap, row.kernel_lhs - row.kernel_rhs);
  }
  report(13, "kernel-lower-bound", kernel_ok, "min_gap=" + fmt17(min_gap));
}

std::string determinism_fingerprint() {
  std::ostringstream out;
  const auto fam = build_ec_family(2.0, {4, 8}, 2.0, 3);
  out << family_to_json(fam);
  out << fmt17(bad_set_measure(fam.stage(1), 1e-3).measure);
  const EvolvedState ev =
      evolve(fam.stage(1), WindowedState::delta(0, -2, 2), 7.0);
  for (int n = ev.psi.lo(); n <= ev.psi.hi(); ++n)
    out << fmt17(ev.psi[n].real()) << fmt17(ev.psi[n].imag());
  const LastConstant c1 = last_constant(fam.stage(0), ThetaGrid::punctured(1024));
  out << fmt17(c1.c1_emp) << fmt17(c1.attaining_theta);
  return out.str();
}

void criterion_14() {
  const std::string run1 = determinism_fingerprint();
  const std::string run2 = determinism_fingerprint();
  const bool identical = run1 == run2;
  const double total = elapsed_s(g_start);
  report(14, "determinism-and-budget", identical && total <= 540.0,
         std::string("byte_identical=") + (identical ? "yes" : "no") +
             " total_elapsed_s=" + fmt17(total));
}

}  // namespace

int main() {
  try {
    criterion_01();
    std::vector<PeriodicJacobi> instances;
    criterion_02_03_04(instances);
    const auto fam48 = build_ec_family(2.0, {4, 8}, 2.0, 3);
    criterion_05(fam48);
    criterion_06();
    criterion_07(fam48);
    criterion_08();
    criterion_09();
    criterion_10();
    criterion_11(fam48);
    const auto fam416 = build_ec_family(2.0, {4, 8, 16}, 2.0, 3);
    criterion_12_13(fam416);
    criterion_14();
  } catch (const std::exception& e) {
    std::printf("FAIL -- unexpected exception: %s\n", e.what());
    return 1;
  }
  std::printf("%s (%d/14)\n", g_failures == 0 ? "ALL PASS" : "FAILURES", 14 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
