#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jlab/badset.hpp"
#include "jlab/errors.hpp"
#include "jlab/family.hpp"
#include "jlab/transport.hpp"

using namespace jlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PeriodicJacobi random_op(int q, double R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(1.0 / R, R), ub(-R, R);
  std::vector<double> a(q), b(q);
  for (int j = 0; j < q; ++j) {
    a[j] = ua(rng);
    b[j] = ub(rng);
  }
  return PeriodicJacobi(a, b);
}

// <delta_n, e^{-itJ} delta_0> = (-i)^n J_n(2t) for the free operator; the
// |n| form below covers n < 0 because (-i)^{-n} (-1)^n = (-i)^n.
cplx free_amplitude(int n, double t) {
  const int an = std::abs(n);
  const double jn = std::cyl_bessel_j(static_cast<double>(an), 2.0 * t);
  cplx phase{1.0, 0.0};
  switch (an % 4) {
    case 1: phase = cplx{0.0, -1.0}; break;
    case 2: phase = cplx{-1.0, 0.0}; break;
    case 3: phase = cplx{0.0, 1.0}; break;
    default: break;
  }
  return phase * jn;
}

std::vector<double> geometric_times(double t_min, double t_max, int count) {
  std::vector<double> ts;
  for (int i = 0; i < count; ++i)
    ts.push_back(t_min * std::pow(t_max / t_min, static_cast<double>(i) / (count - 1)));
  return ts;
}

}  // namespace

TEST_CASE("time evolution") {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);

  SUBCASE("t = 0 is the identity") {
    const EvolvedState ev = evolve(free4, d0, 0.0);
    CHECK(ev.psi.max_abs_diff(d0) <= 1e-12);
  }

  SUBCASE("negative time rejected") { CHECK_THROWS(evolve(free4, d0, -1.0)); }

  SUBCASE("free return amplitude is a Bessel value") {
    const EvolvedState ev = evolve(free4, d0, 1.0);
    const double j0 = std::cyl_bessel_j(0.0, 2.0);
    CHECK(std::norm(ev.psi[0]) == doctest::Approx(j0 * j0).epsilon(1e-10));
    CHECK(std::norm(ev.psi[0]) == doctest::Approx(0.05012).epsilon(1e-3));
  }

  SUBCASE("full profile matches the Bessel formula at t = 10") {
    const EvolvedState ev = evolve(free4, d0, 10.0);
    for (int n = -30; n <= 30; ++n)
      CHECK(std::abs(ev.psi[n] - free_amplitude(n, 10.0)) <= 1e-8);
  }

  SUBCASE("unitarity across operators and times") {
    for (std::uint64_t s = 500; s < 503; ++s) {
      const PeriodicJacobi J = random_op(5, 2.0, s);
      for (double t : {0.5, 3.0, 12.0}) {
        const EvolvedState ev = evolve(J, d0, t);
        CHECK(std::abs(ev.psi.norm() - 1.0) <= 1e-10 + ev.tail_bound);
      }
    }
  }

  SUBCASE("fiberwise and truncated methods agree") {
    const PeriodicJacobi J = random_op(4, 2.0, 510);
    const EvolvedState a = evolve(J, d0, 4.0, EvolveMethod::kFiberwise);
    const EvolvedState b = evolve(J, d0, 4.0, EvolveMethod::kTruncated);
    CHECK(a.psi.dist(b.psi) <= 1e-8);
  }
}

TEST_CASE("moments") {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);

  SUBCASE("t = 0 delta state") {
    for (double p : {0.0, 2.0, 4.0}) {
      const MomentValue mv = moment(free4, d0, 0.0, p);
      CHECK(mv.value == doctest::Approx(p == 0.0 ? 2.0 : 1.0).epsilon(1e-12));
    }
  }

  SUBCASE("free second moment is 2 t^2 + 1") {
    const MomentValue mv = moment(free4, d0, 10.0, 2.0);
    CHECK(mv.value == doctest::Approx(201.0).epsilon(1e-8));
  }

  SUBCASE("p = 0 gives twice the norm") {
    const MomentValue mv = moment(free4, d0, 7.0, 0.0);
    CHECK(mv.value == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("transport exponents") {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);

  SUBCASE("free ballistic scaling at p = 2") {
    const MomentSeries ms = transport_exponents(free4, d0, 2.0, geometric_times(1.5, 50.0, 12));
    CHECK(std::abs(ms.fit_beta - 1.0) <= 0.03);
    // the raw log-ratio carries the additive ln 2 of the 2 t^2 + 1 law
    CHECK(ms.final_beta == doctest::Approx(1.0 + std::log(2.0) / (2.0 * std::log(50.0)))
                               .epsilon(1e-3));
  }

  SUBCASE("ballistic at p = 4 as well") {
    const MomentSeries ms = transport_exponents(free4, d0, 4.0, geometric_times(1.5, 50.0, 12));
    CHECK(std::abs(ms.fit_beta - 1.0) <= 0.05);
  }

  SUBCASE("near-decoupled block eigenvector stays put") {
    // Two nearly closed boundary hoppings around the block [1, 6].
    std::vector<double> a{1e-3, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-3, 1.0};
    std::vector<double> b(8, 0.0);
    const PeriodicJacobi J(a, b);
    // Ground state of the decoupled 6-site block, planted on sites 1..6.
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i + 1 < 6; ++i) {
      block(i, i + 1) = 1.0;
      block(i + 1, i) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    WindowedState phi(-2, 9);
    for (int i = 0; i < 6; ++i) phi.set(1 + i, cplx{es.eigenvectors()(i, 0), 0.0});
    const MomentSeries ms = transport_exponents(J, phi, 2.0, geometric_times(1.5, 30.0, 6));
    CHECK(ms.values.back() <= 2.0 * ms.values.front());
    CHECK(ms.final_beta <= 0.5);
  }
}

TEST_CASE("velocity operator") {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);

  SUBCASE("free fibers carry the group velocities") {
    const ThetaGrid grid = ThetaGrid::punctured(16);
    const QOperator Q = build_q_operator(free4, grid, QNormalization::kVelocity);
    for (int j = 0; j < grid.m(); ++j) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Q.fiber(j));
      std::vector<double> expect;
      for (int k = 0; k < 4; ++k)
        expect.push_back(-2.0 * std::sin(kTwoPi * (k + grid.node(j)) / 4.0));
      std::sort(expect.begin(), expect.end());
      for (int k = 0; k < 4; ++k)
        CHECK(es.eigenvalues()(k) == doctest::Approx(expect[k]).epsilon(1e-10));
    }
  }

  SUBCASE("free <delta_0, Q^2 delta_0> is the ballistic constant 2") {
    const QOperator Q = build_q_operator(free4, ThetaGrid::punctured(1024),
                                         QNormalization::kVelocity);
    const WindowedState d0 = WindowedState::delta(0, -8, 8);
    const WindowedState qd0 = Q.apply(d0);
    CHECK(qd0.norm_sq() == doctest::Approx(2.0).epsilon(1e-3));
  }

  SUBCASE("self-adjoint on random pairs") {
    const PeriodicJacobi J = random_op(5, 2.0, 600);
    const QOperator Q = build_q_operator(J, ThetaGrid::punctured(64));
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
      WindowedState phi(-20, 20), psi(-20, 20);
      for (int n = -10; n <= 10; ++n) {
        phi.set(n, cplx{u(rng), u(rng)});
        psi.set(n, cplx{u(rng), u(rng)});
      }
      const cplx lhs = Q.apply(phi).inner(psi);
      const cplx rhs = phi.inner(Q.apply(psi));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * phi.norm() * psi.norm());
    }
  }

  SUBCASE("grid through a degeneracy point is rejected") {
    CHECK_THROWS_AS(build_q_operator(free4, ThetaGrid::plain(16)), DegeneratePointError);
  }

  SUBCASE("per-torus-unit normalization is 2 pi times the velocity one") {
    const PeriodicJacobi J = random_op(4, 2.0, 610);
    const ThetaGrid grid = ThetaGrid::punctured(8);
    const QOperator Qv = build_q_operator(J, grid, QNormalization::kVelocity);
    const QOperator Qp = build_q_operator(J, grid, QNormalization::kPerTorusUnit);
    for (int j = 0; j < 8; ++j)
      CHECK((Qp.fiber(j) - kTwoPi * Qv.fiber(j)).norm() <= 1e-12);
  }
}

TEST_CASE("time averaged momentum fiber") {
  const PeriodicJacobi J = random_op(5, 2.0, 620);
  const double theta = 0.29;
  const Matrix A = momentum_fiber(J, theta);

  SUBCASE("short-time limit recovers the momentum fiber") {
    CHECK((time_averaged_A(J, theta, 1e-9) - A).norm() <= 1e-7);
  }

  SUBCASE("diagonal in the eigenbasis is time independent") {
    const FloquetFiber f = diagonalize_fiber(J, theta);
    const Matrix Ad = f.eigenvectors.adjoint() * A * f.eigenvectors;
    for (double t : {0.5, 10.0, 1e4}) {
      const Matrix At = f.eigenvectors.adjoint() * time_averaged_A(J, theta, t) *
                        f.eigenvectors;
      for (int k = 0; k < 5; ++k) CHECK(std::abs(At(k, k) - Ad(k, k)) <= 1e-12);
    }
  }

  SUBCASE("off-diagonal entries decay like 2/(t gap)") {
    const FloquetFiber f = diagonalize_fiber(J, theta);
    const double R = 2.0;
    for (double t : {5.0, 50.0}) {
      const Matrix At = f.eigenvectors.adjoint() * time_averaged_A(J, theta, t) *
                        f.eigenvectors;
      for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 5; ++k) {
          if (j == k) continue;
          const double gap = std::abs(f.eigenvalues(j) - f.eigenvalues(k));
          CHECK(std::abs(At(j, k)) <= 2.0 * R * 2.0 / (t * gap) + 1e-12);
        }
    }
  }
}

TEST_CASE("averaged-momentum estimates") {
  const auto fam = build_ec_family(2.0, {4, 8}, 2.0, 3);
  const double R = 2.0;

  SUBCASE("held at the scheduled time") {
    double c1 = 0.0;
    for (const auto& s : fam.stages())
      c1 = std::max(c1, last_constant(s, ThetaGrid::punctured(1024)).c1_emp);
    const Schedule sch = make_schedule(c1, fam.eta(), {4, 8});
    const auto& st = sch.stages.front();
    const EstimateReport e1 = estimate_I_II_check(fam.stage(0), fam.stage(0), R, st.t_n,
                                                  st.eps_n, EstimateVariant::kI);
    CHECK(e1.holds);
    const EstimateReport e2 =
        estimate_I_II_check(fam.stage(1), fam.stage(0), R, st.t_n, st.eps_tilde_n,
                            EstimateVariant::kII, fam.gamma(1));
    CHECK(e2.holds);
  }

  SUBCASE("long-time limit is controlled by the bad-set mass") {
    const PeriodicJacobi& J = fam.stage(0);
    const double eps = 1e-2, t = 1e6;
    const EstimateReport rep =
        estimate_I_II_check(J, J, R, t, eps, EstimateVariant::kI, 0.0,
                            QNormalization::kPerTorusUnit);
    CHECK(rep.holds);
    const double mes = bad_set_measure(J, eps).measure;
    const double first = 4.0 * R * R * 16.0 / (t * t * eps * eps);
    CHECK(rep.lhs <= first + kTwoPi * kTwoPi * 16.0 * R * R * mes + 1e-6);
  }

  SUBCASE("empty bad set leaves only the time-decay term") {
    // All gaps open at every theta: epsilon below the global minimum gap
    // empties the bad set and every phase average decays like 1/(t eps).
    const PeriodicJacobi J({1.0, 1.0, 1.0, 1.0}, {3.0, -1.0, 0.5, 0.0});
    double min_gap = 1e300;
    for (int j = 0; j < 2048; ++j) min_gap = std::min(min_gap, min_gap_at(J, j / 2048.0));
    const double eps = 0.5 * min_gap;
    REQUIRE(eps > 0.0);
    REQUIRE(bad_set_measure(J, eps).measure == 0.0);
    const double R3 = J.tight_r_bound(), t = 1e4;
    const EstimateReport rep = estimate_I_II_check(J, J, R3, t, eps, EstimateVariant::kI);
    CHECK(rep.lhs <= 16.0 * R3 * R3 * 16.0 / (t * t * eps * eps) + 1e-12);
    CHECK(rep.holds);
  }

  SUBCASE("variant II precondition is enforced") {
    CHECK_THROWS_AS(estimate_I_II_check(fam.stage(1), fam.stage(0), R, 100.0, 1e-9,
                                        EstimateVariant::kII, 1e-6),
                    PreconditionError);
  }
}

TEST_CASE("position identity") {
  const PeriodicJacobi free4 = PeriodicJacobi::free_operator(4);
  const WindowedState d0 = WindowedState::delta(0, -2, 2);

  SUBCASE("t = 0 is exact") { CHECK(position_identity_check(free4, d0, 0.0) == 0.0); }

  SUBCASE("free operator at t = 2") {
    CHECK(position_identity_check(free4, d0, 2.0) <= 1e-6);
  }

  SUBCASE("random operator at t = 1") {
    const PeriodicJacobi J = random_op(4, 2.0, 630);
    CHECK(position_identity_check(J, d0, 1.0) <= 1e-6);
  }

  SUBCASE("derivative form: d/dt <psi, X psi> = <psi, A psi>") {
    const PeriodicJacobi J = random_op(4, 2.0, 631);
    const double t = 1.7, h = 1e-4;
    auto x_expect = [&](double s) {
      const EvolvedState ev = evolve(J, d0, s);
      return std::real(ev.psi.inner(apply_position(ev.psi)));
    };
    const double fd = (x_expect(t + h) - x_expect(t - h)) / (2.0 * h);
    const EvolvedState ev = evolve(J, d0, t);
    // the evolved state formally fills its window; trim the (far-beyond the
    // light cone) edge sites so the momentum stencil has room to grow
    WindowedState inner_state = ev.psi;
    inner_state.set(inner_state.lo(), cplx{0.0, 0.0});
    inner_state.set(inner_state.hi(), cplx{0.0, 0.0});
    inner_state.declare_support(inner_state.lo() + 1, inner_state.hi() - 1);
    const double a_expect = std::real(ev.psi.inner(apply_momentum(J, inner_state)));
    CHECK(fd == doctest::Approx(a_expect).epsilon(1e-5));
  }
}

TEST_CASE("convergence schedule") {
  SUBCASE("window endpoints") {
    const Schedule sch = make_schedule(1.0, 8.0, {4, 8});
    CHECK(sch.window_lo == doctest::Approx(5.0));
    CHECK(sch.window_hi == doctest::Approx(5.8));
    CHECK(sch.eta0 == doctest::Approx(5.4));
  }

  SUBCASE("boundary case rejected") {
    CHECK_THROWS_AS(make_schedule(1.0, 7.0, {4, 8}), PreconditionError);
  }

  SUBCASE("stage quantities at eta0 = 5.4") {
    const Schedule sch = make_schedule(1.0, 8.0, {4, 8}, 5.4);
    const auto& st = sch.stages.front();
    CHECK(st.t_n * st.t_n == doctest::Approx(262144.0 * std::exp(52.0)).epsilon(1e-9));
    CHECK(st.eps_n == doctest::Approx(std::exp(-4.0 * 5.4) / 16.0).epsilon(1e-12));
    CHECK(st.eps_tilde_n == doctest::Approx(std::exp(-21.6) / 64.0).epsilon(1e-12));
    CHECK(st.gamma_n1 == doctest::Approx(std::exp(-32.0) / 512.0).epsilon(1e-12));
    CHECK(st.gamma_n1 < st.eps_tilde_n);
  }

  SUBCASE("eta0 outside the window rejected") {
    CHECK_THROWS(make_schedule(1.0, 8.0, {4, 8}, 4.9));
  }
}

TEST_CASE("velocity operator convergence across stages") {
  SUBCASE("duplicate stage gives a vanishing difference") {
    const PeriodicJacobi J4 = random_op(4, 2.0, 640);
    const LimitPeriodicFamily dup({J4, J4.reinterpret(8)}, 8.0, 0.5, 2.0, 0);
    const WindowedState d0 = WindowedState::delta(0, -32, 32);
    const QConvergenceTable table = q_convergence_experiment(dup, d0);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].diff_norm <= 1e-8);
  }

  SUBCASE("built family stays below the bound and decreases") {
    const auto fam = build_ec_family(2.0, {4, 8, 16}, 2.0, 3);
    const WindowedState d0 = WindowedState::delta(0, -64, 64);
    const QConvergenceTable table = q_convergence_experiment(fam, d0);
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) {
      CHECK(row.diff_norm <= row.series_bound);
      CHECK(row.ratio <= 1.0);
    }
    CHECK(table.rows[1].diff_norm <= table.rows[0].diff_norm);
  }

  SUBCASE("single stage rejected") {
    const auto fam = build_ec_family(2.0, {4}, 2.0, 3);
    const WindowedState d0 = WindowedState::delta(0, -8, 8);
    CHECK_THROWS(q_convergence_experiment(fam, d0));
  }
}

TEST_CASE("finite-time ballistic witness") {
  SUBCASE("free operator approaches its velocity operator") {
    const LimitPeriodicFamily fam({PeriodicJacobi::free_operator(4)}, 2.0, 0.5, 1.0, 0);
    const WindowedState d0 = WindowedState::delta(0, -2, 2);
    const BallisticWitness bw = ballistic_witness(fam, d0, geometric_times(5.0, 50.0, 4));
    REQUIRE(bw.rows.size() == 4);
    CHECK(bw.rows.back().residual <= 0.1);
    CHECK(bw.rows.back().residual <= bw.rows.front().residual);

    REQUIRE(bw.kernel.size() == 1);
    CHECK(bw.kernel[0].kernel_lhs * bw.kernel[0].kernel_lhs == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(bw.kernel[0].holds);
  }

  SUBCASE("kernel lower bound on a built family") {
    const auto fam = build_ec_family(2.0, {4, 8, 16}, 2.0, 3);
    const WindowedState d0 = WindowedState::delta(0, -64, 64);
    const BallisticWitness bw = ballistic_witness(fam, d0, {});
    for (const auto& row : bw.kernel) CHECK(row.holds);
  }
}
