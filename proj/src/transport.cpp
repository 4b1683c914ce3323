#include "jlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jlab/errors.hpp"

namespace jlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int periods_in_window(int lo, int hi, int q) {
  const int p_lo = static_cast<int>(std::floor(static_cast<double>(lo) / q));
  const int p_hi = static_cast<int>(std::floor(static_cast<double>(hi) / q));
  return p_hi - p_lo + 1;
}

int support_center(const WindowedState& phi) {
  if (phi.support_empty()) return 0;
  return (phi.support_lo() + phi.support_hi()) / 2;
}

int support_radius(const WindowedState& phi) {
  if (phi.support_empty()) return 0;
  const int c = support_center(phi);
  return std::max(phi.support_hi() - c, c - phi.support_lo());
}

cplx cplx_phase_average(double x) {  // (e^{ix} - 1) / (ix), 1 at x = 0
  if (std::abs(x) < 1e-14) return cplx{1.0, 0.0};
  return (std::polar(1.0, x) - cplx{1.0, 0.0}) / cplx{0.0, x};
}

}  // namespace

int light_cone_halfwidth(const PeriodicJacobi& J, const WindowedState& phi, double t,
                         double tau) {
  const double R = J.tight_r_bound();
  return support_radius(phi) + static_cast<int>(std::ceil(2.0 * R * std::abs(t))) + 8 +
         static_cast<int>(std::ceil(4.0 * std::log(1.0 / tau)));
}

FiberPropagator::FiberPropagator(const PeriodicJacobi& J, int window_lo, int window_hi)
    : J_(J), lo_(window_lo), hi_(window_hi), grid_(ThetaGrid::plain(1)) {
  const int m = periods_in_window(lo_, hi_, J.q());
  grid_ = ThetaGrid::plain(m);
  vecs_.reserve(static_cast<std::size_t>(m));
  vals_.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const FloquetFiber f = diagonalize_fiber(J_, grid_.node(j));
    vecs_.push_back(f.eigenvectors);
    vals_.push_back(f.eigenvalues);
  }
}

WindowedState FiberPropagator::apply(const WindowedState& phi, double t) const {
  if (phi.lo() < lo_ || phi.hi() > hi_)
    throw WindowOverflowError("FiberPropagator::apply: state exceeds propagator window");
  FiberVectorField g = floquet_transform(phi, J_.q(), grid_);
  for (int j = 0; j < grid_.m(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    Vector c = vecs_[u].adjoint() * g.values[u];
    for (int k = 0; k < J_.q(); ++k) c(k) *= std::polar(1.0, -t * vals_[u](k));
    g.values[u] = vecs_[u] * c;
  }
  return inverse_floquet(g, lo_, hi_);
}

EvolvedState evolve(const PeriodicJacobi& J, const WindowedState& phi, double t,
                    EvolveMethod method, double tau) {
  if (t < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
  const int c = support_center(phi);
  const int hw = light_cone_halfwidth(J, phi, t, tau);
  const int lo = c - hw, hi = c + hw;

  EvolvedState out;
  out.t = t;
  out.method = method;

  if (method == EvolveMethod::kFiberwise) {
    // Copy into the light-cone window first.
    WindowedState padded(lo, hi);
    for (int n = phi.support_lo(); n <= phi.support_hi(); ++n) padded.set(n, phi[n]);
    FiberPropagator prop(J, lo, hi);
    out.psi = prop.apply(padded, t);
  } else {
    const int dim = hi - lo + 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = lo; n <= hi; ++n) {
      H(n - lo, n - lo) = J.b_at(n);
      if (n < hi) {
        H(n - lo, n - lo + 1) = J.a_at(n);
        H(n - lo + 1, n - lo) = J.a_at(n);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Vector v = Vector::Zero(dim);
    for (int n = phi.support_lo(); n <= phi.support_hi(); ++n) v(n - lo) = phi[n];
    Vector coef = es.eigenvectors().transpose() * v;
    for (int k = 0; k < dim; ++k) coef(k) *= std::polar(1.0, -t * es.eigenvalues()(k));
    const Vector res = es.eigenvectors() * coef;
    out.psi = WindowedState(lo, hi);
    for (int n = lo; n <= hi; ++n) out.psi.set(n, res(n - lo));
    out.psi.declare_support(lo, hi);
  }

  // Measured mass in the outer half of the safety margin.
  const int core = support_radius(phi) + static_cast<int>(std::ceil(2.0 * J.tight_r_bound() * t));
  const int edge = core + (hw - core) / 2;
  double tail = 0.0;
  for (int n = lo; n <= hi; ++n)
    if (std::abs(n - c) > edge) tail += std::norm(out.psi[n]);
  out.tail_bound = tail;
  return out;
}

MomentValue moment(const PeriodicJacobi& J, const WindowedState& phi, double t, double p) {
  const EvolvedState ev = evolve(J, phi, t);
  MomentValue mv;
  for (int n = ev.psi.lo(); n <= ev.psi.hi(); ++n)
    mv.value += (std::pow(std::abs(static_cast<double>(n)), p) + 1.0) * std::norm(ev.psi[n]);
  const double edge = std::max(std::abs(static_cast<double>(ev.psi.lo())),
                               std::abs(static_cast<double>(ev.psi.hi())));
  mv.tail = ev.tail_bound * (std::pow(edge, p) + 1.0);
  if (mv.tail > 1e-6 * mv.value)
    throw WindowOverflowError("moment: certified tail exceeds 1e-6 of the windowed sum");
  return mv;
}

MomentSeries transport_exponents(const PeriodicJacobi& J, const WindowedState& phi, double p,
                                 const std::vector<double>& times) {
  MomentSeries ms;
  ms.p = p;
  ms.times = times;
  for (double t : times) {
    const MomentValue mv = moment(J, phi, t, p);
    ms.values.push_back(mv.value);
    ms.running_beta.push_back(t > 1.0 ? std::log(mv.value) / (p * std::log(t)) : 0.0);
  }
  if (!ms.running_beta.empty()) ms.final_beta = ms.running_beta.back();

  // Log-log least squares over the final decade.
  const double t_max = times.empty() ? 0.0 : times.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_max / 10.0 || times[i] <= 1.0) continue;
    const double x = std::log(times[i]);
    const double y = std::log(ms.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) ms.fit_beta = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * p);
  return ms;
}

WindowedState QOperator::apply(const WindowedState& phi) const {
  FiberOperator op;
  op.q = q;
  op.grid = grid;
  op.fibers = fibers;
  return apply_fiberwise(op, phi);
}

QOperator build_q_operator(const PeriodicJacobi& J, const ThetaGrid& grid,
                           QNormalization normalization) {
  QOperator Q;
  Q.q = J.q();
  Q.normalization = normalization;
  Q.grid = grid;
  const double nu = normalization == QNormalization::kVelocity
                        ? static_cast<double>(J.q()) / kTwoPi
                        : static_cast<double>(J.q());
  Q.fibers.reserve(static_cast<std::size_t>(grid.m()));
  for (int j = 0; j < grid.m(); ++j) {
    const double theta = grid.node(j);
    const double frac = theta - std::floor(theta);
    if (std::min({frac, std::abs(frac - 0.5), 1.0 - frac}) < 1e-9)
      throw DegeneratePointError(
          "build_q_operator: grid touches a degeneracy point; use a punctured grid");
    const FloquetFiber f = diagonalize_fiber(J, theta);
    Matrix Qf = Matrix::Zero(J.q(), J.q());
    for (int k = 0; k < J.q(); ++k) {
      const Vector v = f.eigenvectors.col(k);
      Qf += nu * f.slopes(k) * (v * v.adjoint());
    }
    Q.fibers.push_back(std::move(Qf));
  }
  return Q;
}

Matrix time_averaged_A(const PeriodicJacobi& J, double theta, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("time_averaged_A: t must be > 0");
  const FloquetFiber f = diagonalize_fiber(J, theta);
  const Matrix A = momentum_fiber(J, theta);
  Matrix At = f.eigenvectors.adjoint() * A * f.eigenvectors;
  const int q = J.q();
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k)
      At(j, k) *= cplx_phase_average(t * (f.eigenvalues(j) - f.eigenvalues(k)));
  return f.eigenvectors * At * f.eigenvectors.adjoint();
}

EstimateReport estimate_I_II_check(const PeriodicJacobi& J_n, const PeriodicJacobi& J_prev,
                                   double R, double t, double epsilon, EstimateVariant variant,
                                   double gamma_n, QNormalization normalization, int grid_m,
                                   int c1_grid_m) {
  EstimateReport rep;
  rep.variant = variant;
  rep.gamma_n = gamma_n;
  if (variant == EstimateVariant::kII && !(gamma_n < epsilon))
    throw PreconditionError("estimate_I_II_check: Estimate II requires gamma_n < epsilon");

  const int q = J_n.q();
  const double nu = normalization == QNormalization::kVelocity ? q / kTwoPi : q;
  const double momentum_scale = kTwoPi * nu / q;  // keeps both sides in one normalization

  const ThetaGrid grid = ThetaGrid::punctured(grid_m);
  const QOperator Q = build_q_operator(J_n, grid, normalization);
  double lhs = 0.0;
  for (int j = 0; j < grid_m; ++j) {
    const Matrix Y = Q.fiber(j) - momentum_scale * time_averaged_A(J_n, grid.node(j), t);
    lhs += grid.weight(j) * Y.squaredNorm();
  }
  rep.lhs = lhs;

  const double first = 4.0 * R * R * q * q / (t * t * epsilon * epsilon);
  if (variant == EstimateVariant::kI) {
    rep.c1_used = last_constant(J_n, ThetaGrid::punctured(c1_grid_m)).c1_emp;
    rep.rhs = first + 64.0 * R * R * std::exp(rep.c1_used * q / 2.0) * std::sqrt(epsilon);
  } else {
    rep.c1_used = last_constant(J_prev, ThetaGrid::punctured(c1_grid_m)).c1_emp;
    rep.rhs = first +
              16.0 * R * R * q * std::exp(rep.c1_used * J_prev.q() / 2.0) * std::sqrt(epsilon);
  }
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= 0.0;
  return rep;
}

namespace {

// Adaptive Simpson for WindowedState-valued integrands.
template <typename F>
WindowedState simpson_recurse(const F& f, double a, double b, const WindowedState& fa,
                              const WindowedState& fm, const WindowedState& fb,
                              const WindowedState& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const WindowedState flm = f(lm), frm = f(rm);

  auto simpson = [](double lo, double hi, const WindowedState& u, const WindowedState& v,
                    const WindowedState& w) {
    WindowedState out(u.lo(), u.hi());
    const double h = (hi - lo) / 6.0;
    int slo = u.hi() + 1, shi = u.lo() - 1;
    for (int n = u.lo(); n <= u.hi(); ++n) {
      const cplx val = h * (u[n] + 4.0 * v[n] + w[n]);
      out.set(n, val);
      if (val != cplx{0.0, 0.0}) {
        slo = std::min(slo, n);
        shi = std::max(shi, n);
      }
    }
    if (shi >= slo) out.declare_support(slo, shi);
    return out;
  };

  const WindowedState left = simpson(a, m, fa, flm, fm);
  const WindowedState right = simpson(m, b, fm, frm, fb);
  WindowedState sum(left.lo(), left.hi());
  double err = 0.0;
  for (int n = left.lo(); n <= left.hi(); ++n) {
    const cplx v = left[n] + right[n];
    sum.set(n, v);
    err += std::norm(v - whole[n]);
  }
  sum.declare_support(sum.lo(), sum.hi());
  if (depth <= 0) throw std::runtime_error("position_identity_check: quadrature did not converge");
  if (std::sqrt(err) <= 15.0 * tol) {
    // Richardson correction (left + right) + (left + right - whole) / 15.
    WindowedState out(sum.lo(), sum.hi());
    for (int n = sum.lo(); n <= sum.hi(); ++n) out.set(n, sum[n] + (sum[n] - whole[n]) / 15.0);
    out.declare_support(out.lo(), out.hi());
    return out;
  }
  const WindowedState li = simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
  const WindowedState ri = simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
  WindowedState out(li.lo(), li.hi());
  for (int n = li.lo(); n <= li.hi(); ++n) out.set(n, li[n] + ri[n]);
  out.declare_support(out.lo(), out.hi());
  return out;
}

template <typename F>
WindowedState adaptive_simpson(const F& f, double a, double b, double tol) {
  const WindowedState fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  WindowedState whole(fa.lo(), fa.hi());
  const double h = (b - a) / 6.0;
  for (int n = fa.lo(); n <= fa.hi(); ++n) whole.set(n, h * (fa[n] + 4.0 * fm[n] + fb[n]));
  whole.declare_support(whole.lo(), whole.hi());
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double position_identity_check(const PeriodicJacobi& J, const WindowedState& phi, double t,
                               double quad_tol) {
  if (t == 0.0) return 0.0;  // X_J(0) = X and the integral vanishes
  const int c = support_center(phi);
  const int hw = light_cone_halfwidth(J, phi, t) + 4;  // room for the momentum stencil
  const int lo = c - hw, hi = c + hw;

  WindowedState padded(lo, hi);
  for (int n = phi.support_lo(); n <= phi.support_hi(); ++n) padded.set(n, phi[n]);

  const FiberPropagator prop(J, lo, hi);

  // Heisenberg position: e^{itJ} X e^{-itJ} phi.
  const WindowedState lhs = prop.apply(apply_position(prop.apply(padded, t)), -t);

  // X phi + int_0^t e^{isJ} A e^{-isJ} phi ds.  The propagated state formally
  // fills the window; its outermost sites are far beyond the light cone, so
  // trimming them leaves room for the momentum stencil.
  auto trim_edges = [lo, hi](WindowedState u) {
    u.set(lo, cplx{0.0, 0.0});
    u.set(hi, cplx{0.0, 0.0});
    u.declare_support(lo + 1, hi - 1);
    return u;
  };
  auto integrand = [&](double s) {
    return prop.apply(apply_momentum(J, trim_edges(prop.apply(padded, s))), -s);
  };
  WindowedState rhs = apply_position(padded);
  if (t > 0.0) {
    const WindowedState integral = adaptive_simpson(integrand, 0.0, t, quad_tol);
    WindowedState sum(lo, hi);
    for (int n = lo; n <= hi; ++n) sum.set(n, rhs[n] + integral[n]);
    sum.declare_support(lo, hi);
    rhs = sum;
  }
  return lhs.dist(rhs);
}

Schedule make_schedule(double c1, double eta, const std::vector<int>& q_schedule, double eta0) {
  Schedule sch;
  sch.c1 = c1;
  sch.eta = eta;
  sch.window_lo = 5.0 * c1;
  sch.window_hi = (4.0 * eta - 3.0 * c1) / 5.0;
  if (!(eta > 7.0 * c1))
    throw PreconditionError("make_schedule: requires eta > 7 c1 (window (5 c1, (4 eta - 3 c1)/5) is empty)");
  sch.eta0 = eta0 < 0.0 ? 0.5 * (sch.window_lo + sch.window_hi) : eta0;
  if (!(sch.eta0 > sch.window_lo && sch.eta0 < sch.window_hi))
    throw std::invalid_argument("make_schedule: eta0 outside the admissible window");

  for (std::size_t n = 0; n + 1 < q_schedule.size(); ++n) {
    StageSchedule st;
    st.n = n;
    st.q_n = q_schedule[n];
    st.q_n1 = q_schedule[n + 1];
    const double qn = st.q_n, qn1 = st.q_n1;
    st.eps_n = std::exp(-qn * sch.eta0) / (qn * qn);
    st.eps_tilde_n = std::exp(-qn * sch.eta0) / (qn1 * qn1);
    st.t_n = qn1 * qn1 * qn1 * std::exp((5.0 * sch.eta0 - c1) * qn / 4.0);
    st.gamma_n1 = std::exp(-qn * eta) / (qn1 * qn1 * qn1);
    if (!(st.gamma_n1 < st.eps_tilde_n))
      throw PreconditionError("make_schedule: gamma_{n+1} < eps~_n violated at stage " +
                              std::to_string(n));
    sch.stages.push_back(st);
  }
  return sch;
}

namespace {

WindowedState apply_q_windowed(const PeriodicJacobi& J, const WindowedState& phi, int grid_m,
                               QNormalization normalization) {
  const int need = periods_in_window(phi.lo(), phi.hi(), J.q());
  const int m = std::max(grid_m, need);
  const QOperator Q = build_q_operator(J, ThetaGrid::punctured(m), normalization);
  return Q.apply(phi);
}

}  // namespace

QConvergenceTable q_convergence_experiment(const LimitPeriodicFamily& fam,
                                           const WindowedState& phi,
                                           QNormalization normalization, int grid_m,
                                           int c1_grid_m) {
  if (fam.n_stages() < 2)
    throw std::invalid_argument("q_convergence_experiment: need at least 2 stages");

  QConvergenceTable table;
  for (const auto& s : fam.stages())
    table.c1 = std::max(table.c1,
                        last_constant(s, ThetaGrid::punctured(c1_grid_m)).c1_emp);

  const double lo = 5.0 * table.c1;
  const double hi = (4.0 * fam.eta() - 3.0 * table.c1) / 5.0;
  if (!(fam.eta() > 7.0 * table.c1))
    throw PreconditionError("q_convergence_experiment: family eta <= 7 c1(measured)");
  table.eta0 = 0.5 * (lo + hi);

  const double R = fam.r_bound();
  const double l1 = phi.l1_norm();
  for (std::size_t n = 0; n + 1 < fam.n_stages(); ++n) {
    const WindowedState qa = apply_q_windowed(fam.stage(n), phi, grid_m, normalization);
    const WindowedState qb = apply_q_windowed(fam.stage(n + 1), phi, grid_m, normalization);
    QConvergenceRow row;
    row.n = n;
    row.q_n = fam.stage(n).q();
    row.q_n1 = fam.stage(n + 1).q();
    row.diff_norm = qa.dist(qb);
    const double qn = row.q_n;
    row.series_bound = (8.0 * R * std::exp((table.c1 - table.eta0) * qn / 4.0) +
                       2.0 * (R + 1.0) *
                           std::exp((5.0 * table.eta0 - table.c1 - 4.0 * fam.eta()) * qn / 4.0)) *
                      l1;
    row.ratio = row.diff_norm / row.series_bound;
    table.rows.push_back(row);
  }
  return table;
}

BallisticWitness ballistic_witness(const LimitPeriodicFamily& fam, const WindowedState& phi,
                                   const std::vector<double>& times, int grid_m, int c1_grid_m) {
  BallisticWitness bw;
  const PeriodicJacobi& J = fam.stages().back();

  for (double t : times) {
    const int c = support_center(phi);
    const int hw = light_cone_halfwidth(J, phi, t) + 4;
    WindowedState padded(c - hw, c + hw);
    for (int n = phi.support_lo(); n <= phi.support_hi(); ++n) padded.set(n, phi[n]);
    const FiberPropagator prop(J, c - hw, c + hw);
    const WindowedState xjt = prop.apply(apply_position(prop.apply(padded, t)), -t);
    WindowedState scaled = xjt;
    scaled.scale(1.0 / t);
    const WindowedState qphi = apply_q_windowed(J, padded, grid_m, QNormalization::kVelocity);
    BallisticRow row;
    row.t = t;
    row.residual = scaled.dist(qphi);
    bw.rows.push_back(row);
  }

  for (std::size_t n = 0; n < fam.n_stages(); ++n) {
    const PeriodicJacobi& Jn = fam.stage(n);
    const int c = support_center(phi);
    const int hw = std::max(support_radius(phi) + 16 * Jn.q(), phi.hi() - c);
    WindowedState padded(c - hw, c + hw);
    for (int k = phi.support_lo(); k <= phi.support_hi(); ++k) padded.set(k, phi[k]);
    const WindowedState qphi = apply_q_windowed(Jn, padded, grid_m, QNormalization::kVelocity);
    KernelRow row;
    row.n = n;
    row.q_n = Jn.q();
    row.kernel_lhs = qphi.norm();
    row.kernel_rhs =
        std::exp(-last_constant(Jn, ThetaGrid::punctured(c1_grid_m)).c1_emp * Jn.q());
    row.holds = row.kernel_lhs >= row.kernel_rhs;
    bw.kernel.push_back(row);
  }
  return bw;
}

}  // namespace jlab
