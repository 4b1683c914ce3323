#pragma once

#include <vector>

#include "jlab/family.hpp"
#include "jlab/floquet.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/spectral.hpp"
#include "jlab/theta_grid.hpp"
#include "jlab/windowed_state.hpp"

namespace jlab {

enum class EvolveMethod { kFiberwise, kTruncated };

struct EvolvedState {
  double t = 0.0;
  WindowedState psi;
  EvolveMethod method = EvolveMethod::kFiberwise;
  double tail_bound = 0.0;  // measured mass in the outer margin of the window
};

// Window half-width for the light-cone rule: support radius + ceil(2 R t)
// plus a margin of 8 + ceil(4 ln(1/tau)) sites for tail tolerance tau.
int light_cone_halfwidth(const PeriodicJacobi& J, const WindowedState& phi, double t,
                         double tau = 1e-12);

// e^{-i t J} phi on a light-cone sized window (t >= 0).
EvolvedState evolve(const PeriodicJacobi& J, const WindowedState& phi, double t,
                    EvolveMethod method = EvolveMethod::kFiberwise, double tau = 1e-12);

// Fixed-window propagator with precomputed fiber eigendecompositions; allows
// signed times.  The window must span at most grid-size periods.
class FiberPropagator {
 public:
  FiberPropagator(const PeriodicJacobi& J, int window_lo, int window_hi);

  WindowedState apply(const WindowedState& phi, double t) const;  // e^{-i t J} phi
  int window_lo() const { return lo_; }
  int window_hi() const { return hi_; }
  const PeriodicJacobi& op() const { return J_; }

 private:
  PeriodicJacobi J_;
  int lo_, hi_;
  ThetaGrid grid_;
  std::vector<Matrix> vecs_;
  std::vector<Eigen::VectorXd> vals_;
};

// Moment |X|^p_phi(t) = sum_n (|n|^p + 1) |<delta_n, e^{-itJ} phi>|^2,
// reported as [value, value + tail].
struct MomentValue {
  double value = 0.0;
  double tail = 0.0;
};

MomentValue moment(const PeriodicJacobi& J, const WindowedState& phi, double t, double p);

struct MomentSeries {
  double p = 0.0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> running_beta;  // log value / (p log t), for t > 1
  double final_beta = 0.0;
  double fit_beta = 0.0;  // log-log fit slope over the final decade, / p
};

MomentSeries transport_exponents(const PeriodicJacobi& J, const WindowedState& phi, double p,
                                 const std::vector<double>& times);

// Normalization of the velocity operator Q(theta) = nu * sum_k slope_k P_k.
// kVelocity (nu = q / 2 pi) matches the ballistic limit (1/t) X(t) -> Q and
// gives the free operator the group velocities -2 sin(2 pi (k + theta)/q).
// kPerTorusUnit (nu = q) is the same formula read with slopes taken per unit
// of the 2 pi torus; it is 2 pi times kVelocity.
enum class QNormalization { kVelocity, kPerTorusUnit };

struct QOperator {
  int q = 0;
  QNormalization normalization = QNormalization::kVelocity;
  ThetaGrid grid = ThetaGrid::punctured(2);
  std::vector<Matrix> fibers;

  WindowedState apply(const WindowedState& phi) const;
  Matrix fiber(int node) const { return fibers.at(static_cast<std::size_t>(node)); }
};

QOperator build_q_operator(const PeriodicJacobi& J, const ThetaGrid& grid,
                           QNormalization normalization = QNormalization::kVelocity);

// (1/t) int_0^t e^{isJ(theta)} A(theta) e^{-isJ(theta)} ds in closed form.
Matrix time_averaged_A(const PeriodicJacobi& J, double theta, double t);

enum class EstimateVariant { kI, kII };

// Time-average audit: LHS = int || Q(theta) - s * avgA(theta, t) ||_HS^2 with
// the momentum side scaled by s = 2 pi nu / q so both sides carry the same
// normalization; RHS = 4 R^2 q^2 / (t^2 eps^2) + bad-set term.
struct EstimateReport {
  EstimateVariant variant = EstimateVariant::kI;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool holds = false;
  double c1_used = 0.0;
  double gamma_n = 0.0;  // variant II only
};

EstimateReport estimate_I_II_check(const PeriodicJacobi& J_n, const PeriodicJacobi& J_prev,
                                   double R, double t, double epsilon, EstimateVariant variant,
                                   double gamma_n = 0.0,
                                   QNormalization normalization = QNormalization::kVelocity,
                                   int grid_m = 512, int c1_grid_m = 1024);

// || X_J(t) phi - X phi - int_0^t e^{isJ} A e^{-isJ} phi ds ||, the integral
// by adaptive Simpson quadrature.
double position_identity_check(const PeriodicJacobi& J, const WindowedState& phi, double t,
                               double quad_tol = 1e-8);

// Multi-stage convergence schedule.
struct StageSchedule {
  std::size_t n = 0;
  int q_n = 0;
  int q_n1 = 0;
  double t_n = 0.0;
  double eps_n = 0.0;        // q_n^{-2} e^{-q_n eta0}
  double eps_tilde_n = 0.0;  // q_{n+1}^{-2} e^{-q_n eta0}
  double gamma_n1 = 0.0;     // q_{n+1}^{-3} e^{-q_n eta}
};

struct Schedule {
  double c1 = 0.0;
  double eta = 0.0;
  double eta0 = 0.0;
  double window_lo = 0.0;  // 5 c1
  double window_hi = 0.0;  // (4 eta - 3 c1) / 5
  std::vector<StageSchedule> stages;
};

Schedule make_schedule(double c1, double eta, const std::vector<int>& q_schedule,
                       double eta0 = -1.0);  // eta0 < 0 -> window midpoint

// Per consecutive stage pair: ||(Q_{q_n} - Q_{q_{n+1}}) phi|| against the
// summable-series bound (8 R e^{(c1-eta0) q_n / 4} +
// 2 (R+1) e^{(5 eta0 - c1 - 4 eta) q_n / 4}) ||phi||_1.
struct QConvergenceRow {
  std::size_t n = 0;
  int q_n = 0;
  int q_n1 = 0;
  double diff_norm = 0.0;
  double series_bound = 0.0;
  double ratio = 0.0;  // diff / bound
};

struct QConvergenceTable {
  double c1 = 0.0;
  double eta0 = 0.0;
  std::vector<QConvergenceRow> rows;
};

QConvergenceTable q_convergence_experiment(const LimitPeriodicFamily& fam,
                                           const WindowedState& phi,
                                           QNormalization normalization = QNormalization::kPerTorusUnit,
                                           int grid_m = 512, int c1_grid_m = 1024);

// Finite-time ballistic witness: (1/t) X_J(t) phi against the finest stage's
// Q, plus the kernel lower bound ||Q_{q_n} phi|| >= e^{-c1 q_n} per stage.
struct BallisticRow {
  double t = 0.0;
  double residual = 0.0;  // ||(1/t) X_J(t) phi - Q phi||
};

struct KernelRow {
  std::size_t n = 0;
  int q_n = 0;
  double kernel_lhs = 0.0;  // ||Q_{q_n} phi||
  double kernel_rhs = 0.0;  // e^{-c1_emp q_n}
  bool holds = false;
};

struct BallisticWitness {
  std::vector<BallisticRow> rows;
  std::vector<KernelRow> kernel;
};

BallisticWitness ballistic_witness(const LimitPeriodicFamily& fam, const WindowedState& phi,
                                   const std::vector<double>& times, int grid_m = 512,
                                   int c1_grid_m = 1024);

}  // namespace jlab
