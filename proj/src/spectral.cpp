#include "jlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jlab/errors.hpp"

namespace jlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Mat2 = Eigen::Matrix2d;

Mat2 one_step(const PeriodicJacobi& J, double lambda, int j) {
  // Transfer step ((lambda - b_j)/a_j, -a_{j-1}/a_j; 1, 0), cyclic indices.
  Mat2 T;
  T << (lambda - J.b_at(j)) / J.a_at(j), -J.a_at(j - 1) / J.a_at(j), 1.0, 0.0;
  return T;
}

// One-period transfer product with exponent tracking: returns (M, e) with the
// true product equal to M * 2^e and ||M|| kept moderate.
std::pair<Mat2, int> transfer_product(const PeriodicJacobi& J, double lambda) {
  Mat2 M = Mat2::Identity();
  int e = 0;
  for (int j = 0; j < J.q(); ++j) {
    M = one_step(J, lambda, j) * M;
    const double s = M.cwiseAbs().maxCoeff();
    if (s > 1e100) {
      int ex;
      std::frexp(s, &ex);
      M *= std::ldexp(1.0, -ex);
      e += ex;
    }
  }
  return {M, e};
}
}  // namespace

double torus_norm(double x) {
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

double discriminant(const PeriodicJacobi& J, double lambda) {
  const auto [M, e] = transfer_product(J, lambda);
  return std::ldexp(M.trace(), e);
}

double discriminant_derivative(const PeriodicJacobi& J, double lambda) {
  // d/d lambda of the ordered product: sum over j of
  // suffix_j * dT_j * prefix_j, with dT_j = ((1/a_j, 0), (0, 0)).
  const int q = J.q();
  std::vector<Mat2> prefix(static_cast<std::size_t>(q + 1));
  prefix[0] = Mat2::Identity();
  for (int j = 0; j < q; ++j)
    prefix[static_cast<std::size_t>(j + 1)] =
        one_step(J, lambda, j) * prefix[static_cast<std::size_t>(j)];
  std::vector<Mat2> suffix(static_cast<std::size_t>(q + 1));
  suffix[static_cast<std::size_t>(q)] = Mat2::Identity();
  for (int j = q - 1; j >= 0; --j)
    suffix[static_cast<std::size_t>(j)] =
        suffix[static_cast<std::size_t>(j + 1)] * one_step(J, lambda, j);
  Mat2 sum = Mat2::Zero();
  for (int j = 0; j < q; ++j) {
    Mat2 dT = Mat2::Zero();
    dT(0, 0) = 1.0 / J.a_at(j);
    sum += suffix[static_cast<std::size_t>(j + 1)] * dT * prefix[static_cast<std::size_t>(j)];
  }
  return sum.trace();
}

BandCurves band_curves(const PeriodicJacobi& J, const ThetaGrid& grid) {
  BandCurves bc;
  bc.grid = grid;
  const int m = grid.m();
  const int q = J.q();
  bc.lambda.resize(m, q);
  bc.slope.resize(m, q);
  for (int j = 0; j < m; ++j) {
    const FloquetFiber f = diagonalize_fiber(J, grid.node(j));
    bc.lambda.row(j) = f.eigenvalues.transpose();
    bc.slope.row(j) = f.slopes.transpose();
  }
  return bc;
}

double slope_via_discriminant(const PeriodicJacobi& J, double theta, int k) {
  const double frac = theta - std::floor(theta);
  if (frac == 0.0 || frac == 0.5)
    throw DegeneratePointError("slope_via_discriminant: theta in {0, 1/2}");
  const FloquetFiber f = diagonalize_fiber(J, theta);
  const double lam = f.eigenvalues(k);
  const double dd = discriminant_derivative(J, lam);
  if (std::abs(dd) < 1e-12)
    throw DegeneratePointError("slope_via_discriminant: discriminant derivative vanishes");
  return -2.0 * kTwoPi * std::sin(kTwoPi * theta) / dd;
}

LastConstant last_constant(const PeriodicJacobi& J, const ThetaGrid& grid) {
  LastConstant lc;
  lc.grid_m = grid.m();
  const int q = J.q();
  double best = 0.0;  // max of ln(|sin|/|slope|)/q, clamped at 0
  for (int j = 0; j < grid.m(); ++j) {
    const double theta = grid.node(j);
    const double s = std::abs(std::sin(kTwoPi * theta));
    if (s == 0.0) continue;
    const FloquetFiber f = diagonalize_fiber(J, theta);
    for (int k = 0; k < q; ++k) {
      const double slope = std::abs(f.slopes(k));
      if (slope < 1e-300) {
        ++lc.violations;
        continue;
      }
      const double c = std::log(s / slope) / q;
      if (c > best) {
        best = c;
        lc.attaining_theta = theta;
        lc.attaining_band = k;
      }
    }
  }
  lc.c1_emp = std::max(0.0, best);
  return lc;
}

MinimaxReport minimax_check(const PeriodicJacobi& J1, const PeriodicJacobi& J2, double theta) {
  const int qf = std::max(J1.q(), J2.q());
  const PeriodicJacobi A = J1.q() == qf ? J1 : J1.reinterpret(qf);
  const PeriodicJacobi B = J2.q() == qf ? J2 : J2.reinterpret(qf);

  const FloquetFiber fa = diagonalize_fiber(A, theta);
  const FloquetFiber fb = diagonalize_fiber(B, theta);

  MinimaxReport rep;
  for (int k = 0; k < qf; ++k)
    rep.max_displacement =
        std::max(rep.max_displacement, std::abs(fa.eigenvalues(k) - fb.eigenvalues(k)));

  const Matrix diff = fiber_matrix(A, theta) - fiber_matrix(B, theta);
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
  rep.fiber_diff_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  rep.coeff_bound = coefficient_norm_bound(A, B);
  rep.holds = rep.max_displacement <= rep.fiber_diff_norm + 1e-12 &&
              rep.fiber_diff_norm <= rep.coeff_bound + 1e-12;
  return rep;
}

double band_folding(const PeriodicJacobi& J_coarse, int q_fine, double theta) {
  const int qc = J_coarse.q();
  if (q_fine % qc != 0)
    throw std::invalid_argument("band_folding: q_fine must be a multiple of the coarse period");
  const int l_ratio = q_fine / qc;

  const FloquetFiber fine = diagonalize_fiber(J_coarse.reinterpret(q_fine), theta);
  std::vector<double> folded;
  folded.reserve(static_cast<std::size_t>(q_fine));
  for (int l = 0; l < l_ratio; ++l) {
    const FloquetFiber f = diagonalize_fiber(J_coarse, (theta + l) / l_ratio);
    for (int k = 0; k < qc; ++k) folded.push_back(f.eigenvalues(k));
  }
  std::sort(folded.begin(), folded.end());

  double dist = 0.0;
  for (int k = 0; k < q_fine; ++k)
    dist = std::max(dist, std::abs(fine.eigenvalues(k) - folded[static_cast<std::size_t>(k)]));
  return dist;
}

FoldedSlopeReport folded_slope_bound(const PeriodicJacobi& J_coarse, int q_fine, double theta,
                                     int c1_grid_m) {
  const double frac = theta - std::floor(theta);
  if (frac == 0.0 || frac == 0.5)
    throw DegeneratePointError("folded_slope_bound: theta in {0, 1/2}");
  const int l_ratio = q_fine / J_coarse.q();

  FoldedSlopeReport rep;
  rep.c1_used = last_constant(J_coarse, ThetaGrid::punctured(c1_grid_m)).c1_emp;

  const FloquetFiber fine = diagonalize_fiber(J_coarse.reinterpret(q_fine), theta);
  rep.min_slope = fine.slopes.cwiseAbs().minCoeff();

  // |sin pi phi| >= 2 ||phi||_T, so c = 2 below.
  rep.rhs = (2.0 / (static_cast<double>(l_ratio) * l_ratio)) *
            std::exp(-rep.c1_used * J_coarse.q()) * torus_norm(2.0 * theta);
  rep.holds = rep.min_slope >= rep.rhs;
  return rep;
}

}  // namespace jlab
