#pragma once

#include <Eigen/Dense>
#include <vector>

#include "jlab/floquet.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/theta_grid.hpp"

namespace jlab {

// Ordered eigenvalue curves and Hellmann-Feynman slopes over a theta grid.
struct BandCurves {
  ThetaGrid grid = ThetaGrid::plain(1);
  Eigen::MatrixXd lambda;  // m x q, ascending per row
  Eigen::MatrixXd slope;   // m x q
};

BandCurves band_curves(const PeriodicJacobi& J, const ThetaGrid& grid);

// Discriminant Delta(lambda): trace of the one-period transfer-matrix
// product, with internal scaling against overflow at large |lambda|.
double discriminant(const PeriodicJacobi& J, double lambda);

// d Delta / d lambda, by analytic differentiation of the transfer product.
double discriminant_derivative(const PeriodicJacobi& J, double lambda);

// Slope of band k at theta via implicit differentiation of
// Delta(lambda(theta)) = 2 cos 2 pi theta:  -4 pi sin(2 pi theta) / Delta'.
double slope_via_discriminant(const PeriodicJacobi& J, double theta, int k);

// Empirical Last constant: smallest c1 >= 0 with
// |slope(theta, k)| >= e^{-c1 q} |sin 2 pi theta| at every audited node.
struct LastConstant {
  double c1_emp = 0.0;
  int grid_m = 0;
  double attaining_theta = 0.0;
  int attaining_band = 0;
  int violations = 0;  // interior nodes with numerically vanishing slope
};

LastConstant last_constant(const PeriodicJacobi& J, const ThetaGrid& grid);

// Minimax audit: per-band eigenvalue displacement vs the fiber-difference
// spectral norm vs the coefficient certificate, at one theta.
struct MinimaxReport {
  double max_displacement = 0.0;
  double fiber_diff_norm = 0.0;
  double coeff_bound = 0.0;
  bool holds = false;  // displacement <= fiber norm <= coefficient bound
};

MinimaxReport minimax_check(const PeriodicJacobi& J1, const PeriodicJacobi& J2, double theta);

// Refinement identity: eigenvalues of the coarse operator reinterpreted at
// q_fine equal the union over l of the coarse fibers at (theta + l)/l_ratio.
// Returns the max sorted-list discrepancy (Hausdorff distance of multisets).
double band_folding(const PeriodicJacobi& J_coarse, int q_fine, double theta);

// Minimum folded-band slope at theta, checked against
// (2 / l^2) e^{-c1 q_coarse} ||2 theta||_T  with c1 from last_constant.
struct FoldedSlopeReport {
  double min_slope = 0.0;
  double rhs = 0.0;
  double c1_used = 0.0;
  bool holds = false;
};

FoldedSlopeReport folded_slope_bound(const PeriodicJacobi& J_coarse, int q_fine, double theta,
                                     int c1_grid_m = 1024);

double torus_norm(double x);  // dist(x, Z)

}  // namespace jlab
