#pragma once

#include <Eigen/Dense>
#include <vector>

#include "jlab/periodic_jacobi.hpp"
#include "jlab/theta_grid.hpp"
#include "jlab/windowed_state.hpp"

namespace jlab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Phase convention, fixed repo-wide: the top-right corner of the fiber matrix
// carries e^{-i 2 pi theta}, matching the transform [F phi]_k(theta) =
// sum_p phi_{k+pq} e^{-i p 2 pi theta}.
inline constexpr double kCornerPhaseSign = -1.0;

// q x q Hermitian Floquet fiber: tridiagonal in (a, b) with wraparound
// corners a_{q-1} * e^{-+ i 2 pi theta}.
Matrix fiber_matrix(const PeriodicJacobi& J, double theta);

// d/d theta of the fiber matrix (only the corners move).
Matrix fiber_matrix_derivative(const PeriodicJacobi& J, double theta);

// Fiber of the momentum operator A = i[J, X]: (k, k+1) entry i a_k,
// corners -+ i a_{q-1} * phase.  Hermitian, operator norm <= 2R.
Matrix momentum_fiber(const PeriodicJacobi& J, double theta);

// Eigendecomposition of one fiber with deterministic eigenvector phases
// (largest-modulus component rotated real positive) and Hellmann-Feynman
// slopes.  Slopes are meaningless at the degeneracy points {0, 1/2}.
struct FloquetFiber {
  double theta = 0.0;
  Matrix matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  Matrix eigenvectors;          // orthonormal columns
  Eigen::VectorXd slopes;       // d lambda_k / d theta
};

FloquetFiber diagonalize_fiber(const PeriodicJacobi& J, double theta);

// Values of the Floquet transform on a theta grid: one length-q vector per
// node, [F phi]_k(theta_j).
struct FiberVectorField {
  int q = 0;
  ThetaGrid grid = ThetaGrid::plain(1);
  std::vector<Vector> values;  // grid.m() vectors of length q
};

FiberVectorField floquet_transform(const WindowedState& phi, int q, const ThetaGrid& grid);

// Inverse transform onto [window_lo, window_hi]; exact when the window spans
// at most grid.m() periods (throws AliasingError otherwise).
WindowedState inverse_floquet(const FiberVectorField& g, int window_lo, int window_hi);

// A theta-dependent q x q matrix sampled on a grid (a direct integral).
struct FiberOperator {
  int q = 0;
  ThetaGrid grid = ThetaGrid::plain(1);
  std::vector<Matrix> fibers;  // grid.m() matrices of size q x q

  static FiberOperator from(const PeriodicJacobi& J, const ThetaGrid& grid);
  static FiberOperator momentum(const PeriodicJacobi& J, const ThetaGrid& grid);
};

// F^{-1} [ op(theta) (F phi)(theta) ] on phi's window.
WindowedState apply_fiberwise(const FiberOperator& op, const WindowedState& phi);

}  // namespace jlab
