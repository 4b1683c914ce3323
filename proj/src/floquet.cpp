#include "jlab/floquet.hpp"

#include <cmath>
#include <numbers>

namespace jlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx corner_phase(double theta) {  // e^{-i 2 pi theta}, top-right corner
  return std::polar(1.0, kCornerPhaseSign * kTwoPi * theta);
}
}  // namespace

Matrix fiber_matrix(const PeriodicJacobi& J, double theta) {
  const int q = J.q();
  Matrix M = Matrix::Zero(q, q);
  for (int j = 0; j < q; ++j) M(j, j) = J.b()[static_cast<std::size_t>(j)];
  for (int j = 0; j + 1 < q; ++j) {
    M(j, j + 1) = J.a()[static_cast<std::size_t>(j)];
    M(j + 1, j) = J.a()[static_cast<std::size_t>(j)];
  }
  const double aq = J.a()[static_cast<std::size_t>(q - 1)];
  M(0, q - 1) = aq * corner_phase(theta);
  M(q - 1, 0) = aq * std::conj(corner_phase(theta));
  return M;
}

Matrix fiber_matrix_derivative(const PeriodicJacobi& J, double theta) {
  const int q = J.q();
  Matrix D = Matrix::Zero(q, q);
  const double aq = J.a()[static_cast<std::size_t>(q - 1)];
  const cplx i{0.0, 1.0};
  D(0, q - 1) = kCornerPhaseSign * kTwoPi * i * aq * corner_phase(theta);
  D(q - 1, 0) = std::conj(D(0, q - 1));
  return D;
}

Matrix momentum_fiber(const PeriodicJacobi& J, double theta) {
  const int q = J.q();
  Matrix A = Matrix::Zero(q, q);
  const cplx i{0.0, 1.0};
  for (int j = 0; j + 1 < q; ++j) {
    A(j, j + 1) = i * J.a()[static_cast<std::size_t>(j)];
    A(j + 1, j) = -i * J.a()[static_cast<std::size_t>(j)];
  }
  const double aq = J.a()[static_cast<std::size_t>(q - 1)];
  A(0, q - 1) = -i * aq * corner_phase(theta);
  A(q - 1, 0) = std::conj(A(0, q - 1));
  return A;
}

FloquetFiber diagonalize_fiber(const PeriodicJacobi& J, double theta) {
  FloquetFiber f;
  f.theta = theta;
  f.matrix = fiber_matrix(J, theta);
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.matrix);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("diagonalize_fiber: eigensolver failed at theta=" +
                             std::to_string(theta));
  f.eigenvalues = es.eigenvalues();
  f.eigenvectors = es.eigenvectors();

  // Deterministic phases: rotate each column's largest-modulus entry to be
  // real positive.
  const int q = J.q();
  for (int k = 0; k < q; ++k) {
    int arg = 0;
    double best = 0.0;
    for (int j = 0; j < q; ++j) {
      const double m = std::abs(f.eigenvectors(j, k));
      if (m > best) {
        best = m;
        arg = j;
      }
    }
    const cplx z = f.eigenvectors(arg, k);
    if (std::abs(z) > 0.0) f.eigenvectors.col(k) *= std::conj(z) / std::abs(z);
  }

  const Matrix D = fiber_matrix_derivative(J, theta);
  f.slopes.resize(q);
  for (int k = 0; k < q; ++k) {
    const Vector v = f.eigenvectors.col(k);
    f.slopes(k) = std::real(v.dot(D * v));
  }
  return f;
}

FiberVectorField floquet_transform(const WindowedState& phi, int q, const ThetaGrid& grid) {
  if (q < 3) throw std::invalid_argument("floquet_transform: q must be >= 3");
  FiberVectorField out;
  out.q = q;
  out.grid = grid;
  out.values.assign(static_cast<std::size_t>(grid.m()), Vector::Zero(q));
  if (phi.support_empty()) return out;
  for (int j = 0; j < grid.m(); ++j) {
    const double theta = grid.node(j);
    Vector& g = out.values[static_cast<std::size_t>(j)];
    for (int n = phi.support_lo(); n <= phi.support_hi(); ++n) {
      const cplx v = phi[n];
      if (v == cplx{0.0, 0.0}) continue;
      // n = k + p q with 0 <= k < q
      const int p = static_cast<int>(std::floor(static_cast<double>(n) / q));
      const int k = n - p * q;
      g(k) += v * std::polar(1.0, -kTwoPi * p * theta);
    }
  }
  return out;
}

WindowedState inverse_floquet(const FiberVectorField& g, int window_lo, int window_hi) {
  const int q = g.q;
  const int m = g.grid.m();
  const int p_lo = static_cast<int>(std::floor(static_cast<double>(window_lo) / q));
  const int p_hi = static_cast<int>(std::floor(static_cast<double>(window_hi) / q));
  if (p_hi - p_lo + 1 > m)
    throw AliasingError("inverse_floquet: window spans more periods than grid nodes");

  WindowedState phi(window_lo, window_hi);
  int slo = window_hi + 1, shi = window_lo - 1;
  for (int p = p_lo; p <= p_hi; ++p) {
    for (int k = 0; k < q; ++k) {
      const int n = k + p * q;
      if (n < window_lo || n > window_hi) continue;
      cplx s{0.0, 0.0};
      for (int j = 0; j < m; ++j)
        s += g.grid.weight(j) * std::polar(1.0, kTwoPi * p * g.grid.node(j)) *
             g.values[static_cast<std::size_t>(j)](k);
      phi.set(n, s);
      slo = std::min(slo, n);
      shi = std::max(shi, n);
    }
  }
  if (shi >= slo) phi.declare_support(slo, shi);
  return phi;
}

FiberOperator FiberOperator::from(const PeriodicJacobi& J, const ThetaGrid& grid) {
  FiberOperator op;
  op.q = J.q();
  op.grid = grid;
  op.fibers.reserve(static_cast<std::size_t>(grid.m()));
  for (int j = 0; j < grid.m(); ++j) op.fibers.push_back(fiber_matrix(J, grid.node(j)));
  return op;
}

FiberOperator FiberOperator::momentum(const PeriodicJacobi& J, const ThetaGrid& grid) {
  FiberOperator op;
  op.q = J.q();
  op.grid = grid;
  op.fibers.reserve(static_cast<std::size_t>(grid.m()));
  for (int j = 0; j < grid.m(); ++j) op.fibers.push_back(momentum_fiber(J, grid.node(j)));
  return op;
}

WindowedState apply_fiberwise(const FiberOperator& op, const WindowedState& phi) {
  FiberVectorField g = floquet_transform(phi, op.q, op.grid);
  for (int j = 0; j < op.grid.m(); ++j) {
    const auto u = static_cast<std::size_t>(j);
    g.values[u] = op.fibers[u] * g.values[u];
  }
  return inverse_floquet(g, phi.lo(), phi.hi());
}

}  // namespace jlab
