#include "jlab/periodic_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jlab {

PeriodicJacobi::PeriodicJacobi(std::vector<double> a, std::vector<double> b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.size() != b_.size())
    throw std::invalid_argument("PeriodicJacobi: a and b must have equal length");
  if (a_.size() < 3)
    throw std::invalid_argument("PeriodicJacobi: period must be >= 3");
  for (double aj : a_)
    if (!(aj > 0.0))
      throw std::invalid_argument("PeriodicJacobi: all hoppings a_j must be positive");
}

PeriodicJacobi PeriodicJacobi::free_operator(int q) {
  return PeriodicJacobi(std::vector<double>(static_cast<std::size_t>(q), 1.0),
                        std::vector<double>(static_cast<std::size_t>(q), 0.0));
}

PeriodicJacobi PeriodicJacobi::reinterpret(int q_fine) const {
  const int q0 = q();
  if (q_fine < q0 || q_fine % q0 != 0)
    throw std::invalid_argument("PeriodicJacobi::reinterpret: period must be a multiple");
  std::vector<double> a2(static_cast<std::size_t>(q_fine));
  std::vector<double> b2(static_cast<std::size_t>(q_fine));
  for (int n = 0; n < q_fine; ++n) {
    a2[static_cast<std::size_t>(n)] = a_[static_cast<std::size_t>(n % q0)];
    b2[static_cast<std::size_t>(n)] = b_[static_cast<std::size_t>(n % q0)];
  }
  return PeriodicJacobi(std::move(a2), std::move(b2));
}

bool PeriodicJacobi::is_r_bounded(double R) const {
  for (std::size_t j = 0; j < a_.size(); ++j) {
    if (a_[j] < 1.0 / R || a_[j] > R) return false;
    if (std::abs(b_[j]) > R) return false;
  }
  return true;
}

double PeriodicJacobi::tight_r_bound() const {
  double R = 1.0;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    R = std::max(R, a_[j]);
    R = std::max(R, 1.0 / a_[j]);
    R = std::max(R, std::abs(b_[j]));
  }
  return R;
}

double coefficient_norm_bound(const std::vector<double>& delta_a,
                              const std::vector<double>& delta_b) {
  if (delta_a.size() != delta_b.size())
    throw std::invalid_argument("coefficient_norm_bound: length mismatch");
  double ma = 0.0, mb = 0.0;
  for (double v : delta_a) ma = std::max(ma, std::abs(v));
  for (double v : delta_b) mb = std::max(mb, std::abs(v));
  return mb + 2.0 * ma;
}

double coefficient_norm_bound(const PeriodicJacobi& j1, const PeriodicJacobi& j2) {
  const int qf = std::max(j1.q(), j2.q());
  if (qf % j1.q() != 0 || qf % j2.q() != 0)
    throw std::invalid_argument("coefficient_norm_bound: incompatible periods");
  std::vector<double> da(static_cast<std::size_t>(qf)), db(static_cast<std::size_t>(qf));
  for (int n = 0; n < qf; ++n) {
    da[static_cast<std::size_t>(n)] = j1.a_at(n) - j2.a_at(n);
    db[static_cast<std::size_t>(n)] = j1.b_at(n) - j2.b_at(n);
  }
  return coefficient_norm_bound(da, db);
}

WindowedState apply_operator(const PeriodicJacobi& J, const WindowedState& phi) {
  WindowedState out(phi.lo(), phi.hi());
  if (phi.support_empty()) return out;
  if (phi.support_lo() - 1 < phi.lo() || phi.support_hi() + 1 > phi.hi())
    throw WindowOverflowError("apply_operator: window too small for grown support");
  for (int n = phi.support_lo() - 1; n <= phi.support_hi() + 1; ++n) {
    const cplx v = J.a_at(n - 1) * phi[n - 1] + J.b_at(n) * phi[n] + J.a_at(n) * phi[n + 1];
    out.set(n, v);
  }
  out.declare_support(phi.support_lo() - 1, phi.support_hi() + 1);
  return out;
}

WindowedState apply_momentum(const PeriodicJacobi& J, const WindowedState& phi) {
  WindowedState out(phi.lo(), phi.hi());
  if (phi.support_empty()) return out;
  if (phi.support_lo() - 1 < phi.lo() || phi.support_hi() + 1 > phi.hi())
    throw WindowOverflowError("apply_momentum: window too small for grown support");
  const cplx i{0.0, 1.0};
  for (int n = phi.support_lo() - 1; n <= phi.support_hi() + 1; ++n)
    out.set(n, i * (J.a_at(n) * phi[n + 1] - J.a_at(n - 1) * phi[n - 1]));
  out.declare_support(phi.support_lo() - 1, phi.support_hi() + 1);
  return out;
}

WindowedState apply_position(const WindowedState& phi) {
  WindowedState out(phi.lo(), phi.hi());
  if (phi.support_empty()) return out;
  for (int n = phi.support_lo(); n <= phi.support_hi(); ++n)
    out.set(n, static_cast<double>(n) * phi[n]);
  out.declare_support(phi.support_lo(), phi.support_hi());
  return out;
}

namespace {
double torus_dist(double x) {  // dist(x, Z)
  const double f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}
}  // namespace

double qp_local_error(double lip_v, double omega, long p, long q, int half_width) {
  (void)p;  // the bound depends on p/q only through ||q omega||_T
  if (q == 0) throw std::invalid_argument("qp_local_error: q must be nonzero");
  if (half_width < 1) throw std::invalid_argument("qp_local_error: half_width must be >= 1");
  if (lip_v < 0.0) throw std::invalid_argument("qp_local_error: Lip(v) must be nonnegative");
  const double qq = static_cast<double>(std::abs(q));
  return lip_v * (static_cast<double>(half_width) / qq) * torus_dist(qq * omega);
}

}  // namespace jlab
