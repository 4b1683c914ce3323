#pragma once

#include <vector>

#include "jlab/windowed_state.hpp"

namespace jlab {

// One period of a q-periodic Jacobi operator
//   (J phi)_n = a_{n-1} phi_{n-1} + b_n phi_n + a_n phi_{n+1},
// with coefficients indexed cyclically, a_n = a[n mod q], b_n = b[n mod q].
class PeriodicJacobi {
 public:
  PeriodicJacobi(std::vector<double> a, std::vector<double> b);

  static PeriodicJacobi free_operator(int q);  // a == 1, b == 0

  int q() const { return static_cast<int>(a_.size()); }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }

  double a_at(int n) const { return a_[mod_q(n)]; }
  double b_at(int n) const { return b_[mod_q(n)]; }

  // The same operator written with period q_fine; requires q | q_fine.
  PeriodicJacobi reinterpret(int q_fine) const;

  // True if 1/R <= a_j <= R and |b_j| <= R for every j.
  bool is_r_bounded(double R) const;

  // Smallest R certifying R-boundedness.
  double tight_r_bound() const;

  bool operator==(const PeriodicJacobi& other) const {
    return a_ == other.a_ && b_ == other.b_;
  }

 private:
  std::size_t mod_q(int n) const {
    const int q = static_cast<int>(a_.size());
    int m = n % q;
    if (m < 0) m += q;
    return static_cast<std::size_t>(m);
  }

  std::vector<double> a_;
  std::vector<double> b_;
};

// Sup-norm certificate ||delta_b||_inf + 2 ||delta_a||_inf, an upper bound on
// the operator norm of the Jacobi difference with those coefficients.
double coefficient_norm_bound(const std::vector<double>& delta_a,
                              const std::vector<double>& delta_b);

double coefficient_norm_bound(const PeriodicJacobi& j1, const PeriodicJacobi& j2);

// J phi on phi's window; support grows by one site each side.
WindowedState apply_operator(const PeriodicJacobi& J, const WindowedState& phi);

// A phi with A = i[J, X]: (A phi)_n = i (a_n phi_{n+1} - a_{n-1} phi_{n-1}).
WindowedState apply_momentum(const PeriodicJacobi& J, const WindowedState& phi);

// X phi: (X phi)_n = n phi_n.
WindowedState apply_position(const WindowedState& phi);

// Quasi-periodic comparison: certified restricted-difference bound
//   max_{|j| <= half_width} Lip(v) * (|j|/q) * ||q omega||_T
// for a Lipschitz sampling function and a rational frequency approximant p/q.
double qp_local_error(double lip_v, double omega, long p, long q, int half_width);

}  // namespace jlab
