#include "jlab/badset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jlab/errors.hpp"
#include "jlab/floquet.hpp"

namespace jlab {

GapProfile gap_profile(const PeriodicJacobi& J, const ThetaGrid& grid) {
  GapProfile gp;
  gp.grid = grid;
  const int q = J.q();
  gp.min_gap.resize(static_cast<std::size_t>(grid.m()));
  gp.arg_pair.resize(static_cast<std::size_t>(grid.m()));
  for (int j = 0; j < grid.m(); ++j) {
    const FloquetFiber f = diagonalize_fiber(J, grid.node(j));
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k + 1 < q; ++k) {
      const double g = f.eigenvalues(k + 1) - f.eigenvalues(k);
      if (g < best) {
        best = g;
        arg = k;
      }
    }
    gp.min_gap[static_cast<std::size_t>(j)] = best;
    gp.arg_pair[static_cast<std::size_t>(j)] = arg;
  }
  return gp;
}

double min_gap_at(const PeriodicJacobi& J, double theta) {
  const FloquetFiber f = diagonalize_fiber(J, theta);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < J.q(); ++k)
    best = std::min(best, f.eigenvalues(k + 1) - f.eigenvalues(k));
  return best;
}

namespace {

// Bisect the boundary of {g <= 0} between a point inside (bad) and a point
// outside (good); g(theta) = min_gap(theta) - epsilon.
double bisect_boundary(const PeriodicJacobi& J, double epsilon, double bad, double good,
                       double tol) {
  for (int it = 0; it < 64 && std::abs(good - bad) > tol; ++it) {
    const double mid = 0.5 * (bad + good);
    if (min_gap_at(J, mid) <= epsilon)
      bad = mid;
    else
      good = mid;
  }
  return 0.5 * (bad + good);
}

}  // namespace

BadSetEstimate bad_set_measure(const PeriodicJacobi& J, double epsilon,
                               const RefinementPolicy& policy) {
  if (epsilon < 0.0) throw std::invalid_argument("bad_set_measure: epsilon must be >= 0");
  BadSetEstimate est;
  est.epsilon = epsilon;
  est.seed_m = policy.seed_m;

  const int m = policy.seed_m;
  std::vector<bool> bad(static_cast<std::size_t>(m));
  bool any_good = false;
  for (int j = 0; j < m; ++j) {
    bad[static_cast<std::size_t>(j)] = min_gap_at(J, static_cast<double>(j) / m) <= epsilon;
    any_good = any_good || !bad[static_cast<std::size_t>(j)];
  }

  if (!any_good) {
    est.intervals.push_back({0.0, 1.0});
    est.measure = 1.0;
    return est;
  }

  // Start the circular scan at a good node so every maximal bad run is seen
  // exactly once; boundaries are refined into the adjacent good cells.
  int g0 = 0;
  while (bad[static_cast<std::size_t>(g0)]) ++g0;

  std::vector<Interval> raw;
  int k = g0 + 1;
  while (k <= g0 + m - 1) {
    if (!bad[static_cast<std::size_t>(k % m)]) {
      ++k;
      continue;
    }
    const int start = k;
    while (k + 1 <= g0 + m - 1 && bad[static_cast<std::size_t>((k + 1) % m)]) ++k;
    const int end = k;
    ++k;

    const double theta_start = static_cast<double>(start) / m;
    const double theta_end = static_cast<double>(end) / m;
    const double lo =
        bisect_boundary(J, epsilon, theta_start, theta_start - 1.0 / m, policy.boundary_tol);
    const double hi =
        bisect_boundary(J, epsilon, theta_end, theta_end + 1.0 / m, policy.boundary_tol);
    // Fold back into [0, 1).
    if (hi > 1.0) {
      if (lo < 1.0) {
        raw.push_back({lo, 1.0});
        raw.push_back({0.0, hi - 1.0});
      } else {
        raw.push_back({lo - 1.0, hi - 1.0});
      }
    } else {
      raw.push_back({lo, hi});
    }
  }

  std::sort(raw.begin(), raw.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  for (const Interval& iv : raw) {
    if (!est.intervals.empty() && iv.lo <= est.intervals.back().hi + policy.boundary_tol)
      est.intervals.back().hi = std::max(est.intervals.back().hi, iv.hi);
    else
      est.intervals.push_back(iv);
  }
  for (const Interval& iv : est.intervals) est.measure += iv.length();
  est.measure = std::min(est.measure, 1.0);
  return est;
}

double bad_set_measure_dense(const PeriodicJacobi& J, double epsilon, int m) {
  long count = 0;
  for (int j = 0; j < m; ++j)
    if (min_gap_at(J, static_cast<double>(j) / m) <= epsilon) ++count;
  return static_cast<double>(count) / m;
}

BoundReport check_small_gap_bound(const PeriodicJacobi& J, double epsilon, const LastConstant& c1,
                            const RefinementPolicy& policy) {
  if (epsilon <= 0.0) throw std::invalid_argument("check_small_gap_bound: epsilon must be > 0");
  BoundReport rep;
  rep.measured = bad_set_measure(J, epsilon, policy).measure;
  rep.bound = 4.0 * std::exp(c1.c1_emp * J.q() / 2.0) * std::sqrt(epsilon);
  rep.margin = rep.bound - rep.measured;
  rep.holds = rep.margin >= 0.0;
  return rep;
}

StageBoundReport check_stage_bound(const LimitPeriodicFamily& fam, std::size_t n, double epsilon,
                                  const RefinementPolicy& policy, int c1_grid_m) {
  if (n == 0 || n >= fam.n_stages())
    throw std::invalid_argument("check_stage_bound: need 1 <= n < n_stages");
  StageBoundReport rep;
  rep.gamma_n = fam.gamma(n);
  if (!(rep.gamma_n < epsilon))
    throw PreconditionError("check_stage_bound: requires gamma_n < epsilon, gamma_n = " +
                            std::to_string(rep.gamma_n));

  const PeriodicJacobi& Jn = fam.stage(n);
  const PeriodicJacobi& Jc = fam.stage(n - 1);
  rep.c1_coarse = last_constant(Jc, ThetaGrid::punctured(c1_grid_m)).c1_emp;

  const BadSetEstimate est = bad_set_measure(Jn, epsilon, policy);
  rep.bound.measured = est.measure;
  rep.bound.bound = Jn.q() * std::exp(rep.c1_coarse * Jc.q() / 2.0) * std::sqrt(epsilon);
  rep.bound.margin = rep.bound.bound - rep.bound.measured;
  rep.bound.holds = rep.bound.margin >= 0.0;

  // Containment B_{q_n, eps} within the coarse (folded) bad set at threshold
  // eps + 2 gamma_n, sampled inside the measured intervals.
  const PeriodicJacobi folded = Jc.reinterpret(Jn.q());
  rep.containment_holds = true;
  for (const Interval& iv : est.intervals) {
    for (int s = 0; s < 5; ++s) {
      const double theta = iv.lo + (iv.hi - iv.lo) * (s + 0.5) / 5.0;
      ++rep.containment_samples;
      if (min_gap_at(folded, theta) > epsilon + 2.0 * rep.gamma_n) rep.containment_holds = false;
    }
  }
  return rep;
}

}  // namespace jlab
