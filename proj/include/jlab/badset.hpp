#pragma once

#include <vector>

#include "jlab/family.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/spectral.hpp"
#include "jlab/theta_grid.hpp"

namespace jlab {

// Per-node minimum over adjacent ordered eigenvalue pairs; for sorted values
// the adjacent minimum equals the all-pairs minimum.
struct GapProfile {
  ThetaGrid grid = ThetaGrid::plain(1);
  std::vector<double> min_gap;
  std::vector<int> arg_pair;  // lower index j of the attaining pair (j, j+1)
};

GapProfile gap_profile(const PeriodicJacobi& J, const ThetaGrid& grid);

double min_gap_at(const PeriodicJacobi& J, double theta);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// {theta : min_gap(theta) <= epsilon} as a union of subintervals of [0, 1),
// located by bisection on the seed-grid sign changes of min_gap - epsilon.
struct BadSetEstimate {
  double epsilon = 0.0;
  double measure = 0.0;
  std::vector<Interval> intervals;
  int seed_m = 0;
  bool over_estimate_flag = false;  // a boundary bisection failed to bracket
};

struct RefinementPolicy {
  int seed_m = 4096;
  double boundary_tol = 1e-8;
};

BadSetEstimate bad_set_measure(const PeriodicJacobi& J, double epsilon,
                               const RefinementPolicy& policy = {});

// Dense-grid counting oracle (test / acceptance reference).
double bad_set_measure_dense(const PeriodicJacobi& J, double epsilon, int m);

struct BoundReport {
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - measured
  bool holds = false;
};

// mes(B_{q, eps}) <= 4 e^{c1 q / 2} sqrt(eps).
BoundReport check_small_gap_bound(const PeriodicJacobi& J, double epsilon, const LastConstant& c1,
                            const RefinementPolicy& policy = {});

// Improved bound for stage n of a family, valid for gamma_n < epsilon:
// mes(B_{q_n, eps}) <= q_n e^{c1 q_{n-1} / 2} sqrt(eps), with c1 measured on
// stage n-1.  Also samples the containment B_{q_n,eps} within the folded
// coarse bad set at threshold eps + 2 gamma_n.
struct StageBoundReport {
  BoundReport bound;
  double gamma_n = 0.0;
  double c1_coarse = 0.0;
  bool containment_holds = false;
  int containment_samples = 0;
};

StageBoundReport check_stage_bound(const LimitPeriodicFamily& fam, std::size_t n, double epsilon,
                                  const RefinementPolicy& policy = {}, int c1_grid_m = 1024);

}  // namespace jlab
