#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jlab/periodic_jacobi.hpp"

namespace jlab {

// One term of the telescoping series: a coefficient difference at period q_k
// together with its certified operator-norm bound.
struct TelescopeTerm {
  int k = 0;  // stage index; term 0 is the base stage itself
  std::vector<double> delta_a;
  std::vector<double> delta_b;
  double norm_bound = 0.0;
};

// A divisor chain of periodic approximants with exponential-class decay:
// stage gaps obey ||J_{n+1} - J_n|| <= decay_coeff * e^{-eta q_n} / q_{n+1}^3.
class LimitPeriodicFamily {
 public:
  LimitPeriodicFamily(std::vector<PeriodicJacobi> stages, double eta,
                      double decay_coeff, double R, std::uint64_t seed);

  const std::vector<PeriodicJacobi>& stages() const { return stages_; }
  const PeriodicJacobi& stage(std::size_t n) const { return stages_.at(n); }
  std::size_t n_stages() const { return stages_.size(); }

  double eta() const { return eta_; }
  double decay_coeff() const { return decay_coeff_; }
  double r_bound() const { return R_; }
  std::uint64_t seed() const { return seed_; }

  // gamma_n = e^{-eta q_{n-1}} / q_n^3 for n >= 1.
  double gamma(std::size_t n) const;

 private:
  std::vector<PeriodicJacobi> stages_;
  double eta_;
  double decay_coeff_;
  double R_;
  std::uint64_t seed_;
};

// Seeded generator of an EC(eta) family: stage 0 is a random R-bounded
// operator, later stages add sup-norm perturbations scaled so that
// coefficient_norm_bound(gap_n) = decay_coeff * e^{-eta q_n} / q_{n+1}^3.
// Deterministic given the seed; all stages stay R-bounded.
LimitPeriodicFamily build_ec_family(double eta, const std::vector<int>& q_schedule,
                                    double R, std::uint64_t seed,
                                    double decay_coeff = 0.5);

// Telescoping decomposition of the family: term 0 is stage 0, term k >= 1 is
// stage_k - stage_{k-1} at period q_k.  Partial sums reproduce the stages
// coefficientwise.
std::vector<TelescopeTerm> decompose_telescope(const LimitPeriodicFamily& fam);

// JSON serialization, round-trippable at 17 significant digits.
std::string family_to_json(const LimitPeriodicFamily& fam);
LimitPeriodicFamily family_from_json(const std::string& text);
void save_family(const LimitPeriodicFamily& fam, const std::string& path);
LimitPeriodicFamily load_family(const std::string& path);

}  // namespace jlab
