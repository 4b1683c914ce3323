#include "jlab/family.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace jlab {

namespace {

void check_divisor_chain(const std::vector<int>& qs) {
  if (qs.empty()) throw std::invalid_argument("family: empty period schedule");
  if (qs.front() < 3) throw std::invalid_argument("family: q0 must be >= 3");
  for (std::size_t n = 0; n + 1 < qs.size(); ++n) {
    if (qs[n + 1] <= qs[n] || qs[n + 1] % qs[n] != 0)
      throw std::invalid_argument("family: periods must form a strict divisor chain");
  }
}

}  // namespace

LimitPeriodicFamily::LimitPeriodicFamily(std::vector<PeriodicJacobi> stages, double eta,
                                         double decay_coeff, double R, std::uint64_t seed)
    : stages_(std::move(stages)), eta_(eta), decay_coeff_(decay_coeff), R_(R), seed_(seed) {
  if (eta_ <= 0.0) throw std::invalid_argument("family: eta must be positive");
  if (decay_coeff_ <= 0.0) throw std::invalid_argument("family: decay_coeff must be positive");
  std::vector<int> qs;
  qs.reserve(stages_.size());
  for (const auto& s : stages_) qs.push_back(s.q());
  check_divisor_chain(qs);
}

double LimitPeriodicFamily::gamma(std::size_t n) const {
  if (n == 0 || n >= stages_.size())
    throw std::invalid_argument("family: gamma(n) needs 1 <= n < n_stages");
  const double qp = static_cast<double>(stage(n - 1).q());
  const double qn = static_cast<double>(stage(n).q());
  return std::exp(-eta_ * qp) / (qn * qn * qn);
}

LimitPeriodicFamily build_ec_family(double eta, const std::vector<int>& q_schedule,
                                    double R, std::uint64_t seed, double decay_coeff) {
  if (eta <= 0.0) throw std::invalid_argument("build_ec_family: eta must be positive");
  if (R < 1.0) throw std::invalid_argument("build_ec_family: R must be >= 1");
  check_divisor_chain(q_schedule);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Base stage drawn strictly inside the R-box so that the exponentially
  // small later perturbations never hit the clipping rails.
  const double margin = 0.01 * (R - 1.0 / R) + 1e-9;
  const double a_lo = 1.0 / R + margin, a_hi = R - margin;
  const double b_hi = R - margin;

  const int q0 = q_schedule.front();
  std::vector<double> a(static_cast<std::size_t>(q0)), b(static_cast<std::size_t>(q0));
  for (int j = 0; j < q0; ++j) {
    a[static_cast<std::size_t>(j)] = a_lo + (a_hi - a_lo) * unit(rng);
    b[static_cast<std::size_t>(j)] = -b_hi + 2.0 * b_hi * unit(rng);
  }

  std::vector<PeriodicJacobi> stages;
  stages.emplace_back(std::move(a), std::move(b));

  for (std::size_t n = 0; n + 1 < q_schedule.size(); ++n) {
    const int qn = q_schedule[n];
    const int qn1 = q_schedule[n + 1];
    const PeriodicJacobi base = stages.back().reinterpret(qn1);

    // Shrink the per-stage fraction of the cap geometrically so the scaled
    // certificate stays strictly decreasing despite the cancellation noise in
    // recovering the tiny difference from O(1) coefficients.
    const double target = decay_coeff * std::pow(0.5, static_cast<double>(n + 1)) *
                          std::exp(-eta * qn) / (static_cast<double>(qn1) * qn1 * qn1);

    std::vector<double> da(static_cast<std::size_t>(qn1)), db(static_cast<std::size_t>(qn1));
    for (int j = 0; j < qn1; ++j) {
      da[static_cast<std::size_t>(j)] = 2.0 * unit(rng) - 1.0;
      db[static_cast<std::size_t>(j)] = 2.0 * unit(rng) - 1.0;
    }
    // Rescale so the certified bound equals the target exactly.
    const double raw = coefficient_norm_bound(da, db);
    const double scale = raw > 0.0 ? target / raw : 0.0;

    std::vector<double> na(static_cast<std::size_t>(qn1)), nb(static_cast<std::size_t>(qn1));
    for (int j = 0; j < qn1; ++j) {
      const auto u = static_cast<std::size_t>(j);
      na[u] = std::clamp(base.a()[u] + scale * da[u], 1.0 / R, R);
      nb[u] = std::clamp(base.b()[u] + scale * db[u], -R, R);
    }
    stages.emplace_back(std::move(na), std::move(nb));
  }

  return LimitPeriodicFamily(std::move(stages), eta, decay_coeff, R, seed);
}

std::vector<TelescopeTerm> decompose_telescope(const LimitPeriodicFamily& fam) {
  if (fam.n_stages() < 2)
    throw std::invalid_argument("decompose_telescope: need at least 2 stages");
  std::vector<TelescopeTerm> terms;
  {
    TelescopeTerm t0;
    t0.k = 0;
    t0.delta_a = fam.stage(0).a();
    t0.delta_b = fam.stage(0).b();
    t0.norm_bound = coefficient_norm_bound(t0.delta_a, t0.delta_b);
    terms.push_back(std::move(t0));
  }
  for (std::size_t n = 1; n < fam.n_stages(); ++n) {
    const PeriodicJacobi coarse = fam.stage(n - 1).reinterpret(fam.stage(n).q());
    TelescopeTerm t;
    t.k = static_cast<int>(n);
    const int qk = fam.stage(n).q();
    t.delta_a.resize(static_cast<std::size_t>(qk));
    t.delta_b.resize(static_cast<std::size_t>(qk));
    for (int j = 0; j < qk; ++j) {
      const auto u = static_cast<std::size_t>(j);
      t.delta_a[u] = fam.stage(n).a()[u] - coarse.a()[u];
      t.delta_b[u] = fam.stage(n).b()[u] - coarse.b()[u];
    }
    t.norm_bound = coefficient_norm_bound(t.delta_a, t.delta_b);
    terms.push_back(std::move(t));
  }
  return terms;
}

std::string family_to_json(const LimitPeriodicFamily& fam) {
  nlohmann::json j;
  j["eta"] = fam.eta();
  j["decay_coeff"] = fam.decay_coeff();
  j["R"] = fam.r_bound();
  j["seed"] = fam.seed();
  j["stages"] = nlohmann::json::array();
  for (const auto& s : fam.stages()) {
    nlohmann::json js;
    js["q"] = s.q();
    js["a"] = s.a();
    js["b"] = s.b();
    j["stages"].push_back(std::move(js));
  }
  return j.dump(2);
}

LimitPeriodicFamily family_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  std::vector<PeriodicJacobi> stages;
  for (const auto& js : j.at("stages")) {
    stages.emplace_back(js.at("a").get<std::vector<double>>(),
                        js.at("b").get<std::vector<double>>());
    if (stages.back().q() != js.at("q").get<int>())
      throw std::invalid_argument("family_from_json: inconsistent stage period");
  }
  return LimitPeriodicFamily(std::move(stages), j.at("eta").get<double>(),
                             j.at("decay_coeff").get<double>(), j.at("R").get<double>(),
                             j.at("seed").get<std::uint64_t>());
}

void save_family(const LimitPeriodicFamily& fam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_family: cannot open " + path);
  out << family_to_json(fam) << '\n';
}

LimitPeriodicFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_family: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return family_from_json(ss.str());
}

}  // namespace jlab
