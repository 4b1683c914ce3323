// Experiment runner: every subcommand is a thin wrapper over one library
// operation; no math lives here.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jlab/badset.hpp"
#include "jlab/errors.hpp"
#include "jlab/family.hpp"
#include "jlab/floquet.hpp"
#include "jlab/periodic_jacobi.hpp"
#include "jlab/spectral.hpp"
#include "jlab/transport.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Tabular writer with a fixed column order; csv or json-lines.
class TableWriter {
 public:
  TableWriter(std::string format, std::vector<std::string> columns)
      : format_(std::move(format)), columns_(std::move(columns)) {
    if (format_ == "csv") {
      for (std::size_t i = 0; i < columns_.size(); ++i)
        body_ << (i ? "," : "") << columns_[i];
      body_ << '\n';
    }
  }

  void row(const std::vector<std::string>& cells) {
    if (format_ == "csv") {
      for (std::size_t i = 0; i < cells.size(); ++i) body_ << (i ? "," : "") << cells[i];
      body_ << '\n';
    } else {
      body_ << '{';
      for (std::size_t i = 0; i < cells.size(); ++i)
        body_ << (i ? "," : "") << '"' << columns_[i] << "\":" << cells[i];
      body_ << "}\n";
    }
  }

  // Atomic write: temp file in the target directory, then rename.
  void flush(const std::string& out_path) const {
    if (out_path.empty()) {
      std::cout << body_.str();
      return;
    }
    const std::filesystem::path target(out_path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
      std::ofstream f(tmp);
      if (!f) throw std::runtime_error("cannot open output file " + out_path);
      f << body_.str();
    }
    std::filesystem::rename(tmp, target);
  }

 private:
  std::string format_;
  std::vector<std::string> columns_;
  std::ostringstream body_;
};

struct CheckCounter {
  int failures = 0;

  void report(const std::string& name, bool pass, double margin) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << " margin=" << fmt(margin) << '\n';
    if (!pass) ++failures;
  }
};

// Shared operator-source flags: --free --q | --a/--b | --family FILE --stage N.
struct OperatorSource {
  bool free_op = false;
  int q = 4;
  std::vector<double> a, b;
  std::string family_path;
  int stage = -1;  // -1: finest

  void attach(CLI::App* cmd) {
    cmd->add_flag("--free", free_op, "use the free operator (a=1, b=0)");
    cmd->add_option("--q", q, "period for --free");
    cmd->add_option("--a", a, "inline hopping coefficients");
    cmd->add_option("--b", b, "inline diagonal coefficients");
    cmd->add_option("--family", family_path, "family JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--stage", stage, "family stage index (default: finest)");
  }

  jlab::PeriodicJacobi resolve() const {
    if (free_op) return jlab::PeriodicJacobi::free_operator(q);
    if (!a.empty() || !b.empty()) return jlab::PeriodicJacobi(a, b);
    if (!family_path.empty()) {
      const auto fam = jlab::load_family(family_path);
      const std::size_t n =
          stage < 0 ? fam.n_stages() - 1 : static_cast<std::size_t>(stage);
      return fam.stage(n);
    }
    throw CLI::ValidationError("operator source", "need --free, --a/--b, or --family");
  }
};

std::vector<double> geometric_times(double t_min, double t_max, int count) {
  std::vector<double> ts;
  for (int i = 0; i < count; ++i)
    ts.push_back(t_min * std::pow(t_max / t_min, static_cast<double>(i) / (count - 1)));
  return ts;
}

int run_ec_build(double eta, const std::vector<int>& qs, double R, std::uint64_t seed,
                 double decay, const std::string& out) {
  const auto fam = jlab::build_ec_family(eta, qs, R, seed, decay);
  CheckCounter checks;
  if (fam.n_stages() >= 2) {
    const auto terms = jlab::decompose_telescope(fam);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < terms.size(); ++k) {
      const double cap = fam.gamma(k);
      worst = std::min(worst, cap - terms[k].norm_bound);
    }
    checks.report("telescope_norm_bounds", worst >= 0.0, worst);
  }
  bool r_ok = true;
  for (const auto& s : fam.stages()) r_ok = r_ok && s.is_r_bounded(R);
  checks.report("stages_R_bounded", r_ok, 0.0);
  if (!out.empty()) jlab::save_family(fam, out);
  return checks.failures ? kExitCheckFailure : kExitPass;
}

int run_bands(const OperatorSource& src, int grid_m, const std::string& out,
              const std::string& format, double disc_min, double disc_max, int disc_n) {
  const auto J = src.resolve();
  const auto grid = jlab::ThetaGrid::punctured(grid_m);
  const auto bc = jlab::band_curves(J, grid);

  TableWriter table(format, {"theta", "k", "lambda", "slope", "gap_to_next"});
  for (int j = 0; j < grid_m; ++j)
    for (int k = 0; k < J.q(); ++k) {
      const double gap = k + 1 < J.q() ? bc.lambda(j, k + 1) - bc.lambda(j, k) : 0.0;
      table.row({fmt(grid.node(j)), std::to_string(k), fmt(bc.lambda(j, k)),
                 fmt(bc.slope(j, k)), fmt(gap)});
    }
  table.flush(out);

  if (disc_n > 0) {
    TableWriter disc(format, {"lambda", "discriminant"});
    for (int i = 0; i < disc_n; ++i) {
      const double lam =
          disc_n == 1 ? disc_min : disc_min + (disc_max - disc_min) * i / (disc_n - 1);
      disc.row({fmt(lam), fmt(jlab::discriminant(J, lam))});
    }
    disc.flush(out.empty() ? "" : out + ".disc");
  }

  CheckCounter checks;
  const auto lc = jlab::last_constant(J, grid);
  checks.report("band_slopes_finite", lc.violations == 0, -static_cast<double>(lc.violations));
  std::cout << "INFO c1_emp=" << fmt(lc.c1_emp) << '\n';
  return checks.failures ? kExitCheckFailure : kExitPass;
}

int run_badset(const OperatorSource& src, const std::vector<double>& eps_list, int seed_m,
               const std::string& out, const std::string& format, int c1_grid_m) {
  const auto J = src.resolve();
  jlab::RefinementPolicy policy;
  policy.seed_m = seed_m;
  const auto c1 = jlab::last_constant(J, jlab::ThetaGrid::punctured(c1_grid_m));

  std::optional<jlab::LimitPeriodicFamily> fam;
  std::size_t stage_n = 0;
  if (!src.family_path.empty()) {
    fam = jlab::load_family(src.family_path);
    stage_n = src.stage < 0 ? fam->n_stages() - 1 : static_cast<std::size_t>(src.stage);
  }

  TableWriter table(format, {"epsilon", "measure", "intervals", "small_gap_bound",
                             "small_gap_margin", "stage_bound", "stage_margin"});
  CheckCounter checks;
  for (double eps : eps_list) {
    const auto est = jlab::bad_set_measure(J, eps, policy);
    const auto l25 = jlab::check_small_gap_bound(J, eps, c1, policy);
    checks.report("small_gap eps=" + fmt(eps), l25.holds, l25.margin);
    double t32_bound = 0.0, t32_margin = 0.0;
    if (fam && stage_n >= 1 && fam->gamma(stage_n) < eps) {
      const auto t32 = jlab::check_stage_bound(*fam, stage_n, eps, policy, c1_grid_m);
      t32_bound = t32.bound.bound;
      t32_margin = t32.bound.margin;
      checks.report("stage_bound eps=" + fmt(eps), t32.bound.holds && t32.containment_holds,
                    t32.bound.margin);
    }
    table.row({fmt(eps), fmt(est.measure), std::to_string(est.intervals.size()),
               fmt(l25.bound), fmt(l25.margin), fmt(t32_bound), fmt(t32_margin)});
  }
  table.flush(out);
  return checks.failures ? kExitCheckFailure : kExitPass;
}

int run_transport(const OperatorSource& src, double p, double t_max, int points,
                  const std::string& out, const std::string& format) {
  const auto J = src.resolve();
  jlab::WindowedState phi = jlab::WindowedState::delta(0, -2, 2);
  const auto times = geometric_times(1.5, t_max, points);
  const auto ms = jlab::transport_exponents(J, phi, p, times);

  TableWriter table(format, {"t", "moment_p", "running_beta"});
  for (std::size_t i = 0; i < times.size(); ++i)
    table.row({fmt(ms.times[i]), fmt(ms.values[i]), fmt(ms.running_beta[i])});
  table.flush(out);

  CheckCounter checks;
  // Unitarity at the final time, via the p = 0 moment (equals 2 ||phi||^2).
  const auto m0 = jlab::moment(J, phi, t_max, 0.0);
  checks.report("unitarity", std::abs(m0.value - 2.0 * phi.norm_sq()) <= 1e-10 + m0.tail,
                1e-10 + m0.tail - std::abs(m0.value - 2.0 * phi.norm_sq()));
  std::cout << "INFO final_running_beta=" << fmt(ms.final_beta)
            << " fit_beta=" << fmt(ms.fit_beta) << '\n';
  return checks.failures ? kExitCheckFailure : kExitPass;
}

int run_qcheck(const std::string& family_path, int grid_m, const std::string& out,
               const std::string& format, bool estimates, int c1_grid_m) {
  const auto fam = jlab::load_family(family_path);
  jlab::WindowedState phi = jlab::WindowedState::delta(0, -64, 64);
  const auto table = jlab::q_convergence_experiment(
      fam, phi, jlab::QNormalization::kPerTorusUnit, grid_m, c1_grid_m);
  const auto witness = jlab::ballistic_witness(fam, phi, {}, grid_m, c1_grid_m);

  TableWriter tw(format, {"n", "q_n", "diff_norm", "series_bound", "kernel_lhs", "kernel_rhs"});
  CheckCounter checks;
  for (std::size_t i = 0; i < witness.kernel.size(); ++i) {
    const auto& k = witness.kernel[i];
    const bool has_pair = i < table.rows.size();
    const double diff = has_pair ? table.rows[i].diff_norm : 0.0;
    const double bound = has_pair ? table.rows[i].series_bound : 0.0;
    tw.row({std::to_string(k.n), std::to_string(k.q_n), fmt(diff), fmt(bound),
            fmt(k.kernel_lhs), fmt(k.kernel_rhs)});
    if (has_pair)
      checks.report("q_convergence stage=" + std::to_string(i), diff <= bound, bound - diff);
    checks.report("kernel_bound stage=" + std::to_string(i), k.holds,
                  k.kernel_lhs - k.kernel_rhs);
  }
  tw.flush(out);

  if (estimates && fam.n_stages() >= 2) {
    const auto sch = jlab::make_schedule(table.c1, fam.eta(),
                                         [&] {
                                           std::vector<int> qs;
                                           for (const auto& s : fam.stages()) qs.push_back(s.q());
                                           return qs;
                                         }());
    const auto& st = sch.stages.front();
    const auto e1 = jlab::estimate_I_II_check(fam.stage(0), fam.stage(0), fam.r_bound(),
                                              st.t_n, st.eps_n, jlab::EstimateVariant::kI);
    checks.report("estimate_I", e1.holds, e1.margin);
    const auto e2 = jlab::estimate_I_II_check(fam.stage(1), fam.stage(0), fam.r_bound(),
                                              st.t_n, st.eps_tilde_n,
                                              jlab::EstimateVariant::kII, fam.gamma(1));
    checks.report("estimate_II", e2.holds, e2.margin);
  }
  return checks.failures ? kExitCheckFailure : kExitPass;
}

int run_schedule(double c1, double eta, double eta0, const std::vector<int>& qs,
                 const std::string& out, const std::string& format) {
  const auto sch = jlab::make_schedule(c1, eta, qs, eta0);
  std::cout << "INFO eta0_window=(" << fmt(sch.window_lo) << ", " << fmt(sch.window_hi)
            << ") eta0=" << fmt(sch.eta0) << '\n';
  TableWriter table(format, {"n", "q_n", "t_n", "eps_n", "eps_tilde_n", "gamma_n1"});
  CheckCounter checks;
  for (const auto& st : sch.stages) {
    table.row({std::to_string(st.n), std::to_string(st.q_n), fmt(st.t_n), fmt(st.eps_n),
               fmt(st.eps_tilde_n), fmt(st.gamma_n1)});
    checks.report("gamma_check stage=" + std::to_string(st.n), st.gamma_n1 < st.eps_tilde_n,
                  st.eps_tilde_n - st.gamma_n1);
  }
  table.flush(out);
  return checks.failures ? kExitCheckFailure : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet / transport laboratory for periodic and limit-periodic Jacobi matrices"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.fallthrough();  // allow the global flags after the subcommand name

  std::string out, format = "csv";
  int grid_m = 256;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "output path (default: stdout)");
  app.add_option("--format", format, "csv or json-lines")
      ->check(CLI::IsMember({"csv", "json-lines"}));
  app.add_option("--grid", grid_m, "theta grid size");
  app.add_option("--seed", seed, "random seed");

  // ec-build
  auto* ec = app.add_subcommand("ec-build", "generate and certify an EC(eta) family");
  double eta = 2.0, R = 2.0, decay = 0.5;
  std::vector<int> qs{4, 8};
  ec->add_option("--eta", eta, "exponential-class rate");
  ec->add_option("--q", qs, "period divisor chain");
  ec->add_option("--R", R, "R-bound");
  ec->add_option("--decay", decay, "decay coefficient");

  // bands
  auto* bands = app.add_subcommand("bands", "band curves, slopes, and discriminant samples");
  OperatorSource bands_src;
  bands_src.attach(bands);
  double disc_min = -3.0, disc_max = 3.0;
  int disc_n = 0;
  bands->add_option("--disc-min", disc_min, "discriminant sampling: lambda min");
  bands->add_option("--disc-max", disc_max, "discriminant sampling: lambda max");
  bands->add_option("--disc-n", disc_n, "discriminant sampling: point count");

  // badset
  auto* badset = app.add_subcommand("badset", "bad-set measures and analytic bounds");
  OperatorSource badset_src;
  badset_src.attach(badset);
  std::vector<double> eps_list{1e-2};
  badset->add_option("--epsilon", eps_list, "epsilon values");

  // transport
  auto* transport = app.add_subcommand("transport", "moments and running exponents");
  OperatorSource transport_src;
  transport_src.attach(transport);
  double p = 2.0, t_max = 50.0;
  int points = 16;
  transport->add_option("--p", p, "moment order");
  transport->add_option("--tmax", t_max, "final time");
  transport->add_option("--points", points, "number of (geometric) time points");

  // qcheck
  auto* qcheck = app.add_subcommand("qcheck", "Q-operator convergence and kernel bounds");
  std::string q_family;
  bool estimates = false;
  qcheck->add_option("--family", q_family, "family JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  qcheck->add_flag("--estimates", estimates, "also audit the time-average estimates I and II");

  // schedule
  auto* schedule = app.add_subcommand("schedule", "Section-5 convergence schedule");
  double c1 = 1.0, sch_eta = 8.0, eta0 = -1.0;
  std::vector<int> sch_qs{4, 8};
  schedule->add_option("--c1", c1, "Last constant");
  schedule->add_option("--eta", sch_eta, "exponential-class rate");
  schedule->add_option("--eta0", eta0, "eta0 override (default: window midpoint)");
  schedule->add_option("--q", sch_qs, "period chain");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ec->parsed()) return run_ec_build(eta, qs, R, seed, decay, out);
    if (bands->parsed())
      return run_bands(bands_src, grid_m, out, format, disc_min, disc_max, disc_n);
    if (badset->parsed()) return run_badset(badset_src, eps_list, 4096, out, format, grid_m);
    if (transport->parsed()) return run_transport(transport_src, p, t_max, points, out, format);
    if (qcheck->parsed()) return run_qcheck(q_family, grid_m, out, format, estimates, 1024);
    if (schedule->parsed()) return run_schedule(c1, sch_eta, eta0, sch_qs, out, format);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const jlab::PreconditionError& e) {
    std::cerr << "check precondition failed: " << e.what() << '\n';
    return kExitCheckFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
