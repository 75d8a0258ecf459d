// Command-line front end: efficiency thresholds, steering and Bell
// noise-efficiency curves, white-noise-robustness sweeps, and the Monte Carlo
// measurement pipeline. Output is data-only (CSV/JSON); exit codes are
// 0 = success, 1 = compute failure, 2 = validation error.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steering/bell.hpp"
#include "steering/lhs.hpp"
#include "steering/serialize.hpp"
#include "steering/simulate.hpp"
#include "steering/thresholds.hpp"
#include "steering/witness.hpp"

namespace {

struct GridSpec {
  double lo = 0.0, hi = 1.0;
  int n = 2;
};

GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &g.lo, &g.hi, &g.n) != 3 || g.n < 1 || g.hi < g.lo)
    throw CLI::ValidationError("grid", "expected lo:hi:count with count >= 1 and hi >= lo");
  return g;
}

std::vector<double> grid_points(const GridSpec& g) {
  std::vector<double> v;
  for (int i = 0; i < g.n; ++i)
    v.push_back(g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * i / (g.n - 1));
  return v;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

// Golden-section minimization on [lo, hi] for a unimodal objective.
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Max white-noise robustness over the measurement spacing for one (eps, alpha).
double wnr_over_delta(double eps, double alpha) {
  using namespace steering;
  const SchmidtState state = phi_plus_alpha(alpha);
  auto value = [&](double delta) {
    const MeasurementFamily fam = one_click_family(2, delta, eps);
    const Assemblage a = steered_assemblage(state, fam);
    return -white_noise_robustness(a, eps, 2.0 - eps, 2, 2);
  };
  double best_delta = 0.5, best = 0.0;
  for (int i = 1; i <= 24; ++i) {
    const double delta = std::numbers::pi * i / 25.0;
    const double v = value(delta);
    if (v < best) {
      best = v;
      best_delta = delta;
    }
  }
  if (best == 0.0) return 0.0;
  const double lo = std::max(1e-4, best_delta - std::numbers::pi / 25.0);
  const double hi = std::min(std::numbers::pi - 1e-4, best_delta + std::numbers::pi / 25.0);
  return -golden_min(value, lo, hi, 1e-4).second;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-detector steering and Bell nonlocality analysis"};
  app.require_subcommand(1);

  // --- threshold ---
  auto* cmd_threshold = app.add_subcommand("threshold", "Efficiency cutoff for equally spaced one-click measurements");
  int th_X = 2;
  std::optional<double> th_delta;
  bool th_limit = false;
  bool th_json = false;
  cmd_threshold->add_option("--X", th_X, "number of settings")->required();
  cmd_threshold->add_option("--delta", th_delta, "angular spacing (radians)");
  cmd_threshold->add_flag("--limit", th_limit, "report the delta->0 limit 1/X");
  cmd_threshold->add_flag("--json", th_json, "JSON output");

  // --- curve-steering ---
  auto* cmd_curve_steering = app.add_subcommand("curve-steering", "Steering parameter vs measurement overlap");
  std::vector<double> cs_eps;
  double cs_alpha = std::numbers::pi / 4.0;
  std::string cs_grid = "0.5:0.99:50";
  std::string cs_out;
  cmd_curve_steering->add_option("--eps", cs_eps, "efficiency list")->required();
  cmd_curve_steering->add_option("--alpha", cs_alpha, "state angle in [0, pi/4]");
  cmd_curve_steering->add_option("--overlap-grid", cs_grid, "overlap grid lo:hi:count");
  cmd_curve_steering->add_option("--output", cs_out, "output CSV path (default stdout)");

  // --- curve-bell ---
  auto* cmd_curve_bell = app.add_subcommand("curve-bell", "Tolerable white noise vs efficiency (Bell)");
  std::string cb_mode = "optimized";
  std::string cb_grid = "0.67:1.0:34";
  std::string cb_out;
  cmd_curve_bell->add_option("--mode", cb_mode, "optimized | maxent")
      ->check(CLI::IsMember({"optimized", "maxent"}));
  cmd_curve_bell->add_option("--eps-grid", cb_grid, "efficiency grid lo:hi:count");
  cmd_curve_bell->add_option("--output", cb_out, "output CSV path (default stdout)");

  // --- wnr-steering ---
  auto* cmd_wnr = app.add_subcommand("wnr-steering", "Tolerable white noise vs efficiency (steering)");
  std::string wn_mode = "maxent";
  std::string wn_grid = "0.52:1.0:25";
  std::string wn_out;
  cmd_wnr->add_option("--mode", wn_mode, "maxent | optimized")->check(CLI::IsMember({"maxent", "optimized"}));
  cmd_wnr->add_option("--eps-grid", wn_grid, "efficiency grid lo:hi:count");
  cmd_wnr->add_option("--output", wn_out, "output CSV path (default stdout)");

  // --- simulate ---
  auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo pipeline from a JSON config");
  std::string sim_config;
  std::string sim_out;
  std::string sim_csv;
  cmd_simulate->add_option("--config", sim_config, "JSON config file")->required();
  cmd_simulate->add_option("--output", sim_out, "report JSON path (default stdout)");
  cmd_simulate->add_option("--csv", sim_csv, "also write a CSV summary here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_threshold) {
      if (th_X < 2) throw std::invalid_argument("threshold: --X must be >= 2");
      if (!th_limit && !th_delta) throw std::invalid_argument("threshold: provide --delta or --limit");
      double eps_star, lambda_max;
      if (th_limit) {
        eps_star = steering::asymptotic_threshold(th_X);
        lambda_max = static_cast<double>(th_X);
      } else {
        lambda_max = steering::lambda_max_equal_spaced(th_X, *th_delta);
        eps_star = 1.0 / lambda_max;
      }
      if (th_json) {
        nlohmann::json j{{"X", th_X}, {"epsilon_star", eps_star}, {"lambda_max", lambda_max}};
        if (th_delta) j["delta"] = *th_delta;
        if (th_limit) j["limit"] = true;
        std::cout << j.dump(2) << "\n";
      } else {
        std::printf("epsilon_star = %.9f (lambda_max = %.9f)\n", eps_star, lambda_max);
      }
    } else if (*cmd_curve_steering) {
      if (cs_eps.empty()) throw std::invalid_argument("curve-steering: empty efficiency list");
      const GridSpec g = parse_grid(cs_grid);
      if (g.lo <= 0.0 || g.hi >= 1.0)
        throw std::invalid_argument("curve-steering: overlaps must lie strictly inside (0,1)");
      std::ofstream file;
      std::ostream& out = open_output(file, cs_out);
      out << "epsilon,overlap,delta,parameter\n";
      const steering::SchmidtState state = steering::phi_plus_alpha(cs_alpha);
      for (double eps : cs_eps) {
        for (double overlap : grid_points(g)) {
          const double delta = 2.0 * std::acos(std::sqrt(overlap));
          const auto fam = steering::one_click_family(2, delta, eps);
          const double v = steering::primal_value(steering::steered_assemblage(state, fam));
          out << eps << "," << overlap << "," << delta << "," << v << "\n";
        }
      }
    } else if (*cmd_curve_bell) {
      const GridSpec g = parse_grid(cb_grid);
      std::ofstream file;
      std::ostream& out = open_output(file, cb_out);
      out << "epsilon,eta,phi_x,phi_y,lambda_min\n";
      for (double eps : grid_points(g)) {
        if (cb_mode == "optimized") {
          const auto opt = steering::min_eig_over_angles(eps);
          const auto nt = steering::noise_threshold_optimized(eps);
          out << eps << "," << nt.eta << "," << opt.phi_x << "," << opt.phi_y << "," << opt.lambda_min << "\n";
        } else {
          const auto nt = steering::noise_threshold_maxent(eps);
          out << eps << "," << nt.eta << ",nan,nan,nan\n";
        }
      }
    } else if (*cmd_wnr) {
      const GridSpec g = parse_grid(wn_grid);
      std::ofstream file;
      std::ostream& out = open_output(file, wn_out);
      out << "epsilon,eta,alpha\n";
      for (double eps : grid_points(g)) {
        if (wn_mode == "maxent") {
          out << eps << "," << wnr_over_delta(eps, std::numbers::pi / 4.0) << "," << std::numbers::pi / 4.0 << "\n";
        } else {
          auto neg = [&](double alpha) { return -wnr_over_delta(eps, alpha); };
          double best_alpha = std::numbers::pi / 4.0, best = neg(best_alpha);
          for (int i = 1; i <= 7; ++i) {
            const double alpha = std::numbers::pi / 4.0 * i / 8.0;
            const double v = neg(alpha);
            if (v < best) {
              best = v;
              best_alpha = alpha;
            }
          }
          const auto [alpha_opt, val] =
              golden_min(neg, std::max(1e-3, best_alpha - std::numbers::pi / 32.0),
                         std::min(std::numbers::pi / 4.0, best_alpha + std::numbers::pi / 32.0), 1e-3);
          out << eps << "," << -val << "," << alpha_opt << "\n";
        }
      }
    } else if (*cmd_simulate) {
      std::ifstream in(sim_config);
      if (!in) throw std::invalid_argument("simulate: cannot read config file " + sim_config);
      nlohmann::json j;
      in >> j;
      const auto cfg = j.get<steering::PipelineConfig>();
      const auto report = steering::run_pipeline(cfg);
      const nlohmann::json out_json = report;
      std::ofstream file;
      std::ostream& out = open_output(file, sim_out);
      out << out_json.dump(2) << "\n";
      if (!sim_csv.empty()) {
        std::ofstream csv(sim_csv);
        if (!csv) throw std::runtime_error("simulate: cannot open CSV path " + sim_csv);
        csv << "overlap,mean_parameter,stderr,epsilon_estimate\n";
        for (const auto& pt : report.points)
          csv << pt.overlap << "," << pt.mean_parameter << "," << pt.stderr_parameter << ","
              << pt.epsilon_estimate << "\n";
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "compute failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
