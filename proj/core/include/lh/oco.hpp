// Online convex optimization: greedy projection onto a box or ball, static
// and dynamic regret measurement, and the adaptive (eta, rho) grid whose
// per-rate trajectories are combined through a comparison tree.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lh/combiner.hpp"

namespace lh {

using Vec = std::vector<double>;

struct FeasibleSet {
  enum class Shape { Box, Ball };
  Shape shape = Shape::Box;
  Vec lo, hi;      // Box
  Vec center;      // Ball
  double radius = 0.0;

  int dim() const;
  double diameter() const;
  bool contains(const Vec& x, double tol = 1e-10) const;
  Vec project(const Vec& y) const;

  static FeasibleSet box(Vec lo, Vec hi);
  static FeasibleSet ball(Vec center, double radius);
};

Vec gp_step(const FeasibleSet& F, const Vec& x, const Vec& grad, double eta);

enum class LossFamily { Quadratic, Linear, Abs };

// c_t(x) for the scenario families: quadratic |x-z|^2/2, linear <z, x>,
// abs sum_i |x_i - z_i|, with z the step's target.
struct LossOracle {
  LossFamily family = LossFamily::Quadratic;
  double value(const Vec& x, const Vec& z) const;
  Vec grad(const Vec& x, const Vec& z) const;
};

struct OCOScenario {
  FeasibleSet F;
  LossFamily family = LossFamily::Quadratic;
  std::vector<Vec> targets;          // z_t per step
  std::vector<std::uint64_t> shifts; // 1-based first step of each segment
  double grad_bound = 0.0;           // ||grad c|| bound on F
  double loss_bound = 0.0;           // max |c| on F (payoff normalizer)

  std::uint64_t T() const { return targets.size(); }
  std::string to_json() const;
  static OCOScenario from_json(const std::string& text);
};

struct OCORun {
  std::vector<Vec> decisions;
  std::vector<double> losses;
  double total_loss = 0.0;
};

// Greedy projection with per-step learning rates eta(t) (1-based t).
OCORun run_gp(const OCOScenario& sc, const std::function<double(std::uint64_t)>& eta);

// Static regret against the best fixed point (exact minimizer for quadratic
// scenarios, supplied point otherwise).
double static_regret(const OCOScenario& sc, const OCORun& run);
Vec best_fixed_point(const OCOScenario& sc, std::uint64_t begin, std::uint64_t end);

struct AdaptiveGridRun {
  std::vector<double> etas;           // grid eta_j = 2^{-j}
  std::vector<OCORun> leaf_runs;      // one per eta
  std::vector<Vec> decisions;         // weight-mixture of leaf decisions
  std::vector<double> losses;         // c_t of the mixed decision
  double total_loss = 0.0;
  double worst_jensen_gap = 0.0;      // max_t [c_t(mix) - sum_w c_t(leaf)]
  ComparisonTree tree;
};

// Runs the eta-grid of greedy-projection strategies as leaves of a
// multiscale comparison tree over normalized payoffs -c_t(x)/loss_bound and
// emits the weight-mixture decision.
AdaptiveGridRun adaptive_grid_run(const OCOScenario& sc, double Z);

struct DynamicRegretReport {
  std::vector<double> interval_regret;  // vs best fixed point per segment
  double total_regret = 0.0;
  double budget = 0.0;
  bool pass = false;
};

// Per-segment regret of the supplied loss sequence against each segment's
// best fixed point, tested against
//   sum_j [k1 ||F|| ||grad c|| sqrt(gamma_j) |I_j| + k2 sqrt(|I_j| ln(1/Z))]
//     + k3 Z T (ln T)^2
// with gamma_j = (jump_j + ||F||) / (||F|| |I_j|).
DynamicRegretReport dynamic_regret_audit(const OCOScenario& sc,
                                         std::span<const double> losses, double Z, double k1,
                                         double k2, double k3);

}  // namespace lh
