// Strategy combination: a pairwise node mixes a protected base stream with an
// improver using the one-sided weight gbar(x) = g(x/2), and binary trees of
// such nodes combine N strategies.  Builders cover the linear spine, the
// multiscale (strategy x dyadic-window) grid, and the complexity-ordered
// unbalanced spine.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lh/confidence.hpp"
#include "lh/predictor.hpp"

namespace lh {

// Mixture weight on the improver: g(x/2) for x > 0, otherwise 0.
double g_bar(const ConfidenceParams& p, double x);

struct ChildRef {
  bool is_leaf = true;
  int index = 0;  // leaf stream index or node id
};

struct CombinerNode {
  int id = 0;
  ChildRef left;   // protected base
  ChildRef right;  // improver
  double window = 0.0;
  ConfidenceParams params;
  DiscountSchedule schedule;
  UpdateRule rule = UpdateRule::Plain;
  double x = 0.0;

  // gbar saturates at 2 U; the clipped update banks payoffs past that point.
  double clip_threshold() const { return 2.0 * params.U(); }
};

enum class TreeLayout { Single, Pair, Linear, MultiScale, Unbalanced };

class ComparisonTree {
 public:
  struct StepResult {
    double root_payoff = 0.0;
    std::vector<double> leaf_weights;  // probability distribution over leaves
  };

  // Weights are computed from the pre-step deviations, then one bottom-up
  // mixing pass runs, then every node folds in its children's mixed payoffs.
  StepResult step(std::span<const double> leaf_payoffs);

  int num_leaves() const { return num_leaves_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  TreeLayout layout() const { return layout_; }
  const std::vector<CombinerNode>& nodes() const { return nodes_; }
  // Maps leaf index -> strategy index (several leaves may share a strategy).
  const std::vector<int>& leaf_strategy() const { return leaf_strategy_; }
  int num_strategies() const { return num_strategies_; }

  // Aggregates leaf weights per strategy.
  std::vector<double> strategy_weights(const StepResult& r) const;

  std::string layout_json() const;

  // A single-strategy tree: no nodes, the lone leaf gets weight 1.
  static ComparisonTree single(int strategy = 0);

  // One node combining base (leaf 0) with improver (leaf 1).
  static ComparisonTree pair(double window, double Z, UpdateRule rule = UpdateRule::Plain);

  // Left spine at one window: base strategy at the deepest left, improvers
  // applied in `improver_order`, the last entry at the root.
  // enforce_window_floor = false skips the n >= 40 ln(1/Z) validation; the
  // bandit wrapper runs in a regime where that sufficient condition cannot
  // hold and records a warning instead.
  static ComparisonTree linear(int num_strategies, int base_strategy,
                               std::span<const int> improver_order, double window, double Z,
                               UpdateRule rule = UpdateRule::Clipped,
                               std::optional<DiscountSchedule> schedule = std::nullopt,
                               bool enforce_window_floor = true);

  // Strategy x window grid: windows 2^j <= T with 2^j >= 40 ln(1/Z); level
  // (i, j) improves the running combination with strategy i at window 2^j,
  // windows ascending so the root holds the largest window.  Requires
  // Z <= (N T)^{-2}.
  static ComparisonTree multiscale(int num_strategies, double T, double Z,
                                   int base_strategy = -1,
                                   UpdateRule rule = UpdateRule::Clipped);

  // Complexity-ordered spine: strategy j hangs one right transition below
  // depth j, node j uses Z_j = 1/j^2 clamped to e^{-1} and to the window
  // floor.
  static ComparisonTree unbalanced(int num_strategies, double T);

 private:
  std::vector<CombinerNode> nodes_;  // children precede parents
  int root_ = -1;
  int num_leaves_ = 0;
  int num_strategies_ = 0;
  std::vector<int> leaf_strategy_;
  TreeLayout layout_ = TreeLayout::Single;

  std::vector<double> mixed_;   // scratch: per-node mixed payoff
  std::vector<double> weight_;  // scratch: per-node gbar weight
};

// One pairwise combination step outside a tree (Algorithm-2 style use).
struct PairStepResult {
  double mixed = 0.0;
  double p2 = 0.0;
};
PairStepResult combine_pair_step(CombinerNode& node, double s1, double s2);

struct TreeRun {
  std::vector<double> root_payoffs;           // s_{*,t}
  std::vector<std::vector<double>> leaf_payoffs;  // [leaf][t]
  double total_root = 0.0;
};

// Drives a tree over per-strategy payoff streams; payoff row t supplies one
// value per strategy, mapped to leaves via leaf_strategy().
TreeRun run_tree(ComparisonTree& tree, std::span<const std::vector<double>> strategy_payoffs);

struct Interval {
  std::uint64_t begin = 0;  // 1-based, inclusive
  std::uint64_t end = 0;    // inclusive
  int strategy = 0;
  std::uint64_t length() const { return end - begin + 1; }
};

struct WindowedRegretReport {
  std::vector<double> interval_regret;
  double total_regret = 0.0;
  double budget = 0.0;  // c * sum_j sqrt(|I_j| ln(N T))
  bool pass = false;
};

// Per-interval regret of the root payoff against the assigned strategies for
// a disjoint cover of [1..T]; asserts the summed regret against the budget.
WindowedRegretReport windowed_regret_audit(const TreeRun& run,
                                           std::span<const std::vector<double>> strategy_payoffs,
                                           std::span<const Interval> partition, double c);

}  // namespace lh
