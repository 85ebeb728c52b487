#include "lh/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr double kZMax = 0.36787944117144233;  // e^{-1}

ConfidenceParams node_params(double Z, double window) {
  return ConfidenceParams::ramp_exp(Z, window, std::sqrt(window));
}
}  // namespace

double g_bar(const ConfidenceParams& p, double x) {
  if (x <= 0.0) return 0.0;
  return eval_g(p, x * 0.5);
}

ComparisonTree ComparisonTree::single(int strategy) {
  ComparisonTree t;
  t.num_leaves_ = 1;
  t.num_strategies_ = strategy + 1;
  t.leaf_strategy_ = {strategy};
  t.layout_ = TreeLayout::Single;
  return t;
}

ComparisonTree ComparisonTree::pair(double window, double Z, UpdateRule rule) {
  ComparisonTree t;
  CombinerNode node;
  node.id = 0;
  node.left = {true, 0};
  node.right = {true, 1};
  node.window = window;
  node.params = node_params(Z, window);
  node.params.validate();
  node.schedule = DiscountSchedule::constant_window(window);
  node.rule = rule;
  t.nodes_.push_back(node);
  t.root_ = 0;
  t.num_leaves_ = 2;
  t.num_strategies_ = 2;
  t.leaf_strategy_ = {0, 1};
  t.layout_ = TreeLayout::Pair;
  return t;
}

ComparisonTree ComparisonTree::linear(int num_strategies, int base_strategy,
                                      std::span<const int> improver_order, double window,
                                      double Z, UpdateRule rule,
                                      std::optional<DiscountSchedule> schedule,
                                      bool enforce_window_floor) {
  if (num_strategies < 1) fail("ComparisonTree::linear: need >= 1 strategy");
  ComparisonTree t;
  t.num_strategies_ = num_strategies;
  t.layout_ = TreeLayout::Linear;
  t.leaf_strategy_.push_back(base_strategy);
  if (improver_order.empty()) {
    t.num_leaves_ = 1;
    return t;
  }
  DiscountSchedule sched =
      schedule.has_value() ? *schedule : DiscountSchedule::constant_window(window);
  int below = -1;  // node id of the combination so far; -1 means base leaf
  for (std::size_t k = 0; k < improver_order.size(); ++k) {
    CombinerNode node;
    node.id = static_cast<int>(k);
    node.left = below < 0 ? ChildRef{true, 0} : ChildRef{false, below};
    node.right = {true, static_cast<int>(k) + 1};
    node.window = window;
    node.params = node_params(Z, window);
    if (enforce_window_floor) node.params.validate();
    node.schedule = sched;
    node.rule = rule;
    t.leaf_strategy_.push_back(improver_order[k]);
    t.nodes_.push_back(node);
    below = node.id;
  }
  t.root_ = below;
  t.num_leaves_ = static_cast<int>(improver_order.size()) + 1;
  return t;
}

ComparisonTree ComparisonTree::multiscale(int num_strategies, double T, double Z,
                                          int base_strategy, UpdateRule rule) {
  if (num_strategies < 1) fail("ComparisonTree::multiscale: need >= 1 strategy");
  if (!(T >= 2.0)) fail("ComparisonTree::multiscale: T must be >= 2");
  double z_cap = std::pow(num_strategies * T, -2.0);
  if (Z > z_cap * (1.0 + 1e-12))
    fail("ComparisonTree::multiscale: precondition Z <= (N T)^{-2} violated (Z=" +
         std::to_string(Z) + ", (NT)^{-2}=" + std::to_string(z_cap) + ")");
  double floor = 40.0 * std::log(1.0 / Z);
  std::vector<double> windows;
  for (double w = 2.0; w <= T * (1.0 + 1e-12); w *= 2.0)
    if (w >= floor) windows.push_back(w);
  if (windows.empty())
    fail("ComparisonTree::multiscale: no dyadic window in [40 ln(1/Z), T]; T too small for Z");

  if (base_strategy < 0) base_strategy = num_strategies - 1;
  ComparisonTree t;
  t.num_strategies_ = num_strategies;
  t.layout_ = TreeLayout::MultiScale;
  t.leaf_strategy_.push_back(base_strategy);
  int below = -1;
  int leaf = 1;
  for (double w : windows) {
    for (int i = 0; i < num_strategies; ++i) {
      CombinerNode node;
      node.id = static_cast<int>(t.nodes_.size());
      node.left = below < 0 ? ChildRef{true, 0} : ChildRef{false, below};
      node.right = {true, leaf};
      node.window = w;
      node.params = node_params(Z, w);
      node.params.validate();
      node.schedule = DiscountSchedule::constant_window(w);
      node.rule = rule;
      t.leaf_strategy_.push_back(i);
      t.nodes_.push_back(node);
      below = node.id;
      ++leaf;
    }
  }
  t.root_ = below;
  t.num_leaves_ = leaf;
  return t;
}

ComparisonTree ComparisonTree::unbalanced(int num_strategies, double T) {
  if (num_strategies < 1) fail("ComparisonTree::unbalanced: need >= 1 strategy");
  ComparisonTree t;
  t.num_strategies_ = num_strategies;
  t.layout_ = TreeLayout::Unbalanced;
  if (num_strategies == 1) {
    t.num_leaves_ = 1;
    t.leaf_strategy_ = {0};
    return t;
  }
  // Spine node j (1-based) improves with strategy j; deepest left child is
  // the last strategy.  Children must precede parents in nodes_, so build
  // from the bottom.
  int M = num_strategies;
  t.leaf_strategy_.assign(static_cast<std::size_t>(M), 0);
  t.leaf_strategy_[0] = M - 1;  // leaf 0: deepest base
  for (int j = 1; j < M; ++j) t.leaf_strategy_[static_cast<std::size_t>(j)] = M - 1 - j;
  int below = -1;
  for (int j = M - 1; j >= 1; --j) {
    double zj = std::min(1.0 / (static_cast<double>(j) * j), kZMax);
    zj = std::max(zj, std::exp(-T / 40.0));  // window floor clamp
    CombinerNode node;
    node.id = static_cast<int>(t.nodes_.size());
    node.left = below < 0 ? ChildRef{true, 0} : ChildRef{false, below};
    node.right = {true, M - j};
    node.window = T;
    node.params = node_params(zj, T);
    node.params.validate();
    node.schedule = DiscountSchedule::constant_window(T);
    node.rule = UpdateRule::Plain;
    t.nodes_.push_back(node);
    below = node.id;
  }
  t.root_ = below;
  t.num_leaves_ = M;
  return t;
}

ComparisonTree::StepResult ComparisonTree::step(std::span<const double> leaf_payoffs) {
  if (static_cast<int>(leaf_payoffs.size()) != num_leaves_)
    fail("ComparisonTree::step: expected " + std::to_string(num_leaves_) + " leaf payoffs, got " +
         std::to_string(leaf_payoffs.size()));
  for (double s : leaf_payoffs)
    if (!std::isfinite(s) || std::fabs(s) > 1.0)
      fail("ComparisonTree::step: leaf payoffs must be in [-1, 1]");

  StepResult out;
  out.leaf_weights.assign(static_cast<std::size_t>(num_leaves_), 0.0);

  if (nodes_.empty()) {
    out.root_payoff = leaf_payoffs[0];
    out.leaf_weights[0] = 1.0;
    return out;
  }

  weight_.resize(nodes_.size());
  mixed_.resize(nodes_.size());

  // Weights from pre-step deviations.
  for (std::size_t i = 0; i < nodes_.size(); ++i) weight_[i] = g_bar(nodes_[i].params, nodes_[i].x);

  auto child_payoff = [&](const ChildRef& c) {
    return c.is_leaf ? leaf_payoffs[static_cast<std::size_t>(c.index)]
                     : mixed_[static_cast<std::size_t>(c.index)];
  };

  // Children precede parents, so one forward pass mixes bottom-up.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    double sl = child_payoff(nodes_[i].left);
    double sr = child_payoff(nodes_[i].right);
    mixed_[i] = sl * (1.0 - weight_[i]) + sr * weight_[i];
  }
  out.root_payoff = mixed_[static_cast<std::size_t>(root_)];

  // Leaf weights: product of edge weights root-to-leaf, iteratively from the
  // root (parents follow children in index order, so walk indices downward).
  std::vector<double> node_mass(nodes_.size(), 0.0);
  node_mass[static_cast<std::size_t>(root_)] = 1.0;
  for (std::size_t ri = nodes_.size(); ri-- > 0;) {
    double m = node_mass[ri];
    if (m == 0.0) continue;
    const CombinerNode& node = nodes_[ri];
    double wl = m * (1.0 - weight_[ri]);
    double wr = m * weight_[ri];
    if (node.left.is_leaf)
      out.leaf_weights[static_cast<std::size_t>(node.left.index)] += wl;
    else
      node_mass[static_cast<std::size_t>(node.left.index)] += wl;
    if (node.right.is_leaf)
      out.leaf_weights[static_cast<std::size_t>(node.right.index)] += wr;
    else
      node_mass[static_cast<std::size_t>(node.right.index)] += wr;
  }

  // Fold this step's payoffs into every node's deviation.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    CombinerNode& node = nodes_[i];
    double b = child_payoff(node.right) - child_payoff(node.left);
    double rho_t = node.schedule.factor(b);
    if (node.rule == UpdateRule::Plain || std::fabs(node.x) < node.clip_threshold() ||
        g_bar(node.params, node.x) * b < 0.0) {
      node.x = rho_t * node.x + b;
    } else {
      node.x = rho_t * node.x;
    }
  }
  return out;
}

std::vector<double> ComparisonTree::strategy_weights(const StepResult& r) const {
  std::vector<double> w(static_cast<std::size_t>(num_strategies_), 0.0);
  for (int leaf = 0; leaf < num_leaves_; ++leaf)
    w[static_cast<std::size_t>(leaf_strategy_[static_cast<std::size_t>(leaf)])] +=
        r.leaf_weights[static_cast<std::size_t>(leaf)];
  return w;
}

std::string ComparisonTree::layout_json() const {
  std::ostringstream os;
  os.precision(17);
  auto child = [&](const ChildRef& c) {
    std::ostringstream o;
    o << "{\"type\":\"" << (c.is_leaf ? "leaf" : "node") << "\",\"index\":" << c.index << "}";
    return o.str();
  };
  os << "{\"num_leaves\":" << num_leaves_ << ",\"root\":" << root_ << ",\"nodes\":[";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const CombinerNode& n = nodes_[i];
    if (i) os << ",";
    os << "{\"id\":" << n.id << ",\"left\":" << child(n.left) << ",\"right\":" << child(n.right)
       << ",\"window\":" << n.window << ",\"Z\":" << n.params.Z << ",\"schedule\":\""
       << (n.schedule.kind == DiscountSchedule::Kind::Constant ? "constant" : "pnorm")
       << "\",\"rule\":\"" << (n.rule == UpdateRule::Plain ? "plain" : "clipped") << "\"}";
  }
  os << "],\"leaf_strategy\":[";
  for (std::size_t i = 0; i < leaf_strategy_.size(); ++i) {
    if (i) os << ",";
    os << leaf_strategy_[i];
  }
  os << "]}";
  return os.str();
}

PairStepResult combine_pair_step(CombinerNode& node, double s1, double s2) {
  if (!std::isfinite(s1) || std::fabs(s1) > 1.0 || !std::isfinite(s2) || std::fabs(s2) > 1.0)
    fail("combine_pair_step: payoffs must be in [-1, 1]");
  PairStepResult out;
  out.p2 = g_bar(node.params, node.x);
  out.mixed = s1 * (1.0 - out.p2) + s2 * out.p2;
  double b = s2 - s1;
  double rho_t = node.schedule.factor(b);
  if (node.rule == UpdateRule::Plain || std::fabs(node.x) < node.clip_threshold() ||
      out.p2 * b < 0.0) {
    node.x = rho_t * node.x + b;
  } else {
    node.x = rho_t * node.x;
  }
  return out;
}

TreeRun run_tree(ComparisonTree& tree, std::span<const std::vector<double>> strategy_payoffs) {
  if (strategy_payoffs.empty()) fail("run_tree: no strategy payoffs");
  std::size_t T = strategy_payoffs[0].size();
  for (const auto& s : strategy_payoffs)
    if (s.size() != T) fail("run_tree: strategy payoff streams must share a length");
  if (static_cast<int>(strategy_payoffs.size()) < tree.num_strategies())
    fail("run_tree: tree references more strategies than provided");

  TreeRun run;
  run.root_payoffs.reserve(T);
  run.leaf_payoffs.assign(static_cast<std::size_t>(tree.num_leaves()), {});
  std::vector<double> leaf(static_cast<std::size_t>(tree.num_leaves()));
  KahanSum total;
  for (std::size_t t = 0; t < T; ++t) {
    for (int i = 0; i < tree.num_leaves(); ++i)
      leaf[static_cast<std::size_t>(i)] =
          strategy_payoffs[static_cast<std::size_t>(tree.leaf_strategy()[static_cast<std::size_t>(i)])][t];
    auto res = tree.step(leaf);
    run.root_payoffs.push_back(res.root_payoff);
    total.add(res.root_payoff);
  }
  run.total_root = total.value();
  return run;
}

WindowedRegretReport windowed_regret_audit(const TreeRun& run,
                                           std::span<const std::vector<double>> strategy_payoffs,
                                           std::span<const Interval> partition, double c) {
  std::uint64_t T = run.root_payoffs.size();
  std::vector<Interval> sorted(partition.begin(), partition.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  std::uint64_t expect = 1;
  for (const Interval& iv : sorted) {
    if (iv.begin != expect || iv.end < iv.begin)
      fail("windowed_regret_audit: partition must be disjoint and cover [1..T]");
    if (iv.strategy < 0 || iv.strategy >= static_cast<int>(strategy_payoffs.size()))
      fail("windowed_regret_audit: interval strategy out of range");
    expect = iv.end + 1;
  }
  if (expect != T + 1) fail("windowed_regret_audit: partition must cover [1..T] exactly");

  WindowedRegretReport rep;
  double N = static_cast<double>(strategy_payoffs.size());
  double log_nt = std::log(N * static_cast<double>(T));
  KahanSum total, budget;
  for (const Interval& iv : sorted) {
    KahanSum r;
    for (std::uint64_t t = iv.begin; t <= iv.end; ++t) {
      std::size_t idx = static_cast<std::size_t>(t - 1);
      r.add(strategy_payoffs[static_cast<std::size_t>(iv.strategy)][idx] - run.root_payoffs[idx]);
    }
    rep.interval_regret.push_back(r.value());
    total.add(r.value());
    budget.add(std::sqrt(static_cast<double>(iv.length()) * log_nt));
  }
  rep.total_regret = total.value();
  rep.budget = c * budget.value();
  rep.pass = rep.total_regret <= rep.budget;
  return rep;
}

}  // namespace lh
