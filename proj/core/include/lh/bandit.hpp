// Partial-information wrapper: importance-weighted reward estimates, scaled
// into [0, 1], feed a linear comparison tree whose base leaf is the
// average-of-arms stream; sampling mixes the tree's strategy weights with
// uniform exploration at rate gamma.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lh/combiner.hpp"
#include "lh/rng.hpp"

namespace lh {

struct BanditConfig {
  int N = 0;
  double T = 0.0;
  double Z = 0.0;
};

class Bandit {
 public:
  // Requires Z <= (N T)^{-2} and derived gamma in (0, 0.5]; gamma below 1e-6
  // is clamped up.  A window n_inner = T gamma / N below 40 ln(1/Z) is
  // recorded as a warning (the sufficient-condition floor is unattainable in
  // this parameter regime), not rejected.
  Bandit(int N, double T, double Z);

  // Samples an arm from p, reveals only that arm's reward (in [0, 1]), feeds
  // the scaled estimate stream one tree step, and refreshes p.
  int step(const std::function<double(int)>& reveal, SplitMix64& rng);

  const std::vector<double>& sampling_probabilities() const { return p_; }
  double gamma() const { return gamma_; }
  double inner_window() const { return n_inner_; }
  bool window_floor_warning() const { return window_warning_; }
  double cumulative_reward() const { return reward_.value(); }
  // Conditional expected reward sum_t sum_i p_i(t) mu_i for supplied means.
  double expected_reward(std::span<const double> means) const;
  std::uint64_t t() const { return t_; }
  const ComparisonTree& tree() const { return tree_; }

 private:
  BanditConfig cfg_;
  double gamma_ = 0.0;
  double n_inner_ = 0.0;
  bool window_warning_ = false;
  std::vector<double> p_;
  ComparisonTree tree_;
  KahanSum reward_;
  std::vector<KahanSum> p_history_weighted_;  // sum_t p_i(t), for expected_reward
  std::uint64_t t_ = 0;
  std::vector<double> leaf_scratch_;
};

// One-step importance-weighted estimate for a pinned distribution; exact
// enumeration of E[x_hat] = x is the unbiasedness oracle.
std::vector<double> importance_estimate(std::span<const double> rewards,
                                        std::span<const double> p, int chosen);

struct BanditRunStats {
  double pseudo_regret = 0.0;    // T max_i mu_i - sum_t sum_i p_i(t) mu_i
  double pseudo_loss_vs_avg = 0.0;  // sum_t sum_i (p_i(t) - 1/N) mu_i
  double realized_reward = 0.0;
};

BanditRunStats run_bandit_bernoulli(int N, double T, double Z, std::span<const double> means,
                                    std::uint64_t seed);

struct BanditScalingReport {
  std::vector<double> horizons;
  std::vector<double> mean_regret;
  std::vector<double> mean_loss_vs_avg;
  double slope = 0.0;  // log-log least squares over (T, mean regret)
  bool window_floor_warning = false;
};

// Runs `seeds` Bernoulli trials for every horizon (Z chosen per horizon as
// (N T)^{-2} unless fixed_Z > 0) and fits the regret growth exponent.
// Requires >= 3 horizons spanning a decade and >= 100 seeds.
BanditScalingReport bandit_regret_report(int N, std::span<const double> horizons,
                                         std::span<const double> means, int seeds,
                                         std::uint64_t master_seed, double fixed_Z = 0.0,
                                         int threads = 0);

}  // namespace lh
