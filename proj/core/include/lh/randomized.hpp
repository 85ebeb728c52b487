// Randomized +-1 betting: |g(x)| is the probability of placing a trade, so
// per-trade transaction costs can be charged, with a high-probability stop
// rule capping the realized betting loss.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lh/predictor.hpp"
#include "lh/rng.hpp"

namespace lh {

// Stop threshold C ln(1/eps) / eps; C is frozen at 4 (Bernstein constant 2
// with a safety factor of 2).
double stop_threshold(double epsilon, double C = 4.0);

struct RandomizedConfig {
  ConfidenceParams params;
  DiscountSchedule schedule;
  double cost = 0.0;  // charged once per nonzero bet
  std::optional<double> stop_loss;  // cap on gross betting loss
};

class RandomizedBetter {
 public:
  RandomizedBetter(RandomizedConfig cfg, SplitMix64 rng);

  // Draws the bet B in {-1, 0, +1} with P(B != 0) = |g(x)|, realizes B*b,
  // charges the per-trade cost, updates x with the raw payoff, then applies
  // the stop rule to the gross betting loss.  Stepping a stopped state is
  // rejected.
  int step(double b);

  bool stopped() const { return stopped_; }
  double x() const { return pred_.x(); }
  double confidence() const { return pred_.peek_confidence(); }
  double gross_gain() const { return gross_.value(); }
  double cost_paid() const { return static_cast<double>(trades_) * cfg_.cost; }
  double net_gain() const { return gross_gain() - cost_paid(); }
  std::uint64_t trades() const { return trades_; }
  double max_gross_loss() const { return max_loss_; }

 private:
  RandomizedConfig cfg_;
  Predictor pred_;
  SplitMix64 rng_;
  KahanSum gross_;
  std::uint64_t trades_ = 0;
  double max_loss_ = 0.0;
  bool stopped_ = false;
};

struct CostStepRecord {
  std::uint64_t t = 0;
  double b = 0.0;
  double confidence = 0.0;
  int bet = 0;
  int traded = 0;
  double gross_gain = 0.0;      // cumulative
  double cumulative_cost = 0.0;
  int stopped = 0;
};

struct CostTrace {
  std::vector<CostStepRecord> steps;
  double gross_gain = 0.0;
  double net_gain = 0.0;
  std::uint64_t trades = 0;
  double max_gross_loss = 0.0;
  bool stopped = false;
  std::uint64_t seed = 0;
};

// Runs randomized betting with TransactionRamp parameters eps = 2c over the
// sequence.  stop_loss, when set, caps the gross betting loss.
CostTrace run_with_costs(std::span<const double> payoffs, double cost, double Z, double T,
                         std::uint64_t seed, std::optional<double> stop_loss = std::nullopt);

struct TailProbeReport {
  double quantile_loss = 0.0;   // empirical (1-delta)-quantile of max loss
  double ci_low = 0.0;          // 95% binomial CI on the exceedance frequency
  double ci_high = 0.0;
  double reference = 0.0;       // ln(1/delta)/eps
  double ratio = 0.0;           // quantile / reference
  double mean_regret = 0.0;     // vs the biased coin's drift eps*T
  std::uint64_t trials = 0;
};

// Runs `make_better` against the biased coin Ber(+-1, (1+eps)/2) and reports
// the empirical delta-tail of the gross loss.  Requires trials >=
// ceil(100/delta).
TailProbeReport loss_tail_probe(
    const std::function<RandomizedBetter(SplitMix64)>& make_better, double epsilon,
    double delta, std::uint64_t trials, std::uint64_t T, std::uint64_t seed);

}  // namespace lh
