#include "lh/randomized.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

double stop_threshold(double epsilon, double C) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) fail("stop_threshold: epsilon must be in (0, 1)");
  if (!(C > 0.0)) fail("stop_threshold: C must be > 0");
  return C * std::log(1.0 / epsilon) / epsilon;
}

RandomizedBetter::RandomizedBetter(RandomizedConfig cfg, SplitMix64 rng)
    : cfg_(cfg),
      pred_(PredictorConfig{cfg.params, cfg.schedule, UpdateRule::Plain, 0.0}),
      rng_(rng) {
  if (cfg_.cost < 0.0 || cfg_.cost > 1.0) fail("RandomizedBetter: cost must be in [0, 1]");
}

int RandomizedBetter::step(double b) {
  if (stopped_) fail("RandomizedBetter::step: state is stopped");
  double g = pred_.peek_confidence();
  double u = rng_.uniform();
  int bet = 0;
  if (u < std::fabs(g)) bet = g > 0.0 ? 1 : -1;
  pred_.step(b);  // deviation always tracks the raw payoff
  if (bet != 0) {
    gross_.add(static_cast<double>(bet) * b);
    ++trades_;
  }
  max_loss_ = std::max(max_loss_, -gross_.value());
  if (cfg_.stop_loss && -gross_.value() > *cfg_.stop_loss) stopped_ = true;
  return bet;
}

CostTrace run_with_costs(std::span<const double> payoffs, double cost, double Z, double T,
                         std::uint64_t seed, std::optional<double> stop_loss) {
  if (cost < 0.0 || cost > 1.0) fail("run_with_costs: cost must be in [0, 1]");
  RandomizedConfig cfg;
  cfg.params = ConfidenceParams::transaction_ramp(2.0 * cost, T, Z);
  cfg.params.validate();
  cfg.schedule = DiscountSchedule::constant_window(T);
  cfg.cost = cost;
  cfg.stop_loss = stop_loss;
  RandomizedBetter better(cfg, SplitMix64(seed));

  CostTrace trace;
  trace.seed = seed;
  trace.steps.reserve(payoffs.size());
  std::uint64_t t = 0;
  for (double b : payoffs) {
    ++t;
    CostStepRecord rec;
    rec.t = t;
    rec.b = b;
    rec.confidence = better.confidence();
    if (!better.stopped()) {
      rec.bet = better.step(b);
    } else {
      rec.bet = 0;  // stopped states no longer trade
    }
    rec.traded = rec.bet != 0 ? 1 : 0;
    rec.gross_gain = better.gross_gain();
    rec.cumulative_cost = better.cost_paid();
    rec.stopped = better.stopped() ? 1 : 0;
    trace.steps.push_back(rec);
  }
  trace.gross_gain = better.gross_gain();
  trace.net_gain = better.net_gain();
  trace.trades = better.trades();
  trace.max_gross_loss = better.max_gross_loss();
  trace.stopped = better.stopped();
  return trace;
}

TailProbeReport loss_tail_probe(
    const std::function<RandomizedBetter(SplitMix64)>& make_better, double epsilon,
    double delta, std::uint64_t trials, std::uint64_t T, std::uint64_t seed) {
  if (!(delta > 0.0) || delta >= 1.0) fail("loss_tail_probe: delta must be in (0, 1)");
  auto need = static_cast<std::uint64_t>(std::ceil(100.0 / delta));
  if (trials < need)
    fail("loss_tail_probe: need at least ceil(100/delta) = " + std::to_string(need) + " trials");

  std::vector<double> losses;
  losses.reserve(trials);
  KahanSum regret_sum;
  for (std::uint64_t i = 0; i < trials; ++i) {
    SplitMix64 coin = SplitMix64::substream(seed, 2 * i);
    RandomizedBetter better = make_better(SplitMix64::substream(seed, 2 * i + 1));
    double drift = 0.0;
    for (std::uint64_t t = 0; t < T && !better.stopped(); ++t) {
      double b = coin.pm1(0.5 * (1.0 + epsilon));
      drift += b;
      better.step(b);
    }
    losses.push_back(better.max_gross_loss());
    regret_sum.add(drift - better.gross_gain());
  }
  std::sort(losses.begin(), losses.end());

  TailProbeReport rep;
  rep.trials = trials;
  auto idx = static_cast<std::size_t>(std::floor((1.0 - delta) * static_cast<double>(trials)));
  idx = std::min(idx, losses.size() - 1);
  rep.quantile_loss = losses[idx];
  rep.reference = std::log(1.0 / delta) / epsilon;
  rep.ratio = rep.quantile_loss / rep.reference;
  rep.mean_regret = regret_sum.value() / static_cast<double>(trials);

  // 95% normal-approximation CI on the exceedance frequency at the reported
  // quantile value.
  double exceed = 0.0;
  for (double v : losses)
    if (v >= rep.quantile_loss) exceed += 1.0;
  double p_hat = exceed / static_cast<double>(trials);
  double se = std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / static_cast<double>(trials));
  rep.ci_low = std::max(0.0, p_hat - 1.96 * se);
  rep.ci_high = std::min(1.0, p_hat + 1.96 * se);
  return rep;
}

}  // namespace lh
