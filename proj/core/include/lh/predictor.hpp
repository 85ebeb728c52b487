// Bounded-loss online predictor: bet g(x_t), then fold the revealed payoff
// into the discounted deviation x.  Supports constant and p-norm discount
// schedules and the clipped update that banks favorable payoffs once the
// deviation is saturated.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lh/confidence.hpp"
#include "lh/rng.hpp"

namespace lh {

struct DiscountSchedule {
  enum class Kind { Constant, PNorm };
  Kind kind = Kind::Constant;
  double rho = 0.0;  // Constant
  double p = 1.0;    // PNorm: rho(b) = 1 - |b|^p / n
  double n = 0.0;

  static DiscountSchedule constant(double rho);
  static DiscountSchedule constant_window(double n);  // rho = 1 - 1/n
  static DiscountSchedule pnorm(double p, double n);

  double factor(double b) const;
};

// rho(b) = 1 - |b|^p / n for p in (0, 2]; inputs must be pre-scaled to
// |b| <= 1.
double rho_pnorm(double b, double p, double n);

enum class UpdateRule { Plain, Clipped };

struct StepRecord {
  std::uint64_t t = 0;    // 1-based step index
  double b = 0.0;         // revealed payoff
  double confidence = 0;  // g(x) emitted before b
  double x = 0.0;         // deviation the bet was computed from
  double gain = 0.0;      // confidence * b
  double phi = 0.0;       // Phi(x)
  double rho = 0.0;       // discount factor applied to x during this step
};

struct TraceSummary {
  std::uint64_t steps = 0;
  double final_gain = 0.0;
  double max_prefix_loss = 0.0;  // max over prefixes of -cumulative gain, >= 0
  double max_abs_x = 0.0;        // over post-update deviations
  double final_x = 0.0;
};

struct Trace {
  std::vector<StepRecord> steps;
  TraceSummary summary;

  // Post-update deviation after step j (1-based); y(T) == summary.final_x.
  double post_x(std::uint64_t j) const;
};

struct PredictorConfig {
  ConfidenceParams params;
  DiscountSchedule schedule;
  UpdateRule rule = UpdateRule::Plain;
  // Clipped update banks favorable payoffs once |x| reaches this; defaults to
  // params.U().
  double clip_threshold = 0.0;

  static PredictorConfig from_horizon(double T, double epsilon);
};

class Predictor {
 public:
  explicit Predictor(PredictorConfig cfg);

  // The bet for the next step; does not consume anything.
  double peek_confidence() const;

  // Emits the confidence computed from the current deviation, then folds in
  // the revealed payoff.  |b| > 1 and non-finite b are rejected.
  double step(double b);

  double x() const { return x_; }
  std::uint64_t t() const { return t_; }
  double gain() const { return gain_.value(); }
  const PredictorConfig& config() const { return cfg_; }

  // Pins the deviation directly (state replay and tests).
  void set_deviation(double x) { x_ = x; }

 private:
  PredictorConfig cfg_;
  double x_ = 0.0;
  std::uint64_t t_ = 0;
  KahanSum gain_;
};

// Runs the predictor over a whole sequence, recording the mandatory trace.
// An optional PotentialTable avoids rebuilding the Phi memo per run.
Trace run(const PredictorConfig& cfg, std::span<const double> payoffs,
          const PotentialTable* phi = nullptr);

// |sum_{j<T} (1 - rho_j) y_j + y_T - sum_j b_j| over the trace, where y_j is
// the post-update deviation and rho_j the factor applied when b_{j+1} arrived.
// Zero (to rounding) for Plain schedules; does not hold for Clipped.
double telescoping_residual(const Trace& trace);

struct SmoothedFloorReport {
  double worst_margin = 0.0;  // min over prefixes of smoothed gain - Phi
  std::uint64_t worst_t = 0;
  double slack = 0.0;  // Z' / (1 - rho): the lemma allows margin >= -slack
};

// Prefix floor on the eta-smoothed payoff: sum_j eta^{t-j} g_j b_j >=
// Phi(y_t) - Z'/(1-rho).  eta must sit in the documented safe range:
// >= 1 - (1-rho)/2 for the plain update, >= rho for the clipped one.
SmoothedFloorReport smoothed_gain_floor(const Trace& trace, double eta,
                                        const PredictorConfig& cfg, double z_prime,
                                        const PotentialTable* phi = nullptr);

struct PayoffFloorReport {
  double gain = 0.0;
  double floor = 0.0;  // sum_{t<T} rho_bar |y_t|^+_theta + last_term - Z' T
  double margin = 0.0;
  double threshold = 0.0;
};

// Whole-run payoff floor from the potential argument.  last term is
// Phi(y_T) when statement_form is false, |y_T|^+_theta - U when true.
PayoffFloorReport payoff_floor(const Trace& trace, const PredictorConfig& cfg, double z_prime,
                               double threshold, bool statement_form = false,
                               const PotentialTable* phi = nullptr);

// Paired per-step loss allowance for a variant: Z for StepExp,
// e * rho_bar * L * Z for RampExp and TransactionRamp.
double paired_z_prime(const ConfidenceParams& p);

}  // namespace lh
