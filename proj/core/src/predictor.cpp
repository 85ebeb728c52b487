#include "lh/predictor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

DiscountSchedule DiscountSchedule::constant(double rho) {
  if (!(rho >= 0.0) || rho >= 1.0) fail("DiscountSchedule: rho must be in [0, 1)");
  DiscountSchedule s;
  s.kind = Kind::Constant;
  s.rho = rho;
  return s;
}

DiscountSchedule DiscountSchedule::constant_window(double n) {
  if (!(n >= 1.0)) fail("DiscountSchedule: window must be >= 1");
  return constant(1.0 - 1.0 / n);
}

DiscountSchedule DiscountSchedule::pnorm(double p, double n) {
  if (!(p > 0.0) || p > 2.0) fail("DiscountSchedule: p-norm exponent must be in (0, 2]");
  if (!(n >= 1.0)) fail("DiscountSchedule: window must be >= 1");
  DiscountSchedule s;
  s.kind = Kind::PNorm;
  s.p = p;
  s.n = n;
  return s;
}

double DiscountSchedule::factor(double b) const {
  if (kind == Kind::Constant) return rho;
  return 1.0 - std::pow(std::fabs(b), p) / n;
}

double rho_pnorm(double b, double p, double n) {
  if (!(p > 0.0) || p > 2.0) fail("rho_pnorm: p must be in (0, 2]");
  if (!(n >= 1.0)) fail("rho_pnorm: window must be >= 1");
  if (!std::isfinite(b) || std::fabs(b) > 1.0)
    fail("rho_pnorm: payoff must be pre-scaled to |b| <= 1");
  return 1.0 - std::pow(std::fabs(b), p) / n;
}

PredictorConfig PredictorConfig::from_horizon(double T, double epsilon) {
  PredictorConfig cfg;
  cfg.params = derive_params(T, epsilon);
  cfg.schedule = DiscountSchedule::constant_window(T);
  cfg.rule = UpdateRule::Plain;
  return cfg;
}

Predictor::Predictor(PredictorConfig cfg) : cfg_(cfg) {
  cfg_.params.validate();
  if (cfg_.clip_threshold <= 0.0) cfg_.clip_threshold = cfg_.params.U();
}

double Predictor::peek_confidence() const { return eval_g(cfg_.params, x_); }

double Predictor::step(double b) {
  if (!std::isfinite(b)) fail("Predictor::step: non-finite payoff");
  if (std::fabs(b) > 1.0)
    fail("Predictor::step: payoff bound |b| <= 1 violated (b=" + std::to_string(b) + ")");
  double confidence = eval_g(cfg_.params, x_);
  gain_.add(confidence * b);
  double rho_t = cfg_.schedule.factor(b);
  if (cfg_.rule == UpdateRule::Plain || std::fabs(x_) < cfg_.clip_threshold ||
      confidence * b < 0.0) {
    x_ = rho_t * x_ + b;
  } else {
    x_ = rho_t * x_;
  }
  ++t_;
  return confidence;
}

double Trace::post_x(std::uint64_t j) const {
  if (j == 0 || j > summary.steps) fail("Trace::post_x: step index out of range");
  if (j == summary.steps) return summary.final_x;
  return steps[static_cast<std::size_t>(j)].x;  // pre-bet x of step j+1
}

Trace run(const PredictorConfig& cfg, std::span<const double> payoffs,
          const PotentialTable* phi) {
  PredictorConfig local = cfg;
  local.params.validate();
  if (local.clip_threshold <= 0.0) local.clip_threshold = local.params.U();

  std::optional<PotentialTable> own;
  if (phi == nullptr) {
    own.emplace(local.params);
    phi = &*own;
  }

  Trace trace;
  trace.steps.reserve(payoffs.size());
  Predictor pred(local);
  KahanSum cum;
  double max_loss = 0.0, max_abs_x = 0.0;
  std::uint64_t t = 0;
  for (double b : payoffs) {
    ++t;
    StepRecord rec;
    rec.t = t;
    rec.b = b;
    rec.x = pred.x();
    rec.phi = (*phi)(rec.x);
    rec.rho = local.schedule.factor(b);
    rec.confidence = pred.step(b);
    rec.gain = rec.confidence * b;
    cum.add(rec.gain);
    max_loss = std::max(max_loss, -cum.value());
    max_abs_x = std::max(max_abs_x, std::fabs(pred.x()));
    trace.steps.push_back(rec);
  }
  trace.summary.steps = t;
  trace.summary.final_gain = pred.gain();
  trace.summary.max_prefix_loss = max_loss;
  trace.summary.max_abs_x = max_abs_x;
  trace.summary.final_x = pred.x();
  return trace;
}

double telescoping_residual(const Trace& trace) {
  if (trace.steps.empty()) fail("telescoping_residual: empty trace");
  const std::uint64_t T = trace.summary.steps;
  KahanSum lhs, rhs;
  for (std::uint64_t j = 1; j + 1 <= T; ++j) {
    double y_j = trace.post_x(j);
    double rho_j = trace.steps[static_cast<std::size_t>(j)].rho;  // applied at step j+1
    lhs.add((1.0 - rho_j) * y_j);
  }
  lhs.add(trace.summary.final_x);
  for (const StepRecord& s : trace.steps) rhs.add(s.b);
  return std::fabs(lhs.value() - rhs.value());
}

double paired_z_prime(const ConfidenceParams& p) {
  switch (p.variant) {
    case GVariant::RampExp:
      return std::exp(1.0) * p.rho_bar() * p.L * p.Z;
    case GVariant::StepExp:
    case GVariant::TransactionRamp:
      return p.Z;
  }
  return p.Z;
}

SmoothedFloorReport smoothed_gain_floor(const Trace& trace, double eta,
                                        const PredictorConfig& cfg, double z_prime,
                                        const PotentialTable* phi) {
  double rho = cfg.schedule.kind == DiscountSchedule::Kind::Constant
                   ? cfg.schedule.rho
                   : 1.0 - 1.0 / cfg.schedule.n;
  double floor_eta =
      cfg.rule == UpdateRule::Clipped ? rho : 1.0 - (1.0 - rho) / 2.0;
  if (eta < floor_eta - 1e-12 || eta > 1.0)
    fail("smoothed_gain_floor: eta outside safe range [" + std::to_string(floor_eta) +
         ", 1] for this update rule");

  std::optional<PotentialTable> own;
  if (phi == nullptr) {
    own.emplace(cfg.params);
    phi = &*own;
  }

  SmoothedFloorReport rep;
  rep.slack = z_prime / (1.0 - rho);
  double smoothed = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  std::uint64_t worst_t = 0;
  for (std::uint64_t j = 1; j <= trace.summary.steps; ++j) {
    const StepRecord& s = trace.steps[static_cast<std::size_t>(j - 1)];
    smoothed = eta * smoothed + s.gain;
    double margin = smoothed - (*phi)(trace.post_x(j));
    if (margin < worst) {
      worst = margin;
      worst_t = j;
    }
  }
  rep.worst_margin = trace.summary.steps == 0 ? 0.0 : worst;
  rep.worst_t = worst_t;
  return rep;
}

PayoffFloorReport payoff_floor(const Trace& trace, const PredictorConfig& cfg, double z_prime,
                               double threshold, bool statement_form,
                               const PotentialTable* phi) {
  std::optional<PotentialTable> own;
  if (phi == nullptr && !statement_form) {
    own.emplace(cfg.params);
    phi = &*own;
  }
  const std::uint64_t T = trace.summary.steps;
  PayoffFloorReport rep;
  rep.threshold = threshold;
  rep.gain = trace.summary.final_gain;
  if (T == 0) return rep;

  double rho_bar = cfg.schedule.kind == DiscountSchedule::Kind::Constant
                       ? 1.0 - cfg.schedule.rho
                       : 1.0 / cfg.schedule.n;
  KahanSum floor_sum;
  for (std::uint64_t t = 1; t + 1 <= T; ++t) {
    double a = std::fabs(trace.post_x(t));
    if (a > threshold) floor_sum.add(rho_bar * a);
  }
  double last_abs = std::fabs(trace.summary.final_x);
  if (statement_form) {
    // |y_T|^+_theta, minus the Phi-vs-|x| gap of at most U.
    if (last_abs > threshold) floor_sum.add(last_abs);
    floor_sum.add(-cfg.params.U());
  } else {
    floor_sum.add((*phi)(trace.summary.final_x));
  }
  floor_sum.add(-z_prime * static_cast<double>(T));
  rep.floor = floor_sum.value();
  rep.margin = rep.gain - rep.floor;
  return rep;
}

}  // namespace lh
