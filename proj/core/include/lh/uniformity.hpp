// Smoothed payoffs, the cross-scale decomposition of a rho1-smoothing into
// rho2-smoothings, Z-uniformity auditing of residual streams, and the
// constant-predictor-grid realization of noise-like signal prediction.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lh/combiner.hpp"

namespace lh {

struct SmoothedSeries {
  double rho = 0.0;
  std::vector<double> values;  // s~_t = (1-rho) sum_{j<=t} rho^{t-j} s_j
};

SmoothedSeries smooth(std::span<const double> series, double rho);

struct CrossScaleReport {
  double max_residual = 0.0;
  double min_coefficient = 0.0;
  // Closed-form total coefficient mass at the final step (approaches 1).
  double coefficient_sum = 0.0;
  double coefficient_sum_expected = 0.0;
};

// Verifies s~^{rho1}_t == (1-rho1)/(1-rho2) [s~^{rho2}_t +
// (rho1-rho2) sum_{t'<t} rho1^{t-t'-1} s~^{rho2}_{t'}] for every t.
CrossScaleReport cross_scale_check(std::span<const double> series, double rho1, double rho2);

struct UniformityScaleRow {
  double n = 0.0;
  double rho = 0.0;
  bool dyadic = false;
  double worst_value = 0.0;      // max_t of normalized s~_t (one-sided)
  std::uint64_t worst_t = 0;
  double threshold = 0.0;        // c sqrt(ln(1/Z) / n), normalized form
  double ratio = 0.0;            // worst_value / (sqrt(ln(1/Z)/n)): pass iff <= c
};

struct UniformityReport {
  double Z = 0.0;
  double c = 0.0;
  std::vector<UniformityScaleRow> scales;
  std::vector<std::vector<double>> smoothed;  // [scale][t], for CSV export
  bool pass = false;
  double worst_ratio = 0.0;  // in units of c: pass iff <= c
};

// Checks the residual stream at every dyadic scale n = 2^j in
// [40 ln(1/Z), T] plus `extra_scales` random non-dyadic scales above the
// floor.  The normalized threshold c sqrt(ln(1/Z)/n) is equivalent to the
// unnormalized c sqrt(n ln(1/Z)).
UniformityReport audit(std::span<const double> residual, double Z, int N, std::uint64_t T,
                       double c, int extra_scales = 10, std::uint64_t scale_seed = 7);

struct NoisePredictReport {
  std::vector<double> predictions;
  // max over t of [discounted error of predictions - best grid-constant
  // discounted error]; the bound allows up to c sqrt(n ln T).
  double worst_excess = 0.0;
  double bound = 0.0;
  bool pass = false;
  double grid_delta = 0.0;
};

// Predicts a real-valued signal in [-1, 1] by combining constant predictors
// z in {-1, -1+delta, ..., 1} scored with the affine payoff 1 - |b - z|,
// using a linear comparison tree at window n.  Z defaults to e^{-n/40}, the
// largest loss scale whose window floor admits n.
NoisePredictReport noise_like_predict(std::span<const double> signal, double n, double c,
                                      double Z = 0.0, double grid_delta = 1.0 / 32.0);

}  // namespace lh
