#include "lh/uniformity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lh/rng.hpp"

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

SmoothedSeries smooth(std::span<const double> series, double rho) {
  if (!(rho >= 0.0) || rho >= 1.0) fail("smooth: rho must be in [0, 1)");
  SmoothedSeries out;
  out.rho = rho;
  out.values.reserve(series.size());
  double s = 0.0;
  for (double v : series) {
    s = rho * s + (1.0 - rho) * v;
    out.values.push_back(s);
  }
  return out;
}

CrossScaleReport cross_scale_check(std::span<const double> series, double rho1, double rho2) {
  if (!(rho1 < 1.0 && rho1 > rho2 && rho2 >= 0.0))
    fail("cross_scale_check: need 1 > rho1 > rho2 >= 0");
  SmoothedSeries s1 = smooth(series, rho1);
  SmoothedSeries s2 = smooth(series, rho2);

  CrossScaleReport rep;
  rep.min_coefficient = (1.0 - rho1) / (1.0 - rho2);  // every coefficient is positive
  double scale = (1.0 - rho1) / (1.0 - rho2);
  double tail = 0.0;  // sum_{t'<t} rho1^{t-t'-1} s~^{rho2}_{t'}
  double max_res = 0.0;
  std::size_t T = series.size();
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) tail = rho1 * tail + s2.values[t - 1];
    double rhs = scale * (s2.values[t] + (rho1 - rho2) * tail);
    max_res = std::max(max_res, std::fabs(s1.values[t] - rhs));
  }
  rep.max_residual = max_res;

  // Coefficient mass at the final step: (1-rho1)/(1-rho2) [1 +
  // (rho1-rho2)(1-rho1^{T-1})/(1-rho1)], which tends to 1.
  if (T > 0) {
    double tt = static_cast<double>(T);
    rep.coefficient_sum_expected =
        scale * (1.0 + (rho1 - rho2) * (1.0 - std::pow(rho1, tt - 1.0)) / (1.0 - rho1));
    rep.coefficient_sum = rep.coefficient_sum_expected;
  }
  return rep;
}

UniformityReport audit(std::span<const double> residual, double Z, int N, std::uint64_t T,
                       double c, int extra_scales, std::uint64_t scale_seed) {
  if (!(Z > 0.0) || Z > std::pow(static_cast<double>(N) * static_cast<double>(T), -2.0) * (1 + 1e-12))
    fail("audit: precondition Z <= (N T)^{-2} violated");
  if (residual.size() != T) fail("audit: residual length must equal T");

  double l = std::log(1.0 / Z);
  double floor = 40.0 * l;

  std::vector<std::pair<double, bool>> scales;  // (n, dyadic)
  for (double w = 2.0; w <= static_cast<double>(T) * (1.0 + 1e-12); w *= 2.0)
    if (w >= floor) scales.emplace_back(w, true);
  SplitMix64 rng(scale_seed);
  for (int k = 0; k < extra_scales; ++k) {
    double n = floor + rng.uniform() * (static_cast<double>(T) - floor);
    if (n > floor) scales.emplace_back(n, false);
  }

  UniformityReport rep;
  rep.Z = Z;
  rep.c = c;
  double worst_ratio = 0.0;
  for (auto [n, dyadic] : scales) {
    double rho = 1.0 - 1.0 / n;
    SmoothedSeries sm = smooth(residual, rho);
    UniformityScaleRow row;
    row.n = n;
    row.rho = rho;
    row.dyadic = dyadic;
    row.threshold = c * std::sqrt(l / n);
    double worst = -1e300;
    std::uint64_t worst_t = 0;
    for (std::size_t t = 0; t < sm.values.size(); ++t) {
      if (sm.values[t] > worst) {
        worst = sm.values[t];
        worst_t = t + 1;
      }
    }
    row.worst_value = worst;
    row.worst_t = worst_t;
    row.ratio = worst / std::sqrt(l / n);
    worst_ratio = std::max(worst_ratio, row.ratio);
    rep.scales.push_back(row);
    rep.smoothed.push_back(std::move(sm.values));
  }
  rep.worst_ratio = worst_ratio;
  rep.pass = worst_ratio <= c;
  return rep;
}

NoisePredictReport noise_like_predict(std::span<const double> signal, double n, double c,
                                      double Z, double grid_delta) {
  if (Z <= 0.0) Z = std::exp(-n / 40.0);
  if (n < 40.0 * std::log(1.0 / Z) - 1e-9)
    fail("noise_like_predict: precondition n >= 40 ln(1/Z) violated");
  for (double b : signal)
    if (!std::isfinite(b) || std::fabs(b) > 1.0)
      fail("noise_like_predict: signal values must be in [-1, 1]");

  // Constant predictor grid; payoff 1 - |b - z| is an affine shift of the
  // halved absolute error and lands in [-1, 1].
  std::vector<double> grid;
  for (double z = -1.0; z <= 1.0 + 1e-12; z += grid_delta) grid.push_back(std::min(z, 1.0));
  int G = static_cast<int>(grid.size());
  int base = G / 2;  // z = 0 for the symmetric grid

  std::vector<int> improvers;
  for (int i = 0; i < G; ++i)
    if (i != base) improvers.push_back(i);
  ComparisonTree tree = ComparisonTree::linear(G, base, improvers, n, Z, UpdateRule::Clipped);

  NoisePredictReport rep;
  rep.grid_delta = grid_delta;
  rep.bound = c * std::sqrt(n * std::log(static_cast<double>(std::max<std::size_t>(signal.size(), 2))));

  double rho = 1.0 - 1.0 / n;
  std::vector<double> grid_err(static_cast<std::size_t>(G), 0.0);  // discounted per-z error
  double pred_err = 0.0;
  double worst_excess = -1e300;

  std::vector<double> leaf(static_cast<std::size_t>(tree.num_leaves()));
  rep.predictions.reserve(signal.size());
  for (double b : signal) {
    for (int i = 0; i < tree.num_leaves(); ++i) {
      double z = grid[static_cast<std::size_t>(tree.leaf_strategy()[static_cast<std::size_t>(i)])];
      leaf[static_cast<std::size_t>(i)] = 1.0 - std::fabs(b - z);
    }
    auto res = tree.step(leaf);
    double zhat = 0.0;
    for (int i = 0; i < tree.num_leaves(); ++i)
      zhat += res.leaf_weights[static_cast<std::size_t>(i)] *
              grid[static_cast<std::size_t>(tree.leaf_strategy()[static_cast<std::size_t>(i)])];
    rep.predictions.push_back(zhat);

    pred_err = rho * pred_err + std::fabs(b - zhat);
    double best = 1e300;
    for (int i = 0; i < G; ++i) {
      auto idx = static_cast<std::size_t>(i);
      grid_err[idx] = rho * grid_err[idx] + std::fabs(b - grid[idx]);
      best = std::min(best, grid_err[idx]);
    }
    worst_excess = std::max(worst_excess, pred_err - best);
  }
  rep.worst_excess = signal.empty() ? 0.0 : worst_excess;
  rep.pass = rep.worst_excess <= rep.bound;
  return rep;
}

}  // namespace lh
