#include "lh/oco.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
}  // namespace

int FeasibleSet::dim() const {
  return shape == Shape::Box ? static_cast<int>(lo.size()) : static_cast<int>(center.size());
}

double FeasibleSet::diameter() const {
  if (shape == Shape::Ball) return 2.0 * radius;
  return norm(sub(hi, lo));
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  if (shape == Shape::Box) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
  }
  return norm(sub(x, center)) <= radius + tol;
}

Vec FeasibleSet::project(const Vec& y) const {
  for (double v : y)
    if (!std::isfinite(v)) fail("FeasibleSet::project: non-finite point");
  if (static_cast<int>(y.size()) != dim()) fail("FeasibleSet::project: dimension mismatch");
  if (shape == Shape::Box) {
    Vec r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = std::clamp(y[i], lo[i], hi[i]);
    return r;
  }
  Vec d = sub(y, center);
  double nd = norm(d);
  if (nd <= radius) return y;
  Vec r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = center[i] + d[i] * (radius / nd);
  return r;
}

FeasibleSet FeasibleSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.empty()) fail("FeasibleSet::box: bad bounds");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) fail("FeasibleSet::box: need lo < hi per coordinate");
  FeasibleSet f;
  f.shape = Shape::Box;
  f.lo = std::move(lo);
  f.hi = std::move(hi);
  return f;
}

FeasibleSet FeasibleSet::ball(Vec center, double radius) {
  if (center.empty() || !(radius > 0.0)) fail("FeasibleSet::ball: bad parameters");
  FeasibleSet f;
  f.shape = Shape::Ball;
  f.center = std::move(center);
  f.radius = radius;
  return f;
}

Vec gp_step(const FeasibleSet& F, const Vec& x, const Vec& grad, double eta) {
  if (grad.size() != x.size()) fail("gp_step: gradient dimension mismatch");
  for (double v : grad)
    if (!std::isfinite(v)) fail("gp_step: non-finite gradient");
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - eta * grad[i];
  return F.project(y);
}

double LossOracle::value(const Vec& x, const Vec& z) const {
  switch (family) {
    case LossFamily::Quadratic: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - z[i]) * (x[i] - z[i]);
      return 0.5 * s;
    }
    case LossFamily::Linear:
      return dot(z, x);
    case LossFamily::Abs: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += std::fabs(x[i] - z[i]);
      return s;
    }
  }
  return 0.0;
}

Vec LossOracle::grad(const Vec& x, const Vec& z) const {
  Vec g(x.size());
  switch (family) {
    case LossFamily::Quadratic:
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - z[i];
      break;
    case LossFamily::Linear:
      g = z;
      break;
    case LossFamily::Abs:
      for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = x[i] > z[i] ? 1.0 : (x[i] < z[i] ? -1.0 : 0.0);
      break;
  }
  return g;
}

std::string OCOScenario::to_json() const {
  nlohmann::json j;
  j["shape"] = F.shape == FeasibleSet::Shape::Box ? "box" : "ball";
  if (F.shape == FeasibleSet::Shape::Box) {
    j["lo"] = F.lo;
    j["hi"] = F.hi;
  } else {
    j["center"] = F.center;
    j["radius"] = F.radius;
  }
  j["loss"] = family == LossFamily::Quadratic ? "quadratic"
              : family == LossFamily::Linear  ? "linear"
                                              : "abs";
  j["targets"] = targets;
  j["shifts"] = shifts;
  j["grad_bound"] = grad_bound;
  j["loss_bound"] = loss_bound;
  return j.dump(2);
}

OCOScenario OCOScenario::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  OCOScenario sc;
  std::string shape = j.at("shape");
  if (shape == "box")
    sc.F = FeasibleSet::box(j.at("lo").get<Vec>(), j.at("hi").get<Vec>());
  else if (shape == "ball")
    sc.F = FeasibleSet::ball(j.at("center").get<Vec>(), j.at("radius").get<double>());
  else
    fail("OCOScenario: unknown feasible shape '" + shape + "' (box and ball are supported)");
  std::string loss = j.at("loss");
  sc.family = loss == "quadratic" ? LossFamily::Quadratic
              : loss == "linear"  ? LossFamily::Linear
              : loss == "abs"     ? LossFamily::Abs
                                  : throw std::invalid_argument("OCOScenario: unknown loss family");
  sc.targets = j.at("targets").get<std::vector<Vec>>();
  if (j.contains("shifts")) sc.shifts = j.at("shifts").get<std::vector<std::uint64_t>>();
  sc.grad_bound = j.at("grad_bound");
  sc.loss_bound = j.at("loss_bound");
  return sc;
}

OCORun run_gp(const OCOScenario& sc, const std::function<double(std::uint64_t)>& eta) {
  LossOracle oracle{sc.family};
  OCORun run;
  run.decisions.reserve(sc.targets.size());
  run.losses.reserve(sc.targets.size());
  Vec x(static_cast<std::size_t>(sc.F.dim()), 0.0);
  x = sc.F.project(x);
  KahanSum total;
  for (std::uint64_t t = 1; t <= sc.T(); ++t) {
    const Vec& z = sc.targets[static_cast<std::size_t>(t - 1)];
    double c = oracle.value(x, z);
    run.decisions.push_back(x);
    run.losses.push_back(c);
    total.add(c);
    x = gp_step(sc.F, x, oracle.grad(x, z), eta(t));
  }
  run.total_loss = total.value();
  return run;
}

Vec best_fixed_point(const OCOScenario& sc, std::uint64_t begin, std::uint64_t end) {
  if (begin < 1 || end > sc.T() || begin > end) fail("best_fixed_point: bad interval");
  auto d = static_cast<std::size_t>(sc.F.dim());
  if (sc.family == LossFamily::Quadratic) {
    // Mean target, projected; projection of the unconstrained minimizer is
    // exact for box sets and for balls.
    Vec mean(d, 0.0);
    for (std::uint64_t t = begin; t <= end; ++t)
      for (std::size_t i = 0; i < d; ++i) mean[i] += sc.targets[static_cast<std::size_t>(t - 1)][i];
    for (std::size_t i = 0; i < d; ++i) mean[i] /= static_cast<double>(end - begin + 1);
    return sc.F.project(mean);
  }
  if (sc.family == LossFamily::Linear) {
    Vec g(d, 0.0);
    for (std::uint64_t t = begin; t <= end; ++t)
      for (std::size_t i = 0; i < d; ++i) g[i] += sc.targets[static_cast<std::size_t>(t - 1)][i];
    // Minimize <g, x>: for a box pick the corner, for a ball the antipode.
    if (sc.F.shape == FeasibleSet::Shape::Box) {
      Vec x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = g[i] > 0.0 ? sc.F.lo[i] : sc.F.hi[i];
      return x;
    }
    double ng = norm(g);
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i)
      x[i] = sc.F.center[i] - (ng > 0 ? sc.F.radius * g[i] / ng : 0.0);
    return x;
  }
  // Abs: coordinate-wise median of targets, projected.
  Vec x(d, 0.0);
  std::vector<double> col(static_cast<std::size_t>(end - begin + 1));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::uint64_t t = begin; t <= end; ++t)
      col[static_cast<std::size_t>(t - begin)] = sc.targets[static_cast<std::size_t>(t - 1)][i];
    std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(col.size() / 2), col.end());
    x[i] = col[col.size() / 2];
  }
  return sc.F.project(x);
}

double static_regret(const OCOScenario& sc, const OCORun& run) {
  LossOracle oracle{sc.family};
  Vec star = best_fixed_point(sc, 1, sc.T());
  KahanSum comp;
  for (std::uint64_t t = 1; t <= sc.T(); ++t)
    comp.add(oracle.value(star, sc.targets[static_cast<std::size_t>(t - 1)]));
  return run.total_loss - comp.value();
}

AdaptiveGridRun adaptive_grid_run(const OCOScenario& sc, double Z) {
  if (!(Z > 0.0) || Z >= std::exp(-1.0) * (1.0 + 1e-12))
    fail("adaptive_grid_run: Z must be in (0, 1/e)");
  if (sc.loss_bound <= 0.0) fail("adaptive_grid_run: scenario must supply loss_bound > 0");
  std::uint64_t T = sc.T();
  if (T < 4) fail("adaptive_grid_run: need T >= 4");

  AdaptiveGridRun out;
  int J = static_cast<int>(std::floor(std::log2(static_cast<double>(T))));
  for (int j = 1; j <= J; ++j) out.etas.push_back(std::pow(2.0, -j));
  int G = static_cast<int>(out.etas.size());

  out.leaf_runs.reserve(static_cast<std::size_t>(G));
  for (int j = 0; j < G; ++j) {
    double eta = out.etas[static_cast<std::size_t>(j)];
    out.leaf_runs.push_back(run_gp(sc, [eta](std::uint64_t) { return eta; }));
  }

  // Strategy x dyadic-window grid; last (smallest-eta) strategy protected as
  // the base.
  out.tree = ComparisonTree::multiscale(G, static_cast<double>(T), Z);

  LossOracle oracle{sc.family};
  auto d = static_cast<std::size_t>(sc.F.dim());
  std::vector<double> leaf(static_cast<std::size_t>(out.tree.num_leaves()));
  KahanSum total;
  double worst_gap = -1e300;
  for (std::uint64_t t = 1; t <= T; ++t) {
    auto ti = static_cast<std::size_t>(t - 1);
    for (int i = 0; i < out.tree.num_leaves(); ++i) {
      int strat = out.tree.leaf_strategy()[static_cast<std::size_t>(i)];
      double c = out.leaf_runs[static_cast<std::size_t>(strat)].losses[ti];
      leaf[static_cast<std::size_t>(i)] = -c / sc.loss_bound;
      if (std::fabs(leaf[static_cast<std::size_t>(i)]) > 1.0)
        fail("adaptive_grid_run: loss_bound too small, normalized payoff escaped [-1, 1]");
    }
    auto res = out.tree.step(leaf);
    auto sw = out.tree.strategy_weights(res);
    Vec mix(d, 0.0);
    double mixed_loss = 0.0;
    for (int sidx = 0; sidx < G; ++sidx) {
      double w = sw[static_cast<std::size_t>(sidx)];
      const Vec& xs = out.leaf_runs[static_cast<std::size_t>(sidx)].decisions[ti];
      for (std::size_t i = 0; i < d; ++i) mix[i] += w * xs[i];
      mixed_loss += w * out.leaf_runs[static_cast<std::size_t>(sidx)].losses[ti];
    }
    double c = oracle.value(mix, sc.targets[ti]);
    worst_gap = std::max(worst_gap, c - mixed_loss);  // Jensen: expected <= 0
    out.decisions.push_back(std::move(mix));
    out.losses.push_back(c);
    total.add(c);
  }
  out.total_loss = total.value();
  out.worst_jensen_gap = worst_gap;
  return out;
}

DynamicRegretReport dynamic_regret_audit(const OCOScenario& sc, std::span<const double> losses,
                                         double Z, double k1, double k2, double k3) {
  if (losses.size() != sc.T()) fail("dynamic_regret_audit: loss length mismatch");
  std::vector<std::uint64_t> starts = sc.shifts;
  if (starts.empty() || starts.front() != 1) starts.insert(starts.begin(), 1);
  LossOracle oracle{sc.family};

  DynamicRegretReport rep;
  double diam = sc.F.diameter();
  double T = static_cast<double>(sc.T());
  KahanSum total, budget;
  Vec prev_star;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::uint64_t b = starts[s];
    std::uint64_t e = s + 1 < starts.size() ? starts[s + 1] - 1 : sc.T();
    Vec star = best_fixed_point(sc, b, e);
    KahanSum r;
    for (std::uint64_t t = b; t <= e; ++t) {
      auto ti = static_cast<std::size_t>(t - 1);
      r.add(losses[ti] - oracle.value(star, sc.targets[ti]));
    }
    rep.interval_regret.push_back(r.value());
    total.add(r.value());
    double len = static_cast<double>(e - b + 1);
    double jump = s == 0 ? diam : norm(sub(star, prev_star));
    double gamma_j = (jump + diam) / (diam * len);
    budget.add(k1 * diam * sc.grad_bound * std::sqrt(gamma_j) * len +
               k2 * std::sqrt(len * std::log(1.0 / Z)));
    prev_star = star;
  }
  rep.total_regret = total.value();
  rep.budget = budget.value() + k3 * Z * T * std::pow(std::log(T), 2.0);
  rep.pass = rep.total_regret <= rep.budget;
  return rep;
}

}  // namespace lh
