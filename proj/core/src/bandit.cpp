#include "lh/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace lh {

namespace {
[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

Bandit::Bandit(int N, double T, double Z) : cfg_{N, T, Z} {
  if (N < 1) fail("Bandit: need N >= 1 arms");
  if (!(T >= 1.0)) fail("Bandit: need T >= 1");
  double z_cap = std::pow(static_cast<double>(N) * T, -2.0);
  if (!(Z > 0.0) || Z > z_cap * (1.0 + 1e-12))
    fail("Bandit: precondition Z <= (N T)^{-2} violated (Z=" + std::to_string(Z) +
         ", cap=" + std::to_string(z_cap) + ")");
  double l = std::log(1.0 / Z);
  gamma_ = std::cbrt(static_cast<double>(N) * l / T);
  if (gamma_ > 0.5)
    fail("Bandit: derived gamma=" + std::to_string(gamma_) +
         " exceeds 0.5; (N, T, Z) are misconfigured");
  gamma_ = std::max(gamma_, 1e-6);
  n_inner_ = T * gamma_ / static_cast<double>(N);
  window_warning_ = n_inner_ < 40.0 * l;

  p_.assign(static_cast<std::size_t>(N), 1.0 / N);
  p_history_weighted_.assign(static_cast<std::size_t>(N), KahanSum{});

  // Linear tree: base leaf 0 is the average-of-arms estimate stream, leaves
  // 1..N the per-arm streams, combined at window n_inner with the |b|/n
  // discount.
  std::vector<int> improvers(static_cast<std::size_t>(N));
  std::iota(improvers.begin(), improvers.end(), 1);
  tree_ = ComparisonTree::linear(N + 1, 0, improvers, std::max(n_inner_, 1.0), Z,
                                 UpdateRule::Clipped,
                                 DiscountSchedule::pnorm(1.0, std::max(n_inner_, 1.0)),
                                 /*enforce_window_floor=*/false);
  leaf_scratch_.assign(static_cast<std::size_t>(tree_.num_leaves()), 0.0);
}

int Bandit::step(const std::function<double(int)>& reveal, SplitMix64& rng) {
  int N = cfg_.N;
  for (int i = 0; i < N; ++i) p_history_weighted_[static_cast<std::size_t>(i)].add(p_[static_cast<std::size_t>(i)]);

  int chosen = rng.categorical(p_);
  double reward = reveal(chosen);
  if (!std::isfinite(reward) || reward < 0.0 || reward > 1.0)
    fail("Bandit::step: rewards must be in [0, 1]");
  reward_.add(reward);

  // Importance-weighted estimate, scaled by gamma/N so payoffs stay in
  // [0, 1]: x_hat <= N/gamma because p_i >= gamma/N.
  double xhat = reward / p_[static_cast<std::size_t>(chosen)];
  double scaled = (gamma_ / N) * xhat;
  if (scaled > 1.0 + 1e-9) fail("Bandit::step: scaled estimate escaped [0, 1]");
  scaled = std::min(scaled, 1.0);

  std::fill(leaf_scratch_.begin(), leaf_scratch_.end(), 0.0);
  leaf_scratch_[0] = scaled / N;  // average of the N estimate streams
  leaf_scratch_[static_cast<std::size_t>(chosen) + 1] = scaled;
  auto res = tree_.step(leaf_scratch_);

  // r: the tree's play distribution; the base leaf means "play the average",
  // i.e. a uniform arm.
  std::vector<double> w = res.leaf_weights;
  double base_w = w[0];
  double psum = 0.0;
  for (int i = 0; i < N; ++i) {
    double r = w[static_cast<std::size_t>(i) + 1] + base_w / N;
    p_[static_cast<std::size_t>(i)] = (1.0 - gamma_) * r + gamma_ / N;
    psum += p_[static_cast<std::size_t>(i)];
  }
  if (std::fabs(psum - 1.0) > 1e-9) fail("Bandit::step: sampling distribution drifted");
  ++t_;
  return chosen;
}

double Bandit::expected_reward(std::span<const double> means) const {
  if (static_cast<int>(means.size()) != cfg_.N) fail("Bandit::expected_reward: means size mismatch");
  double total = 0.0;
  for (int i = 0; i < cfg_.N; ++i)
    total += p_history_weighted_[static_cast<std::size_t>(i)].value() * means[static_cast<std::size_t>(i)];
  return total;
}

std::vector<double> importance_estimate(std::span<const double> rewards,
                                        std::span<const double> p, int chosen) {
  if (rewards.size() != p.size()) fail("importance_estimate: size mismatch");
  if (chosen < 0 || chosen >= static_cast<int>(p.size()))
    fail("importance_estimate: chosen arm out of range");
  std::vector<double> xhat(rewards.size(), 0.0);
  xhat[static_cast<std::size_t>(chosen)] =
      rewards[static_cast<std::size_t>(chosen)] / p[static_cast<std::size_t>(chosen)];
  return xhat;
}

BanditRunStats run_bandit_bernoulli(int N, double T, double Z, std::span<const double> means,
                                    std::uint64_t seed) {
  if (static_cast<int>(means.size()) != N) fail("run_bandit_bernoulli: means size mismatch");
  Bandit bandit(N, T, Z);
  SplitMix64 rng = SplitMix64::substream(seed, 0);
  SplitMix64 arm_rng = SplitMix64::substream(seed, 1);
  auto steps = static_cast<std::uint64_t>(T);
  for (std::uint64_t t = 0; t < steps; ++t) {
    bandit.step(
        [&](int arm) { return arm_rng.bernoulli(means[static_cast<std::size_t>(arm)]) ? 1.0 : 0.0; },
        rng);
  }
  BanditRunStats st;
  double best = *std::max_element(means.begin(), means.end());
  double avg = std::accumulate(means.begin(), means.end(), 0.0) / N;
  double expected = bandit.expected_reward(means);
  st.pseudo_regret = best * T - expected;
  st.pseudo_loss_vs_avg = expected - avg * T;
  st.realized_reward = bandit.cumulative_reward();
  return st;
}

BanditScalingReport bandit_regret_report(int N, std::span<const double> horizons,
                                         std::span<const double> means, int seeds,
                                         std::uint64_t master_seed, double fixed_Z,
                                         int threads) {
  if (horizons.size() < 3) fail("bandit_regret_report: need >= 3 horizons");
  double lo = *std::min_element(horizons.begin(), horizons.end());
  double hi = *std::max_element(horizons.begin(), horizons.end());
  if (hi < 10.0 * lo) fail("bandit_regret_report: horizons must span at least one decade");
  if (seeds < 100) fail("bandit_regret_report: need >= 100 seeds per horizon");

  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(threads, 1);

  BanditScalingReport rep;
  for (double T : horizons) {
    double Z = fixed_Z > 0.0 ? fixed_Z : std::pow(static_cast<double>(N) * T, -2.0);
    std::vector<double> regret(static_cast<std::size_t>(seeds));
    std::vector<double> loss(static_cast<std::size_t>(seeds));
    {
      Bandit probe(N, T, Z);
      rep.window_floor_warning = rep.window_floor_warning || probe.window_floor_warning();
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (static_cast<std::size_t>(seeds) + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      std::size_t b = static_cast<std::size_t>(w) * chunk;
      std::size_t e = std::min(b + chunk, static_cast<std::size_t>(seeds));
      if (b >= e) break;
      pool.emplace_back([&, b, e]() {
        for (std::size_t s = b; s < e; ++s) {
          auto st = run_bandit_bernoulli(N, T, Z, means,
                                         SplitMix64::substream(master_seed, s).next_u64());
          regret[s] = st.pseudo_regret;
          loss[s] = st.pseudo_loss_vs_avg;
        }
      });
    }
    for (auto& th : pool) th.join();
    double mr = std::accumulate(regret.begin(), regret.end(), 0.0) / seeds;
    double ml = std::accumulate(loss.begin(), loss.end(), 0.0) / seeds;
    rep.horizons.push_back(T);
    rep.mean_regret.push_back(mr);
    rep.mean_loss_vs_avg.push_back(ml);
  }

  // Least-squares slope of ln(regret) on ln(T).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  auto K = static_cast<double>(rep.horizons.size());
  for (std::size_t i = 0; i < rep.horizons.size(); ++i) {
    double x = std::log(rep.horizons[i]);
    double y = std::log(std::max(rep.mean_regret[i], 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (K * sxy - sx * sy) / (K * sxx - sx * sx);
  return rep;
}

}  // namespace lh
