#include "lh/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lh {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double ConfidenceParams::U() const { return 2.0 * L * std::sqrt(log_inv_z()); }

double ConfidenceParams::saturation() const {
  return variant == GVariant::TransactionRamp ? knee() + U() : U();
}

ConfidenceParams ConfidenceParams::step_exp(double Z, double n, double L) {
  if (!(Z > 0.0)) fail("ConfidenceParams: Z must be > 0 (use step_exp_log for extreme scales)");
  ConfidenceParams p;
  p.variant = GVariant::StepExp;
  p.Z = Z;
  p.neg_log_z = -std::log(Z);
  p.n = n;
  p.L = L > 0.0 ? L : std::sqrt(n);
  return p;
}

ConfidenceParams ConfidenceParams::ramp_exp(double Z, double n, double L) {
  ConfidenceParams p = step_exp(Z, n, L);
  p.variant = GVariant::RampExp;
  return p;
}

ConfidenceParams ConfidenceParams::step_exp_log(double log_inv_z, double n, double L) {
  ConfidenceParams p;
  p.variant = GVariant::StepExp;
  p.neg_log_z = log_inv_z;
  p.Z = std::exp(-log_inv_z);  // may underflow; neg_log_z stays authoritative
  p.n = n;
  p.L = L > 0.0 ? L : std::sqrt(n);
  return p;
}

ConfidenceParams ConfidenceParams::ramp_exp_log(double log_inv_z, double n, double L) {
  ConfidenceParams p = step_exp_log(log_inv_z, n, L);
  p.variant = GVariant::RampExp;
  return p;
}

ConfidenceParams ConfidenceParams::transaction_ramp(double eps, double horizon, double Z,
                                                    double n) {
  if (!(Z > 0.0)) fail("ConfidenceParams: Z must be > 0");
  ConfidenceParams p;
  p.variant = GVariant::TransactionRamp;
  p.Z = Z;
  p.neg_log_z = -std::log(Z);
  p.eps = eps;
  p.horizon = horizon;
  p.n = n > 0.0 ? n : horizon;
  p.L = 2.0 * std::sqrt(horizon);
  return p;
}

void ConfidenceParams::validate() const {
  if (!finite(neg_log_z) || neg_log_z < 1.0 - 1e-12)
    fail("ConfidenceParams: Z must be in (0, e^{-1}] (ln(1/Z) >= 1), got ln(1/Z)=" +
         std::to_string(neg_log_z));
  if (!finite(L) || L <= 0.0) fail("ConfidenceParams: L must be > 0");
  if (!finite(n) || n < 1.0) fail("ConfidenceParams: window n must be >= 1");
  double floor = 40.0 * log_inv_z();
  if (n < floor - 1e-9)
    fail("ConfidenceParams: window floor n >= 40 ln(1/Z) violated (n=" + std::to_string(n) +
         ", 40 ln(1/Z)=" + std::to_string(floor) + ")");
  if (L * L < n - 1e-9)
    fail("ConfidenceParams: precondition 1/n >= 1/L^2 violated (need L^2 >= n)");
  if (variant == GVariant::TransactionRamp) {
    if (!(eps > 0.0) || !finite(eps)) fail("ConfidenceParams: TransactionRamp eps must be > 0");
    if (!(horizon >= 1.0)) fail("ConfidenceParams: TransactionRamp horizon must be >= 1");
  }
}

ConfidenceParams derive_params(double T, double epsilon) {
  if (!(T >= 1.0) || !finite(T)) fail("derive_params: T must be >= 1");
  if (!finite(epsilon) || epsilon < 1.0 / std::sqrt(T))
    fail("derive_params: precondition epsilon >= 1/sqrt(T) violated (epsilon=" +
         std::to_string(epsilon) + ", 1/sqrt(T)=" + std::to_string(1.0 / std::sqrt(T)) + ")");
  ConfidenceParams p = ConfidenceParams::ramp_exp(std::exp(-epsilon * epsilon * T), T, std::sqrt(T));
  p.validate();
  return p;
}

double eval_g(const ConfidenceParams& p, double x) {
  if (!finite(x)) fail("eval_g: non-finite deviation");
  const double l = p.log_inv_z();
  switch (p.variant) {
    case GVariant::StepExp: {
      if (x == 0.0) return 0.0;  // no bet at zero deviation
      double e = -l + (x / (2.0 * p.L)) * (x / (2.0 * p.L));
      if (e >= 0.0) return x > 0.0 ? 1.0 : -1.0;
      double m = std::exp(e);
      return x > 0.0 ? m : -m;
    }
    case GVariant::RampExp: {
      double ax = std::fabs(x);
      if (ax <= p.L) return std::exp(0.25) * p.Z * x / p.L;
      double e = -l + (x / (2.0 * p.L)) * (x / (2.0 * p.L));
      if (e >= 0.0) return x > 0.0 ? 1.0 : -1.0;
      double m = std::exp(e);
      return x > 0.0 ? m : -m;
    }
    case GVariant::TransactionRamp: {
      double k = p.knee();
      if (x < k) return std::clamp(p.Z * x / k, -1.0, 1.0);
      double u = (x - k) / (2.0 * p.L);
      double e = -l + u * u;
      if (e >= 0.0) return 1.0;
      return std::exp(e);
    }
  }
  return 0.0;
}

double eval_h(const ConfidenceParams& p, double x) {
  if (!finite(x)) fail("eval_h: non-finite deviation");
  if (p.variant == GVariant::TransactionRamp) {
    double k = p.knee();
    if (x < k) return 1.0;
    if (x < k + p.U()) return 0.5;
    return 0.0;
  }
  return std::fabs(x) < p.U() ? 1.0 : 0.0;
}

namespace {

// Branch value of g for quadrature and derivative work: at interior branch
// points takes the limit from the requested side (side > 0: from the right).
double g_branch(const ConfidenceParams& p, double s, int side) {
  if (p.variant == GVariant::StepExp && s == 0.0)
    return side >= 0 ? p.Z : -p.Z;
  return eval_g(p, s);
}

double g_prime_one_side(const ConfidenceParams& p, double s, bool from_right) {
  const double l = p.log_inv_z();
  const double U = p.U();
  auto exp_branch_deriv = [&](double v) {
    // d/dv exp(ln Z + (v/2L)^2) = (v / 2L^2) exp(...)
    double e = -l + (v / (2.0 * p.L)) * (v / (2.0 * p.L));
    return (std::fabs(v) / (2.0 * p.L * p.L)) * std::exp(std::min(e, 0.0));
  };
  switch (p.variant) {
    case GVariant::StepExp: {
      double a = std::fabs(s);
      if (a > U) return 0.0;
      if (a == U) {
        bool inside = (s > 0.0) ? !from_right : from_right;
        return inside ? (U / (2.0 * p.L * p.L)) : 0.0;
      }
      return exp_branch_deriv(s);
    }
    case GVariant::RampExp: {
      double a = std::fabs(s);
      double ramp_slope = std::exp(0.25) * p.Z / p.L;
      if (a > U) return 0.0;
      if (a == U) {
        bool inside = (s > 0.0) ? !from_right : from_right;
        return inside ? (U / (2.0 * p.L * p.L)) : 0.0;
      }
      if (a < p.L) return ramp_slope;
      if (a == p.L) {
        bool toward_ramp = (s > 0.0) ? !from_right : from_right;
        return toward_ramp ? ramp_slope : exp_branch_deriv(s);
      }
      return exp_branch_deriv(s);
    }
    case GVariant::TransactionRamp: {
      double k = p.knee();
      double clamp_at = -k / p.Z;  // linear branch reaches -1 here
      if (s < clamp_at) return 0.0;
      if (s == clamp_at) return from_right ? p.Z / k : 0.0;
      if (s < k) return p.Z / k;
      if (s == k) return from_right ? 0.0 + (0.0 / (2.0 * p.L * p.L)) * p.Z : p.Z / k;
      double top = k + U;
      if (s > top) return 0.0;
      double v = s - k;
      double e = -l + (v / (2.0 * p.L)) * (v / (2.0 * p.L));
      if (s == top && !from_right) return (U / (2.0 * p.L * p.L));
      if (s == top && from_right) return 0.0;
      return (v / (2.0 * p.L * p.L)) * std::exp(std::min(e, 0.0));
    }
  }
  return 0.0;
}

}  // namespace

double eval_g_prime(const ConfidenceParams& p, double x, int side) {
  if (!finite(x)) fail("eval_g_prime: non-finite deviation");
  if (side < 0) return g_prime_one_side(p, x, false);
  if (side > 0) return g_prime_one_side(p, x, true);
  return std::max(g_prime_one_side(p, x, false), g_prime_one_side(p, x, true));
}

namespace {

// Branch points of g (and g') in increasing order, restricted to (lo, hi).
std::vector<double> branch_points(const ConfidenceParams& p, double lo, double hi) {
  std::vector<double> pts;
  double U = p.U();
  if (p.variant == GVariant::TransactionRamp) {
    pts = {-p.knee() / p.Z, p.knee(), p.knee() + U};
  } else if (p.variant == GVariant::RampExp) {
    pts = {-U, -p.L, 0.0, p.L, U};
  } else {
    pts = {-U, 0.0, U};
  }
  std::vector<double> out;
  for (double b : pts)
    if (b > lo && b < hi) out.push_back(b);
  std::sort(out.begin(), out.end());
  return out;
}

double simpson_estimate(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const ConfidenceParams& p, int side, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = g_branch(p, lm, side), frm = g_branch(p, rm, side);
  double left = simpson_estimate(fa, flm, fm, a, m);
  double right = simpson_estimate(fm, frm, fb, m, b);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(p, side, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(p, side, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Integral of g over the smooth piece [a, b] (no branch point inside).
double quad_piece(const ConfidenceParams& p, double a, double b, double tol) {
  if (a == b) return 0.0;
  int side = b > a ? 1 : -1;  // take branch limits consistent with sweep direction
  double fa = g_branch(p, a, side);
  double fb = g_branch(p, b, -side);
  double fm = g_branch(p, 0.5 * (a + b), 0);
  double whole = simpson_estimate(fa, fm, fb, a, b);
  return adaptive_simpson(p, 0, a, b, fa, fm, fb, whole, tol, 48);
}

// Signed primitive int_0^x g(s) ds with exact linear tails beyond saturation.
double signed_primitive(const ConfidenceParams& p, double x, double tol) {
  if (x == 0.0) return 0.0;
  double sat_hi = p.saturation();
  double sat_lo;  // below this point g is identically -1
  if (p.variant == GVariant::TransactionRamp)
    sat_lo = -p.knee() / p.Z;
  else
    sat_lo = -sat_hi;

  double core_lo = std::max(x, sat_lo);
  double core_hi = std::min(x, sat_hi);
  double tail = 0.0;
  if (x > sat_hi) tail = (x - sat_hi) * 1.0;
  if (x < sat_lo) tail = (x - sat_lo) * (-1.0);  // integrating -1 leftward adds positively

  double a = 0.0, b = x > 0.0 ? core_hi : core_lo;
  if (x > 0.0 && b <= 0.0) return tail;
  if (x < 0.0 && b >= 0.0) return tail;

  double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> cuts = branch_points(p, lo, hi);
  cuts.insert(cuts.begin(), lo);
  cuts.push_back(hi);
  double total = 0.0;
  double piece_tol = tol / static_cast<double>(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += quad_piece(p, cuts[i], cuts[i + 1], piece_tol);
  if (b < a) total = -total;
  return total + tail;
}

}  // namespace

double potential(const ConfidenceParams& p, double x) {
  if (!finite(x)) fail("potential: non-finite deviation");
  return std::fabs(signed_primitive(p, x, 1e-12));
}

PotentialTable::PotentialTable(const ConfidenceParams& p, int knots) : params_(p) {
  span_ = p.saturation();
  knot_phi_.assign(static_cast<std::size_t>(knots) + 1, 0.0);
  double h = span_ / knots;
  double acc = 0.0;
  double prev = 0.0;
  for (int i = 1; i <= knots; ++i) {
    double xi = i * h;
    double lo = prev, hi = xi;
    std::vector<double> cuts = branch_points(p, lo, hi);
    cuts.insert(cuts.begin(), lo);
    cuts.push_back(hi);
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
      acc += quad_piece(p, cuts[j], cuts[j + 1], 1e-13);
    knot_phi_[static_cast<std::size_t>(i)] = acc;
    prev = xi;
  }
  phi_span_ = acc;
}

double PotentialTable::operator()(double x) const {
  if (!finite(x)) fail("PotentialTable: non-finite deviation");
  const ConfidenceParams& p = params_;
  if (x < 0.0) {
    if (p.variant != GVariant::TransactionRamp) return (*this)(-x);  // odd branches
    // Negative side of TransactionRamp is linear then clamped: closed form.
    double clamp_at = p.knee() / p.Z;
    double ax = -x;
    if (ax <= clamp_at) return p.Z * ax * ax / (2.0 * p.knee());
    return p.Z * clamp_at * clamp_at / (2.0 * p.knee()) + (ax - clamp_at);
  }
  if (x >= span_) return phi_span_ + (x - span_);
  double h = span_ / static_cast<double>(knot_phi_.size() - 1);
  auto k = static_cast<std::size_t>(x / h);
  if (k >= knot_phi_.size() - 1) k = knot_phi_.size() - 2;
  double x0 = static_cast<double>(k) * h;
  double local = 0.0;
  std::vector<double> cuts = branch_points(p, x0, x);
  cuts.insert(cuts.begin(), x0);
  cuts.push_back(x);
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    local += quad_piece(p, cuts[j], cuts[j + 1], 1e-13);
  return std::fabs(knot_phi_[k] + local);
}

namespace {

// Step family used inside the drift check.  The band is widened from the
// saturation point to (sat + delta)/rho: past that point the inner interval
// [rho x - delta, rho x + delta] lies entirely in the region where g' = 0,
// which is the form the potential argument actually needs.
double drift_h(const ConfidenceParams& p, double x, double delta) {
  double rho = p.rho();
  if (p.variant == GVariant::TransactionRamp) {
    double k = p.knee();
    if (x < k) return 1.0;
    if (x < (k + p.U() + delta) / rho) return 0.5;
    return 0.0;
  }
  return std::fabs(x) < (p.U() + delta) / rho ? 1.0 : 0.0;
}

}  // namespace

DriftReport check_drift_condition(const ConfidenceParams& p, double z_prime, double delta,
                                  double grid_step) {
  if (!(delta > 0.0) || delta > 1.0) fail("check_drift_condition: Delta must be in (0, 1]");
  if (!(grid_step > 0.0) || grid_step > 1e-2)
    fail("check_drift_condition: grid_step must be <= 1e-2");

  DriftReport rep;
  rep.z_prime = z_prime;
  rep.delta = delta;
  double sat = p.saturation();
  rep.x_lo = -(sat + 2.0);
  rep.x_hi = sat + 2.0;
  rep.step = grid_step;
  rep.count = static_cast<std::int64_t>(std::floor((rep.x_hi - rep.x_lo) / grid_step)) + 1;

  const double rho = p.rho();
  const double rho_bar = p.rho_bar();

  // Lattice of |g'| over the widest range s can take, on the same pitch as
  // the scan so inner maxima reuse precomputed values.
  double lat_lo = rep.x_lo - delta - grid_step;
  double lat_hi = rep.x_hi + delta + grid_step;
  auto lat_count = static_cast<std::int64_t>(std::ceil((lat_hi - lat_lo) / grid_step)) + 1;
  std::vector<double> gp_lat(static_cast<std::size_t>(lat_count));
  for (std::int64_t i = 0; i < lat_count; ++i)
    gp_lat[static_cast<std::size_t>(i)] = eval_g_prime(p, lat_lo + grid_step * i, 0);

  std::vector<double> branch = branch_points(p, lat_lo, lat_hi);

  double worst = -std::numeric_limits<double>::infinity();
  double worst_x = rep.x_lo;

  // >= 100 interior points from the lattice.
  auto span_idx = static_cast<std::int64_t>(std::floor(2.0 * delta / grid_step));
  std::int64_t stride = std::max<std::int64_t>(1, span_idx / 100);

  for (std::int64_t i = 0; i < rep.count; ++i) {
    double x = rep.x_lo + grid_step * i;
    double a = rho * x - delta;
    double b = rho * x + delta;

    double inner = 0.0;
    auto consider = [&](double s, double gp) {
      double d = s - x;
      double v = gp * d * d * 0.5;
      if (v > inner) inner = v;
    };
    // Exact endpoints (both one-sided limits).
    consider(a, eval_g_prime(p, a, 0));
    consider(b, eval_g_prime(p, b, 0));
    // Lattice interior points.
    auto j0 = static_cast<std::int64_t>(std::ceil((a - lat_lo) / grid_step));
    auto j1 = static_cast<std::int64_t>(std::floor((b - lat_lo) / grid_step));
    for (std::int64_t j = j0; j <= j1; j += stride)
      consider(lat_lo + grid_step * j, gp_lat[static_cast<std::size_t>(j)]);
    // Branch points of g' inside the interval, one-sided limits.
    for (double bp : branch)
      if (bp > a && bp < b) consider(bp, eval_g_prime(p, bp, 0));

    double lhs = inner;
    double rhs = rho_bar * x * eval_g(p, x) * drift_h(p, x, delta) + z_prime;
    double violation = lhs - rhs;
    if (violation > worst) {
      worst = violation;
      worst_x = x;
    }
  }

  rep.max_violation = worst;
  rep.worst_x = worst_x;
  return rep;
}

}  // namespace lh
