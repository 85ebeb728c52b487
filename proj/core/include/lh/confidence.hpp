// Confidence function family g(x), step family h(x), the potential
// Phi(x) = |integral of g from 0 to x|, parameter derivation, and a numerical
// checker for the per-step drift condition that makes Phi a valid potential.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lh {

enum class GVariant {
  StepExp,          // +-exp(ln Z + (x/2L)^2) inside [-U, U], +-1 beyond, jump at 0
  RampExp,          // linear ramp e^{1/4} Z x / L on [-L, L], exponential beyond
  TransactionRamp,  // linear up to the knee eps*T, exponential band of width U after it
};

// Parameters defining g and h.  U is always derived as 2 L sqrt(ln(1/Z)),
// never stored.  The window length n fixes rho = 1 - 1/n.
struct ConfidenceParams {
  GVariant variant = GVariant::RampExp;
  double Z = 0.0;          // per-step loss scale, in (0, 1/e]; may underflow to 0
  double neg_log_z = 0.0;  // ln(1/Z); authoritative so ln(1/Z) up to 1e4 works
  double L = 0.0;          // deviation scale, > 0
  double n = 0.0;          // window length, >= 1

  // TransactionRamp only: knee sits at eps * horizon.
  double eps = 0.0;
  double horizon = 0.0;

  double log_inv_z() const { return neg_log_z; }
  double U() const;        // 2 L sqrt(ln(1/Z))
  double rho() const { return 1.0 - 1.0 / n; }
  double rho_bar() const { return 1.0 / n; }
  double knee() const { return eps * horizon; }
  // Smallest x with g(x) = 1.
  double saturation() const;

  static ConfidenceParams step_exp(double Z, double n, double L = 0.0);
  static ConfidenceParams ramp_exp(double Z, double n, double L = 0.0);
  // Loss scale given as ln(1/Z), for scales past double underflow.
  static ConfidenceParams step_exp_log(double log_inv_z, double n, double L = 0.0);
  static ConfidenceParams ramp_exp_log(double log_inv_z, double n, double L = 0.0);
  static ConfidenceParams transaction_ramp(double eps, double horizon, double Z,
                                           double n = 0.0);

  // Throws std::invalid_argument naming the violated precondition.
  void validate() const;
};

// Window-length parameters for a horizon-T run with per-step regret rate
// epsilon: Z = exp(-eps^2 T), L = sqrt(T), n = T, so U = 2 eps T.
// Requires eps >= 1/sqrt(T); the derived params must satisfy n >= 40 ln(1/Z).
ConfidenceParams derive_params(double T, double epsilon);

// g(x).  Total on finite reals; rejects non-finite x.  Evaluated in log space
// so ln(1/Z) up to 1e4 cannot overflow.  StepExp returns 0 at x = 0.
double eval_g(const ConfidenceParams& p, double x);

// h(x): 1 below the active band, 0 beyond it (1/2 on the middle band for
// TransactionRamp).
double eval_h(const ConfidenceParams& p, double x);

// One-sided branch derivative of g.  side < 0 takes the limit from the left,
// side > 0 from the right, side == 0 the larger magnitude of the two.
double eval_g_prime(const ConfidenceParams& p, double x, int side = 0);

// Phi(x) = |int_0^x g|, adaptive Simpson with abs tol 1e-12 on the
// non-saturated band, exact linear extension beyond it.
double potential(const ConfidenceParams& p, double x);

// Memoized Phi for per-step trace recording: cumulative quadrature at interior
// knots, local refinement per query.  Same 1e-12 band tolerance as potential().
class PotentialTable {
 public:
  explicit PotentialTable(const ConfidenceParams& p, int knots = 4096);
  double operator()(double x) const;
  const ConfidenceParams& params() const { return params_; }

 private:
  ConfidenceParams params_;
  double span_ = 0.0;  // knots cover [0, span_]
  double phi_span_ = 0.0;
  std::vector<double> knot_phi_;
};

struct DriftReport {
  // Scan grid: x_lo + i * step for i in [0, count).
  double x_lo = 0.0;
  double x_hi = 0.0;
  double step = 0.0;
  std::int64_t count = 0;

  double max_violation = 0.0;  // positive = condition violated somewhere
  double worst_x = 0.0;
  double z_prime = 0.0;
  double delta = 0.0;

  bool ok() const { return max_violation <= 0.0; }
  double grid_point(std::int64_t i) const { return x_lo + step * static_cast<double>(i); }
};

// Scans x over [-sat-2, sat+2] and reports the worst value of
//
//   max_{s in [rho x - Delta, rho x + Delta]} |g'(s)| (s - x)^2 / 2
//     - rho_bar * x * g(x) * h_guard(x) - Z'
//
// where h_guard is the step family with its band widened to (U + Delta)/rho,
// the point past which the inner interval clears the region where g' != 0.
// The inner maximum is taken over >= 100 interior lattice points, both exact
// endpoints, and the one-sided limits at any branch point of g' inside the
// interval.
DriftReport check_drift_condition(const ConfidenceParams& p, double z_prime,
                                  double delta, double grid_step);

}  // namespace lh
