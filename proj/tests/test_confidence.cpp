#include <cmath>
#include <vector>

#include "doctest.h"
#include "lh/confidence.hpp"
#include "lh/rng.hpp"

using namespace lh;

namespace {

// Independent high-resolution trapezoid oracle for Phi over [0, x], x >= 0.
// Uses branch values directly (right-limit at 0), step 1e-5.
double trapezoid_phi(const ConfidenceParams& p, double x, double step = 1e-5) {
  double sat = p.saturation();
  double hi = std::min(x, sat);
  auto n = static_cast<std::size_t>(std::ceil(hi / step));
  double acc = 0.0;
  double prev = p.variant == GVariant::StepExp ? p.Z : eval_g(p, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double xi = std::min(hi, static_cast<double>(i) * step);
    double gi = eval_g(p, xi);
    acc += 0.5 * (prev + gi) * (xi - std::min(hi, static_cast<double>(i - 1) * step));
    prev = gi;
  }
  if (x > sat) acc += x - sat;
  return acc;
}

}  // namespace

TEST_CASE("derive_params substitutes the horizon formulas") {
  ConfidenceParams p = derive_params(10000, 0.1);
  CHECK(p.Z == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));
  CHECK(p.L == doctest::Approx(100.0));
  CHECK(p.n == doctest::Approx(10000.0));
  CHECK(p.U() == doctest::Approx(2000.0).epsilon(1e-12));
  // U = 2 L sqrt(ln 1/Z) recomputed against the stored fields.
  CHECK(p.U() == doctest::Approx(2.0 * p.L * std::sqrt(p.log_inv_z())).epsilon(1e-12));

  ConfidenceParams q = derive_params(100, 0.1);
  CHECK(q.Z == doctest::Approx(std::exp(-1.0)));
  CHECK(q.U() == doctest::Approx(20.0));

  CHECK_THROWS_WITH_AS(derive_params(100, 0.05),
                       doctest::Contains("epsilon >= 1/sqrt(T)"), std::invalid_argument);
}

TEST_CASE("derive_params names the window floor when it fails") {
  // eps > 1/sqrt(40) makes n < 40 ln(1/Z).
  CHECK_THROWS_WITH_AS(derive_params(10000, 0.2), doctest::Contains("40 ln(1/Z)"),
                       std::invalid_argument);
}

TEST_CASE("eval_g branch values") {
  ConfidenceParams se = ConfidenceParams::step_exp(std::exp(-4.0), 400, 20.0);
  double U = se.U();

  CHECK(eval_g(se, 0.0) == 0.0);  // jump convention: no bet at zero deviation
  CHECK(eval_g(se, 1e-9) == doctest::Approx(se.Z).epsilon(1e-6));
  CHECK(eval_g(se, U) == doctest::Approx(1.0));
  CHECK(eval_g(se, U + 3.0) == 1.0);
  CHECK(eval_g(se, -U - 3.0) == -1.0);

  ConfidenceParams re = ConfidenceParams::ramp_exp(std::exp(-4.0), 400, 20.0);
  // Continuity of the ramp at x = L pins the e^{1/4} coefficient.
  double left = eval_g(re, re.L - 1e-9);
  double right = eval_g(re, re.L + 1e-9);
  CHECK(left == doctest::Approx(re.Z * std::exp(0.25)).epsilon(1e-6));
  CHECK(std::fabs(left - right) < 1e-8);

  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 1000, 1e-2);
  CHECK(eval_g(tr, tr.knee()) == doctest::Approx(tr.Z).epsilon(1e-9));
  CHECK(eval_g(tr, tr.knee() + tr.U() + 1.0) == 1.0);
  CHECK(eval_g(tr, -1e9) == -1.0);  // clamped linear branch

  CHECK_THROWS_AS(eval_g(se, std::nan("")), std::invalid_argument);
}

TEST_CASE("eval_g works in log space for extreme Z") {
  // ln(1/Z) = 1e4 must not overflow anything, even past double underflow.
  ConfidenceParams p = ConfidenceParams::step_exp_log(1e4, 8e5, 1000.0);
  CHECK(eval_g(p, 10.0) == 0.0);  // underflows to zero, harmless
  CHECK(eval_g(p, p.U()) == doctest::Approx(1.0));
  CHECK(std::isfinite(eval_g(p, p.U() * 0.999)));
}

TEST_CASE("eval_h step values") {
  ConfidenceParams se = ConfidenceParams::step_exp(std::exp(-4.0), 400, 20.0);
  CHECK(eval_h(se, 0.0) == 1.0);
  CHECK(eval_h(se, se.U() + 1.0) == 0.0);
  CHECK(eval_h(se, -se.U() - 1.0) == 0.0);

  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 1000, 1e-2);
  CHECK(eval_h(tr, 150.0) == 0.5);  // knee = 100, middle band
  CHECK(eval_h(tr, 50.0) == 1.0);
  CHECK(eval_h(tr, tr.knee() + tr.U() + 1.0) == 0.0);
}

TEST_CASE("g is odd and monotone for StepExp/RampExp") {
  SplitMix64 rng(11);
  for (GVariant v : {GVariant::StepExp, GVariant::RampExp}) {
    ConfidenceParams p = ConfidenceParams::step_exp(1e-3, 400, 20.0);
    p.variant = v;
    double span = p.U() + 5.0;
    for (int i = 0; i < 10000; ++i) {
      double x = rng.uniform(-span, span);
      CHECK(eval_g(p, -x) + eval_g(p, x) == 0.0);  // exact, not approximate
    }
    double prev_x = -span, prev_g = eval_g(p, prev_x);
    for (int i = 0; i < 2000; ++i) {
      double x = -span + (2.0 * span) * (i + 1) / 2000.0;
      double g = eval_g(p, x);
      CHECK(g >= prev_g - 1e-15);
      prev_g = g;
      prev_x = x;
    }
  }
}

TEST_CASE("g is monotone for TransactionRamp") {
  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 1000, 1e-3);
  double prev = -2.0;
  for (double x = -2000.0; x < tr.saturation() + 5.0; x += 0.5) {
    double g = eval_g(tr, x);
    CHECK(g >= prev - 1e-15);
    prev = g;
  }
}

TEST_CASE("continuity at branch points") {
  ConfidenceParams re = ConfidenceParams::ramp_exp(1e-3, 400, 20.0);
  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 1000, 1e-3);
  const double d = 1e-8;
  for (double b : {re.L, re.U(), -re.L, -re.U()})
    CHECK(std::fabs(eval_g(re, b - d) - eval_g(re, b + d)) < 1e-6);
  for (double b : {tr.knee(), tr.knee() + tr.U()})
    CHECK(std::fabs(eval_g(tr, b - d) - eval_g(tr, b + d)) < 1e-6);
  // StepExp: continuous at U, jump at 0 bounded by 2Z.
  ConfidenceParams se = ConfidenceParams::step_exp(1e-3, 400, 20.0);
  CHECK(std::fabs(eval_g(se, se.U() - d) - eval_g(se, se.U() + d)) < 1e-6);
  CHECK(std::fabs(eval_g(se, d) - eval_g(se, -d)) <= 2.0 * se.Z * (1.0 + 1e-9));
}

TEST_CASE("potential: trivial values and linear extension") {
  ConfidenceParams p = ConfidenceParams::step_exp(0.1, 100, 10.0);
  CHECK(potential(p, 0.0) == 0.0);
  double U = p.U();
  CHECK(potential(p, U + 5.0) == doctest::Approx(potential(p, U) + 5.0).epsilon(1e-12));
}

TEST_CASE("potential matches the trapezoid oracle") {
  // Expected values computed by the independent step-1e-5 trapezoid oracle.
  ConfidenceParams p = ConfidenceParams::step_exp(0.1, 100, 10.0);
  double U = p.U();
  double oracle = trapezoid_phi(p, U);
  CHECK(potential(p, U) == doctest::Approx(oracle).epsilon(1e-9));

  ConfidenceParams r = ConfidenceParams::ramp_exp(1e-3, 400, 20.0);
  for (double x : {5.0, r.L, 0.5 * (r.L + r.U()), r.U(), r.U() + 2.0}) {
    CHECK(potential(r, x) == doctest::Approx(trapezoid_phi(r, x)).epsilon(1e-8));
    CHECK(potential(r, -x) == doctest::Approx(trapezoid_phi(r, x)).epsilon(1e-8));
  }

  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 1000, 1e-3);
  for (double x : {50.0, tr.knee(), tr.knee() + 0.5 * tr.U(), tr.saturation() + 3.0})
    CHECK(potential(tr, x) == doctest::Approx(trapezoid_phi(tr, x)).epsilon(1e-8));
}

TEST_CASE("potential table agrees with one-shot quadrature") {
  ConfidenceParams p = ConfidenceParams::ramp_exp(1e-4, 1024, 32.0);
  PotentialTable table(p);
  SplitMix64 rng(3);
  for (int i = 0; i < 500; ++i) {
    double x = rng.uniform(-p.U() - 4.0, p.U() + 4.0);
    CHECK(table(x) == doctest::Approx(potential(p, x)).epsilon(1e-9));
  }
}

TEST_CASE("sandwich |x| - U <= Phi(x) <= |x|") {
  ConfidenceParams p = ConfidenceParams::ramp_exp(1e-3, 400, 20.0);
  PotentialTable table(p);
  double U = p.U();
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-3.0 * U, 3.0 * U);
    double phi = table(x);
    CHECK(phi <= std::fabs(x) + 1e-12);
    CHECK(phi >= std::fabs(x) - U - 1e-12);
  }
}

TEST_CASE("drift condition holds for derived parameters") {
  // Coarse grid here; the acceptance suite runs the pinned 1e-3 grid.
  ConfidenceParams se = ConfidenceParams::step_exp(std::exp(-100.0), 10000, 100.0);
  DriftReport rep = check_drift_condition(se, se.Z, 1.0, 1e-2);
  CHECK(rep.max_violation <= 0.0);

  ConfidenceParams re = ConfidenceParams::ramp_exp(std::exp(-100.0), 10000, 100.0);
  double zp = std::exp(1.0) * re.rho_bar() * re.L * re.Z;
  DriftReport rep2 = check_drift_condition(re, zp, 1.0, 1e-2);
  CHECK(rep2.max_violation <= 0.0);
}

TEST_CASE("drift condition holds for a TransactionRamp setting") {
  ConfidenceParams tr = ConfidenceParams::transaction_ramp(0.1, 10000, 1e-4);
  DriftReport rep = check_drift_condition(tr, tr.Z, 1.0, 1e-2);
  CHECK(rep.max_violation <= 0.0);
}

TEST_CASE("drift negative control: broken deviation scale is caught") {
  // L far below sqrt(n) breaks the 1/n >= 1/L^2 precondition and the
  // condition itself: g' = (x/2L^2) g is much larger than rho_bar x g.
  ConfidenceParams bad = ConfidenceParams::step_exp(std::exp(-100.0), 100, 1.0);
  DriftReport rep = check_drift_condition(bad, bad.Z, 1.0, 1e-2);
  CHECK(rep.max_violation > 0.0);
  CHECK(std::fabs(rep.worst_x) <= bad.U() + 2.0);
}

TEST_CASE("params validation names violated preconditions") {
  ConfidenceParams bad_window = ConfidenceParams::step_exp(std::exp(-100.0), 2.0, std::sqrt(2.0));
  CHECK_THROWS_WITH_AS(bad_window.validate(), doctest::Contains("window floor"),
                       std::invalid_argument);
  ConfidenceParams bad_scale = ConfidenceParams::step_exp(1e-3, 400, 2.0);
  CHECK_THROWS_WITH_AS(bad_scale.validate(), doctest::Contains("1/n >= 1/L^2"),
                       std::invalid_argument);
  ConfidenceParams bad_z = ConfidenceParams::step_exp(0.9, 400, 20.0);
  CHECK_THROWS_WITH_AS(bad_z.validate(), doctest::Contains("Z must be"), std::invalid_argument);
}
