#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "exkin/exprk.hpp"

using namespace exkin;

namespace {

const char* const if_schemes[] = {"euler-if", "midpoint-if", "heun3-if", "rk4-if"};

DistState bumps_1d(const VelocityGrid& g) {
  return sample_maxwellian(g, MomentVector::from_primitive(1, 1.0, {-1.0, 0.0}, 0.7)) +
         sample_maxwellian(g, MomentVector::from_primitive(1, 0.6, {1.2, 0.0}, 1.1));
}

StepContext make_ctx(const KineticModel& model, const std::string& scheme, double dt, double eps, MuEstimate mu) {
  return {model, parse_scheme(scheme), dt, eps, mu, false};
}

double rel_sup(const DistState& a, const DistState& b) { return sup_distance(a, b) / b.max_abs(); }

} // namespace

TEST(StepContext, Validation) {
  const auto model = KineticModel::broadwell();
  const MuEstimate mu = MuEstimate::make(1.0, MuKind::loss_sup);
  EXPECT_THROW(make_ctx(model, "euler-if", 0.0, 1.0, mu).validate(), ConfigError);
  EXPECT_THROW(make_ctx(model, "euler-if", 1.0, 0.0, mu).validate(), ConfigError);
  EXPECT_THROW(make_ctx(model, "euler-if", 1.0, 1e-320, mu).validate(), ConfigError);
  EXPECT_NO_THROW(make_ctx(model, "euler-if", 1.0, 1.0, mu).validate());
  EXPECT_DOUBLE_EQ(make_ctx(model, "euler-if", 0.5, 0.25, mu).lambda(), 2.0);
}

TEST(StepIf, BgkHalfwayAtLogTwo) {
  const VelocityGrid g(1, 8.0, 64);
  const auto model = KineticModel::bgk(g, 2.0);
  const DistState f = bumps_1d(g);
  const DistState M = model.equilibrium(model.moments(f));
  const DistState expect = 0.5 * (f + M);
  const double dt = std::log(2.0) / 2.0;
  for (const char* s : if_schemes) {
    const StepReport r = step_if(make_ctx(model, s, dt, 1.0, loss_sup(model, f)), f);
    EXPECT_LE(rel_sup(r.f_next, expect), 1e-14) << s;
    EXPECT_LE(r.moment_drift, 1e-12) << s;
  }
}

TEST(StepIf, BroadwellConservesMoments) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  for (const char* s : if_schemes)
    for (double dt : {0.01, 0.3, 2.0}) {
      const StepReport r = step_if(make_ctx(model, s, dt, 1.0, loss_sup(model, f)), f);
      EXPECT_LE(r.moment_drift, 1e-12) << s << ' ' << dt;
      EXPECT_EQ(r.mu, 5.0);
    }
}

TEST(StepIf, StrongApSchemesProjectOntoMaxwellian) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const DistState M = model.equilibrium(model.moments(f));
  for (const char* s : if_schemes) {
    const SchemeSpec spec = parse_scheme(s);
    if (!certify(spec).strong_ap) continue;
    // lambda = 5 * 2e5 = 1e6
    const StepReport r = step_if(make_ctx(model, s, 2e5, 1.0, loss_sup(model, f)), f);
    EXPECT_LE(rel_sup(r.f_next, M), 1e-8) << s;
  }
}

TEST(StepIf, RetainsStagesOnRequest) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  StepContext ctx = make_ctx(model, "heun3-if", 0.1, 1.0, loss_sup(model, f));
  EXPECT_TRUE(step_if(ctx, f).stages.empty());
  ctx.retain_stages = true;
  const StepReport r = step_if(ctx, f);
  ASSERT_EQ(r.stages.size(), 3u);
  EXPECT_EQ(r.stages[0].values, f.values); // c_1 = 0
}

TEST(StepIf, NonFiniteStageIsReported) {
  const auto model = KineticModel::broadwell();
  // Moments stay finite but the quadratic gain overflows.
  const DistState f = DistState::dvm(1e200, 1e200, 1e200);
  try {
    step_if(make_ctx(model, "midpoint-if", 0.1, 1.0, MuEstimate::make(1.0, MuKind::fixed)), f);
    FAIL();
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("midpoint-if: non-finite values in"), std::string::npos) << msg;
    EXPECT_NE(msg.find("stage 1"), std::string::npos) << msg;
  }
}

TEST(StepIf, RejectsWrongFamily) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  EXPECT_THROW(step_if(make_ctx(model, "etd1", 0.1, 1.0, loss_sup(model, f)), f), ConfigError);
  EXPECT_THROW(step_tr(make_ctx(model, "rk4-if", 0.1, 1.0, loss_sup(model, f)), f), ConfigError);
}

TEST(StepIfGeneralMu, EqualMuMatchesStepIf) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const MuEstimate mp = loss_sup(model, f);
  for (const char* s : if_schemes) {
    const StepContext ctx = make_ctx(model, s, 0.3, 1.0, mp);
    const StepReport a = step_if(ctx, f), b = step_if_general_mu(ctx, mp, f);
    EXPECT_LE(sup_distance(a.f_next, b.f_next), 1e-13) << s;
    EXPECT_FALSE(b.convexity_warning);
  }
}

TEST(StepIfGeneralMu, SingleStageClosedFormOnBgk) {
  const VelocityGrid g(1, 8.0, 64);
  const double mu_p = 2.0, mu = 1.0, eps = 0.5, dt = 0.25; // lambda_p = 1, lambda = 0.5
  const auto model = KineticModel::bgk(g, mu_p);
  const DistState f = bumps_1d(g);
  const DistState M = model.equilibrium(model.moments(f));
  const DistState Pp = model.gain(f);
  const double lp = mu_p * dt / eps, l = mu * dt / eps, e = std::exp(-l);
  DistState expect = (1 - lp + l) * e * f;
  expect.axpy(lp * e / mu_p, Pp);
  expect.axpy(1 - e - l * e, M);
  const StepContext ctx = make_ctx(model, "euler-if", dt, eps, MuEstimate::make(mu, MuKind::average));
  const StepReport r = step_if_general_mu(ctx, MuEstimate::make(mu_p, MuKind::loss_sup), f);
  EXPECT_LE(rel_sup(r.f_next, expect), 1e-14);
  EXPECT_EQ(r.mu, mu);
  // The dispatcher takes the same route for a non-guaranteeing mu below the bound.
  EXPECT_LE(rel_sup(step(ctx, f).f_next, expect), 1e-14);
}

TEST(StepIfGeneralMu, ConvexityWarningBeyondBound) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const MuEstimate mp = loss_sup(model, f); // 5
  const MuEstimate mu = MuEstimate::make(3.0, MuKind::average);
  const double eps = 0.1;
  EXPECT_TRUE(step_if_general_mu(make_ctx(model, "midpoint-if", 2 * eps / 2.0, eps, mu), mp, f).convexity_warning);
  EXPECT_FALSE(step_if_general_mu(make_ctx(model, "midpoint-if", 0.5 * eps / 2.0, eps, mu), mp, f).convexity_warning);
}

TEST(StepIfGeneralMu, MuAboveBoundIsClamped) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const MuEstimate mp = loss_sup(model, f);
  const StepReport r = step_if_general_mu(make_ctx(model, "heun3-if", 0.2, 1.0, MuEstimate::make(9.0, MuKind::fixed)), mp, f);
  const StepReport ref = step_if(make_ctx(model, "heun3-if", 0.2, 1.0, mp), f);
  EXPECT_EQ(r.mu, 5.0);
  EXPECT_LE(sup_distance(r.f_next, ref.f_next), 1e-13);
}

TEST(StepEtd1, SmallLambdaIsForwardEuler) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const double dt = 1e-5;
  const DistState expect = f + dt * model.collision(f);
  const StepReport r = step_etd1(make_ctx(model, "etd1", dt, 1.0, loss_sup(model, f)), f);
  // lambda = 5e-5, second-order remainder ~ lambda^2
  EXPECT_LE(sup_distance(r.f_next, expect), 1e-8);
}

TEST(StepEtd1, ConservesMoments) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(0.4, 2.0, 1.5);
  for (double dt : {1e-3, 0.5, 40.0})
    EXPECT_LE(step_etd1(make_ctx(model, "etd1", dt, 1.0, loss_sup(model, f)), f).moment_drift, 1e-12);
}

TEST(StepEtd1, StiffLimitIsGainNotMaxwellian) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(0.4, 2.0, 1.6); // rho = 6
  // With mu = rho the Broadwell gain P / rho is already Maxwellian, so use mu = 2 rho.
  const double mu = 12.0;
  const DistState P = (1.0 / mu) * (model.gain(f) + (mu - 6.0) * f);
  const DistState M = model.equilibrium(model.moments(f));
  const StepReport r = step_etd1(make_ctx(model, "etd1", 1e6 / mu, 1.0, MuEstimate::make(mu, MuKind::fixed)), f);
  EXPECT_LE(rel_sup(r.f_next, P), 1e-8);
  EXPECT_GT(rel_sup(r.f_next, M), 1e-2);
}

TEST(WildCoeffs, FirstCoefficientIsScaledGain) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const auto fk = wild_coeffs(model, f, 1);
  ASSERT_EQ(fk.size(), 2u);
  EXPECT_EQ(fk[0].values, f.values);
  EXPECT_LE(sup_distance(fk[1], (1.0 / 5.0) * model.gain(f)), 1e-15);
}

TEST(WildCoeffs, EquilibriumIsFixedPoint) {
  const auto model = KineticModel::broadwell();
  const DistState M = model.equilibrium(model.moments(DistState::dvm(2.0, 1.0, 1.0)));
  for (const auto& fk : wild_coeffs(model, M, 6)) EXPECT_LE(sup_distance(fk, M), 1e-14);
}

TEST(WildCoeffs, ConserveMoments) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(0.3, 1.7, 0.9);
  const auto fk = wild_coeffs(model, f, 5);
  for (int k = 1; k <= 5; ++k) EXPECT_LE(model.moments(fk[k]).relative_difference(model.moments(f)), 1e-12) << k;
}

TEST(WildCoeffs, Errors) {
  const VelocityGrid g(1, 8.0, 16);
  const auto bgk = KineticModel::bgk(g, 1.0);
  try {
    wild_coeffs(bgk, DistState::zeros(g), 2);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "model not bilinear");
  }
  EXPECT_THROW(wild_coeffs(KineticModel::broadwell(), DistState::dvm(1, 1, 1), 17), ConfigError);
}

TEST(TrWeights, TelescopeToOne) {
  const auto w = tr_weights(0.7, 3);
  ASSERT_EQ(w.size(), 5u);
  double s = 0.0;
  for (double x : w) s += x;
  EXPECT_NEAR(s, 1.0, 1e-15);
  const double e = std::exp(-0.7), tau = 1 - e;
  EXPECT_NEAR(w[2], e * tau * tau, 1e-16);
  EXPECT_NEAR(w[4], std::pow(tau, 4), 1e-16);
  EXPECT_THROW(tr_weights(-0.1, 2), ConfigError);
}

TEST(StepTr, FirstOrderMatchesDirectFormula) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const DistState M = model.equilibrium(model.moments(f));
  const double dt = 0.3, lambda = 5.0 * dt;
  const double e = std::exp(-lambda);
  // e^{-l} f + l phi_1(l) (P/mu - M) + (1 - e^{-l}) M, with l phi_1(l) = e^{-l}(1 - e^{-l})
  DistState expect = e * f;
  expect.axpy(lambda * phi_k(lambda, 1), (1.0 / 5.0) * model.gain(f) - M);
  expect.axpy(1 - e, M);
  const StepReport r = step_tr(make_ctx(model, "tr1", dt, 1.0, loss_sup(model, f)), f);
  EXPECT_LE(sup_distance(r.f_next, expect), 1e-12);
}

TEST(StepTr, StiffLimitIsMaxwellian) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  const DistState M = model.equilibrium(model.moments(f));
  for (const char* s : {"tr1", "tr2", "tr5"})
    EXPECT_LE(rel_sup(step_tr(make_ctx(model, s, 2e5, 1.0, loss_sup(model, f)), f).f_next, M), 1e-8) << s;
}

TEST(StepTr, RejectsBgk) {
  const VelocityGrid g(1, 8.0, 16);
  const auto bgk = KineticModel::bgk(g, 1.0);
  const DistState f = bumps_1d(g);
  EXPECT_THROW(step_tr(make_ctx(bgk, "tr2", 0.1, 1.0, loss_sup(bgk, f)), f), ConfigError);
}

TEST(Stepper, RefreshesMuFromPolicy) {
  const auto model = KineticModel::broadwell();
  const Stepper st(model, parse_scheme("midpoint-if"), 0.1, 1.0, MuPolicy::parse("loss_sup"));
  const DistState f = DistState::dvm(2.0, 1.0, 1.0);
  EXPECT_EQ(st.context(f).mu.value, 5.0);
  EXPECT_EQ(st.context(3.0 * f).mu.value, 15.0);
  EXPECT_THROW(Stepper(model, parse_scheme("midpoint-if"), -1.0, 1.0, MuPolicy{}), ConfigError);
}

TEST(Stepper, RetriesWithDoubledMu) {
  // A small fixed mu with a large step overshoots; doubling it is enough here.
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(4.0, 0.1, 0.05);
  Stepper st(model, parse_scheme("euler-if"), 0.5, 1.0, MuPolicy::fixed(1.0));
  const StepReport plain = st.step(f);
  ASSERT_LT(plain.min_value, positivity_floor(model, plain.f_next));
  st.retry_on_negative();
  const StepReport r = st.step(f);
  EXPECT_EQ(r.retries, 1);
  EXPECT_EQ(r.mu, 2.0);
  EXPECT_GE(r.min_value, 0.0);
}

TEST(Stepper, FailsWhenRetryIsNotEnough) {
  const auto model = KineticModel::broadwell();
  const DistState f = DistState::dvm(4.0, 0.1, 0.05);
  Stepper st(model, parse_scheme("euler-if"), 1.0, 1.0, MuPolicy::fixed(0.2));
  st.retry_on_negative();
  EXPECT_THROW(st.step(f), NumericalError);
}
