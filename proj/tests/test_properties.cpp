// Randomised property checks. Each generator draws from a seeded mt19937_64,
// so failures reproduce from the printed trial index.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "exkin/exprk.hpp"
#include "exkin/transport.hpp"

using namespace exkin;

namespace {

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  DistState dvm() { return DistState::dvm(uniform(0.01, 3.0), uniform(0.01, 3.0), uniform(0.01, 3.0)); }

  /// Sum of two or three sampled Maxwellians, resolved on `g` and contained in it.
  DistState mixture(const VelocityGrid& g) {
    DistState f = DistState::zeros(g);
    const int n = integer(2, 3);
    const double s = g.extent / 5.0; // reference thermal speed
    for (int k = 0; k < n; ++k) {
      const double ux = uniform(-0.4, 0.4) * s, uy = g.dim == 2 ? uniform(-0.4, 0.4) * s : 0.0;
      f += sample_maxwellian(g, MomentVector::from_primitive(g.dim, uniform(0.2, 1.5), {ux, uy}, uniform(0.4, 1.0) * s * s));
    }
    return f;
  }

  /// Nonnegative state with the moments of `f`: f + a (M - f) + b (h - M[h]) for a random mixture h.
  DistState matched(const KineticModel& model, const DistState& f) {
    const DistState M = model.equilibrium(model.moments(f));
    const DistState h = mixture(f.grid());
    const DistState dev = h - model.equilibrium(model.moments(h));
    const DistState base = f + uniform(0.2, 0.9) * (M - f);
    double b = uniform(0.2, 1.0);
    while ((base + b * dev).min_value() < 0.0) b *= 0.5;
    return base + b * dev;
  }

  ButcherTableau random_tableau(std::size_t nu, bool nonnegative) {
    std::vector<double> lower;
    for (std::size_t k = 0; k < nu * (nu - 1) / 2; ++k) lower.push_back(nonnegative ? uniform(0, 1) : uniform(-1, 1));
    std::vector<double> w(nu), c(nu, 0.0);
    double sum = 0.0;
    for (auto& x : w) sum += (x = nonnegative ? uniform(0, 1) : uniform(-1, 1));
    if (std::abs(sum) < 1e-3) w[0] += 1.0, sum += 1.0;
    for (auto& x : w) x /= sum;
    std::size_t k = 0;
    for (std::size_t i = 1; i < nu; ++i)
      for (std::size_t j = 0; j < i; ++j) c[i] += lower[k++];
    return ButcherTableau::from_lower(nu, lower, w, c);
  }

private:
  std::mt19937_64 rng_;
};

const char* const if_schemes[] = {"euler-if", "midpoint-if", "heun3-if", "rk4-if"};

} // namespace

// ---------------------------------------------------------------------------
// Tableau

TEST(TableauProperties, StabilityFactorIsNonnegativeAndOneAtZero) {
  Gen gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = SchemeSpec::integrating_factor(gen.random_tableau(gen.integer(1, 4), trial % 2 == 0));
    EXPECT_NEAR(stability_R(spec, 0.0), 1.0, 1e-13) << trial;
    for (int k = 0; k < 10; ++k) EXPECT_GE(stability_R(spec, gen.uniform(0.0, 50.0)), 0.0) << trial;
  }
}

TEST(TableauProperties, StabilityFactorMatchesPolynomialForm) {
  // R = e^{-l} (1 + sum_k l^{k+1} |w|^T |A|^k e) for nonnegative tableaux, where the
  // exponentials factor out of the integrating-factor coefficients.
  Gen gen(2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t nu = gen.integer(1, 4);
    const ButcherTableau t = gen.random_tableau(nu, true);
    const double l = gen.uniform(0.0, 8.0);
    std::vector<double> y(nu, 1.0);
    double poly = 1.0, lp = l;
    for (std::size_t k = 0; k < nu; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < nu; ++i) s += t.w(i) * y[i];
      poly += lp * s;
      std::vector<double> next(nu, 0.0);
      for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < i; ++j) next[i] += t.a(i, j) * y[j];
      y = next;
      lp *= l;
    }
    const double expect = std::exp(-l) * poly;
    EXPECT_NEAR(stability_R(SchemeSpec::integrating_factor(t), l), expect, 1e-13 * std::max(1.0, expect)) << trial;
  }
}

TEST(TableauProperties, TrWeightsAreAPartitionOfUnity) {
  Gen gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = tr_weights(gen.uniform(0.0, 30.0), gen.integer(0, 16));
    double s = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-15) << trial;
  }
}

// ---------------------------------------------------------------------------
// Kinetic models

TEST(KineticProperties, EquilibriumIsIdempotent) {
  Gen gen(4);
  const auto bw = KineticModel::broadwell();
  const VelocityGrid g(1, 8.0, 64);
  const auto bgk = KineticModel::bgk(g, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const DistState M1 = bw.equilibrium(bw.moments(gen.dvm()));
    EXPECT_LE(sup_distance(bw.equilibrium(bw.moments(M1)), M1), 1e-12 * M1.max_abs()) << trial;
    const DistState G1 = bgk.equilibrium(bgk.moments(gen.mixture(g)));
    EXPECT_LE(sup_distance(bgk.equilibrium(bgk.moments(G1)), G1), 1e-12 * G1.max_abs()) << trial;
  }
}

TEST(KineticProperties, BroadwellGainIsSymmetricBilinearAndNonnegative) {
  Gen gen(5);
  const auto model = KineticModel::broadwell();
  for (int trial = 0; trial < 50; ++trial) {
    const DistState f = gen.dvm(), h = gen.dvm(), g = gen.dvm();
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const DistState lhs = model.gain(a * f + b * h, g);
    const DistState rhs = a * model.gain(f, g) + b * model.gain(h, g);
    EXPECT_LE(sup_distance(lhs, rhs), 1e-12 * std::max(1.0, rhs.max_abs())) << trial;
    EXPECT_LE(sup_distance(model.gain(f, g), model.gain(g, f)), 1e-12) << trial;
    EXPECT_GE(model.gain(f).min_value(), 0.0) << trial;
    const MomentVector dq = dvm_moments(model.collision(f));
    EXPECT_EQ(dq.rho, 0.0) << trial;
    EXPECT_EQ(dq.momentum[0], 0.0) << trial;
  }
}

TEST(KineticProperties, SpectralGainIsSymmetricAndBilinear) {
  Gen gen(6);
  const VelocityGrid g(2, 8.0, 16);
  const auto model = KineticModel::spectral_maxwell_2d(g, 16, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const DistState f = gen.mixture(g), h = gen.mixture(g), k = gen.mixture(g);
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const DistState lhs = model.gain(a * f + b * h, k);
    const DistState rhs = a * model.gain(f, k) + b * model.gain(h, k);
    const double scale = std::max(lhs.max_abs(), rhs.max_abs());
    EXPECT_LE(sup_distance(lhs, rhs), 1e-10 * scale) << trial;
    EXPECT_LE(sup_distance(model.gain(f, k), model.gain(k, f)), 1e-10 * model.gain(f, k).max_abs()) << trial;
  }
}

TEST(KineticProperties, SpectralAnnihilatesGridMaxwellians) {
  Gen gen(7);
  const VelocityGrid g(2, 8.0, 32);
  const auto model = KineticModel::spectral_maxwell_2d(g, 32, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const MomentVector U = MomentVector::from_primitive(2, gen.uniform(0.5, 2.0), {gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)},
                                                        gen.uniform(0.7, 1.3));
    const DistState M = grid_equilibrium(g, U);
    EXPECT_LE(model.collision(M).max_abs(), model.negativity_tolerance() * M.max_abs() * model.reference_mu(M)) << trial;
  }
}

// ---------------------------------------------------------------------------
// Estimators

TEST(EstimateProperties, ParticleBoundDominatesDirectAverage) {
  Gen gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(1, 256);
    const double gamma = gen.uniform(0.0, 2.0);
    std::vector<std::array<double, 2>> v(n);
    for (auto& x : v) x = {gen.uniform(-5, 5), gen.uniform(-5, 5)};
    const double bound = mu_p_particle_bound(std::span<const std::array<double, 2>>(v), gamma).value;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::pow(std::hypot(v[i][0] - v[j][0], v[i][1] - v[j][1]), gamma);
      EXPECT_LE(s / n, bound * (1 + 1e-14)) << trial << ' ' << i;
    }
  }
}

TEST(EstimateProperties, EstimatorsAreNonnegative) {
  Gen gen(9);
  const VelocityGrid g(2, 6.0, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const DistState f = gen.mixture(g);
    const double gamma = gen.uniform(0.0, 2.9);
    EXPECT_GE(mu_p(f, gamma).value, 0.0);
    EXPECT_GE(mu_a(f, gamma).value, 0.0);
  }
}

TEST(EstimateProperties, D2IsAMetricOnMatchedStates) {
  Gen gen(10);
  const VelocityGrid g(1, 8.0, 64);
  const auto model = KineticModel::bgk(g, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const DistState f = gen.mixture(g);
    const DistState a = gen.matched(model, f), b = gen.matched(model, f);
    const double fa = d2_distance(f, a), ab = d2_distance(a, b), fb = d2_distance(f, b);
    EXPECT_GE(fa, 0.0);
    EXPECT_EQ(fa, d2_distance(a, f));
    EXPECT_LE(fb, fa + ab + 1e-12) << trial;
  }
}

TEST(EstimateProperties, GainWithLossBoundIsNonnegative) {
  Gen gen(11);
  const auto bw = KineticModel::broadwell();
  const VelocityGrid g(1, 8.0, 64);
  const auto bgk = KineticModel::bgk(g, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const DistState f = gen.dvm();
    EXPECT_GE(detail::shifted_gain(bw, f, loss_sup(bw, f).value).min_value(), -1e-12) << trial;
    const DistState h = gen.mixture(g);
    EXPECT_GE(detail::shifted_gain(bgk, h, loss_sup(bgk, h).value).min_value(), -1e-12) << trial;
  }
}

// ---------------------------------------------------------------------------
// Steps

TEST(StepProperties, ConservationForEverySchemeAndModel) {
  Gen gen(12);
  const auto bw = KineticModel::broadwell();
  const VelocityGrid g1(1, 8.0, 64);
  const auto bgk = KineticModel::bgk(g1, 1.0);
  const VelocityGrid g2(2, 8.0, 16);
  const auto sp = KineticModel::spectral_maxwell_2d(g2, 16, 1.0);
  const char* schemes[] = {"euler-if", "midpoint-if", "heun3-if", "rk4-if", "etd1", "tr1", "tr2", "tr5"};
  for (const char* s : schemes) {
    for (int trial = 0; trial < 3; ++trial) {
      const double dt = std::exp(gen.uniform(std::log(1e-3), std::log(10.0)));
      const DistState f = gen.dvm();
      const Stepper a(bw, parse_scheme(s), dt, 1.0, MuPolicy{});
      EXPECT_LE(a.step(f).moment_drift, 1e-12) << s << ' ' << trial;
      if (std::string(s).rfind("tr", 0) != 0) {
        const Stepper b(bgk, parse_scheme(s), dt, 1.0, MuPolicy{});
        EXPECT_LE(b.step(gen.mixture(g1)).moment_drift, 1e-12) << s << ' ' << trial;
      }
      if (trial == 0) {
        const Stepper c(sp, parse_scheme(s), dt, 1.0, MuPolicy{});
        EXPECT_LE(c.step(gen.mixture(g2)).moment_drift, 1e-8) << s;
      }
    }
  }
}

TEST(StepProperties, BgkExactnessOverManySteps) {
  Gen gen(13);
  const VelocityGrid g(1, 8.0, 64);
  const auto model = KineticModel::bgk(g, 1.0);
  for (const char* s : if_schemes)
    for (double dt : {1e-3, 1.0, 10.0}) {
      const DistState f0 = gen.mixture(g);
      const DistState M = model.equilibrium(model.moments(f0));
      const Stepper st(model, parse_scheme(s), dt, 1.0, MuPolicy{});
      const int n = gen.integer(5, 20);
      DistState f = f0;
      for (int k = 0; k < n; ++k) f = st.step(f).f_next;
      const double e = std::exp(-n * dt);
      const DistState expect = e * f0 + (1 - e) * M;
      EXPECT_LE(sup_distance(f, expect), 1e-12 * expect.max_abs()) << s << ' ' << dt;
    }
}

TEST(StepProperties, ConvexSchemesKeepBroadwellPositiveAndDissipative) {
  Gen gen(14);
  const auto model = KineticModel::broadwell();
  for (const char* s : {"midpoint-if", "heun3-if", "tr1", "tr2", "tr4"})
    for (int trial = 0; trial < 10; ++trial) {
      const double dt = std::exp(gen.uniform(std::log(1e-2), std::log(20.0)));
      const Stepper st(model, parse_scheme(s), dt, 1.0, MuPolicy{});
      DistState f = gen.dvm();
      for (int k = 0; k < 20; ++k) {
        const StepReport r = st.step(f);
        ASSERT_GE(r.min_value, -1e-14) << s << ' ' << trial << ' ' << k;
        ASSERT_LE(r.entropy_delta, 1e-10) << s << ' ' << trial << ' ' << k;
        f = r.f_next;
      }
    }
}

TEST(StepProperties, WildCoefficientsShareMoments) {
  Gen gen(15);
  const auto model = KineticModel::broadwell();
  for (int trial = 0; trial < 20; ++trial) {
    const DistState f = gen.dvm();
    const auto fk = wild_coeffs(model, f, gen.integer(1, 16));
    for (std::size_t k = 1; k < fk.size(); ++k) {
      EXPECT_LE(model.moments(fk[k]).relative_difference(model.moments(f)), 1e-12) << trial << ' ' << k;
      EXPECT_GE(fk[k].min_value(), 0.0);
    }
  }
}

TEST(StepProperties, MidpointContractsMatchedPairsOnSpectralModel) {
  Gen gen(16);
  const VelocityGrid g(2, 8.0, 16);
  const auto model = KineticModel::spectral_maxwell_2d(g, 16, 1.0);
  const SchemeSpec spec = parse_scheme("midpoint-if");
  for (int trial = 0; trial < 4; ++trial) {
    DistState f = gen.mixture(g);
    DistState h = gen.matched(model, f);
    const double lambda = gen.uniform(0.2, 6.0);
    const double dt = lambda / model.reference_mu(f);
    const Stepper st(model, spec, dt, 1.0, MuPolicy{});
    for (int k = 0; k < 8; ++k) {
      const double before = d2_distance(f, h);
      f = st.step(f).f_next;
      h = st.step(h).f_next;
      EXPECT_LE(d2_distance(f, h), stability_R(spec, lambda) * before + 1e-10) << trial << ' ' << k;
    }
  }
}

// ---------------------------------------------------------------------------
// Transport

TEST(TransportProperties, InteriorMassIsConserved) {
  Gen gen(17);
  const VelocityGrid g(1, 4.0, 16);
  for (int trial = 0; trial < 20; ++trial) {
    PhaseState s(g, 60);
    for (int i = 15; i < 45; ++i)
      for (double& x : s.cells[i].values) x = gen.uniform(0.0, 1.0);
    const double mass = s.total_mass();
    s = advect(s, gen.uniform(0.1, 1.0) * max_transport_step(s));
    EXPECT_NEAR(s.total_mass(), mass, 1e-13 * mass) << trial;
    for (const auto& c : s.cells) EXPECT_GE(c.min_value(), 0.0);
  }
}
