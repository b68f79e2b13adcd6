#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "vortexlens/lensing.hpp"
#include "vortexlens/splitting.hpp"

using namespace vortexlens;

namespace {

const BeamParams kBeam = BeamParams::from_speed_fraction(0.02);
const double kOmI = larmor_from_B(0.1);
const double kOmF = larmor_from_B(0.2);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

FieldProfile glaser_for_beta(double beta, double a, double c) {
  return FieldProfile::glaser(std::sqrt(beta * beta - 1.0) * kBeam.speed() / a, a, c);
}

// Direct integration of the nonlinear lensing equation in scaled variables
// with boost::odeint's controlled Dormand-Prince stepper.
double nonlinear_width(const FieldProfile& field, const EnvelopeSolution& ref, double z) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const auto& u = ref.units();
  const auto& init = ref.init();
  const double Z = u.axial_scale();
  State y{u.to_scaled_length(init.w0), u.to_scaled_length(init.w0) * Z * init.R0.inverse()};
  auto segs = field.integration_segments(std::min(init.z0, z), std::max(init.z0, z));
  const bool fwd = z >= init.z0;
  if (!fwd) std::reverse(segs.begin(), segs.end());
  for (const auto& s : segs) {
    const FieldProfile* p = s.profile;
    auto rhs = [&](const State& x, State& dx, double zeta) {
      const double om = u.to_scaled_omega(p->omega(init.z0 + zeta * Z));
      dx[0] = x[1];
      dx[1] = 1.0 / (x[0] * x[0] * x[0]) - om * om * x[0];
    };
    const double a = ((fwd ? s.begin : s.end) - init.z0) / Z;
    const double b = ((fwd ? s.end : s.begin) - init.z0) / Z;
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-15, 1e-13),
                            rhs, y, a, b, (b - a) * 1e-3);
  }
  return u.from_scaled_length(y[0]);
}

}  // namespace

TEST(Lensing, CurvatureRadiusRepresentation) {
  EXPECT_TRUE(CurvatureRadius::flat().is_flat());
  EXPECT_EQ(CurvatureRadius::flat().inverse(), 0.0);
  EXPECT_TRUE(CurvatureRadius::finite(std::numeric_limits<double>::infinity()).is_flat());
  EXPECT_THROW(CurvatureRadius::finite(0.0), std::invalid_argument);
  EXPECT_EQ(CurvatureRadius::finite(2.0).reversed().value(), -2.0);
  EXPECT_THROW((EnvelopeInit{0.0, 0.0, CurvatureRadius::flat()}.validate()), std::invalid_argument);
}

TEST(Lensing, BackendDispatch) {
  const EnvelopeInit init{0.0, 1e-7, CurvatureRadius::flat()};
  const ZInterval d{-1e-3, 1e-3};
  EXPECT_EQ(solve_envelope(FieldProfile::uniform(kOmI), kBeam, init, d).backend(),
            EnvelopeBackend::AnalyticConstant);
  EXPECT_EQ(solve_envelope(FieldProfile::free(), kBeam, init, d).backend(),
            EnvelopeBackend::AnalyticFree);
  EXPECT_EQ(solve_envelope(FieldProfile::uniform(0.0), kBeam, init, d).backend(),
            EnvelopeBackend::AnalyticFree);
  EXPECT_EQ(solve_envelope(FieldProfile::glaser(kOmI, 1e-3, 0.0), kBeam, init, d).backend(),
            EnvelopeBackend::AnalyticGlaser);
  EXPECT_EQ(solve_envelope(FieldProfile::smooth_ramp(0, 1e-3, kOmI, kOmF), kBeam, init, d).backend(),
            EnvelopeBackend::NumericPinney);
  SolveOptions force;
  force.force_numeric = true;
  EXPECT_EQ(solve_envelope(FieldProfile::free(), kBeam, init, d, force).backend(),
            EnvelopeBackend::NumericPinney);
}

TEST(Lensing, DomainErrors) {
  const EnvelopeInit init{0.0, 1e-7, CurvatureRadius::flat()};
  EXPECT_THROW(solve_envelope(FieldProfile::free(), kBeam, init, {1e-3, 2e-3}), std::invalid_argument);
  std::vector<double> z{-1e-3, 0.0, 1e-3, 2e-3}, om{1e9, 1e9, 1e9, 1e9};
  EXPECT_THROW(solve_envelope(FieldProfile::tabulated(z, om), kBeam, init, {-1e-3, 3e-3}), OutOfDomain);
  const auto sol = solve_envelope(FieldProfile::free(), kBeam, init, {-1e-3, 1e-3});
  EXPECT_THROW(sol.width(2e-3), OutOfDomain);
  EXPECT_THROW(analytic_constant_width(0.0, kBeam, init, 0.0), DomainError);
}

TEST(Lensing, SolverFailureSurfaces) {
  SolveOptions o;
  o.ode.max_steps = 2;
  const EnvelopeInit init{0.0, landau_width(kOmI), CurvatureRadius::flat()};
  EXPECT_THROW(solve_envelope(FieldProfile::smooth_ramp(0.0, 0.05, kOmI, kOmF), kBeam, init, {0.0, 0.06}, o),
               SolverError);
}

TEST(Lensing, LandauModeIsStationary) {
  for (double om : {kOmI, -kOmF}) {
    const double w0 = landau_width(om);
    const double span = 20.0 * std::numbers::pi * kBeam.speed() / std::abs(om);
    const EnvelopeInit init{0.0, w0, CurvatureRadius::flat()};
    SolveOptions force;
    force.force_numeric = true;
    for (const auto& sol : {solve_envelope(FieldProfile::uniform(om), kBeam, init, {0.0, span}),
                            solve_envelope(FieldProfile::uniform(om), kBeam, init, {0.0, span}, force)}) {
      for (int i = 0; i <= 1000; ++i) {
        const double z = span * i / 1000.0;
        ASSERT_LE(std::abs(sol.width(z) / w0 - 1.0), 1e-10) << to_string(sol.backend());
        EXPECT_TRUE(std::isinf(curvature_radius(sol, z)));
      }
    }
  }
}

TEST(Lensing, FreeSpaceWidthAndCurvature) {
  const double w0 = 2e-7;
  const double zr = kBeam.rayleigh_length(w0);
  const EnvelopeInit init{0.0, w0, CurvatureRadius::flat()};
  const auto sol = solve_envelope(FieldProfile::free(), kBeam, init, {-5 * zr, 5 * zr});
  EXPECT_NEAR(sol.width(zr), std::sqrt(2.0) * w0, 1e-12 * w0);
  EXPECT_TRUE(std::isinf(curvature_radius(sol, 0.0)));
  for (double z : {-3.1 * zr, -0.4 * zr, 0.7 * zr, 2.0 * zr, 4.9 * zr}) {
    const double w = sol.width(z);
    EXPECT_NEAR(w * w, w0 * w0 * (1 + z * z / (zr * zr)), 1e-12 * w * w);
    // Gaussian-beam wavefront curvature R = z (1 + z_R^2 / z^2).
    EXPECT_NEAR(curvature_radius(sol, z), z * (1 + zr * zr / (z * z)), 1e-10 * std::abs(z + zr * zr / z));
  }
}

TEST(Lensing, FreeSpaceClosedFormIsConvexWithPositiveMinimum) {
  const double w0 = 3e-7;
  for (double r0 : {-0.3, -1e-3, 1e-3, 0.7}) {
    const EnvelopeInit init{0.0, w0, CurvatureRadius::finite(r0)};
    // Quadratic coefficients of w^2 / w0^2 = 1 + A z^2 + B z.
    const double k = kBeam.wavenumber();
    const double A = 1 / (r0 * r0) + 4 / (w0 * w0 * w0 * w0 * k * k);
    const double B = 2 / r0;
    EXPECT_LT(B * B, 4 * A);
    const double zmin = -B / (2 * A);
    const double wmin = analytic_free_width(kBeam, init, zmin);
    EXPECT_NEAR(wmin * wmin / (w0 * w0), 1 - B * B / (4 * A), 1e-10);
    EXPECT_GT(wmin, 0.0);
    for (double dz : {1e-6, 1e-4, 1e-2}) {
      EXPECT_GT(analytic_free_width(kBeam, init, zmin + dz), wmin);
      EXPECT_GT(analytic_free_width(kBeam, init, zmin - dz), wmin);
    }
    EXPECT_DOUBLE_EQ(analytic_free_width(kBeam, init, 0.0), w0);
  }
}

TEST(Lensing, ConstantFieldClosedForm) {
  const double om = kOmI;
  const EnvelopeInit init{0.0, 1.3 * landau_width(om), CurvatureRadius::finite(-0.02)};
  const double period = std::numbers::pi * kBeam.speed() / om;
  EXPECT_DOUBLE_EQ(analytic_constant_width(om, kBeam, init, 0.0), init.w0);
  for (double z : {1e-5, 3.3e-4, 1.7e-3}) {
    EXPECT_NEAR(analytic_constant_width(om, kBeam, init, z + period), analytic_constant_width(om, kBeam, init, z),
                1e-10 * init.w0);
  }
  // Omega -> 0 approaches the free-space form.
  const EnvelopeInit fi{0.0, 2e-7, CurvatureRadius::finite(0.05)};
  const double z = 1e-3;
  const double free = analytic_free_width(kBeam, fi, z);
  double prev = std::numeric_limits<double>::infinity();
  for (double o : {1e8, 1e7, 1e6, 1e5}) {
    const double err = std::abs(analytic_constant_width(o, kBeam, fi, z) - free);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-6 * free);
}

TEST(Lensing, AnalyticBackendsMatchClosedForms) {
  const EnvelopeInit init{1e-4, 1.2e-7, CurvatureRadius::finite(0.01)};
  const ZInterval d{-2e-3, 2e-3};
  const auto u = solve_envelope(FieldProfile::uniform(kOmF), kBeam, init, d);
  const auto f = solve_envelope(FieldProfile::free(), kBeam, init, d);
  for (int i = 0; i <= 50; ++i) {
    const double z = d.lo + d.length() * i / 50.0;
    EXPECT_LE(rel(u.width(z), analytic_constant_width(kOmF, kBeam, init, z)), 1e-12);
    EXPECT_LE(rel(f.width(z), analytic_free_width(kBeam, init, z)), 1e-12);
  }
}

TEST(Lensing, GlaserNumericAgreesWithClosedForm) {
  const double a = 1e-3, c = 2e-3;
  for (double beta : {1.1, 2.0, 5.0}) {
    const auto field = glaser_for_beta(beta, a, c);
    const double wm = glaser_matched_width(field.as<FieldProfile::GlaserData>().omega0, a, kBeam);
    struct Case {
      double wc;
      CurvatureRadius rc;
    };
    for (const Case& cs : {Case{0.7 * wm, CurvatureRadius::finite(-0.5)}, Case{wm, CurvatureRadius::flat()},
                           Case{1.9 * wm, CurvatureRadius::finite(0.2)}}) {
      const EnvelopeInit init{c, cs.wc, cs.rc};
      const ZInterval d{c - 10 * a, c + 10 * a};
      SolveOptions force;
      force.force_numeric = true;
      const auto num = solve_envelope(field, kBeam, init, d, force);
      const auto ana = solve_envelope(field, kBeam, init, d);
      double worst = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double z = d.lo + d.length() * i / 1000.0;
        const double ref = analytic_glaser_width(field.as<FieldProfile::GlaserData>().omega0, a, c, kBeam, cs.wc,
                                                 cs.rc, z);
        worst = std::max({worst, rel(num.width(z), ref), rel(ana.width(z), ref)});
      }
      EXPECT_LE(worst, 1e-8) << "beta=" << beta;
    }
  }
}

TEST(Lensing, GlaserSpecialChoiceHasNoOscillation) {
  const double a = 1e-3, c = 0.0;
  for (double beta : {1.1, 2.0, 5.0}) {
    const auto field = glaser_for_beta(beta, a, c);
    const double om0 = field.as<FieldProfile::GlaserData>().omega0;
    const double wc = glaser_matched_width(om0, a, kBeam);
    EXPECT_NEAR(wc * wc, 2 * a / (beta * kBeam.wavenumber()), 1e-12 * wc * wc);
    const auto sol = solve_envelope(field, kBeam, {c, wc, CurvatureRadius::flat()}, {c - 10 * a, c + 10 * a});
    EXPECT_TRUE(std::isinf(curvature_radius(sol, c)));
    for (double z : {-9e-3, -2.5e-3, 0.0, 1e-4, 7e-3}) {
      const double w = sol.width(z);
      const double expect = 2.0 / (kBeam.wavenumber() * a * beta) * ((z - c) * (z - c) + a * a);
      EXPECT_LE(rel(w * w, expect), 1e-12);
    }
  }
}

TEST(Lensing, GlaserZeroFieldIsFreeSpace) {
  const double a = 1e-3, c = 5e-4;
  const auto field = FieldProfile::glaser(0.0, a, c);
  const EnvelopeInit init{c, 1.5e-7, CurvatureRadius::finite(0.03)};
  for (double z : {-4e-3, 0.0, 6e-3}) {
    EXPECT_LE(rel(analytic_glaser_width(0.0, a, c, kBeam, init.w0, init.R0, z), analytic_free_width(kBeam, init, z)),
              1e-12);
  }
  EXPECT_LE(rel(analytic_glaser_width(0.0, a, c, kBeam, init.w0, init.R0, c), init.w0), 1e-15);
}

TEST(Lensing, ErmakovPinneyResidualAllBackends) {
  const double w0 = 1.4e-7;
  const double zr = kBeam.rayleigh_length(w0);
  struct Case {
    FieldProfile field;
    EnvelopeInit init;
    ZInterval domain;
    double scale;
  };
  const double a = 1e-3;
  std::vector<Case> cases{
      {FieldProfile::uniform(kOmI), {0.0, w0, CurvatureRadius::finite(0.01)}, {-2e-3, 3e-3}, 0.0},
      {FieldProfile::free(), {0.0, w0, CurvatureRadius::flat()}, {-4 * zr, 6 * zr}, 0.0},
      {glaser_for_beta(2.0, a, 0.0), {0.0, w0, CurvatureRadius::finite(-0.1)}, {-10 * a, 10 * a}, a},
      {FieldProfile::smooth_ramp(1e-4, 1e-2, kOmI, kOmF), {0.0, landau_width(kOmI), CurvatureRadius::flat()},
       {0.0, 1.5e-2}, 0.0},
  };
  for (const auto& cs : cases) {
    const auto sol = solve_envelope(cs.field, kBeam, cs.init, cs.domain);
    const double delta = oracle::ep_step(sol, cs.domain.lo, cs.domain.hi, cs.scale);
    EXPECT_LE(oracle::ep_worst(sol, cs.domain.lo, cs.domain.hi, 1000, delta), 1e-9) << to_string(sol.backend());
  }
}

TEST(Lensing, NonlinearOracleAgreesWithPinney) {
  const auto field = FieldProfile::smooth_ramp(1e-4, 8e-3, kOmI, kOmF);
  const EnvelopeInit init{0.0, 0.8 * landau_width(kOmI), CurvatureRadius::finite(0.05)};
  const auto sol = solve_envelope(field, kBeam, init, {-2e-3, 1e-2});
  for (double z : {-1.9e-3, -3e-4, 1e-4, 2.345e-3, 5e-3, 9.99e-3}) {
    EXPECT_LE(rel(sol.width(z), nonlinear_width(field, sol, z)), 1e-8) << z;
  }
}

TEST(Lensing, EvaluationIsSmoothAcrossCheckpoints) {
  const auto field = FieldProfile::smooth_ramp(1e-4, 8e-3, kOmI, kOmF);
  const auto sol = solve_envelope(field, kBeam, {0.0, landau_width(kOmI), CurvatureRadius::flat()}, {0.0, 1e-2});
  const auto cps = sol.checkpoints();
  ASSERT_GT(cps.size(), 10u);
  for (std::size_t i = 3; i < cps.size() - 3; i += 17) {
    const double z = cps[i];
    const double h = 1e-9;
    const double left = sol.width(z - h), mid = sol.width(z), right = sol.width(z + h);
    EXPECT_NEAR(left + right - 2 * mid, 0.0, 1e-12 * mid);
  }
}

TEST(Lensing, SignOfOmegaIsIrrelevant) {
  const EnvelopeInit init{0.0, 1.1e-7, CurvatureRadius::finite(0.02)};
  const ZInterval d{-1e-3, 5e-3};
  const auto p = solve_envelope(FieldProfile::smooth_ramp(0.0, 4e-3, kOmI, kOmF), kBeam, init, d);
  const auto m = solve_envelope(FieldProfile::smooth_ramp(0.0, 4e-3, -kOmI, -kOmF), kBeam, init, d);
  const auto gp = solve_envelope(FieldProfile::glaser(kOmF, 1e-3, 1e-3), kBeam, init, d);
  const auto gm = solve_envelope(FieldProfile::glaser(-kOmF, 1e-3, 1e-3), kBeam, init, d);
  for (double z : {-9e-4, 0.0, 1.3e-3, 4.9e-3}) {
    EXPECT_EQ(p.width(z), m.width(z));
    EXPECT_EQ(gp.width(z), gm.width(z));
  }
}

TEST(Lensing, ReversalSymmetry) {
  // Reversing the direction of travel is equivalent to mirroring the field and
  // the initial wavefront: w_mirror(-z) = w(z).
  const EnvelopeInit init{1e-3, 1.1e-7, CurvatureRadius::finite(0.02)};
  const EnvelopeInit mirror{-1e-3, 1.1e-7, init.R0.reversed()};
  const auto ramp = FieldProfile::smooth_ramp(0.0, 4e-3, kOmI, kOmF);
  const auto ramp_m = FieldProfile::smooth_ramp(-4e-3, 0.0, kOmF, kOmI);
  const auto s = solve_envelope(ramp, kBeam, init, {-1e-3, 5e-3});
  const auto sm = solve_envelope(ramp_m, kBeam, mirror, {-5e-3, 1e-3});
  const auto g = solve_envelope(FieldProfile::glaser(kOmF, 1e-3, 2e-3), kBeam, init, {-1e-3, 5e-3});
  const auto gmr = solve_envelope(FieldProfile::glaser(kOmF, 1e-3, -2e-3), kBeam, mirror, {-5e-3, 1e-3});
  for (double z : {-9e-4, 0.0, 1.3e-3, 2.2e-3, 4.9e-3}) {
    EXPECT_LE(rel(sm.width(-z), s.width(z)), 1e-9);
    EXPECT_NEAR(sm.slope(-z), -s.slope(z), 1e-9 * std::abs(s.slope(z)) + 1e-15);
    EXPECT_LE(rel(gmr.width(-z), g.width(z)), 1e-12);
  }
}

TEST(Lensing, ContinuityAcrossPiecewiseBreakpoint) {
  const auto sc = RampScenario::abrupt("step", 2e-4, kOmI, kOmF, {0, 0}, kBeam);
  const auto sol = solve_envelope(sc.field, kBeam, sc.initial_envelope(), {0.0, 2e-3});
  const double z = 2e-4, h = 1e-12;
  EXPECT_LE(rel(sol.width(z - h), sol.width(z + h)), 1e-12);
  // Away from a stationary point dw/dz would differ by about w'' * 2h.
  const double bound = 2.0 * h * std::abs(sol.second_derivative(z + h)) * (1 + 1e-6);
  EXPECT_NEAR(sol.slope(z - h), sol.slope(z + h), bound);
  // Second derivative jumps with Omega^2.
  const double jump = sol.second_derivative(z + h) - sol.second_derivative(z - h);
  const double w = sol.width(z);
  EXPECT_NEAR(jump, -(kOmF * kOmF - kOmI * kOmI) / (kBeam.speed() * kBeam.speed()) * w, 1e-6 * std::abs(jump));
}

TEST(Lensing, WidthStaysPositiveThroughStrongFocus) {
  const auto field = glaser_for_beta(5.0, 5e-4, 0.0);
  const auto sol = solve_envelope(field, kBeam, {-5e-3, 4e-7, CurvatureRadius::flat()}, {-5e-3, 5e-3},
                                  SolveOptions{.force_numeric = true});
  for (int i = 0; i <= 2000; ++i) EXPECT_GT(sol.width(-5e-3 + 1e-2 * i / 2000.0), 0.0);
}
