#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vortexlens/modes.hpp"

using namespace vortexlens;

namespace {

const BeamParams kBeam = BeamParams::from_speed_fraction(0.02);
const double kOm = larmor_from_B(0.1);

EnvelopeSolution ramp_envelope() {
  const auto field = FieldProfile::smooth_ramp(1e-4, 3e-3, kOm, 2 * kOm);
  return solve_envelope(field, kBeam, {0.0, 0.9 * landau_width(kOm), CurvatureRadius::finite(0.05)}, {0.0, 4e-3});
}

EnvelopeSolution landau_envelope(double om, double span) {
  return solve_envelope(FieldProfile::uniform(om), kBeam, {0.0, landau_width(om), CurvatureRadius::flat()},
                        {0.0, span});
}

// Explicit series sum_k (-1)^k C(n+a, n-k) x^k / k!, in long double since the
// alternating terms cancel badly for large x.
double laguerre_series(int n, int a, double x) {
  long double sum = 0.0L;
  for (int k = 0; k <= n; ++k) {
    long double binom = 1.0L;
    for (int j = 1; j <= n - k; ++j) binom *= static_cast<long double>(a + k + j) / j;
    long double term = binom;
    for (int j = 1; j <= k; ++j) term *= static_cast<long double>(x) / j;
    sum += (k % 2 ? -1.0L : 1.0L) * term;
  }
  return static_cast<double>(sum);
}

// Independent radial quadrature (Boost GK61) of 2 pi int |chi|^2 rho^p rho d rho.
double radial_moment(const ModeSlice& s, int power) {
  const double w = s.width();
  const double rmax = radial_cutoff(w, s.qn().n + s.qn().abs_l());
  auto f = [&](double r) { return 2 * std::numbers::pi * std::norm(s(r, 0.3)) * std::pow(r, power + 1); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, rmax, 8, 1e-12);
}

}  // namespace

TEST(Modes, LaguerreLowOrdersAndSeriesOracle) {
  for (int a : {0, 1, 4}) {
    for (double x : {0.0, 0.3, 2.5, 11.0}) {
      EXPECT_EQ(assoc_laguerre(0, a, x), 1.0);
      EXPECT_DOUBLE_EQ(assoc_laguerre(1, a, x), 1.0 + a - x);
    }
  }
  EXPECT_DOUBLE_EQ(assoc_laguerre(2, 0, 2.0), -1.0);
  EXPECT_NEAR(assoc_laguerre(5, 3, 1.7), -2.34162141666666667, 1e-14);
  EXPECT_NEAR(assoc_laguerre(10, 2, 7.5), -1.10247312273297991, 1e-13);
  for (int n = 0; n <= 12; ++n) {
    for (int a = 0; a <= 5; ++a) {
      for (double x : {0.1, 1.0, 3.7, 9.0}) {
        const double ref = laguerre_series(n, a, x);
        EXPECT_NEAR(assoc_laguerre(n, a, x), ref, 1e-11 * std::max(1.0, std::abs(ref)));
      }
    }
  }
  EXPECT_THROW(assoc_laguerre(-1, 0, 1.0), std::invalid_argument);
}

TEST(Modes, LaguerreMatchesStdlibUpToMaxIndex) {
  for (int n : {20, 40, 64}) {
    for (unsigned a : {0u, 3u}) {
      for (double x : {0.5, 10.0, 60.0}) {
        const double ref = std::assoc_laguerre(static_cast<unsigned>(n), a, x);
        EXPECT_NEAR(assoc_laguerre(n, static_cast<int>(a), x), ref, 1e-9 * std::max(1.0, std::abs(ref)));
        EXPECT_NEAR(assoc_laguerre_all(n, static_cast<int>(a), x).back(), ref, 1e-9 * std::max(1.0, std::abs(ref)));
      }
    }
  }
}

TEST(Modes, NormalizationConstants) {
  EXPECT_DOUBLE_EQ(normalization({0, 0}), std::sqrt(2 / std::numbers::pi));
  EXPECT_DOUBLE_EQ(normalization({0, 1}), std::sqrt(4 / std::numbers::pi));
  EXPECT_DOUBLE_EQ(normalization({0, -1}), std::sqrt(4 / std::numbers::pi));
  EXPECT_THROW(normalization({-1, 0}), std::invalid_argument);
  EXPECT_THROW(normalization({kMaxRadialIndex + 1, 0}), std::invalid_argument);
}

TEST(Modes, UnitNormAlongRampEnvelope) {
  const auto env = ramp_envelope();
  for (int n = 0; n <= 3; ++n) {
    for (int l = -3; l <= 3; ++l) {
      const ModeSpec m{{n, l}, env, 0.0};
      for (int k = 0; k < 10; ++k) {
        const double z = 4e-3 * k / 9.0;
        EXPECT_NEAR(radial_moment(ModeSlice(m, z), 0), 1.0, 1e-10) << n << "," << l << " z=" << z;
      }
    }
  }
}

TEST(Modes, RadialMomentFactor) {
  const auto env = ramp_envelope();
  for (int n = 0; n <= 3; ++n) {
    for (int l = 0; l <= 3; ++l) {
      const ModeSlice s({{n, l}, env, 0.0}, 2.1e-3);
      const double f = radial_moment(s, 2) / (s.width() * s.width());
      EXPECT_NEAR(f, (2 * n + l + 1) / 2.0, 1e-10) << n << "," << l;
    }
  }
}

TEST(Modes, EvaluationProperties) {
  const auto env = ramp_envelope();
  const ModeSpec vortex{{1, 2}, env, 0.0};
  const double z = 1.1e-3;
  EXPECT_EQ(std::abs(evaluate_mode(vortex, 0.0, 0.4, z)), 0.0);
  const double w = env.width(z);
  for (double d : {0.3, 1.7, -2.2}) {
    EXPECT_NEAR(std::abs(evaluate_mode(vortex, 0.6 * w, 0.1 + d, z)), std::abs(evaluate_mode(vortex, 0.6 * w, 0.1, z)),
                1e-12 * std::abs(evaluate_mode(vortex, 0.6 * w, 0.1, z)));
  }
  const ModeSpec node{{1, 0}, env, 0.0};
  double peak = 0.0;
  for (int i = 0; i <= 400; ++i) peak = std::max(peak, std::abs(evaluate_mode(node, 3 * w * i / 400.0, 0.0, z)));
  EXPECT_LT(std::abs(evaluate_mode(node, w / std::sqrt(2.0), 0.0, z)), 1e-12 * peak);
  EXPECT_THROW(evaluate_mode(node, -1e-9, 0.0, z), std::invalid_argument);
}

TEST(Modes, FreeSpaceGouyPhase) {
  const double w0 = 2e-7;
  const double zr = kBeam.rayleigh_length(w0);
  const ZInterval d{-6 * zr, 6 * zr};
  SolveOptions force;
  force.force_numeric = true;
  for (const auto& env : {solve_envelope(FieldProfile::free(), kBeam, {0.0, w0, CurvatureRadius::flat()}, d),
                          solve_envelope(FieldProfile::free(), kBeam, {0.0, w0, CurvatureRadius::flat()}, d, force)}) {
    const ModeSpec m{{0, 0}, env, 0.0};
    for (int i = 0; i < 10; ++i) {
      const double z = -5.5 * zr + 11 * zr * i / 9.0;
      const auto p = phase_theta(m, z);
      EXPECT_NEAR(p.total, std::atan(z / zr), 1e-9) << to_string(env.backend());
      EXPECT_EQ(p.rotation, 0.0);
    }
  }
}

TEST(Modes, FreeSpaceGouyPhaseFiniteCurvature) {
  const double w0 = 2e-7;
  const double zr = kBeam.rayleigh_length(w0);
  for (double r0 : {-3 * zr, -0.5 * zr, 0.8 * zr, 10 * zr}) {
    const auto env = solve_envelope(FieldProfile::free(), kBeam, {0.0, w0, CurvatureRadius::finite(r0)},
                                    {-0.4 * zr, 6 * zr});
    for (const QuantumNumbers qn : {QuantumNumbers{0, 0}, QuantumNumbers{2, -3}}) {
      const ModeSpec m{qn, env, 0.0};
      for (double z : {-0.3 * zr, 0.2 * zr, 1.0 * zr, 5.0 * zr}) {
        const double ref = qn.invariant_eigenvalue() *
                           (std::atan(z / zr * (1 + zr * zr / (r0 * r0)) + zr / r0) - std::atan(zr / r0));
        EXPECT_NEAR(phase_theta(m, z).total, ref, 1e-9) << "R0/zR=" << r0 / zr << " z/zR=" << z / zr;
      }
    }
  }
}

TEST(Modes, LandauModePhase) {
  for (double om : {kOm, -kOm}) {
    const double span = 4e-3;
    const auto env = landau_envelope(om, span);
    for (int n = 0; n <= 2; ++n) {
      for (int l = -3; l <= 3; ++l) {
        const ModeSpec m{{n, l}, env, 0.0};
        for (double z : {1e-4, 1.3e-3, 4e-3}) {
          const double ref = (2 * n + std::abs(l) + 1) * std::abs(om) * z / kBeam.speed() + l * om * z / kBeam.speed();
          const double got = phase_theta(m, z).total;
          EXPECT_LE(std::abs(got - ref), 1e-10 * std::max(std::abs(ref), 1e-300)) << n << "," << l;
        }
      }
    }
  }
}

TEST(Modes, GlaserSpecialChoicePhase) {
  const double a = 1e-3, c = 1.5e-3;
  const double om0 = 2.0 * kBeam.speed() / a;
  const auto field = FieldProfile::glaser(om0, a, c);
  const double beta = std::sqrt(1 + a * a * om0 * om0 / (kBeam.speed() * kBeam.speed()));
  const double wc = glaser_matched_width(om0, a, kBeam);
  const auto env = solve_envelope(field, kBeam, {c, wc, CurvatureRadius::flat()}, {c - 10 * a, c + 10 * a});
  for (const QuantumNumbers qn : {QuantumNumbers{0, 0}, QuantumNumbers{1, 2}, QuantumNumbers{2, -1}}) {
    const ModeSpec m{qn, env, 0.0};
    for (double z : {-7e-3, 0.5e-3, 1.5e-3, 9e-3}) {
      const double ref = (qn.invariant_eigenvalue() * beta + qn.l * om0 * a / kBeam.speed()) *
                         (std::atan((z - c) / a) + std::atan(c / a));
      EXPECT_NEAR(phase_theta(m, z).total, ref, 1e-9 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Modes, PhaseSymmetry) {
  const auto env_p = ramp_envelope();
  const auto fn = FieldProfile::smooth_ramp(1e-4, 3e-3, -kOm, -2 * kOm);
  const auto env_n = solve_envelope(fn, kBeam, env_p.init(), env_p.domain());
  for (int n = 0; n <= 2; ++n) {
    for (int l = -3; l <= 3; ++l) {
      for (double z : {7e-4, 3.9e-3}) {
        const auto a = phase_theta({{n, l}, env_p, 0.0}, z);
        const auto b = phase_theta({{n, -l}, env_n, 0.0}, z);
        const auto c = phase_theta({{n, -l}, env_p, 0.0}, z);
        EXPECT_NEAR(a.total, b.total, 1e-12 * std::abs(a.total));
        EXPECT_NEAR(a.gouy, c.gouy, 1e-14 * a.gouy);
        EXPECT_EQ(a.rotation, -c.rotation);
        EXPECT_NEAR(a.total, a.gouy + a.rotation, 1e-15 * std::abs(a.total));
      }
    }
  }
}

TEST(Modes, OrthonormalityOnSharedEnvelope) {
  const auto env = ramp_envelope();
  const double z = 2.5e-3;
  std::vector<ModeSlice> slices;
  for (int n = 0; n <= 3; ++n)
    for (int l = -3; l <= 3; ++l) slices.emplace_back(ModeSpec{{n, l}, env, 0.0}, z);
  const double rmax = radial_cutoff(env.width(z), 6);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    for (std::size_t j = i; j < slices.size(); ++j) {
      const cplx ip = inner_product(slices[i], slices[j], rmax, 32, 1e-11);
      EXPECT_NEAR(std::abs(ip - (i == j ? 1.0 : 0.0)), 0.0, 1e-9);
    }
  }
}

TEST(Modes, InterferenceBasics) {
  const auto env = ramp_envelope();
  const double z = 1e-3;
  const ModeSlice a({{0, 2}, env, 0.0}, z), b({{0, 0}, env, 0.0}, z);
  const auto grid = Grid2D::square(3 * env.width(z), 21);
  const auto self = interference_term(a, a, grid);
  for (const auto& v : self) {
    EXPECT_EQ(v.imag(), 0.0);
    EXPECT_GE(v.real(), 0.0);
  }
  // Phase of chi_2 chi_0^* winds by 4 pi around the origin.
  double wind = 0.0, prev = std::arg(a(0.5 * env.width(z), 0.0) * std::conj(b(0.5 * env.width(z), 0.0)));
  for (int i = 1; i <= 400; ++i) {
    const double phi = 2 * std::numbers::pi * i / 400;
    const double ph = std::arg(a(0.5 * env.width(z), phi) * std::conj(b(0.5 * env.width(z), phi)));
    double d = ph - prev;
    while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
    wind += d;
    prev = ph;
  }
  EXPECT_NEAR(wind, 4 * std::numbers::pi, 1e-9);
  const std::vector<cplx> small(3);
  EXPECT_THROW(interference_term(std::span<const cplx>(self), std::span<const cplx>(small)), GridMismatch);
}

TEST(Modes, DeltaLTwoPatternHasTwofoldSymmetry) {
  const auto env = ramp_envelope();
  const double rt = 1 / std::sqrt(2.0);
  const Superposition sup{{{rt, {{0, 0}, env, 0.0}}, {rt, {{0, 2}, env, 0.0}}}};
  const SuperpositionSlice s(sup, 1.9e-3);
  const double r = 0.8 * env.width(1.9e-3);
  for (double phi : {0.1, 0.9, 2.0}) {
    EXPECT_NEAR(std::norm(s(r, phi)), std::norm(s(r, phi + std::numbers::pi)), 1e-12 * std::norm(s(r, phi)));
  }
  EXPECT_GT(std::abs(std::norm(s(r, 0.1)) - std::norm(s(r, 0.1 + std::numbers::pi / 2))), 1e-3 * std::norm(s(r, 0.1)));
}

TEST(Modes, InterferencePeakRotationRate) {
  for (double om : {kOm, -kOm}) {
    const double period = std::numbers::pi * kBeam.speed() / std::abs(om);
    const auto env = landau_envelope(om, 2 * period);
    const double rt = 1 / std::sqrt(2.0);
    const Superposition sup{{{rt, {{0, 0}, env, 0.0}}, {rt, {{0, 1}, env, 0.0}}}};
    std::vector<double> zs, phis;
    for (int i = 0; i <= 64; ++i) {
      zs.push_back(2 * period * i / 64.0);
      phis.push_back(oracle::azimuthal_peak(SuperpositionSlice(sup, zs.back()), 0.7 * env.width(0.0)));
    }
    const double rate = oracle::unwrapped_rate(zs, phis);
    const double expect = om > 0 ? 2 * om / kBeam.speed() : 0.0;
    EXPECT_NEAR(rate, expect, 0.01 * 2 * std::abs(om) / kBeam.speed());
  }
}

TEST(Modes, ParaxialEquationResidual) {
  const auto env = ramp_envelope();
  const double z = 1.7e-3;
  for (const QuantumNumbers qn : {QuantumNumbers{0, 0}, QuantumNumbers{1, 2}, QuantumNumbers{2, -1}}) {
    const ModeSlice s({qn, env, 0.0}, z);
    const double w = s.width();
    const double half = 4.5 * w * std::sqrt(qn.n + qn.abs_l() + 1.0);
    const auto coarse = oracle::paraxial_residual(s, s.omega(), kBeam, w / 25, half);
    const auto fine = oracle::paraxial_residual(s, s.omega(), kBeam, w / 50, half);
    EXPECT_GE(std::log2(coarse.relative() / fine.relative()), 3.5);
    EXPECT_LE(fine.relative(), 1e-4);
  }
}

TEST(Modes, SuperpositionDerivativeIsLinear) {
  const auto env = ramp_envelope();
  const Superposition sup{{{cplx(0.6, 0.0), {{0, 0}, env, 0.0}}, {cplx(0.0, 0.8), {{1, 1}, env, 0.0}}}};
  const SuperpositionSlice s(sup, 2e-3);
  const ModeSlice a({{0, 0}, env, 0.0}, 2e-3), b({{1, 1}, env, 0.0}, 2e-3);
  const double r = 0.4 * env.width(2e-3);
  EXPECT_NEAR(std::abs(s.dz(r, 0.3) - (0.6 * a.dz(r, 0.3) + cplx(0, 0.8) * b.dz(r, 0.3))), 0.0,
              1e-12 * std::abs(s.dz(r, 0.3)));
  EXPECT_NEAR(sup.coefficient_norm2(), 1.0, 1e-15);
  EXPECT_EQ(s.max_radial_order(), 2);
}
