#include <cmath>

#include <gtest/gtest.h>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gaugelink/doublewell.hpp"

using namespace gaugelink;
using namespace gaugelink::doublewell;

namespace {

// Richardson-extrapolated finite differences, step 0.005 on [-12, 12].
struct FdCase {
  double d_R, r, delta;
  double e[4];
};
const FdCase kFd[] = {
    {2.0, 1.0, 0.0, {0.475709420678, 0.51788169732, 1.36751771389, 1.611507011287}},
    {2.0, 1.0, 0.5, {0.498747384501, 0.995539619801, 1.481981870391, 1.97677730626}},
    {2.0, 1.4, 0.49, {0.499977976955, 1.189198083273, 1.499564936348, 2.479067440605}},
};

double norm2(const EigenState& s, const DoubleWellParams& p) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double x) {
    const double v = eval_value(s, p, x);
    return v * v;
  };
  const double X = support_half_width(p, s.energy);
  return gauss_kronrod<double, 31>::integrate(f, -X, 0.0, 15, 1e-13) +
         gauss_kronrod<double, 31>::integrate(f, 0.0, X, 15, 1e-13);
}

}  // namespace

TEST(DoubleWell, GeometryRelation) {
  const auto p = from_geometry(2.0, 1.0, 0.5);
  EXPECT_NEAR(p.d_L, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(potential_value(p, -p.d_L), 0.0, 1e-15);
  EXPECT_NEAR(potential_value(p, 0.0 - 1e-300), potential_value(p, 0.0), 1e-12);
  EXPECT_THROW(from_geometry(2.0, -1.0, 0.0), GeometryError);
  EXPECT_THROW(from_geometry(0.5, 1.0, -1.0), GeometryError);
}

TEST(DoubleWell, NonInteractingMatchesFiniteDifferences) {
  for (const auto& c : kFd) {
    const auto p = from_geometry(c.d_R, c.r, c.delta);
    const auto st = solve_noninteracting(p, 4);
    ASSERT_EQ(st.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(st[i].energy, c.e[i], 1e-4) << c.d_R << " " << c.r << " " << i;
  }
}

TEST(DoubleWell, HarmonicLimit) {
  const auto p = from_geometry(0.0, 1.0, 0.0);
  const auto st = solve_noninteracting(p, 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(st[i].energy, i + 0.5, 1e-10);
}

TEST(DoubleWell, StatesAreNormalizedAndContinuous) {
  const auto p = from_geometry(2.0, 1.0, 0.5);
  for (const auto& s : solve_noninteracting(p, 4)) {
    EXPECT_NEAR(norm2(s, p), 1.0, 1e-9);
    EXPECT_NEAR(s.at_origin.u_plus, s.at_origin.u_minus, 1e-10);
    EXPECT_NEAR(s.at_origin.p_plus, s.at_origin.p_minus, 1e-8);
  }
}

TEST(DoubleWell, ContactJumpConditions) {
  const auto p = from_geometry(2.0, 1.0, 0.5);
  const auto ch = ChannelInteraction::from_static_couplings(1.0, 0.3);
  for (const auto& s : solve_interacting(p, ch, 3)) {
    const auto& b = s.at_origin;
    EXPECT_NEAR(b.p_plus - b.p_minus, -ch.inv_a_e * (b.u_plus + b.u_minus), 1e-8);
    EXPECT_NEAR(b.u_plus - b.u_minus, -ch.a_o * (b.p_plus + b.p_minus), 1e-8);
  }
}

TEST(DoubleWell, DeltaBarrierMatchesFiniteDifferences) {
  // Same grid as above with weight g/h at x = 0, g = 1.
  const double ref[4] = {0.5019993, 1.0048876, 1.51674817, 2.03876801};
  const auto p = from_geometry(2.0, 1.0, 0.5);
  const auto st = solve_interacting(p, ChannelInteraction::from_static_couplings(1.0, 0.0), 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(st[i].energy, ref[i], 2e-4) << i;
}

TEST(DoubleWell, BuschEvenAndOdd) {
  const auto p = from_geometry(0.0, 1.0, 0.0);
  for (double g : {-2.0, -1.0, 1.0, 2.0}) {
    const auto even = solve_interacting(p, ChannelInteraction::from_static_couplings(g, 0.0), 6);
    int checked = 0;
    for (const auto& s : even) {
      if (std::fabs(s.energy - std::round(s.energy - 0.5) - 0.5) < 1e-9) continue;  // odd, untouched
      EXPECT_LE(std::fabs(busch_relation_residual(s.energy, g)), 1e-8) << g << " " << s.energy;
      ++checked;
    }
    EXPECT_GE(checked, 2);
    const auto odd = solve_interacting(p, ChannelInteraction::from_static_couplings(0.0, g), 6);
    checked = 0;
    for (const auto& s : odd) {
      if (std::fabs(s.energy - std::round(s.energy - 0.5) - 0.5) < 1e-9) continue;
      EXPECT_LE(std::fabs(busch_odd_residual(s.energy, g)), 1e-8) << g << " " << s.energy;
      ++checked;
    }
    EXPECT_GE(checked, 2);
  }
}

TEST(DoubleWell, LevelCountValidated) {
  const auto p = from_geometry(2.0, 1.0, 0.5);
  EXPECT_THROW(solve_noninteracting(p, 0), DomainError);
  EXPECT_THROW(solve_noninteracting(p, 41), DomainError);
}
