#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "gaugelink/contact.hpp"

using namespace gaugelink;
using namespace gaugelink::contact;

namespace {

BasisFunction harmonic_fn(const HarmonicBasis& b, int k) {
  return {[b, k](double x) {
    std::vector<double> v(b.size()), d(b.size());
    b.eval(x, v.data(), d.data());
    return doublewell::Amplitude{v[k], d[k]};
  }};
}

BasisFunction well_fn(const doublewell::EigenState& s, const doublewell::DoubleWellParams& p) {
  return {[s, p](double x) { return doublewell::eval_wavefunction(s, p, x); }};
}

}  // namespace

TEST(Contact, ScatteringLengthConversion) {
  const MassConfig equal{1.0};
  const auto c = couplings_from_scattering_lengths(-0.5, 0.25, equal);
  EXPECT_NEAR(c.g_e, 4.0, 1e-15);
  EXPECT_NEAR(c.g_o, -0.5, 1e-15);
  EXPECT_EQ(couplings_from_scattering_lengths(std::numeric_limits<double>::infinity(), 0.0, equal).g_e, 0.0);
  EXPECT_THROW(couplings_from_scattering_lengths(0.0, 0.0, equal), DomainError);
  EXPECT_THROW(couplings_from_scattering_lengths(1.0, 0.0, MassConfig{-1.0}), DomainError);
  EXPECT_NEAR(MassConfig{3.0}.reduced_mass(), 0.25, 1e-15);
}

TEST(Contact, GaussianOverlapsInClosedForm) {
  const HarmonicBasis b(1.0, 1.0, 2);
  const auto f = harmonic_fn(b, 0);
  const double even = two_body_matrix_element(f, f, f, f, 1.0, 0.0, MassConfig{1.0}, 12.0);
  EXPECT_NEAR(even, 1.0 / std::sqrt(2 * M_PI), 1e-10);
  const double odd = two_body_matrix_element(f, f, f, f, 0.0, 1.0, MassConfig{1.0}, 12.0);
  EXPECT_NEAR(odd, -1.0 / (4 * std::sqrt(2 * M_PI)), 1e-10);
}

TEST(Contact, HarmonicBasisIsOrthonormal) {
  const HarmonicBasis b(2.0, 3.0, 5);
  const double X = b.support(), h = 1e-3;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(5, 5);
  std::vector<double> v(5), d(5);
  for (double x = -X; x <= X; x += h) {
    b.eval(x, v.data(), d.data());
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) G(i, j) += h * v[i] * v[j];
  }
  EXPECT_LE((G - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
  const auto X2 = b.x2_matrix();
  EXPECT_NEAR(X2(0, 0), 1.0 / 12.0, 1e-15);
}

TEST(Contact, IntegralTableMatchesSingleElements) {
  const auto p = doublewell::from_geometry(2.0, 1.0, 0.5);
  const auto st = doublewell::solve_noninteracting(p, 2);
  const HarmonicBasis imp(1.0, 20.0, 2);
  const auto T = two_body_integrals(st, p, imp, MassConfig{1.0});
  const double X = doublewell::support_half_width(p, st[1].energy);
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m)
      for (int np = 0; np < 2; ++np)
        for (int mp = 0; mp < 2; ++mp) {
          const double e = two_body_matrix_element(well_fn(st[n], p), harmonic_fn(imp, m), well_fn(st[np], p),
                                                   harmonic_fn(imp, mp), 1.0, 0.0, MassConfig{1.0}, X);
          const double o = two_body_matrix_element(well_fn(st[n], p), harmonic_fn(imp, m), well_fn(st[np], p),
                                                   harmonic_fn(imp, mp), 0.0, -1.0, MassConfig{1.0}, X);
          EXPECT_NEAR(T.even(n * 2 + m, np * 2 + mp), e, 1e-8);
          EXPECT_NEAR(T.odd(n * 2 + m, np * 2 + mp), o, 1e-7);
        }
}

TEST(Contact, TightImpurityReducesToStaticElement) {
  const auto p = doublewell::from_geometry(2.0, 1.0, 0.5);
  const auto st = doublewell::solve_noninteracting(p, 2);
  const HarmonicBasis imp(1.0, 1e4, 1);
  const auto T = two_body_integrals(st, p, imp, MassConfig{1.0});
  EXPECT_NEAR(T.even(0, 1), j_matrix_element(st[0], st[1], 1.0, 0.0), 1e-4);
  EXPECT_NEAR(T.even(1, 1), j_matrix_element(st[1], st[1], 1.0, 0.0), 1e-4);
}

TEST(Contact, StaticMatrixIsSymmetric) {
  const auto p = doublewell::from_geometry(2.0, 1.0, 0.5);
  const auto st = doublewell::solve_noninteracting(p, 4);
  const auto J = j_matrix(st, 1.0, 0.1);
  EXPECT_LE((J - J.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(J(0, 1), st[0].at_origin.u_plus * st[1].at_origin.u_plus -
                           0.1 * st[0].at_origin.p_plus * st[1].at_origin.p_plus, 1e-8);
}
