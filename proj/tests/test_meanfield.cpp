#include <cmath>

#include <gtest/gtest.h>

#include "gaugelink/meanfield.hpp"

using namespace gaugelink;
using namespace gaugelink::meanfield;

namespace {

// Lowest two modes on a plain second-order grid over [-12, 12].
struct FdModes {
  double e[2];
  double quartic[2];
};

FdModes fd_modes(const doublewell::DoubleWellParams& w, double h) {
  const int n = static_cast<int>(std::lround(24.0 / h)) - 1;
  Eigen::VectorXd diag(n), off = Eigen::VectorXd::Constant(n - 1, -0.5 / (h * h));
  for (int j = 0; j < n; ++j) diag(j) = 1.0 / (h * h) + doublewell::potential_value(w, -12.0 + (j + 1) * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off);
  FdModes m;
  for (int k = 0; k < 2; ++k) {
    m.e[k] = es.eigenvalues()(k);
    const Eigen::VectorXd v = es.eigenvectors().col(k) / std::sqrt(h);
    m.quartic[k] = h * v.array().pow(4).sum();
  }
  return m;
}

// Richardson combination of steps 0.01 and 0.02.
FdModes fd_oracle(const doublewell::DoubleWellParams& w) {
  const auto a = fd_modes(w, 0.01), b = fd_modes(w, 0.02);
  FdModes r;
  for (int k = 0; k < 2; ++k) {
    r.e[k] = (4 * a.e[k] - b.e[k]) / 3;
    r.quartic[k] = (4 * a.quartic[k] - b.quartic[k]) / 3;
  }
  return r;
}

MeanFieldConfig small(int N, double g) {
  MeanFieldConfig c;
  c.N = N;
  c.g = g;
  c.grid.n_points = 256;
  return c;
}

}  // namespace

TEST(MeanField, ModeEnergiesMatchGridOracle) {
  const MeanFieldConfig c;
  const auto e = well_mode_energies(c);
  const auto ref = fd_oracle(c.well);
  EXPECT_NEAR(e.E_L0, ref.e[0], 1e-5);
  EXPECT_NEAR(e.E_R0, ref.e[1], 1e-5);
  EXPECT_NEAR(e.U_L, c.g * ref.quartic[0], 1e-5);
  EXPECT_NEAR(e.U_R, c.g * ref.quartic[1], 1e-5);
  // frozen
  EXPECT_NEAR(e.E_L0, 0.498747, 1e-6);
  EXPECT_NEAR(e.E_R0, 0.995540, 1e-6);
  EXPECT_NEAR(e.U_L, 0.083252, 1e-6);
  EXPECT_NEAR(e.U_R, 0.081538, 1e-6);
}

TEST(MeanField, PulseAtTimeZero) {
  const auto e = well_mode_energies(MeanFieldConfig{});
  const double dU = e.U_L - e.U_R, U = 0.5 * (e.U_L + e.U_R);
  EXPECT_NEAR(compensating_pulse(e)(0.0), e.E_L0 - e.E_R0 + dU + U, 1e-15);
  EXPECT_NEAR(compensating_pulse(e, true)(0.0), e.E_R0 - e.E_L0 + dU + U, 1e-15);
  const double T = 2 * M_PI / (e.E_R0 - e.E_L0);
  EXPECT_NEAR(compensating_pulse(e)(0.5 * T), e.E_L0 - e.E_R0 + dU - U, 1e-12);
  EXPECT_THROW(compensating_pulse(1.0, 1.0, 0.0, 0.0, 0.0), DomainError);
}

TEST(MeanField, ConfigValidation) {
  MeanFieldConfig c;
  c.grid.n_points = 300;
  EXPECT_THROW(c.validate(), DomainError);
  c.grid.n_points = 256;
  c.grid.x_max = 5.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.grid.x_max = 10.0;
  c.N = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(MeanField, LaplacianIsFourthOrder) {
  const Discretization d(small(1, 0.0));
  Eigen::VectorXcd f(d.size()), out(d.size());
  for (int j = 0; j < d.size(); ++j) f(j) = std::exp(-d.x()(j) * d.x()(j));
  d.kinetic(f, out);
  double worst = 0.0;
  for (int j = 2; j < d.size() - 2; ++j) {
    const double x = d.x()(j);
    const double exact = -0.5 * (4 * x * x - 2) * std::exp(-x * x);
    worst = std::max(worst, std::abs(out(j) - exact));
  }
  EXPECT_LE(worst, 2e-4);
  EXPECT_NEAR(d.dx() * d.delta().sum(), 1.0, 1e-14);
}

TEST(MeanField, RelaxedOrbitalIsRightLocalizedAndStationary) {
  const Discretization d(small(10, 0.21));
  const Eigen::VectorXcd phi = relaxed_right_orbital(d);
  EXPECT_NEAR(d.norm2(phi), 1.0, 1e-12);
  EXPECT_LT(std::real(d.inner_left(phi, phi)), 0.05);
  const auto s = initial_state(d);
  const auto o = observe(d, s);
  EXPECT_NEAR(o.sigma_x, -1.0, 1e-12);
  EXPECT_NEAR(o.O_R_minus, o.O_R, 1e-12);
  EXPECT_NEAR(s.total_norm(d), 1.0, 1e-12);
}

TEST(MeanField, LinearLimitIsRightExcitedMode) {
  const Discretization d(small(1, 0.0));
  const Eigen::VectorXcd phi = relaxed_right_orbital(d);
  const Eigen::MatrixXd H = d.linear_hamiltonian(d.external());
  const double e = std::real(d.inner(phi, H.cast<cplx>() * phi));
  const auto w = well_mode_energies(MeanFieldConfig{});
  EXPECT_NEAR(e, w.E_R0, 2e-3);
}

TEST(MeanField, SplitAndCombinedFormulationsAgree) {
  const Discretization d(small(10, 0.21));
  const auto s0 = initial_state(d);
  const auto pulse = compensating_pulse(well_mode_energies(d.config()));
  PropagateOptions opt;
  opt.dt_out = 1.0;
  const auto a = propagate(d, s0, pulse, 4.0, opt);
  opt.form = Formulation::split;
  const auto b = propagate(d, s0, pulse, 4.0, opt);
  const auto oa = mf_observables(d, a), ob = mf_observables(d, b);
  ASSERT_EQ(oa.size(), ob.size());
  for (std::size_t i = 0; i < oa.size(); ++i) {
    EXPECT_NEAR(oa[i].O_L, ob[i].O_L, 1e-7);
    EXPECT_NEAR(oa[i].O_L_plus, ob[i].O_L_plus, 1e-7);
    EXPECT_NEAR(oa[i].sigma_x, ob[i].sigma_x, 1e-7);
  }
  EXPECT_LE(a.max_norm_drift, 1e-8);
}

TEST(MeanField, SingleParticleIsLinearSchrodinger) {
  // N = 1, g = 0: psi_a obeys i psi_a' = H_a psi_a + (Omega/2) psi_abar exactly.
  const Discretization d(small(1, 0.0));
  const auto s0 = initial_state(d);
  const double om = 0.5;
  PropagateOptions opt;
  opt.dt_out = 1.0;
  const auto tr = propagate(d, s0, constant_pulse(om), 1.0, opt);
  const int n = d.size();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = d.linear_hamiltonian(d.potential(0)).cast<cplx>();
  H.bottomRightCorner(n, n) = d.linear_hamiltonian(d.potential(1)).cast<cplx>();
  for (int j = 0; j < n; ++j) H(j, n + j) = H(n + j, j) = 0.5 * om;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  Eigen::VectorXcd v(2 * n);
  v << s0.psi[0], s0.psi[1];
  Eigen::VectorXcd a = es.eigenvectors().adjoint() * v;
  for (int i = 0; i < 2 * n; ++i) a(i) *= std::exp(cplx(0.0, -es.eigenvalues()(i)));
  const Eigen::VectorXcd ref = es.eigenvectors() * a;
  Eigen::VectorXcd got(2 * n);
  got << tr.states.back().psi[0], tr.states.back().psi[1];
  EXPECT_LE(std::sqrt(d.dx()) * (got - ref).norm(), 1e-6);
}

TEST(MeanField, EmptySpinComponentIsRejected) {
  const Discretization d(small(2, 0.0));
  auto s = initial_state(d);
  s.psi[1].setZero();
  EXPECT_THROW(propagate(d, s, constant_pulse(0.5), 1.0), NumericalError);
}
