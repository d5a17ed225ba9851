#pragma once
// Four-state model {|L,dn>, |R,dn>, |L,up>, |R,up>} of one particle in the
// two lowest double-well states and a static two-level impurity.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gaugelink/contact.hpp"
#include "gaugelink/doublewell.hpp"

namespace gaugelink::fourlevel {

using cplx = std::complex<double>;
using Vector4c = Eigen::Matrix<cplx, 4, 1>;

enum Index { L_down = 0, R_down = 1, L_up = 2, R_up = 3 };

struct FourLevelModel {
  double e_L = 0.0;
  double e_R = 0.0;
  Eigen::Matrix2d j_down = Eigen::Matrix2d::Zero();  // rows/cols (L, R)
  Eigen::Matrix2d j_up = Eigen::Matrix2d::Zero();
  double omega_R = 0.0;

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
    H(L_down, L_down) = e_L + j_down(0, 0);
    H(R_down, R_down) = e_R + j_down(1, 1);
    H(L_down, R_down) = H(R_down, L_down) = j_down(0, 1);
    H(L_up, L_up) = e_L + j_up(0, 0);
    H(R_up, R_up) = e_R + j_up(1, 1);
    H(L_up, R_up) = H(R_up, L_up) = j_up(0, 1);
    H(L_down, L_up) = H(L_up, L_down) = 0.5 * omega_R;
    H(R_down, R_up) = H(R_up, R_down) = 0.5 * omega_R;
    return H;
  }

  // Spin-dependent hopping split into J0 + Jz sigma_z.
  double j0_LR() const { return 0.5 * (j_up(0, 1) + j_down(0, 1)); }
  double jz_LR() const { return 0.5 * (j_up(0, 1) - j_down(0, 1)); }
};

inline Eigen::Matrix2d channel_matrix(const doublewell::EigenState& L, const doublewell::EigenState& R, double g_e,
                                      double g_o) {
  Eigen::Matrix2d J;
  J(0, 0) = contact::j_matrix_element(L, L, g_e, g_o);
  J(1, 1) = contact::j_matrix_element(R, R, g_e, g_o);
  J(0, 1) = J(1, 0) = contact::j_matrix_element(L, R, g_e, g_o);
  return J;
}

inline FourLevelModel build(const doublewell::EigenState& L, const doublewell::EigenState& R,
                            const contact::SpinContactCouplings& c, double omega_R) {
  FourLevelModel m;
  m.e_L = L.energy;
  m.e_R = R.energy;
  m.j_down = channel_matrix(L, R, c.g_e_down, c.g_o_down);
  m.j_up = channel_matrix(L, R, c.g_e_up, c.g_o_up);
  m.omega_R = omega_R;
  return m;
}

inline FourLevelModel build(const doublewell::DoubleWellParams& p, const contact::SpinContactCouplings& c,
                            double omega_R) {
  const auto states = doublewell::solve_noninteracting(p, 2);
  return build(states[0], states[1], c, omega_R);
}

/// hbar Omega_R = E_R - E_L + (J_dn_RR + J_up_RR - J_dn_LL - J_up_LL) / 2.
inline double resonant_rabi(const FourLevelModel& m) {
  return m.e_R - m.e_L + 0.5 * (m.j_down(1, 1) + m.j_up(1, 1) - m.j_down(0, 0) - m.j_up(0, 0));
}

/// Transfer time pi / (2 |Jz|) of the target Hamiltonian.
inline double rwa_transfer_time(const FourLevelModel& m) { return M_PI / (2.0 * std::fabs(m.jz_LR())); }

/// |R,-> = (|R,up> - |R,dn>)/sqrt2.
inline Vector4c state_R_minus() {
  Vector4c v = Vector4c::Zero();
  v(R_down) = -M_SQRT1_2;
  v(R_up) = M_SQRT1_2;
  return v;
}

struct FourLevelTrajectory {
  std::vector<double> times;
  std::vector<Vector4c> amplitudes;
};

inline FourLevelTrajectory evolve(const FourLevelModel& m, const Vector4c& initial, double t_final,
                                  double dt_out = 0.5) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m.matrix());
  const Eigen::Matrix4d V = es.eigenvectors();
  const Eigen::Vector4d lam = es.eigenvalues();
  const Vector4c c0 = V.transpose().cast<cplx>() * initial;
  FourLevelTrajectory tr;
  const long n = static_cast<long>(std::floor(t_final / dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = k * dt_out;
    Vector4c ct;
    for (int i = 0; i < 4; ++i) ct(i) = std::exp(cplx(0.0, -lam(i) * t)) * c0(i);
    tr.times.push_back(t);
    tr.amplitudes.push_back(V.cast<cplx>() * ct);
  }
  return tr;
}

struct Observables {
  double O_L_plus = 0.0;
  double O_R_minus = 0.0;
  double correlation = 0.0;
  double g_L = 0.0;
  double g_R = 0.0;
  double n_L = 0.0;
  double sigma_x = 0.0;
};

/// literal_O_L_plus evaluates |C_{L,up} + C_{R,dn}|^2/2 instead of the projection onto |L,+>.
inline Observables observe(const Vector4c& c, bool literal_O_L_plus = false) {
  Observables o;
  const double nL = std::norm(c(L_down)) + std::norm(c(L_up));
  const double nR = std::norm(c(R_down)) + std::norm(c(R_up));
  const double sxL = 2.0 * std::real(std::conj(c(L_up)) * c(L_down));
  const double sxR = 2.0 * std::real(std::conj(c(R_up)) * c(R_down));
  o.n_L = nL;
  o.sigma_x = sxL + sxR;
  o.O_L_plus = literal_O_L_plus ? 0.5 * std::norm(c(L_up) + c(R_down)) : 0.5 * std::norm(c(L_up) + c(L_down));
  o.O_R_minus = 0.5 * std::norm(c(R_up) - c(R_down));
  o.correlation = (sxL - sxR) - (nL - nR) * o.sigma_x;
  o.g_L = nL - 0.5 * o.sigma_x;
  o.g_R = nR + 0.5 * o.sigma_x;
  return o;
}

inline std::vector<Observables> observables(const FourLevelTrajectory& tr, bool literal_O_L_plus = false) {
  std::vector<Observables> out;
  out.reserve(tr.amplitudes.size());
  for (const auto& c : tr.amplitudes) out.push_back(observe(c, literal_O_L_plus));
  return out;
}

inline double energy(const FourLevelModel& m, const Vector4c& c) {
  return std::real(c.dot(m.matrix().cast<cplx>() * c));
}

// Preset coupling sets.
inline contact::SpinContactCouplings opposite_equal_couplings() { return {1.0, -1.0, 0.1, -0.1}; }
inline contact::SpinContactCouplings same_sign_couplings() { return {1.0, 10.0, 0.1, 1.0}; }

// green: opposite couplings at the shifted resonance; blue: same-sign couplings tuned to E_R - E_L;
// magenta: same-sign couplings at the shifted resonance.
enum class Scenario { green, blue, magenta };

inline FourLevelModel scenario_model(Scenario sc,
                                     const doublewell::DoubleWellParams& p = doublewell::from_geometry(2.0, 1.0, 0.5)) {
  const auto st = doublewell::solve_noninteracting(p, 2);
  const auto c = sc == Scenario::green ? opposite_equal_couplings() : same_sign_couplings();
  FourLevelModel m = build(st[0], st[1], c, 0.0);
  m.omega_R = sc == Scenario::blue ? m.e_R - m.e_L : resonant_rabi(m);
  return m;
}

}  // namespace gaugelink::fourlevel
