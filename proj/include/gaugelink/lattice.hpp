#pragma once
// One-dimensional U(1) quantum link model with bosonic matter
//   H = -J sum_k [b_k^+ s~+_{k,k+1} b_{k+1} + h.c.] + m sum_k (-1)^k n_k
// restricted to the Gauss-law sector G_k = (s_{k,k+1} - s_{k-1,k})/2 - rho_k = 0,
// with link spins s = +-1 in the sigma^x eigenbasis and s~+ = |+><-|.
// Sites are numbered 1..L; rho_k = n_k - 1 on even sites and n_k on odd sites.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <fmt/format.h>

#include "gaugelink/errors.hpp"

namespace gaugelink::lattice {

using cplx = std::complex<double>;

struct LatticeConfig {
  int sites = 6;
  bool periodic = true;
  double J = 1.0;
  double m = 0.0;
  int n_max = 1;
  int n_particles = -1;  // -1 means half filling
  // Open chains: fixed fluxes on the virtual links entering site 1 and leaving site L.
  int left_flux = -1;
  int right_flux = -1;
  double g_electric = 0.0;  // (g^2/2) sum_k E_k^2 with E = sigma^x/2

  int particles() const { return n_particles < 0 ? sites / 2 : n_particles; }
  int links() const { return periodic ? sites : sites - 1; }

  void validate() const {
    if (sites < 2 || sites % 2 != 0) throw DomainError(fmt::format("sites must be even and >= 2, got {}", sites));
    if (n_max < 1) throw DomainError(fmt::format("n_max must be >= 1, got {}", n_max));
    if (particles() > sites * n_max || particles() < 0) {
      throw DomainError(fmt::format("n_particles {} does not fit {} sites with n_max {}", particles(), sites, n_max));
    }
    if (!periodic && (std::abs(left_flux) != 1 || std::abs(right_flux) != 1)) {
      throw DomainError("boundary fluxes must be +1 or -1");
    }
  }
};

// Occupations n_1..n_L and link spins; link k joins site k and k+1 (periodic: link L joins L and 1).
struct Configuration {
  std::vector<int> n;
  std::vector<int> s;

  bool operator<(const Configuration& o) const { return std::tie(n, s) < std::tie(o.n, o.s); }
  bool operator==(const Configuration& o) const { return n == o.n && s == o.s; }
};

inline int background_charge(int site, int n) { return site % 2 == 0 ? n - 1 : n; }

// Flux on the link entering site k (1-based) and leaving it.
inline int flux_in(const LatticeConfig& c, const Configuration& q, int k) {
  if (k == 1) return c.periodic ? q.s[c.sites - 1] : c.left_flux;
  return q.s[k - 2];
}
inline int flux_out(const LatticeConfig& c, const Configuration& q, int k) {
  if (k == c.sites && !c.periodic) return c.right_flux;
  return q.s[k - 1];
}

/// G_k for site k (1-based).
inline double gauss_value(const LatticeConfig& c, const Configuration& q, int k) {
  return 0.5 * (flux_out(c, q, k) - flux_in(c, q, k)) - background_charge(k, q.n[k - 1]);
}

inline bool satisfies_gauss(const LatticeConfig& c, const Configuration& q) {
  for (int k = 1; k <= c.sites; ++k)
    if (gauss_value(c, q, k) != 0.0) return false;
  return true;
}

struct GaugeSectorBasis {
  LatticeConfig config;
  std::vector<Configuration> configurations;
  std::map<Configuration, int> index;

  int size() const { return static_cast<int>(configurations.size()); }
  int find(const Configuration& q) const {
    auto it = index.find(q);
    return it == index.end() ? -1 : it->second;
  }
};

/// All Gauss-law configurations at the configured filling, lexicographic in (n, s).
inline GaugeSectorBasis enumerate_gauge_sector(const LatticeConfig& c) {
  c.validate();
  if (c.sites > 14) throw DomainError(fmt::format("sites = {} exceeds the exact-diagonalization bound 14", c.sites));
  const int L = c.sites;
  GaugeSectorBasis b;
  b.config = c;
  // Fix the flux entering site 1, then the Gauss law determines every link from the occupations.
  std::vector<int> starts = c.periodic ? std::vector<int>{-1, 1} : std::vector<int>{c.left_flux};
  for (int s0 : starts) {
    Configuration q;
    q.n.assign(L, 0);
    q.s.assign(c.links(), 0);
    std::function<void(int, int, int)> rec = [&](int k, int incoming, int used) {
      if (k > L) {
        const int closing = c.periodic ? s0 : c.right_flux;
        if (incoming == closing && used == c.particles()) b.configurations.push_back(q);
        return;
      }
      for (int n = 0; n <= c.n_max; ++n) {
        if (used + n > c.particles()) break;
        const int out = incoming + 2 * background_charge(k, n);
        if (out != 1 && out != -1) continue;
        q.n[k - 1] = n;
        if (k <= c.links()) q.s[k - 1] = out;
        rec(k + 1, out, used + n);
      }
    };
    rec(1, s0, 0);
  }
  std::sort(b.configurations.begin(), b.configurations.end());
  for (int i = 0; i < b.size(); ++i) b.index[b.configurations[i]] = i;
  if (b.configurations.empty()) {
    throw SectorError(fmt::format("empty Gauss-law sector for L={}, n_particles={}, n_max={}", L, c.particles(), c.n_max));
  }
  return b;
}

// One hopping amplitude from configuration q across link k (1-based), both directions.
struct Hop {
  Configuration target;
  double amplitude;
};

inline std::vector<Hop> hops(const LatticeConfig& c, const Configuration& q) {
  std::vector<Hop> out;
  const int L = c.sites;
  for (int k = 1; k <= c.links(); ++k) {
    const int a = k - 1;           // site k
    const int b = k % L;           // site k+1
    const int link = k - 1;
    // b_k^+ s~+ b_{k+1}: particle moves k+1 -> k, link - -> +
    if (q.s[link] == -1 && q.n[b] >= 1 && q.n[a] < c.n_max) {
      Configuration t = q;
      const double amp = std::sqrt(static_cast<double>(q.n[b]) * (q.n[a] + 1));
      t.n[b] -= 1;
      t.n[a] += 1;
      t.s[link] = 1;
      out.push_back({t, -c.J * amp});
    }
    // b_{k+1}^+ s~- b_k: particle moves k -> k+1, link + -> -
    if (q.s[link] == 1 && q.n[a] >= 1 && q.n[b] < c.n_max) {
      Configuration t = q;
      const double amp = std::sqrt(static_cast<double>(q.n[a]) * (q.n[b] + 1));
      t.n[a] -= 1;
      t.n[b] += 1;
      t.s[link] = -1;
      out.push_back({t, -c.J * amp});
    }
  }
  return out;
}

inline double diagonal_energy(const LatticeConfig& c, const Configuration& q) {
  double e = 0.125 * c.g_electric * c.g_electric * c.links();
  for (int k = 1; k <= c.sites; ++k) e += (k % 2 == 0 ? 1.0 : -1.0) * c.m * q.n[k - 1];
  return e;
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sector Hamiltonian; throws if a hop leaves the sector.
inline SparseMatrix build_hamiltonian(const LatticeConfig& c, const GaugeSectorBasis& b) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < b.size(); ++i) {
    const auto& q = b.configurations[i];
    const double d = diagonal_energy(c, q);
    if (d != 0.0) trip.emplace_back(i, i, d);
    for (const auto& h : hops(c, q)) {
      const int j = b.find(h.target);
      if (j < 0) throw GaugeInvarianceError("hopping term leaves the Gauss-law sector");
      trip.emplace_back(j, i, h.amplitude);
    }
  }
  SparseMatrix H(b.size(), b.size());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

// Unconstrained space: every occupation pattern (0..n_max per site) and every link pattern.
struct FullSpace {
  LatticeConfig config;
  std::vector<Configuration> configurations;
  std::map<Configuration, int> index;
};

inline FullSpace enumerate_full_space(const LatticeConfig& c) {
  if (c.sites > 6) throw DomainError("full-space construction is limited to L <= 6");
  FullSpace f;
  f.config = c;
  const int L = c.sites, nl = c.links();
  const long n_occ = static_cast<long>(std::pow(c.n_max + 1, L));
  for (long o = 0; o < n_occ; ++o) {
    Configuration q;
    q.n.resize(L);
    long r = o;
    for (int k = L - 1; k >= 0; --k) {
      q.n[k] = static_cast<int>(r % (c.n_max + 1));
      r /= c.n_max + 1;
    }
    for (long sm = 0; sm < (1L << nl); ++sm) {
      q.s.resize(nl);
      for (int k = 0; k < nl; ++k) q.s[k] = (sm >> (nl - 1 - k)) & 1 ? 1 : -1;
      f.configurations.push_back(q);
    }
  }
  std::sort(f.configurations.begin(), f.configurations.end());
  for (int i = 0; i < static_cast<int>(f.configurations.size()); ++i) f.index[f.configurations[i]] = i;
  return f;
}

inline Eigen::MatrixXd full_hamiltonian(const FullSpace& f) {
  const int D = static_cast<int>(f.configurations.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    const auto& q = f.configurations[i];
    H(i, i) = diagonal_energy(f.config, q);
    for (const auto& h : hops(f.config, q)) H(f.index.at(h.target), i) += h.amplitude;
  }
  return H;
}

inline Eigen::VectorXd full_gauss_diagonal(const FullSpace& f, int k) {
  const int D = static_cast<int>(f.configurations.size());
  Eigen::VectorXd g(D);
  for (int i = 0; i < D; ++i) g(i) = gauss_value(f.config, f.configurations[i], k);
  return g;
}

struct GaussReport {
  double max_commutator = 0.0;  // max_k ||[H, G_k]||_max on the full space
  bool sector_closed = true;
};

/// Commutators on the unconstrained space (L <= 6) and sector closure.
inline GaussReport gauss_residuals(const LatticeConfig& c) {
  GaussReport r;
  if (c.sites <= 6) {
    const FullSpace f = enumerate_full_space(c);
    const Eigen::MatrixXd H = full_hamiltonian(f);
    for (int k = 1; k <= c.sites; ++k) {
      const Eigen::VectorXd g = full_gauss_diagonal(f, k);
      const Eigen::MatrixXd comm = H * g.asDiagonal() - g.asDiagonal() * H;
      r.max_commutator = std::max(r.max_commutator, comm.cwiseAbs().maxCoeff());
    }
  }
  const GaugeSectorBasis b = enumerate_gauge_sector(c);
  for (const auto& q : b.configurations)
    for (const auto& h : hops(c, q)) r.sector_closed = r.sector_closed && b.find(h.target) >= 0;
  if (r.max_commutator > 1e-12 || !r.sector_closed) {
    throw GaugeInvarianceError(fmt::format("gauge invariance violated: max |[H,G_k]| = {:.3g}, closed = {}",
                                           r.max_commutator, r.sector_closed));
  }
  return r;
}

/// max_k |<G_k>| of a sector state (zero by construction for sector members).
inline double gauss_expectation(const GaugeSectorBasis& b, const Eigen::VectorXcd& psi) {
  double worst = 0.0;
  for (int k = 1; k <= b.config.sites; ++k) {
    double g = 0.0;
    for (int i = 0; i < b.size(); ++i) g += std::norm(psi(i)) * gauss_value(b.config, b.configurations[i], k);
    worst = std::max(worst, std::fabs(g));
  }
  return worst;
}

enum class Reference { g_zero, g_plus, g_minus };

inline Configuration reference_configuration(const LatticeConfig& c, Reference r) {
  Configuration q;
  q.n.assign(c.sites, 0);
  q.s.assign(c.links(), 0);
  for (int k = 1; k <= c.sites; ++k) {
    const bool odd = k % 2 == 1;
    switch (r) {
      case Reference::g_zero: q.n[k - 1] = odd ? 1 : 0; break;
      case Reference::g_plus:
      case Reference::g_minus: q.n[k - 1] = odd ? 0 : 1; break;
    }
  }
  for (int k = 1; k <= c.links(); ++k) {
    switch (r) {
      case Reference::g_zero: q.s[k - 1] = k % 2 == 1 ? 1 : -1; break;
      case Reference::g_plus: q.s[k - 1] = 1; break;
      case Reference::g_minus: q.s[k - 1] = -1; break;
    }
  }
  return q;
}

inline Eigen::VectorXcd reference_state(const GaugeSectorBasis& b, Reference r) {
  const int i = b.find(reference_configuration(b.config, r));
  if (i < 0) throw SectorError("reference state is not in the sector");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b.size());
  v(i) = 1.0;
  return v;
}

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;                 // columns, present for dense solves
  std::vector<std::vector<int>> groups;    // indices of degenerate clusters
};

namespace detail {

// Lanczos with full reorthogonalization for the k lowest eigenpairs.
inline void lanczos_lowest(const SparseMatrix& H, int k, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
  const int D = static_cast<int>(H.rows());
  const int max_dim = std::min(D, std::max(8 * k, 300));
  Eigen::MatrixXd Q(D, max_dim);
  std::vector<double> alpha, beta;
  Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(D, 1.0, 2.0);  // deterministic start
  q.normalize();
  Eigen::VectorXd prev_vals;
  for (int j = 0; j < max_dim; ++j) {
    Q.col(j) = q;
    Eigen::VectorXd w = H * q;
    const double a = q.dot(w);
    alpha.push_back(a);
    w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    const double bnorm = w.norm();
    const int m = j + 1;
    if (m >= k) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      bool converged = bnorm < 1e-12;
      if (!converged) {
        converged = true;
        for (int i = 0; i < k; ++i) converged = converged && std::fabs(bnorm * es.eigenvectors()(m - 1, i)) < 1e-10;
      }
      if (converged || m == max_dim) {
        if (!converged) throw NumericalError("Lanczos did not converge");
        vals = es.eigenvalues().head(k);
        vecs = Q.leftCols(m) * es.eigenvectors().leftCols(k);
        return;
      }
    }
    beta.push_back(bnorm);
    q = w / bnorm;
  }
}

}  // namespace detail

inline constexpr int kDenseLimit = 2000;

inline Spectrum spectrum(const LatticeConfig& c, const GaugeSectorBasis& b, int k_lowest, double group_tol = 1e-8) {
  const SparseMatrix H = build_hamiltonian(c, b);
  const int D = b.size();
  const int k = std::min(k_lowest, D);
  Spectrum s;
  if (D <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(H)};
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    s.values = es.eigenvalues().head(k);
    s.vectors = es.eigenvectors().leftCols(k);
  } else {
    detail::lanczos_lowest(H, k, s.values, s.vectors);
  }
  const double spread = s.values.size() > 1 ? s.values(s.values.size() - 1) - s.values(0) : 0.0;
  const double tol = group_tol * std::max(spread, 1e-300);
  for (int i = 0; i < k; ++i) {
    if (!s.groups.empty() && s.values(i) - s.values(s.groups.back().back()) <= tol) {
      s.groups.back().push_back(i);
    } else {
      s.groups.push_back({i});
    }
  }
  return s;
}

inline Spectrum spectrum(const LatticeConfig& c, int k_lowest) {
  return spectrum(c, enumerate_gauge_sector(c), k_lowest);
}

inline double flux_density(const GaugeSectorBasis& b, const Eigen::VectorXcd& psi) {
  double f = 0.0;
  const int nl = b.config.links();
  for (int i = 0; i < b.size(); ++i) {
    const auto& s = b.configurations[i].s;
    f += std::norm(psi(i)) * std::accumulate(s.begin(), s.end(), 0);
  }
  return f / nl;
}

struct ScanRow {
  double m = 0.0;
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  double gap_ratio = 0.0;  // (E1 - E0) / (E2 - E0)
};

inline std::vector<ScanRow> mass_scan(LatticeConfig c, double m_lo, double m_hi, double step) {
  std::vector<ScanRow> rows;
  const int n = static_cast<int>(std::lround((m_hi - m_lo) / step));
  const GaugeSectorBasis b = enumerate_gauge_sector(c);
  for (int i = 0; i <= n; ++i) {
    c.m = m_lo + i * step;
    const Spectrum s = spectrum(c, b, 3);
    ScanRow r;
    r.m = c.m;
    r.e0 = s.values(0);
    r.e1 = s.values(1);
    r.e2 = s.values(2);
    r.gap_ratio = (r.e1 - r.e0) / (r.e2 - r.e0);
    rows.push_back(r);
  }
  return rows;
}

/// Mass where the gap ratio crosses the threshold, interpolated; NaN if it never does.
inline double crossover_mass(const std::vector<ScanRow>& rows, double threshold = 0.5) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = rows[i].gap_ratio - threshold, b = rows[i + 1].gap_ratio - threshold;
    if (a * b <= 0.0 && a != b) return rows[i].m + (rows[i + 1].m - rows[i].m) * a / (a - b);
  }
  return std::nan("");
}

struct QuenchResult {
  std::vector<double> times;
  std::vector<double> flux_density;
  std::vector<double> p_zero, p_plus, p_minus;
  std::vector<double> energy;
};

/// exp(-iHt) psi0 on the given times, dense eigendecomposition or Krylov steps.
inline QuenchResult quench_evolve(const LatticeConfig& c, const Eigen::VectorXcd& psi0,
                                  const std::vector<double>& times) {
  const GaugeSectorBasis b = enumerate_gauge_sector(c);
  const SparseMatrix H = build_hamiltonian(c, b);
  const int D = b.size();
  if (psi0.size() != D) throw SectorError("initial state dimension does not match the sector");
  const Eigen::VectorXcd g0 = reference_state(b, Reference::g_zero);
  const Eigen::VectorXcd gp = reference_state(b, Reference::g_plus);
  const Eigen::VectorXcd gm = reference_state(b, Reference::g_minus);
  QuenchResult r;
  auto record = [&](double t, const Eigen::VectorXcd& psi) {
    r.times.push_back(t);
    r.flux_density.push_back(flux_density(b, psi));
    r.p_zero.push_back(std::norm(g0.dot(psi)));
    r.p_plus.push_back(std::norm(gp.dot(psi)));
    r.p_minus.push_back(std::norm(gm.dot(psi)));
    r.energy.push_back(std::real(psi.dot(H.cast<cplx>() * psi)));
  };
  if (D <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(H)};
    const Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
    const Eigen::VectorXcd a = V.adjoint() * psi0;
    for (double t : times) {
      Eigen::VectorXcd ph(D);
      for (int i = 0; i < D; ++i) ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * t)) * a(i);
      record(t, V * ph);
    }
    return r;
  }
  // Krylov: short-time Lanczos exponentials between successive output times.
  const Eigen::SparseMatrix<cplx, Eigen::RowMajor> Hc = H.cast<cplx>();
  Eigen::VectorXcd psi = psi0;
  double t_now = 0.0;
  for (double t : times) {
    while (t_now < t - 1e-15) {
      const double dt = std::min(t - t_now, 0.05 / std::max(std::fabs(c.J), 1e-12));
      const int mk = std::min(D, 30);
      Eigen::MatrixXcd Q(D, mk);
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mk, mk);
      const double nrm = psi.norm();
      Q.col(0) = psi / nrm;
      int used = mk;
      for (int j = 0; j < mk; ++j) {
        Eigen::VectorXcd w = Hc * Q.col(j);
        T(j, j) = std::real(Q.col(j).dot(w));
        w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * w);
        const double bn = w.norm();
        if (j + 1 < mk) {
          if (bn < 1e-14) {
            used = j + 1;
            break;
          }
          T(j, j + 1) = T(j + 1, j) = bn;
          Q.col(j + 1) = w / bn;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(used, used));
      Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(used);
      for (int i = 0; i < used; ++i)
        e1(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * dt)) * es.eigenvectors()(0, i);
      const Eigen::VectorXcd coeffs = es.eigenvectors().cast<cplx>() * e1;
      psi = nrm * (Q.leftCols(used) * coeffs);
      t_now += dt;
    }
    record(t, psi);
  }
  return r;
}

inline QuenchResult quench_evolve(const LatticeConfig& c, Reference initial, const std::vector<double>& times) {
  const GaugeSectorBasis b = enumerate_gauge_sector(c);
  return quench_evolve(c, reference_state(b, initial), times);
}

// Two-mode check: H = J_z (b_L^+ s~+ b_R + h.c.) acting on |N, theta> (x) |chi_+-(theta)>.
// Basis |n_L = n> (x) {|+>, |->}, flat index 2n + (0 for +, 1 for -).
inline double josephson_residual(int N, double theta, double J_z, int branch = +1) {
  if (N < 2 || N % 2 != 0 || N > 128) throw DomainError(fmt::format("N must be even in [2, 128], got {}", N));
  const int D = 2 * (N + 1);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(D);
  const cplx chi_plus = M_SQRT1_2;
  const cplx chi_minus = static_cast<double>(branch) * M_SQRT1_2 * std::exp(cplx(0.0, theta));
  for (int n = 0; n <= N; ++n) {
    const double lg = std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0) - N * std::log(2.0);
    const cplx amp = std::exp(0.5 * lg) * std::exp(cplx(0.0, n * theta));
    psi(2 * n) = amp * chi_plus;
    psi(2 * n + 1) = amp * chi_minus;
  }
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(D);
  for (int n = 0; n <= N; ++n) {
    // b_L^+ s~+ b_R: n -> n+1, spin - -> +
    if (n < N) h(2 * (n + 1)) += J_z * std::sqrt((n + 1.0) * (N - n)) * psi(2 * n + 1);
    // b_R^+ s~- b_L: n -> n-1, spin + -> -
    if (n > 0) h(2 * (n - 1) + 1) += J_z * std::sqrt(static_cast<double>(n) * (N - n + 1)) * psi(2 * n);
  }
  const double lambda = branch * J_z * N / 2.0;
  return (h - lambda * psi).norm() / (std::fabs(J_z) * N / 2.0);
}

}  // namespace gaugelink::lattice
