#pragma once

#include <functional>
#include <optional>

#include <Eigen/LU>

#include "algebra.hpp"
#include "freq_integral.hpp"

namespace cbsl {

/// Drive in units of Gamma. rabi holds spherical components conj(eps_q).Omega.
struct LaserField {
  double detuning = 0.0;
  CVec3 rabi = CVec3::Zero();

  double s0() const { return 2.0 * rabi.squaredNorm(); }
  double s() const { return s0() / (1.0 + 4.0 * detuning * detuning); }

  /// positive-helicity plane wave along +z
  static LaserField sigma_plus(double s0, double delta) {
    if (s0 < 0.0) throw InvalidInput("s0 must be non-negative");
    LaserField f;
    f.detuning = delta;
    f.rabi(algebra::qslot(1)) = std::sqrt(s0 / 2.0);
    return f;
  }
};

/// dX/dt = M X + L + F
struct DriftSystem {
  Mat m;
  Vec l;
  LaserField laser;

  /// 16x16 generator on {1, X}: row i+1 holds (L_i, M_i.)
  Mat extended() const {
    Mat k = Mat::Zero(16, 16);
    k.block(1, 0, 15, 1) = l;
    k.block(1, 1, 15, 15) = m;
    return k;
  }
};

namespace single_atom {

/// Heisenberg generator applied to a 4x4 operator (Gamma = 1).
inline Mat4 heisenberg(const LaserField& f, const Mat4& o) {
  const auto& B = algebra::Algebra::get().basis;
  Mat4 pe = Mat4::Identity() - B.pig;
  Mat4 h = Mat4::Zero();
  for (int q : algebra::kQ) {
    cplx c = f.rabi(algebra::qslot(q));
    h += 0.5 * (c * B.x[algebra::dplus(q)] + std::conj(c) * B.x[algebra::dminus(q)]);
  }
  Mat4 r = I * f.detuning * (o * pe - pe * o) - I * (o * h - h * o) - 0.5 * (o * pe + pe * o);
  for (int q : algebra::kQ) r += B.x[algebra::dplus(q)] * o * B.x[algebra::dminus(q)];
  return r;
}

inline DriftSystem build_drift(const LaserField& f) {
  const auto& B = algebra::Algebra::get().basis;
  algebra::Decomposer dec(B);
  DriftSystem s;
  s.laser = f;
  s.m = Mat::Zero(15, 15);
  s.l = Vec::Zero(15);
  for (int i = 0; i < 15; ++i) {
    auto v = dec(heisenberg(f, B.x[i]));
    s.l(i) = v(0);
    for (int j = 0; j < 15; ++j) s.m(i, j) = v(j + 1);
  }
  return s;
}

inline Vec steady_state(const DriftSystem& sys) {
  Eigen::PartialPivLU<Mat> lu(sys.m);
  double rc = lu.rcond();
  if (!(rc > 1e-13)) throw NumericalError("non-relaxing drift");
  Vec x = -lu.solve(sys.l);
  if ((sys.m * x + sys.l).norm() > 1e-12 * std::max(1.0, sys.l.norm()))
    throw NumericalError("non-relaxing drift");
  return x;
}

/// 4x4 density matrix reproducing the expectation values x of X.
inline Mat4 density_matrix(const Vec& x) {
  const auto& B = algebra::Algebra::get().basis;
  // rho = 1/4 + sum_k r_k X_k^dagger, with <X_i> = Tr(rho X_i) solved on the Gram matrix
  Eigen::Matrix<cplx, 15, 15> gram;
  for (int i = 0; i < 15; ++i)
    for (int k = 0; k < 15; ++k) gram(i, k) = (B.x[k].adjoint() * B.x[i]).trace();
  Eigen::Matrix<cplx, 15, 1> r = gram.lu().solve(x.head(15));
  Mat4 rho = 0.25 * Mat4::Identity();
  for (int k = 0; k < 15; ++k) rho += r(k) * B.x[k].adjoint();
  return rho;
}

using freq::PoleData;
using freq::pole_data;

/// G[Delta] = (-i Delta - M)^-1
class GreenFunction {
public:
  static constexpr double kMaxCond = 1e8;

  explicit GreenFunction(const Mat& m, bool strict = false) : m_(m) {
    poles_ = pole_data(m);
    if (poles_.cond > kMaxCond) {
      if (strict) throw NumericalError("near-defective drift; use direct solve");
      diagnostic_ = "near-defective drift; use direct solve";
      direct_ = true;
    }
  }
  explicit GreenFunction(const DriftSystem& s, bool strict = false) : GreenFunction(s.m, strict) {}

  Mat operator()(cplx delta) const {
    const Eigen::Index n = m_.rows();
    if (direct_) return (-I * delta * Mat::Identity(n, n) - m_).partialPivLu().inverse();
    Vec d = (-I * delta - poles_.lambda.array()).inverse().matrix();
    return poles_.v * d.asDiagonal() * poles_.vinv;
  }

  const PoleData& poles() const { return poles_; }
  const Mat& drift() const { return m_; }
  bool direct() const { return direct_; }
  const std::string& diagnostic() const { return diagnostic_; }

private:
  Mat m_;
  PoleData poles_;
  bool direct_ = false;
  std::string diagnostic_;
};

/// <X_a X_b> from the one-point values through the structure table.
inline Mat equal_time_products(const Vec& x) {
  const auto& st = algebra::Algebra::get().st;
  Mat p = st.c;
  for (int k = 0; k < 15; ++k) p += x(k) * st.eps[k];
  return p;
}

/// <F_p[D'] F_q[D]> = 2 pi delta(D + D') D_pq
inline Mat diffusion_matrix(const Vec& x) {
  const auto& ct = algebra::Algebra::get().ct;
  Mat xx = equal_time_products(x);
  Mat d = Mat::Zero(15, 15);
  for (int s = 0; s < 3; ++s) d += 4.0 * ct.plus[s] * xx * ct.minus[s].transpose();
  return d;
}

/// Two-frequency correlator: 2 pi delta(D+D'){2 pi delta(D) elastic + density(D)}.
struct SpectralObject {
  cplx elastic = 0.0;
  std::vector<double> grid;
  std::vector<cplx> density;
  cplx inelastic_total = 0.0;
};

/// Polarization weight W_mn multiplying <D^+_m D^-_n>.
inline Mat3 analyzer_weight(const CVec3& eout) {
  CVec3 a;
  for (int m : algebra::kQ) a(algebra::qslot(m)) = eout.dot(algebra::spherical_unit(m));
  return a.conjugate() * a.transpose();
}

/// Connected spectral density S(D) = G[-D] D G[D]^T contracted on dipole rows.
inline cplx dipole_density(const GreenFunction& G, const Mat& d, const Mat3& w, double delta) {
  Mat gm = G(-delta), gp = G(delta);
  cplx acc = 0.0;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      if (w(m, n) == cplx(0.0)) continue;
      acc += w(m, n) * (gm.row(algebra::kDPlus + m) * d * gp.row(algebra::kDMinus + n).transpose())(0, 0);
    }
  return acc;
}

/// integral of the dipole density over D / 2 pi, by residues
inline cplx dipole_inelastic_total(const GreenFunction& G, const Mat& d, const Mat3& w) {
  Mat cov = freq::stationary_covariance(G.poles(), d);
  cplx acc = 0.0;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) acc += w(m, n) * cov(algebra::kDPlus + m, algebra::kDMinus + n);
  return acc;
}

inline SpectralObject mollow_spectrum(const DriftSystem& sys, const std::vector<double>& grid,
                                      const Mat3& w) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw InvalidInput("grid must be sorted");
  Vec x = steady_state(sys);
  Mat d = diffusion_matrix(x);
  GreenFunction G(sys);
  SpectralObject o;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n)
      o.elastic += w(m, n) * x(algebra::kDPlus + m) * x(algebra::kDMinus + n);
  o.grid = grid;
  o.density.reserve(grid.size());
  for (double D : grid) o.density.push_back(dipole_density(G, d, w, D));
  o.inelastic_total = dipole_inelastic_total(G, d, w);
  return o;
}

}  // namespace single_atom
}  // namespace cbsl
