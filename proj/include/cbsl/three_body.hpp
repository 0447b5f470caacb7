#pragma once

#include <functional>

#include <unsupported/Eigen/KroneckerProduct>

#include "single_atom.hpp"
#include "two_atom.hpp"

namespace cbsl {

/// Three-force correlators of the vacuum noise and the sandwich matrices D^b.
namespace three_body {

inline constexpr int kSand = 225;  // X_i (.) X_k, flat index i*15+k

struct ThreeBodyMatrix {
  Mat value;  // 15 x 15, coefficient of 2 pi delta[D + D']
  double residual = 0.0;
};

namespace detail {

/// 4 sum_q T^{q+} (x) T^{q-} acting on sandwich indices
inline const Mat& noise_pairing() {
  static const Mat tt = [] {
    const auto& ct = algebra::Algebra::get().ct;
    Mat m = Mat::Zero(kSand, kSand);
    for (int s = 0; s < 3; ++s) m += 4.0 * Eigen::kroneckerProduct(ct.plus[s], ct.minus[s]).eval();
    return m;
  }();
  return tt;
}

/// Q_ik = V_in1 V_kn2 sum_n3 A_n1n3 B_n2n3 / ((l1 + l3)(l1 + l2 + i D')),
/// i.e. (1/2pi) int dD1 G_ia[D1] (a,u-weight A) G_vu[-D1] (c,v-weight B) G_kc[D' - D1] in eigen form.
inline Mat triple(const freq::PoleData& p, const Mat& a, const Mat& b, double dprime) {
  const Eigen::Index n = p.lambda.size();
  Mat core(n, n);
  for (Eigen::Index n1 = 0; n1 < n; ++n1)
    for (Eigen::Index n2 = 0; n2 < n; ++n2) {
      cplx s = 0.0;
      const cplx l12 = p.lambda(n1) + p.lambda(n2) + I * dprime;
      for (Eigen::Index n3 = 0; n3 < n; ++n3) s += a(n1, n3) * b(n2, n3) / (p.lambda(n1) + p.lambda(n3));
      core(n1, n2) = s / l12;
    }
  return p.v * core * p.v.transpose();
}

inline Vec flatten(const Mat& m) {
  Vec v(kSand);
  for (int i = 0; i < 15; ++i)
    for (int k = 0; k < 15; ++k) v(i * 15 + k) = m(i, k);
  return v;
}

inline Mat unflatten(const Vec& v) {
  Mat m(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int k = 0; k < 15; ++k) m(i, k) = v(i * 15 + k);
  return m;
}

/// 4 sum T^+_{bb'} T^-_{cc'} eps_{b'c'}^v as a (c, v) matrix
inline Mat w_right(int b) {
  const auto& A = algebra::Algebra::get();
  Mat w = Mat::Zero(15, 15);
  for (int s = 0; s < 3; ++s)
    for (int v = 0; v < 15; ++v) {
      Vec r = A.st.eps[v].transpose() * A.ct.plus[s].row(b).transpose();
      w.col(v) += 4.0 * A.ct.minus[s] * r;
    }
  return w;
}

/// 4 sum T^+_{aa'} T^-_{bb'} eps_{a'b'}^v as an (a, v) matrix
inline Mat w_left(int b) {
  const auto& A = algebra::Algebra::get();
  Mat w = Mat::Zero(15, 15);
  for (int s = 0; s < 3; ++s)
    for (int v = 0; v < 15; ++v) w.col(v) += 4.0 * A.ct.plus[s] * A.st.eps[v] * A.ct.minus[s].row(b).transpose();
  return w;
}

}  // namespace detail

/// Sandwich kernel I[D'] = K[D'] 4 T^+ T^-, K the two-Green convolution.
inline Mat kernel(const freq::PoleData& p, double dprime) {
  return freq::green_pair_kernel(p, p, dprime) * detail::noise_pairing();
}

/// (1 - I) x = J, guarded against a singular kernel
inline ThreeBodyMatrix solve_sandwich(const Mat& kern, const Mat& j) {
  Mat a = Mat::Identity(kSand, kSand) - kern;
  Eigen::PartialPivLU<Mat> lu(a);
  if (!(lu.rcond() > 1e-13)) throw NumericalError("three-body resonance");
  Vec rhs = detail::flatten(j);
  Vec x = lu.solve(rhs);
  ThreeBodyMatrix r;
  r.value = detail::unflatten(x);
  r.residual = (a * x - rhs).norm() / std::max(1.0, rhs.norm());
  if (r.residual > 1e-10) throw NumericalError("three-body resonance");
  return r;
}

/// right-hand side J^{b,aaa}[D'] of the single-atom system
inline Mat source_single(const DriftSystem& sys, const Mat& d, int b, double dprime) {
  const single_atom::GreenFunction G(sys, true);
  const auto& p = G.poles();
  const Vec x = single_atom::steady_state(sys);
  const Mat g = G(dprime);
  const Mat a = p.vinv * d * p.vinv.transpose();
  Mat j = x * (g * d.transpose()).col(b).transpose() + (g * d).col(b) * x.transpose();
  j += detail::triple(p, a, p.vinv * detail::w_right(b) * p.v, dprime);
  j += detail::triple(p, a.transpose(), p.vinv * detail::w_left(b) * p.v, dprime).transpose();
  return j;
}

/// D^{b,aaa} at D' = -D
inline ThreeBodyMatrix solve_three_body_single(const DriftSystem& sys, const Mat& d, int b, double delta) {
  const double dprime = -delta;
  const single_atom::GreenFunction G(sys, true);
  return solve_sandwich(kernel(G.poles(), dprime), source_single(sys, d, b, dprime));
}

/// T^{q+} and T^{q-} dressed by the transverse projector, as in the order-g sources
inline Mat dressed_plus(const Mat3& p, int q) {
  const auto& ct = algebra::Algebra::get().ct;
  Mat t = Mat::Zero(15, 15);
  for (int qp : algebra::kQ) t += p(algebra::qslot(qp), algebra::qslot(q)) * ct.plus[algebra::qslot(qp)];
  return t;
}

inline Mat dressed_minus(const Mat3& p, int q) {
  const auto& ct = algebra::Algebra::get().ct;
  Mat t = Mat::Zero(15, 15);
  for (int qp : algebra::kQ) t += p(algebra::qslot(q), algebra::qslot(qp)) * ct.minus[algebra::qslot(qp)];
  return t;
}

/// which zeroth-order pair correlator enters the last two source groups
enum class PairCorrelator { connected, full };

/// right-hand side J^{b,aba(gbar)}[D'] of the two-atom system
inline Mat source_cross(const DriftSystem& alpha, const DriftSystem& beta, const Vec3& u, int b, double dprime,
                        PairCorrelator pc = PairCorrelator::connected) {
  const auto& ct = algebra::Algebra::get().ct;
  const Mat3 proj = algebra::transverse_projector(u);
  const single_atom::GreenFunction ga(alpha, true), gb(beta, true);
  const auto& p = ga.poles();
  const Vec xa = single_atom::steady_state(alpha), xb = single_atom::steady_state(beta);
  const Mat da = single_atom::diffusion_matrix(xa), db = single_atom::diffusion_matrix(xb);
  const Mat dba = two_atom::cross_diffusion(xb, xa, proj), dab = two_atom::cross_diffusion(xa, xb, proj);
  const Mat g = ga(dprime), gbeta = gb(dprime);
  const Mat a = p.vinv * da * p.vinv.transpose();

  Mat j = xa * (g * dba.transpose()).col(b).transpose() + (g * dab).col(b) * xa.transpose();
  const Mat gdb = gbeta * db, gdbt = gbeta * db.transpose();
  for (int q : algebra::kQ) {
    const int s = algebra::qslot(q);
    const Mat tp = dressed_plus(proj, q), tm = dressed_minus(proj, q);
    const Mat bm = p.vinv * tm * p.v, bp = p.vinv * tp * p.v;
    j += (4.0 * ct.plus[s] * xb)(b) * detail::triple(p, a, bm, dprime);
    j += (4.0 * ct.minus[s] * xb)(b) * detail::triple(p, a.transpose(), bp, dprime).transpose();
    Mat s5 = detail::triple(p, a.transpose(), bm, dprime).transpose();
    Mat s6 = detail::triple(p, a, bm, dprime);
    if (pc == PairCorrelator::full) {
      Vec gx = g * tm * xa;
      s5 += gx * xa.transpose();
      s6 += xa * gx.transpose();
    }
    const int dp = algebra::dplus(q);
    j += -2.0 * gdb(dp, b) * s5 - 2.0 * gdbt(dp, b) * s6;
  }
  return -0.5 * j;
}

/// D^{b,aba(gbar)} at D' = -D; same kernel as the single-atom system
inline ThreeBodyMatrix solve_three_body_cross(const DriftSystem& alpha, const DriftSystem& beta, const Vec3& u, int b,
                                              double delta, PairCorrelator pc = PairCorrelator::connected) {
  const double dprime = -delta;
  const single_atom::GreenFunction ga(alpha, true);
  return solve_sandwich(kernel(ga.poles(), dprime), source_cross(alpha, beta, u, b, dprime, pc));
}

/// C_abc split into its three contraction groups, coefficient of 2 pi delta[D + D'].
struct ThreeForce {
  cplx pair_ab = 0.0;
  cplx middle = 0.0;
  cplx pair_bc = 0.0;
  cplx total() const { return pair_ab + middle + pair_bc; }
};

inline ThreeForce assemble_c_abc(const DriftSystem& sys, int a, int b, int c, const freq::RationalTerm& f,
                                 const freq::RationalTerm& g, double delta, double tol = 1e-9) {
  const auto& A = algebra::Algebra::get();
  const single_atom::GreenFunction G(sys, true);
  const Mat d = single_atom::diffusion_matrix(single_atom::steady_state(sys));
  Vec eab = Vec::Zero(15), ebc = Vec::Zero(15);  // 4 T^+ T^- eps contracted onto u
  for (int s = 0; s < 3; ++s)
    for (int u = 0; u < 15; ++u) {
      eab(u) += 4.0 * (A.ct.plus[s].row(a) * A.st.eps[u] * A.ct.minus[s].row(b).transpose())(0, 0);
      ebc(u) += 4.0 * (A.ct.plus[s].row(b) * A.st.eps[u] * A.ct.minus[s].row(c).transpose())(0, 0);
    }
  auto conv = [&](const std::function<cplx(double)>& h) {
    return freq::integrate_quadrature([&](double d1) { return f(d1) * g(delta - d1) * h(d1); }, tol).value;
  };
  ThreeForce r;
  const Vec dc = d.col(c);
  r.pair_ab = conv([&](double d1) { return (eab.transpose() * G(-(delta - d1)) * dc)(0, 0); });
  r.middle = conv([&](double d1) {
    Mat db = solve_three_body_single(sys, d, b, d1).value;
    cplx s = 0.0;
    for (int k = 0; k < 3; ++k) s += 4.0 * (A.ct.plus[k].row(a) * db * A.ct.minus[k].row(c).transpose())(0, 0);
    return s;
  });
  r.pair_bc = (ebc.transpose() * G(delta) * d.row(a).transpose())(0, 0) * conv([](double) { return cplx(1.0); });
  return r;
}

}  // namespace three_body
}  // namespace cbsl
