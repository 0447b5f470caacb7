#pragma once

#include <array>
#include <map>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "single_atom.hpp"
#include "two_atom.hpp"

namespace cbsl {

/// Brute-force two-atom optical Bloch equations on 16x16 operators.
namespace ob {

inline constexpr int kHilbert = 16;
inline constexpr int kLiouv = 256;

using two_atom::Mono;

/// Heisenberg generator S (row-major vec, vec(A O B) = (A x B^T) vec(O)),
/// S = s0 + sum_v z_v sv[v] with z = (g1, conj g1, g2, conj g2).
struct TwoAtomSystem {
  Mat s0;
  std::array<Mat, 4> sv;

  Mat generator(const std::array<cplx, 4>& z) const {
    Mat s = s0;
    for (int v = 0; v < 4; ++v) s += z[v] * sv[v];
    return s;
  }
};

namespace detail {

inline Mat dense(const Mat4& a) { return a; }
inline Mat on1(const Mat4& a) { return Eigen::kroneckerProduct(Mat(a), Mat::Identity(4, 4)).eval(); }
inline Mat on2(const Mat4& a) { return Eigen::kroneckerProduct(Mat::Identity(4, 4), Mat(a)).eval(); }
inline Mat lmul(const Mat& a) { return Eigen::kroneckerProduct(a, Mat::Identity(kHilbert, kHilbert)).eval(); }
inline Mat rmul(const Mat& b) { return Eigen::kroneckerProduct(Mat::Identity(kHilbert, kHilbert), Mat(b.transpose())).eval(); }
inline Mat sandwich(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, Mat(b.transpose())).eval(); }

inline Mat4 raise(int q) {
  Mat4 m = Mat4::Zero();
  m(q + 2, 0) = 1.0;
  return m;
}

inline Vec vec(const Mat& o) {
  Vec v(o.size());
  for (Eigen::Index i = 0; i < o.rows(); ++i)
    for (Eigen::Index j = 0; j < o.cols(); ++j) v(i * o.cols() + j) = o(i, j);
  return v;
}

}  // namespace detail

inline TwoAtomSystem build_two_atom(const LaserField& f1, const LaserField& f2, const Vec3& u) {
  using namespace detail;
  Mat3 p = algebra::transverse_projector(u);
  std::array<std::array<Mat, 3>, 2> dp, dm;
  std::array<Mat, 2> pe;
  for (int a = 0; a < 2; ++a) {
    Mat4 e = Mat4::Zero();
    for (int q = -1; q <= 1; ++q) {
      Mat4 r = raise(q);
      dp[a][q + 1] = a == 0 ? on1(r) : on2(r);
      dm[a][q + 1] = a == 0 ? on1(r.adjoint()) : on2(r.adjoint());
      e += r * r.adjoint();
    }
    pe[a] = a == 0 ? on1(e) : on2(e);
  }
  TwoAtomSystem s;
  s.s0 = Mat::Zero(kLiouv, kLiouv);
  const LaserField* fields[2] = {&f1, &f2};
  for (int a = 0; a < 2; ++a) {
    const LaserField& f = *fields[a];
    Mat h = Mat::Zero(kHilbert, kHilbert);
    for (int q = -1; q <= 1; ++q) {
      cplx c = f.rabi(q + 1);
      h += 0.5 * (c * dp[a][q + 1] + std::conj(c) * dm[a][q + 1]);
    }
    s.s0 += I * f.detuning * (rmul(pe[a]) - lmul(pe[a]));
    s.s0 += -I * (rmul(h) - lmul(h));
    s.s0 += -0.5 * (rmul(pe[a]) + lmul(pe[a]));
    for (int q = 0; q < 3; ++q) s.s0 += sandwich(dp[a][q], dm[a][q]);
  }
  for (auto& m : s.sv) m = Mat::Zero(kLiouv, kLiouv);
  for (int q = 0; q < 3; ++q)
    for (int qp = 0; qp < 3; ++qp) {
      cplx w = p(q, qp);
      if (w == cplx(0.0)) continue;
      // (g/2) [O, D^{a+}_q] D^{b-}_q'  and  -(conj g/2) D^{b+}_q [O, D^{a-}_q']
      s.sv[two_atom::kG1] += 0.5 * w * (rmul(dp[0][q] * dm[1][qp]) - sandwich(dp[0][q], dm[1][qp]));
      s.sv[two_atom::kG2] += 0.5 * w * (rmul(dp[1][q] * dm[0][qp]) - sandwich(dp[1][q], dm[0][qp]));
      s.sv[two_atom::kGb2] += -0.5 * w * (sandwich(dp[0][q], dm[1][qp]) - lmul(dp[0][q] * dm[1][qp]));
      s.sv[two_atom::kGb1] += -0.5 * w * (sandwich(dp[1][q], dm[0][qp]) - lmul(dp[1][q] * dm[0][qp]));
    }
  return s;
}

/// couplings of the physical system at bookkeeping scale lambda and laser phase phi
inline std::array<cplx, 4> physical_couplings(cplx g, double lambda, double phi = 0.0) {
  cplx g1 = lambda * g * std::exp(I * phi), g2 = lambda * g * std::exp(-I * phi);
  return {g1, std::conj(g1), g2, std::conj(g2)};
}

/// w with <O> = vec(O) . w, normalized by Tr rho = 1
inline Mat stationarity_matrix(const Mat& s) {
  Mat a = s.transpose();
  a.row(0) = detail::vec(Mat::Identity(kHilbert, kHilbert)).transpose();
  return a;
}

inline Vec steady_state(const Mat& s) {
  Vec b = Vec::Zero(kLiouv);
  b(0) = 1.0;
  return stationarity_matrix(s).partialPivLu().solve(b);
}

/// deviation from the uncoupled state w0, solved directly so its rounding scales with the coupling
inline Vec steady_deviation(const TwoAtomSystem& sys, const Vec& w0, const std::array<cplx, 4>& z) {
  Mat pert = Mat::Zero(kLiouv, kLiouv);
  for (int v = 0; v < 4; ++v) pert += z[v] * sys.sv[v];
  Mat dt = pert.transpose();
  dt.row(0).setZero();
  return stationarity_matrix(sys.s0 + pert).partialPivLu().solve(-(dt * w0));
}

inline Mat density_matrix(const Vec& w) {
  Mat r(kHilbert, kHilbert);
  for (int i = 0; i < kHilbert; ++i)
    for (int j = 0; j < kHilbert; ++j) r(j, i) = w(i * kHilbert + j);
  return r;
}

inline cplx expect(const Mat& op, const Vec& w) { return (detail::vec(op).transpose() * w)(0, 0); }

/// B^1_i B^2_j on the 16-dim space, i, j over {1, X}
inline std::vector<Mat> pair_products() {
  const auto& B = algebra::Algebra::get().basis;
  std::array<Mat4, 16> ext;
  ext[0] = Mat4::Identity();
  for (int k = 0; k < 15; ++k) ext[k + 1] = B.x[k];
  std::vector<Mat> out;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) out.push_back(Eigen::kroneckerProduct(Mat(ext[i]), Mat(ext[j])).eval());
  return out;
}

/// Monomial coefficients of observables, extracted on the polydisc z_v = r w^{j_v}.
struct Extraction {
  std::map<Mono, Vec> coef;
  double radius = 0.0;
  double contamination = 0.0;
};

namespace detail {

template <class Sample>
std::map<Mono, Vec> cauchy(const Sample& sample, int nobs, int max_degree, double r, int n) {
  const cplx w = std::exp(2.0 * kPi * I / double(n));
  std::map<Mono, Vec> c;
  std::vector<Mono> wanted;
  for (const Mono& m : two_atom::monomials(max_degree))
    if (m[0] < n && m[1] < n && m[2] < n && m[3] < n) wanted.push_back(m), c[m] = Vec::Zero(nobs);
  std::array<int, 4> j{};
  const double norm = 1.0 / std::pow(double(n), 4);
  for (j[0] = 0; j[0] < n; ++j[0])
    for (j[1] = 0; j[1] < n; ++j[1])
      for (j[2] = 0; j[2] < n; ++j[2])
        for (j[3] = 0; j[3] < n; ++j[3]) {
          std::array<cplx, 4> z;
          for (int v = 0; v < 4; ++v) z[v] = r * std::pow(w, j[v]);
          Vec vals = sample(z);
          for (const Mono& m : wanted) {
            cplx ph = 1.0;
            for (int v = 0; v < 4; ++v) ph *= std::pow(w, -j[v] * m[v]);
            c[m] += vals * (ph * norm / std::pow(r, two_atom::degree(m)));
          }
        }
  return c;
}

}  // namespace detail

/// Orders of the stationary expectation values; a second radius guards against aliasing.
inline Extraction extract_orders(const TwoAtomSystem& sys, const std::vector<Mat>& obs, int max_degree = 2,
                                 double radius = 0.01, int points = 5, bool check = true) {
  if (points < 5) throw InvalidInput("at least 5 sample points per coupling");
  Mat ov(obs.size(), kLiouv);
  for (std::size_t k = 0; k < obs.size(); ++k) ov.row(k) = detail::vec(obs[k]).transpose();
  const Vec w0 = steady_state(sys.s0);
  auto sample = [&](const std::array<cplx, 4>& z) -> Vec { return ov * steady_deviation(sys, w0, z); };
  Extraction e;
  e.radius = radius;
  e.coef = detail::cauchy(sample, int(obs.size()), max_degree, radius, points);
  e.coef[two_atom::kOne] += ov * w0;
  if (check) {
    auto c2 = detail::cauchy(sample, int(obs.size()), max_degree, radius / 2.0, points);
    c2[two_atom::kOne] += ov * w0;
    for (const auto& [m, v] : e.coef) {
      double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
      e.contamination = std::max(e.contamination, (v - c2.at(m)).cwiseAbs().maxCoeff() / scale);
    }
    if (e.contamination > 1e-9) throw NumericalError("expansion contaminated");
  }
  return e;
}

/// Connected two-time spectrum int dt e^{-i D t} <dA(t) dB(0)> by quantum regression.
inline cplx qrt_density(const Mat& s, const Vec& w, const Mat& a, const Mat& b, double delta) {
  const Mat id = Mat::Identity(kHilbert, kHilbert);
  const Vec vid = detail::vec(id);
  Mat rho = density_matrix(w);
  cplx ea = expect(a, w), eb = expect(b, w);
  // remove the stationary mode so the resolvent stays regular at D = 0
  Mat sd = s - vid * w.transpose();
  auto state = [&](const Mat& m) { return detail::vec(Mat(m.transpose())); };
  Vec wb = state(b * rho - eb * rho);  // Tr((B - <B>) rho O)
  Vec wa = state(rho * a - ea * rho);  // Tr(rho (A - <A>) O)
  Mat n = Mat::Identity(kLiouv, kLiouv);
  Vec xa = (I * delta * n - sd).partialPivLu().solve(detail::vec(a - ea * id));
  Vec xb = (-I * delta * n - sd).partialPivLu().solve(detail::vec(b - eb * id));
  return (wb.transpose() * xa)(0, 0) + (wa.transpose() * xb)(0, 0);
}

/// Monomial coefficients of the QRT density at one frequency.
inline std::map<Mono, cplx> extract_density(const TwoAtomSystem& sys, const Mat& a, const Mat& b, double delta,
                                            int max_degree = 2, double radius = 0.01, int points = 5) {
  auto sample = [&](const std::array<cplx, 4>& z) -> Vec {
    Mat s = sys.generator(z);
    Vec v(1);
    v(0) = qrt_density(s, steady_state(s), a, b, delta);
    return v;
  };
  std::map<Mono, cplx> out;
  for (const auto& [m, v] : detail::cauchy(sample, 1, max_degree, radius, points)) out[m] = v(0);
  return out;
}

/// operator sum_m a_m D^-_m on one atom, a_m = conj(eout).eps_m
inline Mat analyzer_lowering(int atom, const CVec3& eout) {
  Mat4 e = Mat4::Zero();
  for (int m = -1; m <= 1; ++m) e += eout.dot(algebra::spherical_unit(m)) * detail::raise(m).adjoint();
  return atom == 1 ? detail::on1(e) : detail::on2(e);
}

}  // namespace ob
}  // namespace cbsl
