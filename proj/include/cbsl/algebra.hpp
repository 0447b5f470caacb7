#pragma once

#include <array>
#include <cmath>

#include "core.hpp"

namespace cbsl {

/// Operator algebra of a J_g=0 -> J_e=1 atom.
/// States are ordered |0 0>, |1 -1>, |1 0>, |1 +1>.
namespace algebra {

inline constexpr int kDim = 4;
inline constexpr int kNX = 15;

// canonical positions inside the 15-vector X
inline constexpr int kPiZ = 0;     // Pi^z_{-1}, Pi^z_0, Pi^z_{+1}
inline constexpr int kPiE = 3;     // six off-diagonal Pi^e_{m,m'}
inline constexpr int kDPlus = 9;   // D^+_{-1}, D^+_0, D^+_{+1}
inline constexpr int kDMinus = 12; // D^-_{-1}, D^-_0, D^-_{+1}

inline int qslot(int q) { return q + 1; }
inline int dplus(int q) { return kDPlus + qslot(q); }
inline int dminus(int q) { return kDMinus + qslot(q); }
inline int piz(int m) { return kPiZ + qslot(m); }
inline int excited(int m) { return 1 + qslot(m); }

inline constexpr std::array<int, 3> kQ{-1, 0, 1};

struct OperatorBasis {
  Mat4 pig;
  std::array<std::array<Mat4, 3>, 3> pie;  // pie[m+1][m'+1] = |1m><1m'|
  std::array<Mat4, kNX> x;
  std::array<int, kNX> adjoint;            // index of X_i^dagger
  std::array<std::string, kNX> names;
};

/// X_i X_j = c_ij 1 + sum_k eps_ij^k X_k
struct StructureTable {
  Mat c;                        // 15 x 15
  std::vector<Mat> eps;         // eps[k](i,j)
  cplx operator()(int i, int j, int k) const { return eps[k](i, j); }
};

/// [X_i, D^+-_q] = +-2 T^{q+-}_ij X_j
struct CommutatorTable {
  std::array<Mat, 3> plus;
  std::array<Mat, 3> minus;
};

inline Mat4 ket_bra(int a, int b) {
  Mat4 m = Mat4::Zero();
  m(a, b) = 1.0;
  return m;
}

inline OperatorBasis build_basis() {
  OperatorBasis B;
  B.pig = ket_bra(0, 0);
  for (int m : kQ)
    for (int mp : kQ) B.pie[qslot(m)][qslot(mp)] = ket_bra(excited(m), excited(mp));
  const char* lab[3] = {"-1", "0", "+1"};
  int k = 0;
  for (int m : kQ) {
    B.x[k] = 0.5 * (B.pie[qslot(m)][qslot(m)] - B.pig);
    B.names[k] = std::string("Piz_") + lab[qslot(m)];
    ++k;
  }
  for (int m : kQ)
    for (int mp : kQ) {
      if (m == mp) continue;
      B.x[k] = B.pie[qslot(m)][qslot(mp)];
      B.names[k] = std::string("Pie_") + lab[qslot(m)] + "," + lab[qslot(mp)];
      ++k;
    }
  for (int q : kQ) {
    B.x[k] = ket_bra(excited(q), 0);
    B.names[k] = std::string("D+_") + lab[qslot(q)];
    ++k;
  }
  for (int q : kQ) {
    B.x[k] = ket_bra(0, excited(q));
    B.names[k] = std::string("D-_") + lab[qslot(q)];
    ++k;
  }
  for (int i = 0; i < kNX; ++i) {
    Mat4 a = B.x[i].adjoint();
    for (int j = 0; j < kNX; ++j)
      if ((a - B.x[j]).cwiseAbs().maxCoeff() == 0.0) B.adjoint[i] = j;
  }
  return B;
}

/// Coordinates of an arbitrary 4x4 matrix on {1, X_0..X_14}.
class Decomposer {
public:
  explicit Decomposer(const OperatorBasis& B) {
    Eigen::Matrix<cplx, 16, 16> cols;
    cols.col(0) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(Mat4::Identity().eval().data());
    for (int i = 0; i < kNX; ++i)
      cols.col(i + 1) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(B.x[i].data());
    inv_ = cols.inverse();
  }
  Eigen::Matrix<cplx, 16, 1> operator()(const Mat4& a) const {
    return inv_ * Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(a.data());
  }

private:
  Eigen::Matrix<cplx, 16, 16> inv_;
};

inline Mat4 reconstruct(const OperatorBasis& B, cplx id, const Vec& coef) {
  Mat4 r = id * Mat4::Identity();
  for (int k = 0; k < kNX; ++k) r += coef(k) * B.x[k];
  return r;
}

inline StructureTable structure_constants(const OperatorBasis& B) {
  Decomposer dec(B);
  StructureTable S;
  S.c = Mat::Zero(kNX, kNX);
  S.eps.assign(kNX, Mat::Zero(kNX, kNX));
  for (int i = 0; i < kNX; ++i)
    for (int j = 0; j < kNX; ++j) {
      auto v = dec(B.x[i] * B.x[j]);
      S.c(i, j) = v(0);
      for (int k = 0; k < kNX; ++k) S.eps[k](i, j) = v(k + 1);
    }
  return S;
}

inline CommutatorTable commutator_tables(const OperatorBasis& B) {
  Decomposer dec(B);
  CommutatorTable T;
  for (int q : kQ) {
    Mat tp = Mat::Zero(kNX, kNX), tm = Mat::Zero(kNX, kNX);
    const Mat4& dp = B.x[dplus(q)];
    const Mat4& dm = B.x[dminus(q)];
    for (int i = 0; i < kNX; ++i) {
      auto vp = dec(B.x[i] * dp - dp * B.x[i]);
      auto vm = dec(B.x[i] * dm - dm * B.x[i]);
      for (int j = 0; j < kNX; ++j) {
        tp(i, j) = 0.5 * vp(j + 1);
        tm(i, j) = -0.5 * vm(j + 1);
      }
    }
    T.plus[qslot(q)] = tp;
    T.minus[qslot(q)] = tm;
  }
  return T;
}

/// eps_{+1} = -(x + i y)/sqrt2, eps_0 = z, eps_{-1} = (x - i y)/sqrt2
inline CVec3 spherical_unit(int q) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (q) {
    case 1: return CVec3(-r, -r * I, 0.0);
    case 0: return CVec3(0.0, 0.0, 1.0);
    case -1: return CVec3(r, -r * I, 0.0);
  }
  throw InvalidInput("spherical index out of range");
}

/// spherical components a_q = conj(eps_q) . a
inline CVec3 to_spherical(const CVec3& a) {
  CVec3 s;
  for (int q : kQ) s(qslot(q)) = spherical_unit(q).dot(a);
  return s;
}

/// P_{qq'} = conj(eps_q).(1 - u u^T).eps_q'
inline Mat3 transverse_projector(const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw InvalidInput("non-unit direction");
  Eigen::Matrix3d cart = Eigen::Matrix3d::Identity() - u * u.transpose();
  Mat3 p;
  for (int q : kQ)
    for (int qp : kQ)
      p(qslot(q), qslot(qp)) = spherical_unit(q).dot(cart.cast<cplx>() * spherical_unit(qp));
  return p;
}

/// All tables derived once from the 4x4 representation.
struct Algebra {
  OperatorBasis basis;
  StructureTable st;
  CommutatorTable ct;
  static const Algebra& get() {
    static const Algebra a = [] {
      Algebra r;
      r.basis = build_basis();
      r.st = structure_constants(r.basis);
      r.ct = commutator_tables(r.basis);
      return r;
    }();
    return a;
  }
};

}  // namespace algebra
}  // namespace cbsl
