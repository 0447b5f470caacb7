#pragma once

#include <array>
#include <map>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "single_atom.hpp"

namespace cbsl {
namespace two_atom {

inline constexpr int kExt = 16;    // {1, X_0..X_14}
inline constexpr int kPair = 256;  // products B^1_i B^2_j, flat index i*16+j
inline constexpr int kY = 255;     // without the identity

inline int pidx(int i, int j) { return i * kExt + j; }

/// powers of (g1, conj g1, g2, conj g2)
using Mono = std::array<int, 4>;
inline constexpr int kG1 = 0, kGb1 = 1, kG2 = 2, kGb2 = 3;
inline constexpr Mono kOne{0, 0, 0, 0};

inline int degree(const Mono& m) { return m[0] + m[1] + m[2] + m[3]; }
inline Mono unit(int v) {
  Mono m{0, 0, 0, 0};
  m[v] = 1;
  return m;
}
inline Mono conj(const Mono& m) { return {m[1], m[0], m[3], m[2]}; }
inline Mono swap_atoms(const Mono& m) { return {m[2], m[3], m[0], m[1]}; }
inline Mono operator+(const Mono& a, const Mono& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Mono operator-(const Mono& a, const Mono& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }
inline bool valid(const Mono& m) { return m[0] >= 0 && m[1] >= 0 && m[2] >= 0 && m[3] >= 0; }

/// power of exp(ikR) carried by a monomial
inline int kr_phase(const Mono& m) { return m[0] - m[1] + m[2] - m[3]; }
/// power of exp(i k_L.R)
inline int laser_phase(const Mono& m) { return m[0] - m[1] - m[2] + m[3]; }

/// all monomials of total degree <= d, by degree then lexicographically
inline std::vector<Mono> monomials(int d) {
  std::vector<Mono> out;
  for (int t = 0; t <= d; ++t)
    for (int a = t; a >= 0; --a)
      for (int b = t - a; b >= 0; --b)
        for (int c = t - a - b; c >= 0; --c) out.push_back({a, b, c, t - a - b - c});
  return out;
}

/// every m' with m' <= m componentwise
inline std::vector<Mono> divisors(const Mono& m) {
  std::vector<Mono> out;
  for (int a = 0; a <= m[0]; ++a)
    for (int b = 0; b <= m[1]; ++b)
      for (int c = 0; c <= m[2]; ++c)
        for (int d = 0; d <= m[3]; ++d) out.push_back({a, b, c, d});
  return out;
}

/// Structure and commutator tables on the 16-element basis {1, X}.
struct ExtendedTables {
  std::array<Mat, kExt> prod;  // B_a B_b = sum_c prod[c](a,b) B_c
  std::array<Mat, 3> tplus, tminus;
  std::array<int, kExt> adjoint;

  /// B_a X_x = sum_c right(x)(a,c) B_c
  Mat right(int x) const {
    Mat r(kExt, kExt);
    for (int a = 0; a < kExt; ++a)
      for (int c = 0; c < kExt; ++c) r(a, c) = prod[c](a, x + 1);
    return r;
  }
  /// X_x B_a = sum_c left(x)(a,c) B_c
  Mat left(int x) const {
    Mat r(kExt, kExt);
    for (int a = 0; a < kExt; ++a)
      for (int c = 0; c < kExt; ++c) r(a, c) = prod[c](x + 1, a);
    return r;
  }

  static const ExtendedTables& get() {
    static const ExtendedTables t = [] {
      const auto& A = algebra::Algebra::get();
      ExtendedTables e;
      for (auto& p : e.prod) p = Mat::Zero(kExt, kExt);
      for (int b = 0; b < kExt; ++b) {
        e.prod[b](0, b) = 1.0;
        e.prod[b](b, 0) = 1.0;
      }
      for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
          e.prod[0](i + 1, j + 1) = A.st.c(i, j);
          for (int k = 0; k < 15; ++k) e.prod[k + 1](i + 1, j + 1) = A.st.eps[k](i, j);
        }
      for (int s = 0; s < 3; ++s) {
        e.tplus[s] = Mat::Zero(kExt, kExt);
        e.tminus[s] = Mat::Zero(kExt, kExt);
        e.tplus[s].bottomRightCorner(15, 15) = A.ct.plus[s];
        e.tminus[s].bottomRightCorner(15, 15) = A.ct.minus[s];
      }
      e.adjoint[0] = 0;
      for (int i = 0; i < 15; ++i) e.adjoint[i + 1] = A.basis.adjoint[i] + 1;
      return e;
    }();
    return t;
  }
};

/// Two atoms in the phase-factored frame: identical drives, coupling tracked by monomials.
struct PairConfig {
  DriftSystem atom1, atom2;
  Vec3 u = Vec3::UnitZ();
  double kr = 100.0;

  cplx g() const { return I * 1.5 * std::exp(I * kr) / kr; }
  bool far_field() const { return kr >= 10.0; }
};

/// d<B^1_i B^2_j>/dt = sum (K0 + sum_v g_v K_v) <B^1_k B^2_l>
struct PairGenerator {
  Mat k0;
  std::array<Mat, 4> kv;
};

inline Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

inline PairGenerator pair_generator(const DriftSystem& a, const DriftSystem& b, const Mat3& p) {
  const auto& T = ExtendedTables::get();
  Mat id = Mat::Identity(kExt, kExt);
  PairGenerator gen;
  gen.k0 = kron(a.extended(), id) + kron(id, b.extended());
  for (auto& k : gen.kv) k = Mat::Zero(kPair, kPair);
  for (int q : algebra::kQ)
    for (int qp : algebra::kQ) {
      cplx w = p(algebra::qslot(q), algebra::qslot(qp));
      if (w == cplx(0.0)) continue;
      Mat rm = T.right(algebra::dminus(qp));
      Mat lp = T.left(algebra::dplus(q));
      const Mat& tp = T.tplus[algebra::qslot(q)];
      const Mat& tm = T.tminus[algebra::qslot(qp)];
      gen.kv[kG1] += w * kron(tp, rm);
      gen.kv[kG2] += w * kron(rm, tp);
      gen.kv[kGb1] += w * kron(tm, lp);
      gen.kv[kGb2] += w * kron(lp, tm);
    }
  return gen;
}

/// Pair-basis coefficients of a single-atom operator sum_k c_k X_k on the given atom.
inline Vec on_atom(int atom, const Vec& c) {
  Vec v = Vec::Zero(kPair);
  for (int k = 0; k < 15; ++k) v(atom == 1 ? pidx(k + 1, 0) : pidx(0, k + 1)) = c(k);
  return v;
}

/// coefficient vector of A B, so that <A B> = product(a, b) . y
inline Vec product(const Vec& a, const Vec& b) {
  const auto& T = ExtendedTables::get();
  Vec out = Vec::Zero(kPair);
  for (int ia = 0; ia < kPair; ++ia) {
    if (a(ia) == cplx(0.0)) continue;
    for (int ib = 0; ib < kPair; ++ib) {
      if (b(ib) == cplx(0.0)) continue;
      const int i = ia / kExt, j = ia % kExt, k = ib / kExt, l = ib % kExt;
      const cplx w = a(ia) * b(ib);
      for (int m = 0; m < kExt; ++m) {
        cplx pm = T.prod[m](i, k);
        if (pm == cplx(0.0)) continue;
        for (int n = 0; n < kExt; ++n) {
          cplx pn = T.prod[n](j, l);
          if (pn != cplx(0.0)) out(pidx(m, n)) += w * pm * pn;
        }
      }
    }
  }
  return out;
}

/// Hermitian conjugate of a pair-basis operator.
inline Vec adjoint(const Vec& a) {
  const auto& T = ExtendedTables::get();
  Vec out = Vec::Zero(kPair);
  for (int i = 0; i < kExt; ++i)
    for (int j = 0; j < kExt; ++j) out(pidx(T.adjoint[i], T.adjoint[j])) = std::conj(a(pidx(i, j)));
  return out;
}

inline cplx apply(const Vec& coeffs, const Vec& y) { return (coeffs.transpose() * y)(0, 0); }

/// Stationary pair correlators expanded in the coupling monomials.
class PairExpansion {
public:
  PairExpansion(const DriftSystem& a, const DriftSystem& b, const Mat3& p, int max_degree = 2)
      : gen_(pair_generator(a, b, p)), max_degree_(max_degree) {
    Vec xa = single_atom::steady_state(a), xb = single_atom::steady_state(b);
    Vec ra(kExt), rb(kExt);
    ra << 1.0, xa;
    rb << 1.0, xb;
    m0_ = gen_.k0.bottomRightCorner(kY, kY);
    Eigen::PartialPivLU<Mat> lu(m0_);
    if (!(lu.rcond() > 1e-13)) throw NumericalError("non-relaxing drift");
    for (const Mono& m : monomials(max_degree)) {
      if (degree(m) == 0) {
        y_[m] = kron(ra, rb);
        continue;
      }
      Vec rhs = Vec::Zero(kPair);
      for (int v = 0; v < 4; ++v) {
        Mono prev = m - unit(v);
        if (valid(prev)) rhs += gen_.kv[v] * y_.at(prev);
      }
      Vec y = Vec::Zero(kPair);
      y.tail(kY) = -lu.solve(rhs.tail(kY));
      y_[m] = y;
    }
  }

  int max_degree() const { return max_degree_; }
  const PairGenerator& generator() const { return gen_; }
  const Mat& m0() const { return m0_; }

  const Vec& y(const Mono& m) const {
    auto it = y_.find(m);
    if (it == y_.end()) throw InvalidInput("monomial beyond expansion order");
    return it->second;
  }
  /// 16x16 view, (i, j) = <B^1_i B^2_j>
  Mat y_matrix(const Mono& m) const {
    const Vec& v = y(m);
    Mat r(kExt, kExt);
    for (int i = 0; i < kExt; ++i)
      for (int j = 0; j < kExt; ++j) r(i, j) = v(pidx(i, j));
    return r;
  }

  cplx expect(const Vec& op, const Mono& m) const { return apply(op, y(m)); }
  /// sum over splits of <A>^(m1) <B>^(m2)
  cplx elastic(const Vec& a, const Vec& b, const Mono& m) const {
    cplx s = 0.0;
    for (const Mono& d : divisors(m)) s += expect(a, d) * expect(b, m - d);
    return s;
  }
  cplx total(const Vec& a, const Vec& b, const Mono& m) const { return expect(product(a, b), m); }
  cplx inelastic_total(const Vec& a, const Vec& b, const Mono& m) const { return total(a, b, m) - elastic(a, b, m); }

  /// <Y_A Y_B> over the full 256 basis
  Mat q(const Mono& m) const {
    const auto& T = ExtendedTables::get();
    Mat ym = y_matrix(m);
    std::array<Mat, kExt> z;
    for (int i = 0; i < kExt; ++i) {
      z[i] = Mat::Zero(kExt, kExt);
      for (int n = 0; n < kExt; ++n)
        if (ym(i, n) != cplx(0.0)) z[i] += ym(i, n) * T.prod[n];
    }
    Mat out = Mat::Zero(kPair, kPair);
    for (int c = 0; c < kExt; ++c)
      for (int i = 0; i < kExt; ++i)
        for (int k = 0; k < kExt; ++k) {
          cplx w = T.prod[c](i, k);
          if (w != cplx(0.0)) out.block(i * kExt, k * kExt, kExt, kExt) += w * z[c];
        }
    return out;
  }

  /// connected equal-time covariance of the 255 fluctuating products
  Mat connected(const Mono& m) const {
    Mat c = q(m).bottomRightCorner(kY, kY);
    for (const Mono& d : divisors(m)) c -= y(d).tail(kY) * y(m - d).tail(kY).transpose();
    return c;
  }

  /// diffusion of the 255 products, from the Einstein relation at stationarity
  Mat diffusion(const Mono& m) const {
    Mat d = Mat::Zero(kPair, kPair);
    auto add = [&](const Mat& k, const Mono& rest) {
      if (!valid(rest)) return;
      Mat qq = q(rest);
      d -= k * qq + qq * k.transpose();
    };
    add(gen_.k0, m);
    for (int v = 0; v < 4; ++v) add(gen_.kv[v], m - unit(v));
    return d.bottomRightCorner(kY, kY);
  }

private:
  PairGenerator gen_;
  int max_degree_;
  Mat m0_;
  std::map<Mono, Vec> y_;
};

/// Spectral densities of pair correlators in the eigenbasis of the uncoupled generator.
class PairSpectra {
public:
  PairSpectra(const PairExpansion& ex, const DriftSystem& a, const DriftSystem& b) : ex_(ex) {
    auto frame = [](const DriftSystem& s, Mat& r, Mat& rinv, Vec& lam) {
      auto p = freq::pole_data(s.m);
      if (p.cond > single_atom::GreenFunction::kMaxCond) throw NumericalError("near-defective drift; use direct solve");
      Vec x = single_atom::steady_state(s);
      r = Mat::Zero(kExt, kExt);
      r(0, 0) = 1.0;
      r.block(1, 0, 15, 1) = x;
      r.bottomRightCorner(15, 15) = p.v;
      rinv = r.inverse();
      lam = Vec::Zero(kExt);
      lam.tail(15) = p.lambda;
    };
    Mat ra, rb, ia, ib;
    Vec la, lb;
    frame(a, ra, ia, la);
    frame(b, rb, ib, lb);
    w_ = kron(ra, rb).bottomRightCorner(kY, kY);
    winv_ = kron(ia, ib).bottomRightCorner(kY, kY);
    mu_ = Vec(kY);
    for (int i = 0; i < kExt; ++i)
      for (int j = 0; j < kExt; ++j)
        if (i + j > 0) mu_(pidx(i, j) - 1) = la(i) + lb(j);
    freq::check_causal(mu_);
    for (int v = 0; v < 4; ++v) mv_[v] = winv_ * ex.generator().kv[v].bottomRightCorner(kY, kY) * w_;
  }

  const Vec& modes() const { return mu_; }

  /// D in eigen coordinates, cached per monomial
  const Mat& diffusion_modes(const Mono& m) const {
    auto it = d_.find(m);
    if (it != d_.end()) return it->second;
    return d_[m] = winv_ * ex_.diffusion(m) * winv_.transpose();
  }

  /// connected covariance by the order-by-order Lyapunov equation
  Mat covariance(const Mono& m) const {
    Mat rhs = diffusion_modes(m);
    for (int v = 0; v < 4; ++v) {
      Mono prev = m - unit(v);
      if (!valid(prev)) continue;
      Mat c = covariance(prev);
      rhs += mv_[v] * c + c * mv_[v].transpose();
    }
    Mat c(kY, kY);
    for (int i = 0; i < kY; ++i)
      for (int j = 0; j < kY; ++j) c(i, j) = -rhs(i, j) / (mu_(i) + mu_(j));
    return c;  // eigen coordinates
  }
  Mat to_products(const Mat& modes_cov) const { return w_ * modes_cov * w_.transpose(); }

  /// S^(m)(D) = sum over splits of row_A G[-D] . D . (row_B G[D])^T
  cplx density(const Vec& a, const Vec& b, const Mono& m, double delta) const {
    auto rows = [&](const Vec& op, double d) {
      Vec g = (-I * d - mu_.array()).inverse().matrix();
      std::map<Mono, Eigen::RowVectorXcd> r;
      for (const Mono& e : divisors(m)) {
        Eigen::RowVectorXcd acc;
        if (degree(e) == 0) {
          acc = op.tail(kY).transpose() * w_;
        } else {
          acc = Eigen::RowVectorXcd::Zero(kY);
          for (int v = 0; v < 4; ++v) {
            Mono prev = e - unit(v);
            if (valid(prev)) acc += r.at(prev) * mv_[v];
          }
        }
        r[e] = acc.cwiseProduct(g.transpose());
      }
      return r;
    };
    auto left = rows(a, -delta);
    auto right = rows(b, delta);
    cplx s = 0.0;
    for (const Mono& er : divisors(m)) {
      const Mono rest = m - er;
      for (const Mono& ed : divisors(rest)) {
        const Mat& dd = diffusion_modes(ed);
        s += (left.at(rest - ed) * dd * right.at(er).transpose())(0, 0);
      }
    }
    return s;
  }

  single_atom::SpectralObject spectrum(const Vec& a, const Vec& b, const Mono& m,
                                       const std::vector<double>& grid) const {
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (grid[i] < grid[i - 1]) throw InvalidInput("grid must be sorted");
    single_atom::SpectralObject o;
    o.elastic = ex_.elastic(a, b, m);
    o.grid = grid;
    for (double d : grid) o.density.push_back(density(a, b, m, d));
    o.inelastic_total = ex_.inelastic_total(a, b, m);
    return o;
  }

private:
  const PairExpansion& ex_;
  Mat w_, winv_;
  Vec mu_;
  std::array<Mat, 4> mv_;
  mutable std::map<Mono, Mat> d_;
};

/// elastic weight plus the frequency integral of the density
inline cplx stationary_from_spectrum(const single_atom::SpectralObject& o) { return o.elastic + o.inelastic_total; }

inline cplx stationary_from_density(cplx elastic, const std::function<cplx(double)>& density) {
  return elastic + freq::integrate_quadrature(density, 1e-9).value;
}

/// <F^beta F^alpha> weight: 4 T^{q'+} P_{q'q} T^{q-} contracted with <X^beta><X^alpha>
inline Mat cross_diffusion(const Vec& xbeta, const Vec& xalpha, const Mat3& p) {
  const auto& ct = algebra::Algebra::get().ct;
  Mat d = Mat::Zero(15, 15);
  for (int q : algebra::kQ)
    for (int qp : algebra::kQ) {
      cplx w = p(algebra::qslot(qp), algebra::qslot(q));
      if (w == cplx(0.0)) continue;
      d += 4.0 * w * (ct.plus[algebra::qslot(qp)] * xbeta) * (ct.minus[algebra::qslot(q)] * xalpha).transpose();
    }
  return d;
}

struct OrderGTerms {
  Mat elastic;
  Mat inelastic;
  Mat total() const { return elastic + inelastic; }
};

/// Coefficients of g_alpha and g_beta in <X^beta_i' X^alpha_i> (row i', column i).
struct OrderG {
  OrderGTerms g_alpha, g_beta;
};

/// vacuum_weight scales the cross-noise term: 1 physical, 0 dropped, -1 sign-flipped
inline OrderG order_g_pair(const DriftSystem& alpha, const DriftSystem& beta, const Mat3& p, double vacuum_weight = 1.0) {
  const auto& ct = algebra::Algebra::get().ct;
  Vec xa = single_atom::steady_state(alpha), xb = single_atom::steady_state(beta);
  Mat da = single_atom::diffusion_matrix(xa), db = single_atom::diffusion_matrix(xb);
  single_atom::GreenFunction ga(alpha, true), gb(beta, true);
  const auto& pa = ga.poles();
  const auto& pb = gb.poles();

  // sources T^{q'+} P_{q'q} <X>, one per D^-_q of the partner
  auto sources = [&](const Vec& x) {
    std::array<Vec, 3> s;
    for (int q : algebra::kQ) {
      s[algebra::qslot(q)] = Vec::Zero(15);
      for (int qp : algebra::kQ) s[algebra::qslot(q)] += p(algebra::qslot(qp), algebra::qslot(q)) * (ct.plus[algebra::qslot(qp)] * x);
    }
    return s;
  };
  auto sa = sources(xa), sb = sources(xb);

  OrderG r;
  r.g_alpha = {Mat::Zero(15, 15), Mat::Zero(15, 15)};
  r.g_beta = {Mat::Zero(15, 15), Mat::Zero(15, 15)};
  Mat ga0 = ga(0.0), gb0 = gb(0.0);
  for (int q : algebra::kQ) {
    const int s = algebra::qslot(q), dm = algebra::dminus(q);
    r.g_alpha.elastic += (xb * xb(dm)) * (ga0 * sa[s]).transpose();
    r.g_beta.elastic += (gb0 * sb[s]) * (xa(dm) * xa).transpose();
  }
  // inelastic alpha part: close on the poles of G^beta[-D], D_k = -i lambda_k
  for (Eigen::Index k = 0; k < pb.lambda.size(); ++k) {
    cplx dk = -I * pb.lambda(k);
    Mat res = pb.v.col(k) * pb.vinv.row(k) * db * gb(dk).transpose();
    Mat gak = ga(dk);
    for (int q : algebra::kQ)
      r.g_alpha.inelastic += res.col(algebra::dminus(q)) * (gak * sa[algebra::qslot(q)]).transpose();
  }
  // inelastic beta part: close on the poles of G^alpha[D], D_k = i lambda_k
  for (Eigen::Index k = 0; k < pa.lambda.size(); ++k) {
    cplx dk = I * pa.lambda(k);
    Mat res = ga(-dk) * da * (pa.v.col(k) * pa.vinv.row(k)).transpose();
    Mat gbk = gb(-dk);
    for (int q : algebra::kQ)
      r.g_beta.inelastic += (gbk * sb[algebra::qslot(q)]) * res.row(algebra::dminus(q));
  }
  if (vacuum_weight != 0.0)
    r.g_beta.inelastic += -0.5 * vacuum_weight * freq::cross_covariance(pb, cross_diffusion(xb, xa, p), pa);
  return r;
}

/// Order-one slice for atoms (1, 2): matrices (i' on atom 2, i on atom 1) per monomial.
inline std::map<Mono, OrderGTerms> order_g_slice(const DriftSystem& a1, const DriftSystem& a2, const Mat3& p,
                                                 double vacuum_weight = 1.0) {
  const auto& B = algebra::Algebra::get().basis;
  OrderG r = order_g_pair(a1, a2, p, vacuum_weight);
  std::map<Mono, OrderGTerms> out;
  out[unit(kG1)] = r.g_alpha;
  out[unit(kG2)] = r.g_beta;
  auto bar = [&](const OrderGTerms& t) {
    OrderGTerms c{Mat(15, 15), Mat(15, 15)};
    for (int ip = 0; ip < 15; ++ip)
      for (int i = 0; i < 15; ++i) {
        c.elastic(ip, i) = std::conj(t.elastic(B.adjoint[ip], B.adjoint[i]));
        c.inelastic(ip, i) = std::conj(t.inelastic(B.adjoint[ip], B.adjoint[i]));
      }
    return c;
  };
  out[unit(kGb1)] = bar(r.g_alpha);
  out[unit(kGb2)] = bar(r.g_beta);
  return out;
}

/// The same slice read off the product-basis expansion.
inline Mat pair_block(const PairExpansion& ex, const Mono& m) {
  return ex.y_matrix(m).bottomRightCorner(15, 15).transpose();
}

}  // namespace two_atom
}  // namespace cbsl
