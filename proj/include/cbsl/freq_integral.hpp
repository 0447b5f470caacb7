#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"

namespace cbsl {
namespace freq {

inline constexpr double kMarginal = 1e-9;

/// M = V diag(lambda) V^-1
struct PoleData {
  Vec lambda;
  Mat v;
  Mat vinv;
  double cond = 1.0;
};

inline PoleData pole_data(const Mat& m) {
  Eigen::ComplexEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  PoleData p;
  p.lambda = es.eigenvalues();
  p.v = es.eigenvectors();
  // repeated eigenvalues: the Schur back-substitution returns parallel vectors, take a null-space basis instead
  const Eigen::Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  std::vector<bool> done(n, false);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (done[k]) continue;
    std::vector<Eigen::Index> cl{k};
    for (Eigen::Index j = k + 1; j < n; ++j)
      if (!done[j] && std::abs(p.lambda(j) - p.lambda(k)) < 1e-7 * scale) cl.push_back(j);
    for (auto j : cl) done[j] = true;
    if (cl.size() < 2) continue;
    cplx mean = 0.0;
    for (auto j : cl) mean += p.lambda(j);
    mean /= double(cl.size());
    Mat shifted = m - mean * Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(shifted, Eigen::ComputeFullV);
    const Eigen::Index c = Eigen::Index(cl.size());
    Mat null = svd.matrixV().rightCols(c);
    if ((shifted * null).norm() > 1e-9 * scale) continue;  // genuinely defective, leave for the guard
    for (Eigen::Index t = 0; t < c; ++t) {
      p.lambda(cl[t]) = mean;
      p.v.col(cl[t]) = null.col(t);
    }
  }
  Eigen::JacobiSVD<Mat> svd(p.v);
  const auto& sv = svd.singularValues();
  p.cond = sv(0) / sv(sv.size() - 1);
  p.vinv = p.v.partialPivLu().inverse();
  return p;
}

inline void check_causal(const Vec& lambda) {
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k).real() > -kMarginal) throw NumericalError("marginal pole");
}

/// (1/2pi) int dD G_A[-D] W G_B[D]^T, every pole pair integrated by residues.
inline Mat cross_covariance(const PoleData& a, const Mat& w, const PoleData& b) {
  check_causal(a.lambda);
  check_causal(b.lambda);
  Mat wt = a.vinv * w * b.vinv.transpose();
  for (Eigen::Index k = 0; k < wt.rows(); ++k)
    for (Eigen::Index l = 0; l < wt.cols(); ++l) wt(k, l) *= -1.0 / (a.lambda(k) + b.lambda(l));
  return a.v * wt * b.v.transpose();
}

/// solution of M C + C M^T + W = 0
inline Mat stationary_covariance(const PoleData& p, const Mat& w) { return cross_covariance(p, w, p); }

/// product of simple causal factors: prod 1/(i D - up_k) * prod 1/(-i D - lo_l)
struct RationalTerm {
  cplx coef = 1.0;
  std::vector<cplx> up;
  std::vector<cplx> lo;

  cplx operator()(cplx d) const {
    cplx r = coef;
    for (cplx u : up) r /= (I * d - u);
    for (cplx l : lo) r /= (-I * d - l);
    return r;
  }
};

using RationalExpr = std::vector<RationalTerm>;

inline cplx evaluate(const RationalExpr& e, double d) {
  cplx s = 0.0;
  for (const auto& t : e) s += t(d);
  return s;
}

/// (1/2pi) int dD of a pole-form integrand, by residues in the half-plane with distinct poles
inline cplx integrate_rational(const RationalExpr& e) {
  cplx total = 0.0;
  for (const auto& t : e) {
    if (t.coef == cplx(0.0)) continue;
    if (t.up.size() + t.lo.size() < 2) throw NumericalError("non-integrable tail");
    for (cplx u : t.up)
      if (u.real() > -kMarginal) throw NumericalError("marginal pole");
    for (cplx l : t.lo)
      if (l.real() > -kMarginal) throw NumericalError("marginal pole");
    auto distinct = [](const std::vector<cplx>& v) {
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
          if (std::abs(v[i] - v[j]) < 1e-10 * (1.0 + std::abs(v[i]))) return false;
      return true;
    };
    if (t.lo.empty()) continue;  // all poles on one side: contour closes on nothing
    if (t.up.empty()) continue;
    if (distinct(t.lo)) {
      // lower half-plane, pole of 1/(-iD - l) at D = i l contributes the remaining factors there
      for (std::size_t k = 0; k < t.lo.size(); ++k) {
        cplx d = I * t.lo[k];
        cplx r = t.coef;
        for (cplx u : t.up) r /= (I * d - u);
        for (std::size_t j = 0; j < t.lo.size(); ++j)
          if (j != k) r /= (-I * d - t.lo[j]);
        total += r;
      }
    } else if (distinct(t.up)) {
      for (std::size_t k = 0; k < t.up.size(); ++k) {
        cplx d = -I * t.up[k];
        cplx r = t.coef;
        for (std::size_t j = 0; j < t.up.size(); ++j)
          if (j != k) r /= (I * d - t.up[j]);
        for (cplx l : t.lo) r /= (-I * d - l);
        total += r;
      }
    } else {
      throw NumericalError("coincident poles on both sides");
    }
  }
  return total;
}

struct QuadResult {
  cplx value;
  double error;
};

/// (1/2pi) int dD f(D) over the real line, D = tan(theta), adaptive Gauss-Kronrod
inline QuadResult integrate_quadrature(const std::function<cplx(double)>& f, double abs_tol = 1e-10,
                                       unsigned max_depth = 15) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double h = kPi / 2.0;
  auto mapped = [&](double th) -> cplx {
    double c = std::cos(th);
    if (c == 0.0) return 0.0;
    return f(std::tan(th)) / (c * c) / (2.0 * kPi);
  };
  double err = 0.0, l1 = 0.0;
  cplx v = GK::integrate(mapped, -h, h, max_depth, 1e-11, &err, &l1);
  if (err > abs_tol) throw NumericalError("quadrature did not reach tolerance");
  return {v, err};
}

/// K_{ik,ac}[D'] = (1/2pi) int dD3 G^A_ia[D3] G^B_kc[D' - D3], pair index i*n+k
inline Mat green_pair_kernel(const PoleData& a, const PoleData& b, double dprime) {
  const Eigen::Index na = a.lambda.size(), nb = b.lambda.size();
  Vec diag(na * nb);
  for (Eigen::Index k = 0; k < na; ++k)
    for (Eigen::Index m = 0; m < nb; ++m) {
      cplx z = a.lambda(k) + b.lambda(m);
      if (z.real() > -kMarginal) throw NumericalError("marginal pole");
      diag(k * nb + m) = 1.0 / (-I * dprime - z);
    }
  Mat vv = Eigen::kroneckerProduct(a.v, b.v).eval();
  Mat ww = Eigen::kroneckerProduct(a.vinv, b.vinv).eval();
  return vv * diag.asDiagonal() * ww;
}

/// Same kernel as the resolvent of the Kronecker sum, for defective drifts.
inline Mat green_pair_kernel_direct(const Mat& ma, const Mat& mb, double dprime) {
  const Eigen::Index na = ma.rows(), nb = mb.rows();
  Mat ks = Eigen::kroneckerProduct(ma, Mat::Identity(nb, nb)).eval() +
           Eigen::kroneckerProduct(Mat::Identity(na, na), mb).eval();
  Mat a = -I * dprime * Mat::Identity(na * nb, na * nb) - ks;
  return a.partialPivLu().inverse();
}

}  // namespace freq
}  // namespace cbsl
