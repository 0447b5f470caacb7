#pragma once

#include <string>
#include <vector>

#include "cbs.hpp"
#include "ob_oracle.hpp"

namespace cbsl {

/// Invariant checks shared by the command-line validator and the acceptance run.
namespace validate {

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass() const { return residual <= tolerance; }
};

struct Options {
  int ntheta = 4, nphi = 8;
  double vacuum_weight = 1.0;  // -1 injects a sign flip into the explicit cross-noise term
};

inline double rel_gap(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

inline Check algebra_exactness() {
  const auto& A = algebra::Algebra::get();
  const auto& B = A.basis;
  double worst = 0.0;
  for (int i = 0; i < algebra::kNX; ++i)
    for (int j = 0; j < algebra::kNX; ++j) {
      Vec coef(algebra::kNX);
      for (int k = 0; k < algebra::kNX; ++k) coef(k) = A.st(i, j, k);
      Mat4 r = algebra::reconstruct(B, A.st.c(i, j), coef);
      worst = std::max(worst, (r - B.x[i] * B.x[j]).cwiseAbs().maxCoeff());
    }
  for (int q : algebra::kQ)
    for (int i = 0; i < algebra::kNX; ++i) {
      Mat4 rp = Mat4::Zero(), rm = Mat4::Zero();
      for (int j = 0; j < algebra::kNX; ++j) {
        rp += 2.0 * A.ct.plus[algebra::qslot(q)](i, j) * B.x[j];
        rm -= 2.0 * A.ct.minus[algebra::qslot(q)](i, j) * B.x[j];
      }
      const Mat4& dp = B.x[algebra::dplus(q)];
      const Mat4& dm = B.x[algebra::dminus(q)];
      worst = std::max(worst, (rp - (B.x[i] * dp - dp * B.x[i])).cwiseAbs().maxCoeff());
      worst = std::max(worst, (rm - (B.x[i] * dm - dm * B.x[i])).cwiseAbs().maxCoeff());
    }
  return {"algebra reconstruction", worst, 1e-14};
}

/// elastic fraction 1/(1+s) and total = connected equal-time correlator for a sigma+ drive
inline Check sum_rules(const std::vector<double>& s_values = {0.02, 2.0, 50.0}) {
  double worst = 0.0;
  for (double s : s_values) {
    const DriftSystem sys = single_atom::build_drift(LaserField::sigma_plus(s, 0.0));
    const Vec x = single_atom::steady_state(sys);
    const Mat xx = single_atom::equal_time_products(x);
    cplx tot = 0.0, el = 0.0;
    for (int q : algebra::kQ) {
      tot += xx(algebra::dplus(q), algebra::dminus(q));
      el += x(algebra::dplus(q)) * x(algebra::dminus(q));
    }
    auto o = single_atom::mollow_spectrum(sys, {}, Mat3::Identity());
    worst = std::max(worst, std::abs(o.inelastic_total - (tot - el)));
    worst = std::max(worst, std::abs(o.elastic - el));
    worst = std::max(worst, std::abs((o.elastic / tot).real() - 1.0 / (1.0 + s)));
    const single_atom::GreenFunction G(sys);
    const Mat d = single_atom::diffusion_matrix(x);
    auto qd = freq::integrate_quadrature(
        [&](double D) { return single_atom::dipole_density(G, d, Mat3::Identity(), D); }, 1e-12);
    worst = std::max(worst, std::abs(qd.value - o.inelastic_total));
  }
  return {"single-atom sum rules", worst, 1e-10};
}

/// OB coefficient of one monomial as the (atom 2, atom 1) block of <X^1 X^2>
inline Mat ob_block(const ob::Extraction& e, const two_atom::Mono& m) {
  const Vec& v = e.coef.at(m);
  Mat r(15, 15);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) r(j, i) = v(two_atom::pidx(i + 1, j + 1));
  return r;
}

/// Langevin orders g, gbar (explicit route) and g gbar (product basis) against the OB extraction
inline Check ob_agreement(double s0, double delta, const Vec3& u, double vacuum_weight = 1.0) {
  using namespace two_atom;
  const LaserField f = LaserField::sigma_plus(s0, delta);
  const DriftSystem sys = single_atom::build_drift(f);
  const Mat3 p = algebra::transverse_projector(u);
  const PairExpansion ex(sys, sys, p);
  const auto e = ob::extract_orders(ob::build_two_atom(f, f, u), ob::pair_products());
  double worst = e.contamination;
  auto slice = order_g_slice(sys, sys, p, vacuum_weight);
  for (const auto& [m, t] : slice) worst = std::max(worst, rel_gap(ob_block(e, m), t.total()));
  for (int a : {kG1, kG2})
    for (int b : {kGb1, kGb2}) {
      const Mono m = unit(a) + unit(b);
      worst = std::max(worst, rel_gap(e.coef.at(m), ex.y(m)));
    }
  char buf[96];
  std::snprintf(buf, sizeof buf, "OB vs Langevin orders (s0=%g, delta=%g)", s0, delta);
  return {buf, worst, 1e-8};
}

inline cbs::CaseConfig table_case(int k, const Options& o) {
  cbs::CaseConfig c;
  c.s0 = cbs::kReferenceTable[k].s0;
  c.delta = cbs::kReferenceTable[k].delta;
  c.ntheta = o.ntheta;
  c.nphi = o.nphi;
  return c;
}

inline Check kr_invariance(const Options& o) {
  double lo = 1e300, hi = -1e300;
  for (double kr : {10.0, 100.0, 1000.0}) {
    cbs::CaseConfig c = table_case(1, o);
    c.kr = kr;
    const double eta = cbs::run_case(c).eta;
    lo = std::min(lo, eta);
    hi = std::max(hi, eta);
  }
  return {"kR invariance of eta", hi - lo, 1e-10};
}

inline Check channel_identity(const Options& o) {
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    auto r = cbs::run_case(table_case(k, o));
    worst = std::max(worst, std::abs(r.L_el - r.C_el) / std::max(1e-300, std::abs(r.L_el)));
  }
  return {"L_el = C_el in h||h", worst, 1e-10};
}

/// the integrands are polynomials of degree 4 in u, so doubling both orders must not move eta
inline Check angular_exactness(const Options& o) {
  cbs::CaseConfig a = table_case(1, o), b = a;
  b.ntheta *= 2;
  b.nphi *= 2;
  return {"angular quadrature exactness", std::abs(cbs::run_case(a).eta - cbs::run_case(b).eta), 1e-12};
}

inline std::vector<Check> run_all(const Options& o) {
  std::vector<Check> out;
  out.push_back(algebra_exactness());
  out.push_back(sum_rules());
  out.push_back(ob_agreement(2.0, 0.0, Vec3(0.3, -0.5, 0.81).normalized(), o.vacuum_weight));
  out.push_back(kr_invariance(o));
  out.push_back(channel_identity(o));
  out.push_back(angular_exactness(o));
  return out;
}

}  // namespace validate
}  // namespace cbsl
