#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "cbsl/ob_oracle.hpp"

using namespace cbsl;
using namespace cbsl::two_atom;
namespace al = cbsl::algebra;

namespace {

Vec3 axis() { return Vec3(0.3, -0.5, 0.81).normalized(); }

CVec3 helicity_out() { return al::spherical_unit(-1); }

Vec lowering_coeffs(int atom) {
  Vec c = Vec::Zero(15);
  for (int m : al::kQ) c(al::dminus(m)) = helicity_out().dot(al::spherical_unit(m));
  return on_atom(atom, c);
}

double rel(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(ObOracle, UncoupledStateFactorizes) {
  auto f = LaserField::sigma_plus(2.0, 5.0);
  auto sys = single_atom::build_drift(f);
  PairExpansion ex(sys, sys, al::transverse_projector(axis()), 0);
  auto ob2 = ob::build_two_atom(f, f, axis());
  Vec w = ob::steady_state(ob2.s0);
  auto ops = ob::pair_products();
  Vec got(kPair);
  for (int k = 0; k < kPair; ++k) got(k) = ob::expect(ops[k], w);
  EXPECT_LT(rel(got, ex.y(kOne)), 1e-12);
}

TEST(ObOracle, CoupledStateIsPhysical) {
  auto f = LaserField::sigma_plus(2.0, 0.0);
  auto ob2 = ob::build_two_atom(f, f, axis());
  PairConfig pc;
  pc.kr = 10.0;
  Mat s = ob2.generator(ob::physical_couplings(pc.g(), 1.0, 0.7));
  Mat rho = ob::density_matrix(ob::steady_state(s));
  EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-12);
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(ObOracle, OrdersMatchPairExpansion) {
  Mat3 p = al::transverse_projector(axis());
  for (auto [s0, d] : {std::pair{2.0, 0.0}, std::pair{2.0, 5.0}}) {
    auto f = LaserField::sigma_plus(s0, d);
    auto sys = single_atom::build_drift(f);
    PairExpansion ex(sys, sys, p);
    auto e = ob::extract_orders(ob::build_two_atom(f, f, axis()), ob::pair_products());
    EXPECT_LT(e.contamination, 1e-9);
    for (const Mono& m : monomials(2)) {
      bool required = degree(m) < 2 || m == unit(kG1) + unit(kGb1) || m == unit(kG1) + unit(kGb2) ||
                      m == unit(kG2) + unit(kGb1) || m == unit(kG2) + unit(kGb2);
      if (required) EXPECT_LT(rel(e.coef.at(m), ex.y(m)), 1e-8) << s0 << " " << d;
    }
  }
}

TEST(ObOracle, TooFewPointsRejected) {
  auto f = LaserField::sigma_plus(1.0, 0.0);
  try {
    ob::extract_orders(ob::build_two_atom(f, f, axis()), ob::pair_products(), 2, 0.01, 4);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_STREQ(e.what(), "at least 5 sample points per coupling");
  }
}

TEST(ObOracle, RegressionMatchesMollowWithoutCoupling) {
  auto f = LaserField::sigma_plus(2.0, 1.0);
  auto sys = single_atom::build_drift(f);
  auto ob2 = ob::build_two_atom(f, f, axis());
  Vec w = ob::steady_state(ob2.s0);
  Mat e1 = ob::analyzer_lowering(1, helicity_out());
  Mat e1d = e1.adjoint();
  std::vector<double> grid{-4.0, -1.3, 0.0, 0.6, 2.5};
  auto ref = single_atom::mollow_spectrum(sys, grid, single_atom::analyzer_weight(helicity_out()));
  for (std::size_t k = 0; k < grid.size(); ++k)
    EXPECT_NEAR(std::abs(ob::qrt_density(ob2.s0, w, e1d, e1, grid[k]) - ref.density[k]), 0.0, 1e-10);
}

TEST(ObOracle, RegressionSumRule) {
  auto f = LaserField::sigma_plus(2.0, 0.0);
  auto ob2 = ob::build_two_atom(f, f, axis());
  PairConfig pc;
  pc.kr = 10.0;
  Mat s = ob2.generator(ob::physical_couplings(pc.g(), 1.0));
  Vec w = ob::steady_state(s);
  Mat e1 = ob::analyzer_lowering(1, helicity_out()), e2 = ob::analyzer_lowering(2, helicity_out());
  Mat a = e2.adjoint(), b = e1;
  cplx conn = ob::expect(a * b, w) - ob::expect(a, w) * ob::expect(b, w);
  auto q = freq::integrate_quadrature([&](double d) { return ob::qrt_density(s, w, a, b, d); }, 1e-8);
  EXPECT_NEAR(std::abs(q.value - conn), 0.0, 1e-8);
}

TEST(ObOracle, ExtractedDensityMatchesPairSpectra) {
  auto f = LaserField::sigma_plus(2.0, 0.0);
  auto sys = single_atom::build_drift(f);
  PairExpansion ex(sys, sys, al::transverse_projector(axis()));
  PairSpectra sp(ex, sys, sys);
  auto ob2 = ob::build_two_atom(f, f, axis());
  Mat e1 = ob::analyzer_lowering(1, helicity_out());
  Vec c1 = lowering_coeffs(1);
  const Mono l1 = unit(kG1) + unit(kGb1);
  for (double d : {0.0, 1.2}) {
    auto dens = ob::extract_density(ob2, e1.adjoint(), e1, d);
    cplx ref = sp.density(adjoint(c1), c1, l1, d);
    EXPECT_NEAR(std::abs(dens.at(l1) - ref), 0.0, 1e-7 * std::max(1.0, std::abs(ref))) << d;
  }
}
