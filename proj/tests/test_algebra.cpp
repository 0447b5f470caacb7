#include <random>

#include <gtest/gtest.h>

#include "cbsl/algebra.hpp"

using namespace cbsl;
using namespace cbsl::algebra;

namespace {

double maxabs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

Mat4 from_table(const Algebra& A, int i, int j) {
  Vec coef(kNX);
  for (int k = 0; k < kNX; ++k) coef(k) = A.st(i, j, k);
  return reconstruct(A.basis, A.st.c(i, j), coef);
}

}  // namespace

TEST(Basis, Completeness) {
  const auto& B = Algebra::get().basis;
  Mat4 sum = B.pig;
  for (int m : kQ) sum += B.pie[qslot(m)][qslot(m)];
  EXPECT_EQ(maxabs(sum - Mat4::Identity()), 0.0);
  EXPECT_EQ(B.pig(0, 0), cplx(1.0));
  EXPECT_EQ(maxabs(B.pig - B.pig(0, 0) * ket_bra(0, 0)), 0.0);
}

TEST(Basis, TracelessAndAdjointPairs) {
  const auto& B = Algebra::get().basis;
  for (int i = 0; i < kNX; ++i) {
    EXPECT_EQ(std::abs(B.x[i].trace()), 0.0) << B.names[i];
    EXPECT_EQ(maxabs(B.x[i].adjoint() - B.x[B.adjoint[i]]), 0.0);
    EXPECT_EQ(B.adjoint[B.adjoint[i]], i);
  }
  for (int q : kQ) EXPECT_EQ(B.adjoint[dplus(q)], dminus(q));
  for (int m : kQ) EXPECT_EQ(B.adjoint[piz(m)], piz(m));
}

TEST(Basis, GroundFromPiZ) {
  const auto& B = Algebra::get().basis;
  Mat4 s = Mat4::Zero();
  for (int m : kQ) s += B.x[piz(m)];
  EXPECT_EQ(maxabs(s - 0.5 * (Mat4::Identity() - 4.0 * B.pig)), 0.0);
}

TEST(Structure, ReconstructsEveryProduct) {
  const auto& A = Algebra::get();
  double worst = 0.0;
  for (int i = 0; i < kNX; ++i)
    for (int j = 0; j < kNX; ++j) {
      worst = std::max(worst, maxabs(from_table(A, i, j) - A.basis.x[i] * A.basis.x[j]));
      EXPECT_NEAR(std::abs(A.st.c(i, j) - (A.basis.x[i] * A.basis.x[j]).trace() / 4.0), 0.0, 1e-15);
    }
  EXPECT_LT(worst, 1e-14);
}

TEST(Structure, DipoleProducts) {
  const auto& A = Algebra::get();
  const auto& B = A.basis;
  for (int q : kQ)
    for (int qp : kQ) {
      Mat4 p = from_table(A, dminus(q), dplus(qp));
      Mat4 expect = (q == qp) ? B.pig : Mat4::Zero();
      EXPECT_LT(maxabs(p - expect), 1e-15);
    }
  for (int q : kQ) {
    Mat4 p = from_table(A, dplus(q), dminus(q));
    Mat4 expect = 0.25 * Mat4::Identity() + 2.0 * B.x[piz(q)];
    for (int m : kQ) expect -= 0.5 * B.x[piz(m)];
    EXPECT_LT(maxabs(p - expect), 1e-15);
  }
  EXPECT_NE(std::abs(A.st.c(piz(0), piz(0))), 0.0);
}

TEST(Structure, JacobiOnSampledTriples) {
  const auto& A = Algebra::get();
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, kNX - 1);
  auto comm = [&](const Mat4& a, const Mat4& b) { return Mat4(a * b - b * a); };
  for (int t = 0; t < 200; ++t) {
    int i = pick(rng), j = pick(rng), k = pick(rng);
    Mat4 a = from_table(A, i, i == 0 ? 1 : 0);  // products from the table as operands
    Mat4 b = A.basis.x[j], c = A.basis.x[k];
    Mat4 jac = comm(a, comm(b, c)) + comm(b, comm(c, a)) + comm(c, comm(a, b));
    EXPECT_LT(maxabs(jac), 1e-14);
  }
}

TEST(Commutator, ReconstructsAll) {
  const auto& A = Algebra::get();
  const auto& B = A.basis;
  double worst = 0.0;
  for (int q : kQ)
    for (int i = 0; i < kNX; ++i) {
      Mat4 rp = Mat4::Zero(), rm = Mat4::Zero();
      for (int j = 0; j < kNX; ++j) {
        rp += 2.0 * A.ct.plus[qslot(q)](i, j) * B.x[j];
        rm -= 2.0 * A.ct.minus[qslot(q)](i, j) * B.x[j];
      }
      const Mat4& dp = B.x[dplus(q)];
      const Mat4& dm = B.x[dminus(q)];
      worst = std::max(worst, maxabs(rp - (B.x[i] * dp - dp * B.x[i])));
      worst = std::max(worst, maxabs(rm - (B.x[i] * dm - dm * B.x[i])));
    }
  EXPECT_LT(worst, 1e-14);
}

TEST(Commutator, KnownEntries) {
  const auto& A = Algebra::get();
  const auto& B = A.basis;
  for (int q : kQ) {
    const Mat4& dp = B.x[dplus(q)];
    EXPECT_EQ(maxabs(B.pig * dp - dp * B.pig + dp), 0.0);
    for (int m : kQ)
      EXPECT_NEAR(std::abs(A.ct.plus[qslot(q)](piz(m), dplus(q)) - (1.0 + (m == q)) / 4.0), 0.0, 1e-15);
    for (int qp : kQ) EXPECT_EQ(maxabs(dp * B.x[dplus(qp)] - B.x[dplus(qp)] * dp), 0.0);
  }
}

TEST(Projector, AlongZ) {
  Mat3 p = transverse_projector(Vec3(0, 0, 1));
  Mat3 expect = Mat3::Zero();
  expect(0, 0) = 1.0;
  expect(2, 2) = 1.0;
  EXPECT_LT((p - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Projector, IdentitiesOnRandomDirections) {
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Vec3 u(n(rng), n(rng), n(rng));
    u.normalize();
    Mat3 p = transverse_projector(u);
    worst = std::max(worst, (p * p - p).cwiseAbs().maxCoeff());
    worst = std::max(worst, (p.adjoint() - p).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(p.trace() - 2.0));
    // P annihilates the spherical components of u
    CVec3 us = to_spherical(u.cast<cplx>());
    worst = std::max(worst, (p * us).norm());
  }
  EXPECT_LT(worst, 1e-13);
}

TEST(Projector, ConjugationRule) {
  for (int q : kQ) {
    CVec3 lhs = spherical_unit(q).conjugate();
    CVec3 rhs = (q % 2 == 0 ? 1.0 : -1.0) * spherical_unit(-q);
    EXPECT_LT((lhs - rhs).norm(), 1e-15);
  }
}

TEST(Projector, RejectsNonUnit) {
  try {
    transverse_projector(Vec3(0, 0, 1.1));
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_STREQ(e.what(), "non-unit direction");
  }
}
