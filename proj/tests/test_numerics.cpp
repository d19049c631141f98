#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

using namespace lis;
using lis::test::EMat;

namespace {

double unitarity_defect(const ComplexMatrix& q) {
  const EMat e = test::to_eigen(q);
  return (e.adjoint() * e - EMat::Identity(e.cols(), e.cols())).cwiseAbs().maxCoeff();
}

double reconstruction_error(const ComplexMatrix& a, const SvdResult& r) {
  EMat s = EMat::Zero(r.S.size(), r.S.size());
  for (std::size_t i = 0; i < r.S.size(); ++i) s(i, i) = r.S[i];
  return (test::to_eigen(a) - test::to_eigen(r.U) * s * test::to_eigen(r.V).adjoint()).norm();
}

}  // namespace

TEST(ComplexMatrix, RejectsNonFiniteOnConstruction) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ComplexMatrix(1, 2, {cplx{1, 0}, cplx{nan, 0}}), NumericalError);
  EXPECT_THROW(ComplexMatrix(1, 1, {cplx{0, std::numeric_limits<double>::infinity()}}), NumericalError);
  EXPECT_THROW(ComplexMatrix(2, 2, std::vector<cplx>(3)), DimensionError);
}

TEST(ComplexMatrix, FromRowsIsRowMajorLiteral) {
  const auto a = ComplexMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(a.rows(), 2u);
  EXPECT_EQ(a.cols(), 3u);
  EXPECT_EQ(a(0, 2), cplx(3));
  EXPECT_EQ(a(1, 0), cplx(4));
  EXPECT_THROW(ComplexMatrix::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST(ComplexMatrix, ProductsMatchEigen) {
  Rng rng(3);
  const auto a = test::random_matrix(rng, 7, 5);
  const auto b = test::random_matrix(rng, 5, 4);
  const auto c = test::random_matrix(rng, 7, 4);
  const EMat ea = test::to_eigen(a), eb = test::to_eigen(b), ec = test::to_eigen(c);
  EXPECT_LT((test::to_eigen(multiply(a, b)) - ea * eb).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((test::to_eigen(adjoint_multiply(a, c)) - ea.adjoint() * ec).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((test::to_eigen(multiply_adjoint(b.adjoint(), b.adjoint())) - eb.adjoint() * eb).cwiseAbs().maxCoeff(),
            1e-12);
  const auto g = gram(a);
  EXPECT_EQ(hermitian_defect(g), 0.0);
  EXPECT_LT((test::to_eigen(g) - ea.adjoint() * ea).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(multiply(a, a), DimensionError);
}

TEST(ComplexMatrix, GatherRowsPicksInOrder) {
  const auto a = ComplexMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const std::vector<std::size_t> idx{2, 0};
  const auto g = gather_rows(a, idx);
  EXPECT_EQ(g, ComplexMatrix::from_rows({{5, 6}, {1, 2}}));
}

TEST(Svd, IdentityGivesIdentityFactors) {
  const auto r = svd(ComplexMatrix::identity(3));
  EXPECT_EQ(r.S, (std::vector<double>{1, 1, 1}));
  EXPECT_LT(test::max_abs_diff(r.U, ComplexMatrix::identity(3)), 1e-15);
  EXPECT_LT(test::max_abs_diff(r.V, ComplexMatrix::identity(3)), 1e-15);
}

TEST(Svd, DiagonalWithZero) {
  const auto a = ComplexMatrix::from_rows({{3, 0}, {0, 0}});
  const auto r = svd(a);
  EXPECT_DOUBLE_EQ(r.S[0], 3.0);
  EXPECT_DOUBLE_EQ(r.S[1], 0.0);
  EXPECT_LT(unitarity_defect(r.U), 1e-12);
  EXPECT_LT(unitarity_defect(r.V), 1e-12);
  EXPECT_LT(reconstruction_error(a, r), 1e-14);
}

TEST(Svd, ZeroMatrixStillOrthonormal) {
  const auto r = svd(ComplexMatrix(4, 3));
  for (double s : r.S) EXPECT_EQ(s, 0.0);
  EXPECT_LT(unitarity_defect(r.U), 1e-12);
  EXPECT_LT(unitarity_defect(r.V), 1e-12);
}

TEST(Svd, Random100x50Reconstruction) {
  Rng rng(11);
  const auto a = test::random_matrix(rng, 100, 50);
  const auto r = svd(a);
  ASSERT_EQ(r.U.rows(), 100u);
  ASSERT_EQ(r.U.cols(), 50u);
  ASSERT_EQ(r.V.rows(), 50u);
  EXPECT_LE(reconstruction_error(a, r), 1e-10 * a.frobenius_norm());
  EXPECT_LT(unitarity_defect(r.U), 1e-10);
  EXPECT_LT(unitarity_defect(r.V), 1e-10);
}

TEST(Svd, SingularValuesMatchEigen) {
  Rng rng(12);
  for (auto [m, n] : {std::pair{9, 4}, std::pair{4, 9}, std::pair{6, 6}}) {
    const auto a = test::random_matrix(rng, m, n);
    const auto r = svd(a);
    Eigen::JacobiSVD<EMat> es(test::to_eigen(a));
    ASSERT_EQ(r.S.size(), static_cast<std::size_t>(std::min(m, n)));
    for (std::size_t i = 0; i < r.S.size(); ++i) EXPECT_NEAR(r.S[i], es.singularValues()(i), 1e-12);
    EXPECT_LE(reconstruction_error(a, r), 1e-12 * a.frobenius_norm());
  }
}

TEST(Svd, PhaseConventionLargestEntryRealNonNegative) {
  Rng rng(13);
  const auto r = svd(test::random_matrix(rng, 8, 5));
  for (std::size_t j = 0; j < r.U.cols(); ++j) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < r.U.rows(); ++i)
      if (std::abs(r.U(i, j)) > std::abs(r.U(imax, j))) imax = i;
    EXPECT_EQ(r.U(imax, j).imag(), 0.0);
    EXPECT_GE(r.U(imax, j).real(), 0.0);
  }
}

TEST(Svd, LeftOnlyMatchesFullBitwise) {
  Rng rng(14);
  const auto a = test::random_matrix(rng, 12, 7);
  const auto full = svd(a);
  const auto left = svd_left(a);
  EXPECT_EQ(full.U, left.U);
  EXPECT_EQ(full.S, left.S);
  EXPECT_TRUE(left.V.empty());
}

TEST(Svd, RankDeficientTall) {
  Rng rng(15);
  const auto b = test::random_matrix(rng, 10, 2);
  const auto c = test::random_matrix(rng, 2, 5);
  const auto a = multiply(b, c);  // rank 2
  const auto r = svd(a);
  EXPECT_LT(r.S[2], 1e-13 * r.S[0]);
  EXPECT_LT(unitarity_defect(r.U), 1e-10);
  EXPECT_LT(unitarity_defect(r.V), 1e-10);
  EXPECT_LE(reconstruction_error(a, r), 1e-12 * a.frobenius_norm());
}

TEST(Svd, RejectsBadInput) {
  EXPECT_THROW(svd(ComplexMatrix()), DimensionError);
  ComplexMatrix a(2, 2);
  a(0, 0) = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  EXPECT_THROW(svd(a), NumericalError);
}

TEST(InvSqrtSingular, Examples) {
  const std::vector<double> a{4, 1};
  EXPECT_EQ(inv_sqrt_singular(a, 0.0), (std::vector<double>{0.5, 1.0}));
  const std::vector<double> b{1, 0};
  const auto rb = inv_sqrt_singular(b, 1e-12);
  EXPECT_DOUBLE_EQ(rb[0], 1.0);
  EXPECT_NEAR(rb[1], 1e6, 1e-4);
  const std::vector<double> c{9, 4, 1};
  const auto rc = inv_sqrt_singular(c, 0.0);
  EXPECT_DOUBLE_EQ(rc[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(rc[1], 0.5);
  EXPECT_DOUBLE_EQ(rc[2], 1.0);
}

TEST(InvSqrtSingular, Errors) {
  const std::vector<double> zeros{0, 0};
  EXPECT_THROW(inv_sqrt_singular(zeros), NumericalError);
  const std::vector<double> unfloored{1, 0};
  EXPECT_THROW(inv_sqrt_singular(unfloored, 0.0), NumericalError);
  const std::vector<double> ascending{1, 2};
  EXPECT_THROW(inv_sqrt_singular(ascending), NumericalError);
  EXPECT_THROW(inv_sqrt_singular(std::vector<double>{}), DimensionError);
}

TEST(LogDet, TrivialValues) {
  EXPECT_DOUBLE_EQ(logdet_hermitian_pd(ComplexMatrix::identity(4)), 0.0);
  EXPECT_DOUBLE_EQ(logdet_hermitian_pd(ComplexMatrix::from_rows({{2, 0}, {0, 2}})), 2.0);
}

TEST(LogDet, MatchesEigenvalueOracle) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto g = test::random_matrix(rng, 6, 5);
    ComplexMatrix a = gram(g);
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += 1.0;
    const double got = logdet_hermitian_pd(a);
    const double want = test::oracle_centralized(g, 1.0);
    EXPECT_NEAR(got, want, 1e-9 * std::abs(want));
  }
}

TEST(LogDet, ProductConsistency5x5) {
  // log det(A^{1/2} B A^{1/2}) = log det A + log det B, via the congruence L^H B L.
  Rng rng(22);
  for (int t = 0; t < 10; ++t) {
    const auto a = test::random_hpd(rng, 5);
    const auto b = test::random_hpd(rng, 5);
    const auto l = cholesky(a);
    const auto prod = gram(multiply(cholesky(b).adjoint(), l));  // L^H B L
    Eigen::SelfAdjointEigenSolver<EMat> ea(test::to_eigen(a)), eb(test::to_eigen(b));
    double want = 0.0;
    for (int i = 0; i < 5; ++i) want += std::log2(ea.eigenvalues()(i)) + std::log2(eb.eigenvalues()(i));
    EXPECT_NEAR(logdet_hermitian_pd(prod), want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST(LogDet, NonPositivePivotNamesIndex) {
  const auto a = ComplexMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, -1}});
  try {
    logdet_hermitian_pd(a);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(logdet_hermitian_pd(ComplexMatrix::from_rows({{1, 1}, {0, 1}})), NumericalError);
}

TEST(HermitianSolve, MatchesEigen) {
  Rng rng(23);
  const auto a = test::random_hpd(rng, 6);
  const auto b = test::random_matrix(rng, 6, 3);
  const auto x = hermitian_solve(a, b);
  const EMat want = test::to_eigen(a).ldlt().solve(test::to_eigen(b));
  EXPECT_LT((test::to_eigen(x) - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  Rng c(6);
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = std::norm(c.complex_normal());
    s += v;
  }
  // |CN(0,1)|^2 is Exp(1)
  EXPECT_NEAR(s / n, 1.0, 4.0 / std::sqrt(n));
}
