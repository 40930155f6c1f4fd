#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qtransfer/qstate.hpp"

using namespace qtransfer;

namespace {

MultipartiteOperator bell_projector() { return bell_basis()[0].projector(); }

Matrix diag4(double a, double b, double c, double d) {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  m(3, 3) = d;
  return m;
}

}  // namespace

TEST(Tensor, IdentityTimesIdentity) {
  const auto i4 = tensor(MultipartiteOperator::identity({2}), MultipartiteOperator::identity({2}));
  EXPECT_EQ(i4.dims(), (Dims{2, 2}));
  EXPECT_EQ(max_abs(i4.matrix() - Matrix::Identity(4, 4)), 0.0);
}

TEST(Tensor, Sigma3TimesIdentity) {
  const auto op = tensor(MultipartiteOperator(pauli(3)), MultipartiteOperator::identity({2}));
  EXPECT_EQ(max_abs(op.matrix() - diag4(-1, -1, 1, 1)), 0.0);
}

TEST(Tensor, BasisProjector) {
  const auto op = tensor(PureState::basis(2, 0).projector(), PureState::basis(2, 1).projector());
  EXPECT_EQ(max_abs(op.matrix() - diag4(0, 1, 0, 0)), 0.0);
}

TEST(Tensor, MatchesEntrywiseKronecker) {
  std::mt19937_64 rng(1);
  const Matrix a = oracle::random_matrix(2, rng), b = oracle::random_matrix(3, rng);
  const auto t = tensor(MultipartiteOperator(a), MultipartiteOperator(b));
  EXPECT_EQ(t.dims(), (Dims{2, 3}));
  EXPECT_LT(max_abs(t.matrix() - oracle::kron(a, b)), 1e-15);
}

TEST(Operator, RejectsMismatchedDims) {
  EXPECT_THROW(MultipartiteOperator(Matrix::Identity(4, 4), Dims{2, 3}), DimensionError);
  EXPECT_THROW(MultipartiteOperator::identity({2}) + MultipartiteOperator::identity({2, 1}), DimensionError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MultipartiteOperator{bad}, InvariantError);
}

TEST(States, ValidationErrors) {
  EXPECT_THROW(PureState(Vector::Ones(2), Dims{2}), InvariantError);
  EXPECT_THROW(PureState(Vector::Ones(3) / std::sqrt(3.0), Dims{2}), DimensionError);
  EXPECT_THROW(PureState::normalized(Vector::Zero(2)), InvariantError);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  EXPECT_THROW(DensityMatrix(MultipartiteOperator(neg)), InvariantError);
  Matrix nonherm = Matrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(MultipartiteOperator(nonherm)), InvariantError);
  EXPECT_THROW(DensityMatrix(MultipartiteOperator::identity({2})), InvariantError);
}

TEST(PartialTrace, BellTensorAnything) {
  std::mt19937_64 rng(2);
  const auto other = MultipartiteOperator(oracle::random_density(3, rng));
  const auto rho = tensor(bell_projector(), other);
  const auto r = partial_trace(rho, {0, 1});
  EXPECT_EQ(r.dims(), (Dims{2, 2}));
  EXPECT_LT(max_abs(r.matrix() - bell_projector().matrix()), 1e-15);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  const auto r = partial_trace(bell_projector(), {0});
  EXPECT_LT(max_abs(r.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, MatchesIndexOracle) {
  std::mt19937_64 rng(3);
  const Matrix rho = oracle::random_density(8, rng);
  const auto r = partial_trace(MultipartiteOperator(rho, {2, 2, 2}), {0, 2});
  EXPECT_LT(max_abs(r.matrix() - oracle::index_partial_trace(rho, {2, 2, 2}, {0, 2})), 1e-15);

  const Matrix mixed = oracle::random_density(12, rng);
  for (const auto& keep : std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}}) {
    const auto out = partial_trace(MultipartiteOperator(mixed, {2, 3, 2}), keep);
    EXPECT_LT(max_abs(out.matrix() - oracle::index_partial_trace(mixed, {2, 3, 2}, keep)), 1e-15);
  }
}

TEST(PartialTrace, RecoversProductFactors) {
  std::mt19937_64 rng(4);
  const auto a = MultipartiteOperator(oracle::random_density(2, rng));
  const auto b = MultipartiteOperator(oracle::random_density(3, rng));
  const auto ab = tensor(a, b);
  EXPECT_LT(max_abs(partial_trace(ab, {0}).matrix() - a.matrix()), 1e-14);
  EXPECT_LT(max_abs(partial_trace(ab, {1}).matrix() - b.matrix()), 1e-14);
  EXPECT_NEAR(std::abs(partial_trace(ab, {1}).trace() - ab.trace()), 0.0, 1e-14);
}

TEST(PartialTrace, InvalidKeepSets) {
  const auto rho = MultipartiteOperator::identity({2, 2});
  EXPECT_THROW(partial_trace(rho, {}), DimensionError);
  EXPECT_THROW(partial_trace(rho, {2}), DimensionError);
  EXPECT_THROW(partial_trace(rho, {0, 0}), DimensionError);
}

TEST(PartialTranspose, ProductState) {
  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_density(2, rng), b = oracle::random_density(2, rng);
  const auto pt = partial_transpose(tensor(MultipartiteOperator(a), MultipartiteOperator(b)), 0);
  EXPECT_LT(max_abs(pt.matrix() - oracle::kron(a.transpose(), b)), 1e-15);
}

TEST(PartialTranspose, BellSpectrum) {
  const auto ev = hermitian_eigenvalues(partial_transpose(bell_projector(), 1));
  EXPECT_NEAR(ev(0), -0.5, 1e-15);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev(i), 0.5, 1e-15);
}

TEST(PartialTranspose, InvolutionTraceHermiticity) {
  std::mt19937_64 rng(6);
  const Matrix m = oracle::random_matrix(12, rng);
  for (std::size_t s = 0; s < 3; ++s) {
    const MultipartiteOperator op(m, {2, 3, 2});
    EXPECT_EQ(max_abs(partial_transpose(partial_transpose(op, s), s).matrix() - m), 0.0);
    EXPECT_NEAR(std::abs(partial_transpose(op, s).trace() - op.trace()), 0.0, 1e-13);
  }
  const Matrix h = oracle::random_hermitian(4, rng);
  EXPECT_TRUE(partial_transpose(MultipartiteOperator(h, {2, 2}), 0).is_hermitian(1e-15));
  EXPECT_LT(max_abs(partial_transpose(MultipartiteOperator(h, {2, 2}), 0).matrix() - oracle::pt_first_qubit(h)), 1e-15);
  EXPECT_THROW(partial_transpose(MultipartiteOperator(h, {2, 2}), 2), DimensionError);
}

// Transposing the first factor commutes with multiplying by I (x) Y on either side.
TEST(PartialTranspose, CommutesWithOperatorsOnOtherFactor) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const MultipartiteOperator o(oracle::random_matrix(6, rng), {3, 2});
    const auto y = embed(oracle::random_matrix(2, rng), 1, {3, 2});
    EXPECT_LT(max_abs(partial_transpose(o * y, 0).matrix() - (partial_transpose(o, 0) * y).matrix()), 1e-13);
    EXPECT_LT(max_abs(partial_transpose(y * o, 0).matrix() - (y * partial_transpose(o, 0)).matrix()), 1e-13);
  }
}

TEST(Negativity, ReferenceStates) {
  EXPECT_NEAR(negativity(DensityMatrix(bell_projector()), 0), 0.5, 1e-14);
  std::mt19937_64 rng(8);
  const auto prod = tensor(MultipartiteOperator(oracle::random_density(2, rng)),
                           MultipartiteOperator(oracle::random_density(2, rng)));
  EXPECT_EQ(negativity(DensityMatrix(prod), 0), 0.0);
  const Matrix werner = 0.5 * bell_projector().matrix() + 0.5 * Matrix::Identity(4, 4) / 4.0;
  EXPECT_NEAR(negativity(DensityMatrix(MultipartiteOperator(werner, {2, 2})), 0), 0.125, 1e-14);
}

TEST(Negativity, CutoffSuppressesRoundoff) {
  // PT moves the gg-ee coherence x into the {ge, eg} block, giving eigenvalue -x
  auto with_coherence = [](double x) {
    Matrix rho = diag4(0.5, 0, 0, 0.5);
    rho(0, 3) = rho(3, 0) = x;
    return MultipartiteOperator(rho, {2, 2});
  };
  EXPECT_EQ(negativity(with_coherence(1e-13), 0), 0.0);
  EXPECT_NEAR(negativity(with_coherence(1e-11), 0), 1e-11, 1e-20);
}

TEST(Negativity, RejectsNonHermitian) {
  Matrix m = Matrix::Identity(4, 4) / 4.0;
  m(0, 1) = 0.2;
  EXPECT_THROW(negativity(MultipartiteOperator(m, {2, 2}), 0), InvariantError);
}

TEST(Negativity, InvariantUnderLocalUnitaries) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = oracle::random_density(4, rng);
    const Matrix u = oracle::kron(oracle::random_unitary(2, rng), oracle::random_unitary(2, rng));
    const MultipartiteOperator a(rho, {2, 2}), b(u * rho * u.adjoint(), {2, 2});
    EXPECT_NEAR(negativity(a, 0), negativity(b, 0), 1e-10);
    EXPECT_NEAR(negativity(a, 0), negativity(a, 1), 1e-12);
  }
}

TEST(Schmidt, ReferenceStates) {
  const auto bell = schmidt_decompose(bell_basis()[0]);
  EXPECT_NEAR(bell.coefficients(0), 0.5, 1e-14);
  EXPECT_NEAR(bell.coefficients(1), 0.5, 1e-14);

  const auto prod = schmidt_decompose(PureState(PureState::basis(4, 0).amplitudes(), {2, 2}));
  EXPECT_NEAR(prod.coefficients(0), 1.0, 1e-14);
  EXPECT_NEAR(prod.coefficients(1), 0.0, 1e-14);

  Vector v = Vector::Zero(4);
  v(1) = std::sqrt(0.9);
  v(2) = std::sqrt(0.1);
  const auto d = schmidt_decompose(PureState(v, {2, 2}));
  EXPECT_NEAR(d.coefficients(0), 0.9, 1e-14);
  EXPECT_NEAR(d.coefficients(1), 0.1, 1e-14);
}

TEST(Schmidt, ReconstructsRandomStates) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const PureState psi(oracle::random_state(6, rng), {2, 3});
    const auto s = schmidt_decompose(psi);
    EXPECT_NEAR(s.coefficients.sum(), 1.0, 1e-12);
    EXPECT_GE(s.coefficients(0), s.coefficients(1));
    Vector rebuilt = Vector::Zero(6);
    for (Eigen::Index k = 0; k < s.coefficients.size(); ++k)
      rebuilt += std::sqrt(s.coefficients(k)) * oracle::kron(s.left.col(k), s.right.col(k));
    EXPECT_LT((rebuilt - psi.amplitudes()).norm(), 1e-12);
  }
  EXPECT_THROW(schmidt_decompose(PureState(Vector::Ones(8) / std::sqrt(8.0), {2, 2, 2})), DimensionError);
}

TEST(Pauli, Conventions) {
  const cplx i = kI;
  EXPECT_EQ(pauli(1)(0, 1), cplx(1));
  EXPECT_EQ(pauli(2)(0, 1), i);
  EXPECT_EQ(pauli(2)(1, 0), -i);
  EXPECT_EQ(pauli(3)(0, 0), cplx(-1));
  for (int mu = 0; mu < 4; ++mu) EXPECT_LT(max_abs(pauli(mu) * pauli(mu) - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_THROW(pauli(4), DimensionError);
}

TEST(BellBasis, ComputationalBasis) {
  const auto b = bell_basis();
  const double s = 1 / std::sqrt(2.0);
  // Phi_0 = (gg + ee)/sqrt2, Phi_3 = (ee - gg)/sqrt2 with sigma_3 = diag(-1, 1)
  EXPECT_NEAR(std::abs(b[0].amplitudes()(0) - s), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[0].amplitudes()(3) - s), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[1].amplitudes()(1) - s), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[1].amplitudes()(2) - s), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b[3].amplitudes()(0) + s), 0.0, 1e-15);
}

TEST(BellBasis, OrthonormalAndMaximallyEntangled) {
  std::mt19937_64 rng(11);
  const Matrix u = oracle::random_unitary(2, rng);
  const PureState g(u.col(0), {2}), e(u.col(1), {2});
  const auto b = bell_basis(g, e);
  Matrix gram(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gram(i, j) = b[static_cast<std::size_t>(i)].amplitudes().dot(b[static_cast<std::size_t>(j)].amplitudes());
  EXPECT_LT(max_abs(gram - Matrix::Identity(4, 4)), 1e-14);
  for (const auto& phi : b)
    EXPECT_LT(max_abs(partial_trace(phi.projector(), {0}).matrix() - Matrix::Identity(2, 2) / 2.0), 1e-14);
}

TEST(BellBasis, RejectsNonOrthogonalInput) {
  Vector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(bell_basis(PureState::basis(2, 0), PureState::normalized(v)), InvariantError);
}

TEST(Embed, PlacesOperator) {
  const auto op = embed(pauli(3), 1, {2, 2, 3});
  const Matrix want = oracle::kron(oracle::kron(Matrix::Identity(2, 2), pauli(3)), Matrix::Identity(3, 3));
  EXPECT_EQ(max_abs(op.matrix() - want), 0.0);
  EXPECT_THROW(embed(pauli(3), 2, {2, 2, 3}), DimensionError);
}
