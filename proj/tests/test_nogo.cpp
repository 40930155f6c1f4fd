#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qtransfer/nogo.hpp"

using namespace qtransfer;

namespace {

ToyTransmissionModel seeded_model(std::uint64_t seed, const RandomModelOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  return random_toy_model(rng, opt);
}

// Reduced state predicted by the Dyson terms at coupling scale s.
Matrix dyson_prediction(const DysonTerms& t, double s) {
  return t.rho0.matrix() + s * t.rho1.matrix() + s * s * t.rho2.matrix();
}

}  // namespace

TEST(Nogo, NoCouplingsKeepsProductState) {
  auto m = default_toy_model();
  m.couplings_A.clear();
  m.couplings_B.clear();
  const auto rho = exact_evolve(m, 1.0);
  const Matrix want = oracle::kron(partial_trace(m.input.projector(), {0}).matrix(), m.rho_B.matrix());
  EXPECT_LT(max_abs(rho.matrix() - want), 1e-14);
  const auto s = negativity_scaling(m, {0.01, 0.02, 0.05, 0.1});
  for (double n : s.negativities) EXPECT_EQ(n, 0.0);
}

TEST(Nogo, DecoupledReceiverNeverEntangles) {
  auto m = seeded_model(11);
  m.couplings_B.clear();
  for (double s : {0.1, 1.0, 3.0}) EXPECT_EQ(negativity(exact_evolve(m, s), 0), 0.0);
}

TEST(Nogo, ZeroScaleIsInitialProduct) {
  const auto m = seeded_model(12);
  const Matrix want = oracle::kron(partial_trace(m.input.projector(), {0}).matrix(), m.rho_B.matrix());
  EXPECT_LT(max_abs(exact_evolve(m, 0.0).matrix() - want), 1e-15);
}

TEST(Nogo, FirstOrderVanishesOnKernel) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto m = seeded_model(seed);
    const auto c = check_first_order(m, default_grid(m));
    EXPECT_FALSE(c.vacuous);
    EXPECT_LE(c.max_abs, 1e-8);
  }
}

TEST(Nogo, FirstOrderCheckIsVacuousForFullRankReceiver) {
  auto m = seeded_model(26);
  m.rho_B = DensityMatrix(MultipartiteOperator(Matrix(0.5 * Matrix::Identity(2, 2))));
  EXPECT_TRUE(check_first_order(m, default_grid(m)).vacuous);
}

TEST(Nogo, SecondOrderIndependentOfSenderHamiltonian) {
  for (std::uint64_t seed = 30; seed < 35; ++seed) {
    const auto m = seeded_model(seed);
    const auto g = default_grid(m);
    const auto with = second_order_operator(m, g, true).matrix();
    const auto without = second_order_operator(m, g, false).matrix();
    EXPECT_LE(max_abs(with - without), 1e-8);
    EXPECT_GE(hermitian_eigenvalues(without).minCoeff(), -1e-10);
  }
}

TEST(Nogo, DysonResidualIsCubic) {
  const auto m = seeded_model(40);
  const auto g = default_grid(m);
  const auto t = dyson_reduced_terms(m, g);
  EXPECT_NEAR(t.rho1.trace().real(), 0.0, 1e-12);
  EXPECT_NEAR(t.rho2.trace().real(), 0.0, 1e-12);
  const double s1 = 0.02, s2 = 0.04;
  const double r1 = max_abs(exact_evolve(m, s1, g).matrix() - dyson_prediction(t, s1));
  const double r2 = max_abs(exact_evolve(m, s2, g).matrix() - dyson_prediction(t, s2));
  EXPECT_GE(std::log2(r2 / r1), 2.9) << r1 << " " << r2;
}

TEST(Nogo, ExactEvolutionIsAState) {
  const auto m = seeded_model(41);
  const auto rho = exact_evolve(m, 1.0);
  EXPECT_NEAR(rho.op().trace().real(), 1.0, 1e-10);
  EXPECT_GE(hermitian_eigenvalues(rho.op()).minCoeff(), -1e-10);
  EXPECT_EQ(rho.dims(), (Dims{2, 2}));
}

TEST(Nogo, QutritAncillaAndSender) {
  RandomModelOptions opt;
  opt.ancilla_dim = 3;
  opt.a_dim = 3;
  const auto m = seeded_model(42, opt);
  const auto g = default_grid(m);
  EXPECT_LE(check_first_order(m, g).max_abs, 1e-8);
  EXPECT_LE(max_abs(second_order_operator(m, g, true).matrix() - second_order_operator(m, g, false).matrix()), 1e-8);
  EXPECT_EQ(exact_evolve(m, 0.1, g).dims(), (Dims{3, 2}));
}

TEST(Nogo, DefaultToyModel) {
  const auto m = default_toy_model();
  const auto g = default_grid(m);
  EXPECT_LE(check_first_order(m, g).max_abs, 1e-8);
  EXPECT_GE(hermitian_eigenvalues(second_order_operator(m, g, true)).minCoeff(), -1e-8);
  const auto s = negativity_scaling(m, {0.0125, 0.025, 0.05, 0.1}, g);
  for (double n : s.negativities) EXPECT_LT(n, 1e-6);
  if (s.exponent) {
    EXPECT_GE(*s.exponent, 2.9);
  }
}

TEST(Nogo, ScalingArgumentChecks) {
  const auto m = default_toy_model();
  EXPECT_THROW(negativity_scaling(m, {0.01, 0.02, 0.2, 0.05}), ConfigError);
  EXPECT_THROW(negativity_scaling(m, {0.01, 0.02, 0.02, 0.05}), ConfigError);
  const auto z = negativity_scaling(m, {0.0, 0.0});
  EXPECT_EQ(z.negativities, (std::vector<double>{0.0, 0.0}));
  EXPECT_FALSE(z.exponent.has_value());
}

TEST(Nogo, QuadraticCoefficientTracksSecondOrderBranch) {
  const auto m = seeded_model(7);
  const auto g = default_grid(m);
  const auto t = dyson_reduced_terms(m, g);
  const HermitianSeries series{partial_transpose(t.rho0, 0), partial_transpose(t.rho1, 0),
                               partial_transpose(t.rho2, 0)};
  const auto c = zero_eig_corrections(series, 0.0);
  const double lowest = *std::min_element(c.second_order.begin(), c.second_order.end());
  const auto s = negativity_scaling(m, {0.01, 0.02, 0.04, 0.07, 0.1}, g);
  ASSERT_TRUE(s.quadratic_coefficient.has_value());
  EXPECT_NEAR(*s.quadratic_coefficient, lowest, 1e-3 * std::abs(lowest) + 1e-10);
}

TEST(Nogo, ModelValidation) {
  auto m = default_toy_model();
  m.couplings_B[0].field_op = Matrix::Identity(3, 3);
  EXPECT_THROW(m.validate(), DimensionError);
  m = default_toy_model();
  m.couplings_A[0].system_op(0, 1) = cplx(0, 1);
  EXPECT_THROW(m.validate(), InvariantError);
  m = default_toy_model();
  m.couplings_A[0].switching.width = 0;
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_THROW(exact_evolve(default_toy_model(), 1.0, TimeGrid{1, 0, 10}), ConfigError);
}
