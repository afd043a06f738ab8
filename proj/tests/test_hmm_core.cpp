#include <doctest.h>

#include <random>

#include "hmmfp/hmm_core.hpp"
#include "support/oracles.hpp"

using namespace hmmfp;

TEST_CASE("model construction validates shapes and stochasticity") {
  VectorXd mu(2);
  mu << 0.5, 0.5;
  MatrixXd A(2, 2), C(2, 2);
  A << 0.9, 0.1, 0.1, 0.9;
  C << 0.2, 0.8, 0.7, 0.3;
  CHECK_NOTHROW(Model({2, 1, 3}, mu, A, C));

  MatrixXd bad = A;
  bad(0, 0) = 0.8;
  CHECK_THROWS_AS(Model({2, 1, 3}, mu, bad, C), DomainError);
  bad = C;
  bad(1, 0) = -0.1;
  bad(1, 1) = 1.1;
  CHECK_THROWS_AS(Model({2, 1, 3}, mu, A, bad), DomainError);
  CHECK_THROWS_AS(Model({2, 2, 3}, mu, A, C), DomainError);
  CHECK_THROWS_AS(Model({2, 1, 0}, mu, A, C), DomainError);

  // Within tolerance: renormalized exactly.
  VectorXd near = mu;
  near(0) += 5e-10;
  const Model m({2, 1, 3}, near, A, C);
  CHECK(m.mu().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("embedding sends 0 to minus the all-ones vector") {
  CHECK(embed_token(3, 0) == VectorXd::Constant(3, -1.0));
  CHECK(embed_token(3, 2) == VectorXd::Unit(3, 1));
  CHECK_THROWS_AS(embed_token(3, 4), DomainError);
  CHECK_THROWS_AS(embed_token(3, -1), DomainError);
}

TEST_CASE("decompose of a constant function has zero tilde") {
  const VectorXd s = VectorXd::Constant(4, 2.5);
  const auto dec = decompose(s);
  CHECK(dec.mean == 2.5);
  CHECK(dec.tilde.isZero(0.0));
}

TEST_CASE("decompose round-trips on random functions") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int m = 1; m <= 5; ++m) {
    for (int trial = 0; trial < 200; ++trial) {
      VectorXd s(m + 1);
      for (int i = 0; i <= m; ++i) s(i) = normal(rng);
      const auto dec = decompose(s);
      for (Token z = 0; z <= m; ++z) CHECK(std::abs(dec.reconstruct(z) - s(z)) <= 1e-14);
    }
  }
}

TEST_CASE("decompose on dyadic inputs is exact") {
  VectorXd s(4);
  s << 0.5, 1.25, -2.0, 4.25;
  const auto dec = decompose(s);
  CHECK(dec.mean == 1.0);
  for (Token z = 0; z <= 3; ++z) CHECK(dec.reconstruct(z) == s(z));
}

TEST_CASE("observation vectors and scalar observation") {
  const Model model = testing::reference_model();
  CHECK(obs_vector(model, 0)(0) == doctest::Approx(0.6));
  CHECK(obs_vector(model, 1)(0) == doctest::Approx(-0.4));
  CHECK(obs_matrix(model)(1, 0) == doctest::Approx(-0.4));
  const VectorXd s = scalar_obs(model, 1);
  CHECK(s(0) == doctest::Approx(0.6));
  CHECK(s(1) == doctest::Approx(-0.4));
}

TEST_CASE("risk matrix on a frozen emission row") {
  VectorXd mu(1);
  mu << 1.0;
  MatrixXd A(1, 1), C(1, 3);
  A << 1.0;
  C << 0.2, 0.5, 0.3;
  const Model model({1, 2, 1}, mu, A, C);
  MatrixXd expected(2, 2);
  expected << 0.61, 0.17, 0.17, 0.49;
  CHECK((risk_matrix(model, 0) - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("risk matrix equals the embedding covariance and is PSD") {
  std::mt19937_64 rng(5);
  int samples = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const int d = testing::uniform_int(rng, 1, 4);
    const int m = testing::uniform_int(rng, 1, 4);
    const Model model = testing::random_model(rng, d, m, 1, 0.5);
    for (State x = 0; x < d; ++x, ++samples) {
      const MatrixXd R = risk_matrix(model, x);
      CHECK((R - testing::embedding_covariance(model, x)).cwiseAbs().maxCoeff() <= 1e-13);
      CHECK((R - R.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(R);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
  }
  CHECK(samples >= 500);
}

TEST_CASE("gamma operator is a nonnegative conditional variance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = testing::uniform_int(rng, 1, 5);
    const Model model = testing::random_model(rng, d, 1, 1);
    VectorXd f(d);
    for (int i = 0; i < d; ++i) f(i) = normal(rng);
    const VectorXd g = gamma_op(model, f);
    CHECK(g.minCoeff() >= -1e-12);
    CHECK(gamma_op(model, VectorXd::Constant(d, 3.0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
