#include <doctest.h>

#include <random>

#include <json.hpp>

#include "hmmfp/predictor_rep.hpp"
#include "support/oracles.hpp"

using namespace hmmfp;

TEST_CASE("indicator target on two binary steps") {
  // S(z) = 1 when z = (1,1), else 0.
  const PathFunction<double> target = tabulate_paths(1, 2, [](std::span<const Token> z) {
    return z[0] == 1 && z[1] == 1 ? 1.0 : 0.0;
  });
  const PredictorRepresentation rep = build_weights(target);
  CHECK(rep.constant == doctest::Approx(0.25));
  CHECK(rep.weights.at(0, 0)(0) == doctest::Approx(-0.25));
  CHECK(rep.weights.at(1, 0)(0) == doctest::Approx(0.0));
  CHECK(rep.weights.at(1, 1)(0) == doctest::Approx(-0.5));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto z = prefix_tokens(i, 2, 2);
    CHECK(evaluate(rep, z) == target.at(2, i));
  }
}

TEST_CASE("conditional probabilities are reconstructed on every path") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = testing::uniform_int(rng, 1, 4);
    const int m = testing::uniform_int(rng, 1, 3);
    const int T = testing::uniform_int(rng, 1, 4);
    const Model model = testing::random_model(rng, d, m, T);
    std::vector<double> sum(prefix_count(m + 1, T), 0.0);
    for (Token q = 0; q <= m; ++q) {
      const PathFunction<double> target = conditional_target(model, q);
      const PredictorRepresentation rep = build_weights(target);
      for (std::size_t i = 0; i < target.size(T); ++i) {
        const auto z = prefix_tokens(i, m + 1, T);
        const double value = evaluate(rep, z);
        CHECK(std::abs(value - target.at(T, i)) <= 1e-12);
        CHECK(std::abs(value - testing::brute_next_token(model, z)(q)) <= 1e-12);
        sum[i] += value;
      }
    }
    for (double s : sum) CHECK(std::abs(s - 1.0) <= 1e-10);
  }
}

TEST_CASE("weights agree with an independent linear solve") {
  std::mt19937_64 rng(8);
  const Model model = testing::random_model(rng, 3, 2, 3, 3.0);
  const PathFunction<double> target = conditional_target(model, 1);
  const PredictorRepresentation rep = build_weights(target);
  const VectorXd sol = testing::least_squares_representation(2, 3, target.level(3));
  CHECK(std::abs(sol(0) - rep.constant) <= 1e-10);
  Eigen::Index k = 1;
  for (int t = 0; t < 3; ++t)
    for (const VectorXd& U : rep.weights.level(t)) {
      CHECK((sol.segment(k, 2) - U).cwiseAbs().maxCoeff() <= 1e-10);
      k += 2;
    }
}

TEST_CASE("uninformative emissions give zero weights") {
  VectorXd mu(2);
  mu << 0.3, 0.7;
  MatrixXd A(2, 2), C(2, 3);
  A << 0.6, 0.4, 0.2, 0.8;
  C << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  const Model model({2, 2, 3}, mu, A, C);
  const PredictorRepresentation rep = represent_conditional(model, 1);
  CHECK(rep.constant == doctest::Approx(0.5));
  for (int t = 0; t < 3; ++t)
    for (const VectorXd& U : rep.weights.level(t)) CHECK(U.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("zero-probability paths follow the policy") {
  VectorXd mu(2);
  mu << 1.0, 0.0;
  const Model model({2, 1, 2}, mu, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(represent_conditional(model, 0), ImpossibleObservation);
  const PredictorRepresentation rep = represent_conditional(model, 0, ZeroPolicy::kZeroConvention);
  const std::vector<Token> possible{0, 0};
  CHECK(evaluate(rep, possible) == doctest::Approx(1.0));
}

TEST_CASE("representation JSON carries prefixes and weights") {
  const PredictorRepresentation rep = represent_conditional(testing::reference_model(2), 1);
  const auto j = nlohmann::json::parse(representation_to_json(rep));
  CHECK(j.at("m") == 1);
  CHECK(j.at("T") == 2);
  CHECK(j.at("weights").size() == 3);
  CHECK(j.at("weights")[0][0] == "");
  CHECK(j.at("weights")[2][0] == "1");
  CHECK_THROWS_AS(evaluate(rep, std::vector<Token>{1}), DomainError);
}
