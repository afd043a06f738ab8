#include <doctest.h>

#include <random>

#include "hmmfp/dual_control.hpp"
#include "support/oracles.hpp"

using namespace hmmfp;

namespace {

AdaptedWeightProcess random_control(const Model& model, int T, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  AdaptedWeightProcess U(model.tokens(), 0, T - 1);
  for (int t = 0; t < T; ++t)
    for (VectorXd& u : U.level(t)) u = VectorXd::NullaryExpr(model.m(), [&] { return normal(rng); });
  return U;
}

TerminalFunction random_terminal(const Model& model, int T, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  TerminalFunction F(model.tokens(), T, T);
  for (VectorXd& f : F.level(T)) f = VectorXd::NullaryExpr(model.d(), [&] { return normal(rng); });
  return F;
}

// var(Y_0(X_0)) + E sum_t l, summing the joint law directly.
double reference_cost(const Model& model, const DualTrajectory& traj) {
  const int T = traj.horizon;
  const int d = model.d();
  const int base = model.tokens();
  const VectorXd& Y0 = traj.Y.at(0, 0);
  const double mean = model.mu().dot(Y0);
  double total = model.mu().dot(Y0.cwiseProduct(Y0)) - mean * mean;
  for (std::size_t zi = 0; zi < prefix_count(base, T); ++zi) {
    const auto z = prefix_tokens(zi, base, T);
    testing::for_each_hidden_path(model, z, [&](const std::vector<int>& x, double w) {
      if (w == 0.0) return;
      for (int t = 0; t < T; ++t) {
        const std::vector<Token> pre(z.begin(), z.begin() + t);
        const std::vector<Token> next(z.begin(), z.begin() + t + 1);
        const VectorXd& y = traj.Y.at(next);
        const int xt = x[static_cast<std::size_t>(t)];
        double ay = 0.0, ay2 = 0.0;
        for (int j = 0; j < d; ++j) {
          ay += model.A()(xt, j) * y(j);
          ay2 += model.A()(xt, j) * y(j) * y(j);
        }
        const VectorXd u = traj.U.at(pre) + traj.V.at(pre).row(xt).transpose();
        total += w * (ay2 - ay * ay + u.dot(testing::embedding_covariance(model, xt) * u));
      }
    });
  }
  return total;
}

}  // namespace

TEST_CASE("backward equation is solved exactly for arbitrary controls") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = testing::uniform_int(rng, 1, 3);
    const int m = testing::uniform_int(rng, 1, 2);
    const int T = testing::uniform_int(rng, 1, 4);
    const Model model = testing::random_model(rng, d, m, T);
    const DualTrajectory traj = solve_bsde(model, random_control(model, T, rng), random_terminal(model, T, rng));
    CHECK(max_bsde_residual(model, traj) <= 1e-12);
    CHECK(bsde_residuals(model, traj).size() == (prefix_count(m + 1, T) - 1) / static_cast<std::size_t>(m));
  }
}

TEST_CASE("total cost matches an independent summation") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = testing::uniform_int(rng, 1, 3);
    const int m = testing::uniform_int(rng, 1, 2);
    const int T = testing::uniform_int(rng, 1, 3);
    const Model model = testing::random_model(rng, d, m, T);
    const DualTrajectory traj = solve_bsde(model, random_control(model, T, rng), random_terminal(model, T, rng));
    const double J = total_cost(model, traj);
    CHECK(J == doctest::Approx(reference_cost(model, traj)).epsilon(1e-12));
  }
}

TEST_CASE("duality gap vanishes for random controls") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = testing::uniform_int(rng, 1, 3);
    const int m = testing::uniform_int(rng, 1, 2);
    const int T = testing::uniform_int(rng, 1, 4);
    const Model model = testing::random_model(rng, d, m, T);
    const DualityReport r = duality_gap(model, random_control(model, T, rng), random_terminal(model, T, rng));
    CHECK(r.gap <= 1e-9);
    CHECK(r.J_T >= 0.0);
  }
}

TEST_CASE("zero control on a constant terminal has cost equal to the prior variance") {
  const Model model = testing::reference_model(2);
  VectorXd F(2);
  F << 1.0, -1.0;
  const AdaptedWeightProcess U(2, 0, 1, VectorXd::Zero(1));
  const DualityReport r = duality_gap(model, U, constant_terminal(F, 1, 2));
  // Without learning from observations the estimator is the prior mean 0.
  CHECK(r.mse == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.gap <= 1e-12);
}

TEST_CASE("feedback law agrees with a direct transcription") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = testing::uniform_int(rng, 1, 4);
    const int m = testing::uniform_int(rng, 1, 3);
    const Model model = testing::random_model(rng, d, m, 1);
    const VectorXd y = VectorXd::NullaryExpr(d, [&] { return normal(rng); });
    const MatrixXd v = MatrixXd::NullaryExpr(d, m, [&] { return normal(rng); });
    const VectorXd rho = testing::dirichlet(rng, d, 1.0);
    const VectorXd got = optimal_feedback(model, y, v, rho);
    CHECK((got - testing::reference_feedback(model, y, v, rho)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("optimal control reproduces the filter and the minimum error") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = testing::uniform_int(rng, 2, 3);
    const int m = testing::uniform_int(rng, 1, 2);
    const int T = testing::uniform_int(rng, 1, 3);
    const Model model = testing::random_model(rng, d, m, T);
    const FilterProcess pi = filter_process(model, T);
    const TerminalFunction F = random_terminal(model, T, rng);
    const DualTrajectory opt = solve_optimal(model, pi.pi, F);
    CHECK(opt.rank_deficient_gains == 0);
    CHECK(max_bsde_residual(model, opt) <= 1e-12);

    // U_t is the feedback of (Y_t, V_t) at every node.
    for (int t = 0; t < T; ++t)
      for (std::size_t i = 0; i < opt.U.size(t); ++i) {
        const VectorXd phi = optimal_feedback(model, opt.Y.at(t, i), opt.V.at(t, i), pi.pi.at(t, i));
        CHECK((phi - opt.U.at(t, i)).cwiseAbs().maxCoeff() <= 1e-9);
      }

    const AdaptedProcess<double> S = estimator_process(model, opt);
    for (int t = 0; t <= T; ++t)
      for (std::size_t i = 0; i < S.size(t); ++i) {
        CHECK(std::abs(pi.pi.at(t, i).dot(opt.Y.at(t, i)) - S.at(t, i)) <= 1e-9);
        if (t == T) {
          const auto z = prefix_tokens(i, m + 1, T);
          CHECK(std::abs(estimator_path(model, opt, z, T) - S.at(t, i)) <= 1e-12);
        }
      }

    const double J = total_cost(model, opt);
    double mmse = 0.0;
    for (std::size_t i = 0; i < F.size(T); ++i) {
      const auto z = prefix_tokens(i, m + 1, T);
      const VectorXd& f = F.at(T, i);
      const VectorXd post = testing::brute_filter(model, z);
      const double p = testing::brute_probability(model, z);
      const double mean = post.dot(f);
      mmse += p * (post.dot(f.cwiseProduct(f)) - mean * mean);
    }
    CHECK(J == doctest::Approx(mmse).epsilon(1e-9));
  }
}

TEST_CASE("shape errors are reported") {
  const Model model = testing::reference_model(2);
  const AdaptedWeightProcess short_U(2, 0, 0, VectorXd::Zero(1));
  const TerminalFunction F = constant_terminal(VectorXd::Ones(2), 1, 2);
  CHECK_THROWS_AS(solve_bsde(model, short_U, F), DomainError);
  const AdaptedWeightProcess U(2, 0, 1, VectorXd::Zero(1));
  CHECK_THROWS_AS(solve_bsde(model, U, constant_terminal(VectorXd::Ones(3), 1, 2)), DomainError);
}
