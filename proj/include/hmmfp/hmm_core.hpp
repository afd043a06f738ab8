#pragma once

#include <cmath>
#include <string>

#include "hmmfp/types.hpp"

namespace hmmfp {

/// State space {1..d}, observation alphabet {0..m}, horizon T.
struct Spaces {
  int d = 1;
  int m = 1;
  int T = 1;

  int tokens() const { return m + 1; }

  void validate() const {
    if (d < 1) throw DomainError("d must be >= 1");
    if (m < 1) throw DomainError("m must be >= 1");
    if (T < 1) throw DomainError("T must be >= 1");
  }
};

inline constexpr double kStochasticTolerance = 1e-9;

/**
 * HMM(mu, A, C) with P(X_{t+1}=y | X_t=x) = A(x,y) and
 * P(Z_{t+1}=z | X_t=x) = C(x,z).
 *
 * Note the emission convention: the token at time t+1 is emitted by the
 * state at time t. Rows of A and C (and mu) are checked to be stochastic
 * within kStochasticTolerance and then renormalized exactly.
 */
template <typename Scalar>
class HmmModel {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  HmmModel(Spaces spaces, VectorType mu, MatrixType A, MatrixType C)
      : spaces_(spaces), mu_(std::move(mu)), A_(std::move(A)), C_(std::move(C)) {
    spaces_.validate();
    const Eigen::Index d = spaces_.d;
    if (mu_.size() != d) throw DomainError("mu must have length d");
    if (A_.rows() != d || A_.cols() != d) throw DomainError("A must be d x d");
    if (C_.rows() != d || C_.cols() != spaces_.tokens())
      throw DomainError("C must be d x (m+1)");
    normalize_row(mu_.transpose(), "mu");
    for (Eigen::Index x = 0; x < d; ++x) {
      normalize_row(A_.row(x), "A row " + std::to_string(x + 1));
      normalize_row(C_.row(x), "C row " + std::to_string(x + 1));
    }
  }

  const Spaces& spaces() const { return spaces_; }
  int d() const { return spaces_.d; }
  int m() const { return spaces_.m; }
  int T() const { return spaces_.T; }
  int tokens() const { return spaces_.tokens(); }

  const VectorType& mu() const { return mu_; }
  const MatrixType& A() const { return A_; }
  const MatrixType& C() const { return C_; }

  /// Same model with a different horizon.
  HmmModel with_horizon(int T) const {
    Spaces s = spaces_;
    s.T = T;
    return HmmModel(s, mu_, A_, C_);
  }

  void check_state(State x) const {
    if (x < 0 || x >= d()) throw DomainError("state out of range: " + std::to_string(x + 1));
  }
  void check_token(Token z) const {
    if (z < 0 || z > m()) throw DomainError("token out of range: " + std::to_string(z));
  }

 private:
  template <typename Row>
  static void normalize_row(Row&& row, const std::string& what) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (!std::isfinite(static_cast<double>(row(i))) || row(i) < Scalar(0))
        throw DomainError(what + " has a negative or non-finite entry");
    }
    const Scalar total = row.sum();
    if (std::abs(static_cast<double>(total) - 1.0) > kStochasticTolerance)
      throw DomainError(what + " does not sum to 1");
    row /= total;
  }

  Spaces spaces_;
  VectorType mu_;
  MatrixType A_;
  MatrixType C_;
};

using Model = HmmModel<double>;

/// Token embedding e: canonical basis for z in 1..m, and e(0) = -(e(1)+...+e(m)).
template <typename Scalar = double>
Vector<Scalar> embed_token(int m, Token z) {
  if (m < 1) throw DomainError("m must be >= 1");
  if (z < 0 || z > m) throw DomainError("token out of range: " + std::to_string(z));
  if (z == 0) return Vector<Scalar>::Constant(m, Scalar(-1));
  Vector<Scalar> e = Vector<Scalar>::Zero(m);
  e(z - 1) = Scalar(1);
  return e;
}

/// s(z) = mean + tilde^T e(z) for every token z.
template <typename Scalar>
struct Decomposition {
  Scalar mean;
  Vector<Scalar> tilde;

  Scalar reconstruct(Token z) const {
    const int m = static_cast<int>(tilde.size());
    return mean + tilde.dot(embed_token<Scalar>(m, z));
  }
};

/// Unique split of a function on {0..m} into a mean and embedding weights.
template <typename Derived>
Decomposition<typename Derived::Scalar> decompose(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index tokens = s.size();
  if (tokens < 2) throw DomainError("decompose needs a function on at least two tokens");
  const Scalar mean = s.sum() / Scalar(tokens);
  Vector<Scalar> tilde = s.tail(tokens - 1).array() - mean;
  return {mean, std::move(tilde)};
}

/// c(x) = [C(x,1)-C(x,0), ..., C(x,m)-C(x,0)].
template <typename Scalar>
Vector<Scalar> obs_vector(const HmmModel<Scalar>& model, State x) {
  model.check_state(x);
  const auto row = model.C().row(x);
  return (row.tail(model.m()).array() - row(0)).matrix().transpose();
}

/// d x m matrix whose row x is c(x)^T.
template <typename Scalar>
Matrix<Scalar> obs_matrix(const HmmModel<Scalar>& model) {
  return model.C().rightCols(model.m()).colwise() - model.C().col(0);
}

/// x -> 2 C(x,z) - 1, the scalar observation function for binary alphabets.
template <typename Scalar>
Vector<Scalar> scalar_obs(const HmmModel<Scalar>& model, Token z) {
  model.check_token(z);
  return (Scalar(2) * model.C().col(z).array() - Scalar(1)).matrix();
}

/// Conditional variance of f over one transition:
/// (Gamma f)(x) = sum_y A(x,y) f(y)^2 - (A f)(x)^2.
template <typename Scalar, typename Derived>
Vector<Scalar> gamma_op(const HmmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& f) {
  if (f.size() != model.d()) throw DomainError("gamma_op: f must have length d");
  const Vector<Scalar> Af = model.A() * f;
  const Vector<Scalar> f2 = f.array().square().matrix();
  return model.A() * f2 - Af.array().square().matrix();
}

/// R(x) = diag(c(x)) + C(x,0) (I + 1 1^T) - c(x) c(x)^T,
/// the covariance of e(Z_{t+1}) given X_t = x.
template <typename Scalar>
Matrix<Scalar> risk_matrix(const HmmModel<Scalar>& model, State x) {
  const Vector<Scalar> c = obs_vector(model, x);
  const int m = model.m();
  Matrix<Scalar> R = c.asDiagonal();
  R += model.C()(x, 0) *
       (Matrix<Scalar>::Identity(m, m) + Matrix<Scalar>::Ones(m, m));
  R -= c * c.transpose();
  return R;
}

}  // namespace hmmfp
