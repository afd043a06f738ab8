#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hmmfp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// Observation token in {0, ..., m}.
using Token = int;

/// Hidden state, 0-indexed internally (the user-facing label is state + 1).
using State = int;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an observation prefix has zero probability under the model.
/// `time()` is the 1-indexed position of the first token that cannot occur.
class ImpossibleObservation : public std::runtime_error {
 public:
  ImpossibleObservation(int t, const std::string& what)
      : std::runtime_error(what), t_(t) {}
  int time() const { return t_; }

 private:
  int t_;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How to treat observation prefixes of probability zero.
enum class ZeroPolicy {
  kRaise,           ///< throw ImpossibleObservation
  kZeroConvention,  ///< adopt 0/0 = 0
};

/// Integer power for small non-negative exponents; throws on overflow.
std::size_t checked_pow(std::size_t base, int exponent);

/// Number of observation strings of length `t` over an alphabet of size `base`.
inline std::size_t prefix_count(int base, int t) {
  return checked_pow(static_cast<std::size_t>(base), t);
}

/// Dense index of a token string: base-(m+1) digits, z_1 most significant.
inline std::size_t prefix_index(std::span<const Token> prefix, int base) {
  std::size_t idx = 0;
  for (Token z : prefix) {
    if (z < 0 || z >= base) throw DomainError("token out of range: " + std::to_string(z));
    idx = idx * static_cast<std::size_t>(base) + static_cast<std::size_t>(z);
  }
  return idx;
}

/// Inverse of prefix_index.
inline std::vector<Token> prefix_tokens(std::size_t index, int base, int length) {
  std::vector<Token> z(static_cast<std::size_t>(length));
  for (int t = length - 1; t >= 0; --t) {
    z[static_cast<std::size_t>(t)] = static_cast<Token>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
  }
  return z;
}

/// Tokens joined by '.', the empty prefix being "".
std::string prefix_string(std::span<const Token> prefix);

/**
 * A value per observation prefix z_{1:t}, for t in [first_level, last_level].
 *
 * Storing one value per prefix makes every stored quantity adapted by
 * construction: the value at level t cannot see tokens after t. Levels are
 * dense; child `z` of node `i` at level t is node `i * base + z` at level t+1.
 */
template <typename T>
class AdaptedProcess {
 public:
  AdaptedProcess() = default;

  AdaptedProcess(int base, int first_level, int last_level, const T& fill = T{})
      : base_(base), first_(first_level) {
    if (base < 2) throw DomainError("alphabet must have at least two tokens");
    if (first_level < 0 || last_level < first_level)
      throw DomainError("invalid level range for adapted process");
    levels_.reserve(static_cast<std::size_t>(last_level - first_level + 1));
    for (int t = first_level; t <= last_level; ++t)
      levels_.emplace_back(prefix_count(base, t), fill);
  }

  int base() const { return base_; }
  int first_level() const { return first_; }
  int last_level() const { return first_ + static_cast<int>(levels_.size()) - 1; }
  bool empty() const { return levels_.empty(); }

  std::size_t size(int t) const { return level(t).size(); }

  T& at(int t, std::size_t index) { return level(t).at(index); }
  const T& at(int t, std::size_t index) const { return level(t).at(index); }

  T& at(std::span<const Token> prefix) {
    return at(static_cast<int>(prefix.size()), prefix_index(prefix, base_));
  }
  const T& at(std::span<const Token> prefix) const {
    return at(static_cast<int>(prefix.size()), prefix_index(prefix, base_));
  }

  std::vector<T>& level(int t) { return levels_.at(offset(t)); }
  const std::vector<T>& level(int t) const { return levels_.at(offset(t)); }

 private:
  std::size_t offset(int t) const {
    if (t < first_ || t > last_level())
      throw DomainError("level " + std::to_string(t) + " outside adapted process");
    return static_cast<std::size_t>(t - first_);
  }

  int base_ = 2;
  int first_ = 0;
  std::vector<std::vector<T>> levels_;
};

/// Dense function on the full paths of one length (a single level).
template <typename T>
using PathFunction = AdaptedProcess<T>;

}  // namespace hmmfp
