#include "hmmfp/types.hpp"

#include <limits>

namespace hmmfp {

std::size_t checked_pow(std::size_t base, int exponent) {
  if (exponent < 0) throw DomainError("negative exponent");
  std::size_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base)
      throw BudgetExceeded("size overflow computing " + std::to_string(base) + "^" +
                           std::to_string(exponent));
    result *= base;
  }
  return result;
}

std::string prefix_string(std::span<const Token> prefix) {
  std::string s;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i > 0) s += '.';
    s += std::to_string(prefix[i]);
  }
  return s;
}

}  // namespace hmmfp
