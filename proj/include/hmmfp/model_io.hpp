#pragma once

#include <filesystem>
#include <string>

#include "hmmfp/hmm_core.hpp"

namespace hmmfp {

/// Malformed or unreadable input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model files are JSON objects with keys d, m, T, mu, A (rows), C (rows).
Model parse_model(const std::string& text);
Model load_model(const std::filesystem::path& path);
std::string model_to_json(const Model& model);

/// Parses "1,1,0" (commas or whitespace) into tokens, checked against m.
std::vector<Token> parse_path(const std::string& text, int m);

}  // namespace hmmfp
