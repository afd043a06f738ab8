#include "hmmfp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hmmfp {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("model: missing key '") + key + "'");
  return j.at(key);
}

int require_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw InputError(std::string("model: '") + key + "' must be an integer");
  return v.get<int>();
}

VectorXd to_vector(const json& j, const char* key, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw InputError(std::string("model: '") + key + "' must be an array of length " +
                     std::to_string(n));
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) throw InputError(std::string("model: '") + key + "' entries must be numbers");
    v(i) = e.get<double>();
  }
  return v;
}

MatrixXd to_matrix(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw InputError(std::string("model: '") + key + "' must have " + std::to_string(rows) +
                     " rows");
  MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    M.row(r) = to_vector(j[static_cast<std::size_t>(r)], key, cols).transpose();
  return M;
}

}  // namespace

Model parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw InputError("model: top level must be an object");
  Spaces spaces{require_int(j, "d"), require_int(j, "m"), require_int(j, "T")};
  try {
    spaces.validate();
  } catch (const DomainError& e) {
    throw InputError(std::string("model: ") + e.what());
  }
  VectorXd mu = to_vector(require(j, "mu"), "mu", spaces.d);
  MatrixXd A = to_matrix(require(j, "A"), "A", spaces.d, spaces.d);
  MatrixXd C = to_matrix(require(j, "C"), "C", spaces.d, spaces.tokens());
  try {
    return Model(spaces, std::move(mu), std::move(A), std::move(C));
  } catch (const DomainError& e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string model_to_json(const Model& model) {
  auto row = [](const auto& r) {
    std::vector<double> v(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) v[static_cast<std::size_t>(i)] = r(i);
    return v;
  };
  json j;
  j["d"] = model.d();
  j["m"] = model.m();
  j["T"] = model.T();
  j["mu"] = row(model.mu());
  j["A"] = json::array();
  j["C"] = json::array();
  for (int x = 0; x < model.d(); ++x) {
    j["A"].push_back(row(model.A().row(x)));
    j["C"].push_back(row(model.C().row(x)));
  }
  return j.dump(2);
}

std::vector<Token> parse_path(const std::string& text, int m) {
  std::vector<Token> z;
  std::string cleaned = text;
  for (char& ch : cleaned)
    if (ch == ',') ch = ' ';
  std::istringstream in(cleaned);
  std::string item;
  while (in >> item) {
    std::size_t used = 0;
    int token = 0;
    try {
      token = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InputError("path: not an integer token: '" + item + "'");
    }
    if (used != item.size()) throw InputError("path: not an integer token: '" + item + "'");
    if (token < 0 || token > m)
      throw InputError("path: token " + item + " outside {0.." + std::to_string(m) + "}");
    z.push_back(token);
  }
  if (z.empty()) throw InputError("path: no tokens given");
  return z;
}

}  // namespace hmmfp
