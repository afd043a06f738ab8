#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmmfp/cli.hpp"

using namespace hmmfp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kReference = std::string(HMMFP_DATA_DIR) + "/reference_model.json";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hmmfp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hmmfp_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

const char* kDeterministic =
    R"({"d":2,"m":1,"T":2,"mu":[1,0],"A":[[1,0],[0,1]],"C":[[1,0],[0,1]]})";
const char* kThreeTokens =
    R"({"d":3,"m":2,"T":3,"mu":[0.5,0.3,0.2],"A":[[0.8,0.1,0.1],[0.2,0.7,0.1],[0.1,0.2,0.7]],)"
    R"("C":[[0.6,0.3,0.1],[0.2,0.5,0.3],[0.1,0.2,0.7]]})";
const char* kUninformative =
    R"({"d":2,"m":2,"T":2,"mu":[0.3,0.7],"A":[[0.6,0.4],[0.2,0.8]],"C":[[0.2,0.5,0.3],[0.2,0.5,0.3]]})";

}  // namespace

TEST_CASE("oracle writes the filter and next-token tables") {
  const fs::path dir = scratch("oracle");
  const Run r = run({"oracle", "--model", kReference, "--path", "1,1,0", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const std::string filter = slurp(dir / "filter.csv");
  CHECK(filter.rfind("# hmmfp 0.1.0 seed=0 config=", 0) == 0);
  CHECK(filter.find("t,x,pi\n") != std::string::npos);
  CHECK(filter.find("3,1,0.50357388316151") != std::string::npos);
  CHECK(fs::exists(dir / "next_token.csv"));
}

TEST_CASE("bad inputs exit with code 2") {
  const fs::path dir = scratch("bad");
  const fs::path broken = write(dir, "broken.json", "{\"d\": 2,");
  Run r = run({"oracle", "--model", broken.string(), "--path", "1", "--out", dir.string()});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("parse error") != std::string::npos);

  CHECK(run({"oracle", "--model", kReference, "--path", "1,2", "--out", dir.string()}).code == kExitInputError);
  CHECK(run({"oracle", "--path", "1"}).code == kExitInputError);
  CHECK(run({}).code == kExitInputError);
  CHECK(run({"nonsense"}).code == kExitInputError);
  CHECK(run({"fixedpoint", "--model", kReference, "--path", "1,1,0", "--K", "0", "--out", dir.string()}).code ==
        kExitInputError);
  CHECK(run({"fixedpoint", "--model", kReference, "--path", "1", "--mode", "other", "--out", dir.string()}).code ==
        kExitInputError);
}

TEST_CASE("impossible observations exit with code 3 unless the zero convention is on") {
  const fs::path dir = scratch("impossible");
  const fs::path model = write(dir, "det.json", kDeterministic);
  const Run r = run({"oracle", "--model", model.string(), "--path", "1,1", "--out", dir.string()});
  CHECK(r.code == kExitImpossibleObservation);
  CHECK(r.err.find("t=1") != std::string::npos);
  CHECK(run({"oracle", "--model", model.string(), "--path", "1,1", "--zero-convention", "--out", dir.string()})
            .code == kExitOk);
}

TEST_CASE("fixedpoint reports the residual at the filter") {
  const fs::path dir = scratch("fixedpoint");
  for (const char* mode : {"path", "adapted"}) {
    const Run r = run({"fixedpoint", "--model", kReference, "--path", "1,1,0", "--mode", mode, "--K", "4",
                       "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const json report = json::parse(slurp(dir / "residual.json"));
    CHECK(report.at(mode).at("residual").get<double>() <= 1e-10);
    CHECK(report.at(mode).at("pass") == true);
  }
  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.find("iter,t,residual_tv,kl_bar,in_domain\n") != std::string::npos);
  CHECK(!fs::exists(dir / "findings.json"));
}

TEST_CASE("fixedpoint exits with code 4 and a findings file on a failed check") {
  const fs::path dir = scratch("findings");
  const fs::path model = write(dir, "m2.json", kThreeTokens);
  const Run r = run({"fixedpoint", "--model", model.string(), "--path", "1,2,0", "--tol", "1e-300",
                     "--out", dir.string()});
  CHECK(r.code == kExitInvariantViolation);
  const json findings = json::parse(slurp(dir / "findings.json"));
  CHECK(findings.at("m") == 2);
  CHECK(findings.at("residual").get<double>() > 1e-300);
}

TEST_CASE("duality gaps are reported per draw") {
  const fs::path dir = scratch("duality");
  const Run r = run({"duality", "--model", kReference, "--draws", "20", "--seed", "7", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const json report = json::parse(slurp(dir / "duality.json"));
  CHECK(report.at("draws").size() == 20);
  for (const auto& d : report.at("draws")) CHECK(d.at("gap").get<double>() <= 1e-9);
  CHECK(report.at("optimal").at("gap").get<double>() <= 1e-9);
  CHECK(report.at("header").at("seed") == 7);
  CHECK(slurp(dir / "diagnostics.csv").find("check,t,prefix,max_residual") != std::string::npos);
}

TEST_CASE("represent with uninformative emissions gives zero weights") {
  const fs::path dir = scratch("represent");
  const fs::path model = write(dir, "flat.json", kUninformative);
  REQUIRE(run({"represent", "--model", model.string(), "--z-query", "1", "--out", dir.string()}).code == kExitOk);
  const json rep = json::parse(slurp(dir / "representation.json"));
  CHECK(rep.at("constant").get<double>() == doctest::Approx(0.5));
  for (const auto& w : rep.at("weights"))
    for (const auto& v : w[1]) CHECK(std::abs(v.get<double>()) <= 1e-15);
  CHECK(run({"represent", "--model", model.string(), "--z-query", "3", "--out", dir.string()}).code ==
        kExitInputError);
}

TEST_CASE("attention demo with misc disabled confirms the simplified form") {
  const fs::path dir = scratch("attention");
  REQUIRE(run({"attention-demo", "--no-misc", "--heads", "4", "--seed", "3", "--out", dir.string()}).code ==
          kExitOk);
  const json report = json::parse(slurp(dir / "attention.json"));
  CHECK(report.at("simplified_form_equal") == true);
  CHECK(report.at("misc") == false);
  CHECK(slurp(dir / "kl_bar.csv").find("layer,kl_bar") != std::string::npos);
  CHECK(run({"attention-demo", "--d", "7", "--out", dir.string()}).code == kExitInputError);
}

TEST_CASE("config files are flat JSON and flags override them") {
  const fs::path dir = scratch("config");
  const fs::path cfg = write(dir, "cfg.json",
                             R"({"model": ")" + kReference + R"(", "path": "1,1,0", "seed": 5, "out": ")" +
                                 dir.string() + R"("})");
  REQUIRE(run({"oracle", "--config", cfg.string()}).code == kExitOk);
  CHECK(slurp(dir / "filter.csv").find("seed=5 ") != std::string::npos);
  REQUIRE(run({"oracle", "--config", cfg.string(), "--seed", "9"}).code == kExitOk);
  CHECK(slurp(dir / "filter.csv").find("seed=9 ") != std::string::npos);

  const fs::path unknown = write(dir, "unknown.json", R"({"modle": "x"})");
  CHECK(run({"oracle", "--config", unknown.string()}).code == kExitInputError);
  const fs::path negative = write(dir, "neg.json", R"({"tol_duality": -1.0})");
  CHECK(run({"duality", "--config", negative.string(), "--model", kReference}).code == kExitInputError);
  const fs::path budget = write(dir, "budget.json", R"({"enum_budget": 0})");
  CHECK(run({"duality", "--config", budget.string(), "--model", kReference}).code == kExitInputError);
}

TEST_CASE("every command is byte-for-byte deterministic") {
  const std::vector<std::vector<std::string>> commands{
      {"oracle", "--model", kReference, "--path", "1,1,0"},
      {"fixedpoint", "--model", kReference, "--path", "1,1,0", "--K", "3"},
      {"fixedpoint", "--model", kReference, "--path", "1,1,0", "--mode", "adapted", "--K", "3"},
      {"duality", "--model", kReference, "--draws", "5", "--seed", "11"},
      {"represent", "--model", kReference, "--z-query", "0"},
      {"attention-demo", "--seed", "12", "--heads", "2", "--layers", "3"},
  };
  int k = 0;
  for (const auto& cmd : commands) {
    const fs::path a = scratch("det_a" + std::to_string(k));
    const fs::path b = scratch("det_b" + std::to_string(k));
    ++k;
    auto with_out = [&](const fs::path& dir) {
      auto args = cmd;
      args.push_back("--out");
      args.push_back(dir.string());
      return args;
    };
    REQUIRE(run(with_out(a)).code == kExitOk);
    REQUIRE(run(with_out(b)).code == kExitOk);
    for (const auto& entry : fs::directory_iterator(a))
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}
