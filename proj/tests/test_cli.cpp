#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"renewal-asym"};
  owned.insert(owned.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = renewal::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("renewal-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    fs::path p = path / name;
    std::ofstream(p) << text;
    return p;
  }
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

std::string config(const char* name) { return (fs::path(RENEWAL_CONFIG_DIR) / name).string(); }

}  // namespace

TEST_CASE("help and usage errors") {
  Result help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK_THAT(help.out, ContainsSubstring("solve-discrete"));
  CHECK(invoke({}).code == 64);
  CHECK(invoke({"frobnicate"}).code == 64);
  CHECK(invoke({"validate"}).code == 64);
  CHECK(invoke({"validate", "/nonexistent.ini"}).code == 64);
  CHECK(invoke({"--mode", "fuzzy", "validate", config("two-atom.ini")}).code == 64);
}

TEST_CASE("validate writes a passing summary") {
  TempDir dir;
  Result r = invoke({"--out", dir.path.string(), "validate", config("two-atom.ini")});
  CHECK(r.code == 0);
  nlohmann::json j = read_json(dir.path / "two-atom.summary.json");
  CHECK(j.dump().find("\"fail\"") == std::string::npos);
}

TEST_CASE("solve-discrete on the geometric renewal") {
  TempDir dir;
  Result r = invoke({"--out", dir.path.string(), "--n", "300", "solve-discrete", config("geom-renewal.ini")});
  REQUIRE(r.code == 0);
  nlohmann::json j = read_json(dir.path / "geom-renewal.summary.json");
  CHECK_THAT(j["q"].get<double>(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(j["C_hat"].get<double>(), WithinAbs(0.5, 1e-12));
  CHECK(j["N"].get<int>() == 300);
  CHECK(j["mode"].get<std::string>() == "exact_rational");
  CHECK(fs::exists(dir.path / "geom-renewal.trace.csv"));
}

TEST_CASE("precision comes from the flag, then the environment") {
  TempDir dir;
  ::setenv("RENEWAL_ASYM_PRECISION", "100", 1);
  Result env = invoke({"--out", dir.path.string(), "--n", "50", "--name", "env", "solve-discrete",
                       config("two-atom.ini")});
  Result flag = invoke({"--out", dir.path.string(), "--n", "50", "--name", "flag", "--precision", "53",
                        "solve-discrete", config("two-atom.ini")});
  ::unsetenv("RENEWAL_ASYM_PRECISION");
  REQUIRE(env.code == 0);
  REQUIRE(flag.code == 0);
  CHECK(read_json(dir.path / "env.summary.json")["mode"] == "float(113)");
  CHECK(read_json(dir.path / "flag.summary.json")["mode"] == "float(53)");
}

TEST_CASE("bad configs exit 64 with an error summary") {
  TempDir dir;
  fs::path bad = dir.write("broken.ini", "[problem]\ntype = discrete\ncolour = blue\n");
  Result r = invoke({"--out", dir.path.string(), "solve-discrete", bad.string()});
  CHECK(r.code == 64);
  nlohmann::json j = read_json(dir.path / "broken.summary.json");
  CHECK(j["status"] == "error");
  CHECK(j["error_kind"] == "config");
  CHECK_THAT(j["message"].get<std::string>(), ContainsSubstring("colour"));
}

TEST_CASE("a failed hypothesis exits 1 unless forced") {
  TempDir dir;
  fs::path light = dir.write("light.ini", "[problem]\n[a]\nkind = geometric\nalpha = 1/1000\nrho = 1/2\n[r]\nkind = delta\n");
  Result gated = invoke({"--out", dir.path.string(), "solve-discrete", light.string()});
  CHECK(gated.code == 1);
  CHECK(read_json(dir.path / "light.summary.json")["status"] == "validation_failed");
  // forcing reaches the solver, which has no spectral point to work with
  Result forced = invoke({"--out", dir.path.string(), "--force", "solve-discrete", light.string()});
  CHECK(forced.code == 2);
  CHECK(read_json(dir.path / "light.summary.json")["error_kind"] == "numeric");
}

TEST_CASE("solve-volterra and laplace on the Poisson problem") {
  TempDir dir;
  Result v = invoke({"--out", dir.path.string(), "--t", "10", "--h", "0.05", "solve-volterra", config("poisson.ini")});
  REQUIRE(v.code == 0);
  nlohmann::json j = read_json(dir.path / "poisson.summary.json");
  CHECK(j["gamma"].get<double>() == 0.0);
  CHECK(fs::exists(dir.path / "poisson.trace.csv"));
  Result l = invoke({"--out", dir.path.string(), "--s", "0.5,1,2", "laplace", config("poisson.ini")});
  REQUIRE(l.code == 0);
  std::ifstream csv(dir.path / "poisson.laplace.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("corpus commands") {
  Result list = invoke({"corpus", "list"});
  CHECK(list.code == 0);
  CHECK_THAT(list.out, ContainsSubstring("cex3"));
  TempDir dir;
  Result run = invoke({"--out", dir.path.string(), "corpus", "run", "two-atom"});
  CHECK(run.code == 0);
  CHECK(fs::exists(dir.path / "two-atom.summary.json"));
  CHECK(invoke({"--out", dir.path.string(), "corpus", "run", "no-such-entry"}).code == 64);
  CHECK(invoke({"corpus"}).code == 64);
}
