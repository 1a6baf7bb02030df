#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

using tacnode::cli::run;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = run(args, o, e);
  return {code, o.str(), e.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tacnode_test_" + name);
}

}  // namespace

TEST_CASE("cli: tw2 and kernel") {
  auto r = call({"tw2", "--s", "8"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json::parse(r.out)["value"].get<double>() - 1) < 1e-10);

  r = call({"kernel", "--lambda", "1", "--sigma", "0", "--check-alt"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["abs_diff"].get<double>() < 1e-7);
  CHECK(std::abs(j["value"].get<double>() - 0.11414980962851909) < 1e-9);

  r = call({"--format", "csv", "tw2", "--s", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("command,s,value\n", 0) == 0);
}

TEST_CASE("cli: exit codes") {
  CHECK(call({"gap", "--lambda", "1", "--sigma", "0"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"gap", "--lambda", "1", "--sigma", "0", "--window", "0:1:-1"}).code == 2);
  CHECK(call({"--format", "xml", "tw2", "--s", "0"}).code == 2);
  const auto r = call({"kernel", "--lambda", "100", "--sigma", "0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("failed") != std::string::npos);
  CHECK(call({"tw2", "--s", "9"}).code == 1);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("cli: gap and finite") {
  auto r = call({"gap", "--lambda", "1", "--sigma", "0", "--window", "0:-1:1", "--quad-order", "30"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json::parse(r.out)["value"].get<double>() - 0.6727) < 1e-4);

  r = call({"finite", "--n", "16", "--lambda", "1", "--sigma", "0", "--compare"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).contains("limit"));
}

TEST_CASE("cli: simulate dumps paths") {
  const auto path = temp_file("paths.csv");
  std::filesystem::remove(path);
  const auto r = call({"simulate", "--n", "1", "--m", "1", "--a1", "-2", "--a2", "2", "--steps", "4",
                       "--samples", "3", "--seed", "1", "--gap", "0.5:-0.5:0.5", "--dump-paths",
                       path.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1 + 3 * 2 * 5);
  CHECK(json::parse(r.out).contains("p_hat"));
  std::filesystem::remove(path);
}

TEST_CASE("cli: config file and environment") {
  const auto cfg = temp_file("cfg.toml");
  {
    std::ofstream f(cfg);
    f << "format=\"csv\"\n[tw2]\ns=1.5\n";
  }
  auto r = call({"--config", cfg.string(), "tw2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("command,s,value\n", 0) == 0);
  CHECK(r.out.find("1.5") != std::string::npos);

  // Flags override the file.
  r = call({"--config", cfg.string(), "--format", "json", "tw2", "--s", "2"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["s"].get<double>() == 2);
  std::filesystem::remove(cfg);

  ::setenv("TACNODE_THREADS", "0", 1);
  CHECK(call({"tw2", "--s", "1"}).code == 2);
  ::setenv("TACNODE_THREADS", "3", 1);
  CHECK(call({"tw2", "--s", "1"}).code == 0);
  ::unsetenv("TACNODE_THREADS");
}
