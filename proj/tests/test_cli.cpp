#include <doctest.h>

#include <cli.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shiftconv/arith.hpp"
#include "shiftconv/convolution.hpp"
#include "shiftconv/errors.hpp"
#include "shiftconv/expsums.hpp"

using json = nlohmann::json;
namespace cli = shiftconv::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "shiftconv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string without_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("wall_time_s") == std::string::npos) kept += line + "\n";
  }
  return kept;
}

}  // namespace

TEST_CASE("psi command writes csv with provenance header") {
  const auto o = invoke({"psi", "--x", "2", "--r", "2"});
  REQUIRE(o.code == 0);
  CHECK(o.out.rfind("# schema_version=1\n# command=psi\n# build_id=", 0) == 0);
  CHECK(o.out.find("input.x,input.r,truncation.n_max,output.psi") != std::string::npos);
  const auto j = json::parse(invoke({"psi", "--x", "2", "--r", "2", "--format", "json"}).out);
  CHECK(j["command"] == "psi");
  CHECK(j["schema_version"] == 1);
  const auto t = shiftconv::ArithmeticTables::build(10, 10);
  const double psi = j["outputs"]["psi"].get<double>();
  CHECK(psi == doctest::Approx(1.0 + 3.0 * t->tau0(3)).epsilon(1e-14));
  CHECK(j.contains("wall_time_s"));
}

TEST_CASE("kloosterman and params examples") {
  auto j = json::parse(invoke({"kloosterman", "--a", "1", "--b", "1", "--q", "7"}).out);
  CHECK(j["outputs"]["value"]["re"].get<double>() ==
        doctest::Approx(shiftconv::kloosterman(1, 1, 7).value.real()).epsilon(1e-14));
  CHECK(j["outputs"]["weil_ratio"].get<double>() <= 1.0);

  j = json::parse(invoke({"params", "--X", "1e10", "--r", "1"}).out);
  CHECK(j["outputs"]["exponent_delta"].get<double>() == doctest::Approx(1.0 / 35.0).epsilon(1e-14));
  CHECK(j["outputs"]["Q2"].get<double>() == doctest::Approx(1e4).epsilon(1e-12));
  CHECK_FALSE(j["outputs"]["degenerate"].get<bool>());
  j = json::parse(invoke({"params", "--X", "1e10", "--r", "10"}).out);
  CHECK(j["outputs"]["degenerate"].get<bool>());
}

TEST_CASE("voronoi2 reports a certified identity") {
  const auto o = invoke({"voronoi2", "--q", "7", "--a", "3", "--Y", "300"});
  REQUIRE(o.code == 0);
  const auto j = json::parse(o.out);
  CHECK(j["outputs"]["rel_diff"].get<double>() <= 1e-6);
  CHECK(j["tolerances"]["tol"].get<double>() == 1e-6);
  CHECK(j["truncations"]["M"].get<long long>() > 0);
}

TEST_CASE("output is independent of the thread count") {
  const std::vector<std::vector<std::string>> runs{
      {"sieve", "--n", "5000", "--from", "4000", "--to", "4100"},
      {"tau", "--n", "300"},
      {"charsum", "--kind", "s_star", "--q", "35", "--m", "4", "--n", "9"},
      {"voronoi2", "--q", "5", "--Y", "200"},
      {"jutila", "--Q1", "3", "--Q2", "7", "--samples", "20000"},
      {"dtilde", "--Q1", "2.1", "--Q2", "5.2", "--X", "100", "--alpha", "0.001"},
      {"psi", "--x", "20000", "--r", "3"},
      {"scan", "--x_lo", "1000", "--x_hi", "20000", "--count", "5", "--majorant", "1", "--format", "csv"},
  };
  for (const auto& base : runs) {
    CAPTURE(base.front());
    std::string reference;
    for (const char* threads : {"1", "3"}) {
      auto args = base;
      args.push_back("--threads");
      args.push_back(threads);
      const auto o = invoke(args);
      REQUIRE(o.code == 0);
      const auto body = without_wall_time(o.out);
      if (reference.empty()) reference = body;
      CHECK(body == reference);
    }
  }
}

TEST_CASE("invalid input maps to exit code 1") {
  CHECK(invoke({"psi", "--bogus", "3"}).code == 1);
  CHECK(invoke({"psi", "--x", "abc"}).code == 1);
  CHECK(invoke({"psi", "--tol", "nope=1"}).code == 1);
  CHECK(invoke({"voronoi2", "--tol", "tol=-1"}).code == 1);
  CHECK(invoke({"nosuchcommand"}).code == 1);
  CHECK(invoke({"psi", "--format", "xml"}).code == 1);
  CHECK_THROWS_AS(cli::command_spec("nope"), shiftconv::InvalidArgument);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("accuracy failure maps to exit code 2") {
  const auto o = invoke({"dtilde", "--Q1", "2.1", "--Q2", "5.2", "--X", "100", "--points", "9", "--tol",
                         "quadrature=1e-30"});
  CHECK(o.code == 2);
  CHECK(o.err.find("accuracy error") != std::string::npos);
}

TEST_CASE("config file: values, precedence and unknown keys") {
  const auto dir = std::filesystem::temp_directory_path() / "shiftconv_test_cli";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "psi.cfg").string();
  {
    std::ofstream f(path);
    f << "# psi at x = 500\n\nx = 500\nr=2\nformat=json\n";
  }
  const auto kv = cli::read_config_file(path);
  CHECK(kv.at("x") == "500");
  CHECK(kv.at("r") == "2");
  auto cfg = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "shiftconv");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::parse_command_line(static_cast<int>(argv.size()), argv.data());
  };
  auto c = cfg({"psi", "--config", path});
  CHECK(c.params.at("x") == "500");
  CHECK(c.format == cli::Format::json);
  c = cfg({"psi", "--config", path, "--x", "700"});
  CHECK(c.params.at("x") == "700");
  CHECK(c.params.at("r") == "2");

  {
    std::ofstream f(path);
    f << "x=500\ny=1\n";
  }
  CHECK(invoke({"psi", "--config", path}).code == 1);
  {
    std::ofstream f(path);
    f << "tol.tol=1e-7\nq=3\n";
  }
  c = cfg({"voronoi2", "--config", path});
  CHECK(c.tolerances.at("tol") == 1e-7);
  CHECK(c.params.at("q") == "3");

  const auto out = (dir / "out.json").string();
  REQUIRE(invoke({"kloosterman", "--q", "11", "--output", out}).code == 0);
  std::ifstream in(out);
  const auto j = json::parse(in);
  CHECK(j["inputs"]["q"] == 11);
  std::filesystem::remove_all(dir);
}

TEST_CASE("json round-trip reproduces doubles exactly") {
  const auto o = invoke({"params", "--X", "123456.789", "--r", "7"});
  const auto j = json::parse(o.out);
  const auto again = json::parse(j.dump());
  for (const char* k : {"exponent_delta", "H", "Q", "Q1", "Q2", "interval_halfwidth"}) {
    CHECK(j["outputs"][k].get<double>() == again["outputs"][k].get<double>());
  }
  const auto p = shiftconv::choose_parameters(123456.789, 7);
  CHECK(j["outputs"]["Q1"].get<double>() == p.Q1);
  CHECK(j["outputs"]["H"].get<double>() == p.H);
}
