#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "hessiansys/config.hpp"
#include "hessiansys/error.hpp"

using namespace hessiansys;
using nlohmann::json;

TEST_CASE("TOML subset: scalars, sections and comments") {
  const json j = parse_toml_subset(R"(
# run config
[domain]
kind = "box"   # trailing comment
m = 32
lower = [0.0, 0.0]
upper = [1, 2.5e0]

[operator]
id = "tanh-perturbed"
[operator.params]
L = 0.25

[output]
directory = "out # not a comment"
formats = ["json", "csv"]

[solver]
tol = 1e-10
guard_window = -5
)");
  CHECK(j["domain"]["kind"] == "box");
  CHECK(j["domain"]["m"] == 32);
  CHECK(j["domain"]["m"].is_number_integer());
  CHECK(j["domain"]["upper"][1].get<double>() == 2.5);
  CHECK(j["operator"]["params"]["L"].get<double>() == 0.25);
  CHECK(j["output"]["directory"] == "out # not a comment");
  CHECK(j["output"]["formats"].size() == 2);
  CHECK(j["solver"]["tol"].get<double>() == 1e-10);
  CHECK(j["solver"]["guard_window"] == -5);
  CHECK_NOTHROW(validate_config(j));
}

TEST_CASE("TOML subset: nested multi-line arrays, booleans and escapes") {
  const json j = parse_toml_subset(R"([tensor]
n = 2
N = 1
matrix = [
  [1.0, 0.0],   # first row
  [0.0, 1.0],
]
[sh]
rescale = true
[mt]
function = "bubble\t\"quoted\""
)");
  CHECK(j["tensor"]["matrix"] == json::parse("[[1.0,0.0],[0.0,1.0]]"));
  CHECK(j["sh"]["rescale"] == true);
  CHECK(j["mt"]["function"] == "bubble\t\"quoted\"");
}

TEST_CASE("TOML subset: errors carry line numbers") {
  auto message = [](const std::string& text) {
    try {
      parse_toml_subset(text);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[a]\nx = 1\nx = 2\n").find("line 3") != std::string::npos);
  CHECK(message("[a]\nx = \n").find("line 2") != std::string::npos);
  CHECK(message("[a\n").find("line 1") != std::string::npos);
  CHECK(message("x = \"open\n").find("line 1") != std::string::npos);
  CHECK(message("x = [1, 2\n").find("line") != std::string::npos);
  CHECK(message("x = 1 2\n").find("line 1") != std::string::npos);
  CHECK_FALSE(message("[a]\n[a]\n").empty());
}

TEST_CASE("JSON is accepted as an alternative") {
  const std::string js = R"({"domain": {"kind": "box", "m": 16}, "solver": {"tol": 1e-9}})";
  const json a = parse_config_text("  \n" + js);
  const json b = parse_config_text("[domain]\nkind = \"box\"\nm = 16\n[solver]\ntol = 1e-9\n");
  CHECK(a == b);
  CHECK(config_hash(a) == config_hash(b));
  CHECK_THROWS_AS(parse_config_text("{ broken"), FormatError);
}

TEST_CASE("schema validation") {
  CHECK_NOTHROW(validate_config(json::object()));
  CHECK_THROWS_AS(validate_config(json::parse(R"({"bogus": {}})")), FormatError);
  CHECK_THROWS_AS(validate_config(json::parse(R"({"solver": {"tolerance": 1}})")), FormatError);
  CHECK_THROWS_AS(validate_config(json::parse(R"({"solver": {"tol": "small"}})")), FormatError);
  CHECK_THROWS_AS(validate_config(json::parse(R"({"domain": {"m": 1.5}})")), FormatError);
  CHECK_THROWS_AS(validate_config(json::parse(R"({"operator": {"params": []}})")), FormatError);
  CHECK_THROWS_AS(validate_config(json::parse(R"({"solver": 3})")), FormatError);
  CHECK_NOTHROW(validate_config(json::parse(R"({"operator": {"id": "x", "params": {"anything": 1}}})")));
}

TEST_CASE("config hash") {
  const json a = json::parse(R"({"solver": {"tol": 1e-10, "max_iter": 50}})");
  const json b = json::parse(R"({"solver": {"max_iter": 50, "tol": 1e-10}})");
  const json c = json::parse(R"({"solver": {"max_iter": 51, "tol": 1e-10}})");
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  // FNV-1a of "{}"
  CHECK(config_hash(json::object()) == "08f44b07b5901a25");
}

TEST_CASE("loading from disk") {
  const std::string path = "hessiansys_test_config.toml";
  {
    std::ofstream os(path);
    os << "[domain]\nm = 8\n";
  }
  CHECK(load_config(path)["domain"]["m"] == 8);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("definitely/missing.toml"), FormatError);
}
