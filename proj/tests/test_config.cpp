#include <stdexcept>

#include "doctest.h"
#include "gse/config.hpp"

using namespace gse;

TEST_CASE("config sections, comments and typed getters") {
  const Config c = Config::parse_string(
      "seed = 99            # trailing comment\n"
      "[mesh]\n"
      "n = 8\n"
      "kind = tri\n"
      "\n"
      "[study]\n"
      "n_list = 4, 8, 16\n"
      "lambda_list = 1 1e3 1e6\n"
      "[solve]\n"
      "tol = 1e-9\n"
      "verbose = true\n");
  CHECK(c.get_int("seed", 0) == 99);
  CHECK(c.get_int("mesh.n", 0) == 8);
  CHECK(c.get("mesh.kind", "") == "tri");
  CHECK(c.get_double("solve.tol", 0.0) == doctest::Approx(1e-9));
  CHECK(c.get_bool("solve.verbose", false));
  CHECK(c.get_int_list("study.n_list") == std::vector<int>({4, 8, 16}));
  const auto ll = c.get_list("study.lambda_list");
  REQUIRE(ll.size() == 3);
  CHECK(ll[2] == doctest::Approx(1e6));
  // fallbacks for absent keys
  CHECK(c.get_int("law.maxit", 50) == 50);
  CHECK(c.get_list("study.absent").empty());
  CHECK_FALSE(c.has("mesh.absent"));
}

TEST_CASE("config parse errors carry the origin and line number") {
  CHECK_THROWS_WITH_AS((void)Config::parse_string("[mesh]\nkey-without-value\n", "bad.cfg"),
                       doctest::Contains("bad.cfg:2"), std::runtime_error);
  CHECK_THROWS_WITH_AS((void)Config::parse_string("[unterminated\n"),
                       doctest::Contains(":1"), std::runtime_error);
  // duplicate keys are rejected rather than silently overwritten
  CHECK_THROWS_AS((void)Config::parse_string("[mesh]\nn = 2\nn = 4\n"), std::runtime_error);
  // bad typed access
  const Config c = Config::parse_string("[mesh]\nn = soon\n");
  CHECK_THROWS_AS((void)c.get_int("mesh.n", 0), std::runtime_error);
  CHECK_THROWS_AS((void)Config::parse_file("/nonexistent/gse.cfg"), std::runtime_error);
}
