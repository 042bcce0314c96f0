#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli_support.hpp"

TEST_CASE("every command is deterministic", "[cli]") {
  for (auto const& args : cli::command_set()) {
    INFO(args);
    auto first = cli::run(args);
    CHECK(first.code == 0);
    CHECK_FALSE(first.out.empty());
    for (int i = 0; i < 2; ++i) {
      CHECK(cli::run(args).out == first.out);
    }
    CHECK(cli::run("--threads 4 " + args).out == first.out);
  }
}

TEST_CASE("documented examples", "[cli]") {
  auto corpus = cli::run("corpus");
  CHECK(std::count(corpus.out.begin(), corpus.out.end(), '\n') >= 6);

  auto fin = cli::run("fineness --corpus Z2:a --n 6 --radii 4,8,12");
  CHECK(nlohmann::json::parse(fin.out)["status"] == "GrowthDetected");

  auto dehn = cli::run("rel-dehn --corpus F2:a --nmax 10");
  REQUIRE(dehn.code == 0);
  std::istringstream in(dehn.out);
  std::string        line;
  std::size_t        rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n\t", 0) == 0) {
      continue;
    }
    ++rows;
    std::istringstream fields(line);
    std::string        n, lower, upper;
    fields >> n >> lower >> upper;
    CHECK(lower == "0");
    CHECK(upper == "0");
  }
  CHECK(rows == 10);
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(cli::run("").code == 1);
  CHECK(cli::run("nosuchcommand").code == 1);
  CHECK(cli::run("ball").code == 1);
  CHECK(cli::run("ball --corpus F2 --pres x.pres").code == 1);
  CHECK(cli::run("fineness --corpus Z2:a --radii 8,4").code == 1);
  CHECK(cli::run("area --corpus Z2 -w a").code == 1);
  CHECK(cli::run("refine --spec " + cli::data("identity_z2.toml")).code == 1);
  CHECK(cli::run("hausdorff --corpus F2:a --A a --B P1").code == 1);

  auto partial = cli::run("area --corpus Z2 -w [a^3,b^3] --budget 5");
  CHECK(partial.code == 2);
  auto j = nlohmann::json::parse(partial.out);
  CHECK(j["optimal"] == false);
  CHECK(j["lower"].get<std::size_t>() <= 9);
}
