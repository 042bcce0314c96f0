#include <catch_amalgamated.hpp>

#include <random>

#include "relpair/fineness.hpp"

#include "oracles.hpp"

using namespace relpair;
using namespace oracle;

namespace {
  struct Setup {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;
    explicit Setup(std::string const& text)
        : rp(parse_presentation(text)), wp(rp), ps(rp, wp) {}
  };

  Word a_pow(int n) {
    return Word(static_cast<std::size_t>(std::abs(n)), Letter::generator(0, n < 0));
  }

  void compare_with_oracle(Graph const& g) {
    REQUIRE(g.size() <= 12);
    auto cycles = all_cycles(g);
    for (std::size_t u = 0; u < g.size(); ++u) {
      for (auto v : g.neighbors(u)) {
        if (v < u) {
          continue;
        }
        for (std::size_t n = 3; n <= g.size(); ++n) {
          std::vector<std::vector<std::size_t>> expected;
          for (auto const& c : cycles) {
            if (c.size() <= n && uses_edge(c, u, v)) {
              expected.push_back(c);
            }
          }
          std::vector<std::vector<std::size_t>> got;
          for (auto const& c : circuits_through_edge(g, u, v, n)) {
            got.push_back(c.vertices);
          }
          std::sort(expected.begin(), expected.end());
          std::sort(got.begin(), got.end());
          CHECK(got == expected);
          CHECK(count_circuits_through_edge(g, u, v, n) == expected.size());
        }
      }
    }
  }
}  // namespace

TEST_CASE("trees have no circuits", "[fineness]") {
  Setup f2("group <a,b | >");
  auto  g = build_cayley_ball(f2.wp, f2.rp, 3);
  for (auto const& e : g.edges) {
    for (std::size_t n = 3; n <= 10; ++n) {
      CHECK(circuits_through_edge(g, e.u, e.v, n).empty());
    }
  }
}

TEST_CASE("circuits through a cone edge", "[fineness]") {
  Setup s("group <a,b | >\nrel P1 = <a>");
  auto  g   = build_coned_off(s.ps, 3);
  auto  one = *g.find_element({});
  auto  p   = *g.find(Vertex::coset(0, {}));
  auto  cs  = circuits_through_edge(g, one, p, 3);
  REQUIRE(cs.size() == 2);
  std::set<std::set<std::string>> names;
  for (auto const& c : cs) {
    std::set<std::string> n;
    for (auto v : c.vertices) {
      n.insert(g.name(v));
    }
    names.insert(n);
  }
  CHECK(names == std::set<std::set<std::string>>{{"1", "a", "P1"}, {"1", "a-", "P1"}});
  CHECK_THROWS_AS(circuits_through_edge(g, one, *g.find_element(a_pow(2)), 3), NotNeighbor);
}

TEST_CASE("circuit counts in Z^2 rel <a> grow with the radius", "[fineness]") {
  Setup       s("group <a,b | [a,b]>\nrel P1 = <a>");
  std::size_t prev = 0;
  for (std::size_t r : {3, 4, 6, 8}) {
    ConedView   view(s.ps, r);
    std::size_t n = count_circuits_through_edge(view, Vertex::element({}), view.cone_of(0, {}), 6);
    CHECK(n > prev);
    prev = n;
  }
}

TEST_CASE("circuit enumeration matches a brute-force cycle oracle", "[fineness][oracle]") {
  SECTION("small group graphs") {
    Setup z3("group <a | a^3>");
    compare_with_oracle(build_cayley_ball(z3.wp, z3.rp, 2));
    Setup z4("group <a | a^4>");
    compare_with_oracle(build_cayley_ball(z4.wp, z4.rp, 2));
    Setup s3("group <a,b | a^2, b^3, (a b)^2>");
    compare_with_oracle(build_cayley_ball(s3.wp, s3.rp, 3));
    Setup f2("group <a,b | >\nrel P1 = <a>");
    compare_with_oracle(build_coned_off(f2.ps, 1));
    Setup z2("group <a,b | [a,b]>\nrel P1 = <a>");
    compare_with_oracle(build_coned_off(z2.ps, 1));
    Setup zz("group <a,b | b^2>\nrel P1 = <b>");
    compare_with_oracle(build_coned_off(zz.ps, 1));
  }
  SECTION("random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
      std::size_t n = 3 + rng() % 10;
      double      p = n <= 8 ? 0.2 + 0.7 * (rng() % 100) / 100.0 : 0.15 + 0.25 * (rng() % 100) / 100.0;
      std::vector<std::pair<std::size_t, std::size_t>> es;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if ((rng() % 1000) / 1000.0 < p) {
            es.emplace_back(i, j);
          }
        }
      }
      compare_with_oracle(Graph::plain(n, es));
    }
    compare_with_oracle(Graph::plain(7, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6},
                                         {1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 3},
                                         {2, 4}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {3, 6},
                                         {4, 5}, {4, 6}, {5, 6}}));
  }
}

TEST_CASE("angles at a cone vertex", "[fineness]") {
  SECTION("free group relative to <a>") {
    Setup     s("group <a,b | >\nrel P1 = <a>");
    ConedView view(s.ps, 8);
    auto      v = view.id(view.cone_of(0, {}));
    auto      x = view.id(Vertex::element({}));
    CHECK(angle(view, v, x, x) == 0);
    CHECK(angle(view, v, x, view.id(Vertex::element(a_pow(2)))) == 2);
    for (std::size_t R = 0; R <= 5; ++R) {
      CHECK(angle_ball(view, v, x, R).members.size() == 2 * R + 1);
    }
    CHECK(angle_ball(view, v, x, 0).members == std::vector<std::size_t>{x});
    CHECK_THROWS_AS(angle(view, v, x, view.id(Vertex::element({Letter::generator(1)}))), NotNeighbor);
  }
  SECTION("Z^2 relative to <a>") {
    Setup     s("group <a,b | [a,b]>\nrel P1 = <a>");
    ConedView view(s.ps, 8);
    auto      v = view.id(view.cone_of(0, {}));
    auto      x = view.id(Vertex::element({}));
    for (int n = 1; n <= 6; ++n) {
      auto y = view.id(Vertex::element(a_pow(n)));
      CHECK(angle(view, v, x, y) == std::min(n, 4));
    }
    std::size_t prev = 0;
    for (std::size_t r : {4, 6, 8, 10}) {
      ConedView   w(s.ps, r);
      std::size_t size =
          angle_ball(w, w.id(w.cone_of(0, {})), w.id(Vertex::element({})), 4).members.size();
      CHECK(size > prev);
      prev = size;
    }
  }
}

TEST_CASE("angle metric axioms on sampled triples", "[fineness][property]") {
  std::vector<std::string> corpus = {"group <a,b | >\nrel P1 = <a>",
                                     "group <a,b | [a,b]>\nrel P1 = <a>",
                                     "group <a,b | b^2>\nrel P1 = <b>",
                                     "group <a | a^3>\nrel P1 = <a>"};
  std::mt19937 rng(11);
  std::size_t  samples = 0, failures = 0;
  for (auto const& text : corpus) {
    Setup s(text);
    auto  g = build_coned_off(s.ps, 4);
    for (int trial = 0; trial < 3000; ++trial) {
      std::size_t v = rng() % g.size();
      auto const& n = g.neighbors(v);
      if (n.size() < 2) {
        continue;
      }
      std::size_t x = n[rng() % n.size()], y = n[rng() % n.size()], z = n[rng() % n.size()];
      auto xy = angle(g, v, x, y), yx = angle(g, v, y, x);
      auto yz = angle(g, v, y, z), xz = angle(g, v, x, z);
      ++samples;
      failures += xy != yx;
      if (xy && yz && xz) {
        failures += *xz > *xy + *yz;
      }
      if (xy && yz) {
        failures += !xz.has_value();
      }
    }
  }
  CHECK(samples >= 10000);
  CHECK(failures == 0);
}

TEST_CASE("angles do not increase with the truncation radius", "[fineness][property]") {
  for (std::string text : {"group <a,b | [a,b]>\nrel P1 = <a>", "group <a,b | >\nrel P1 = <a>",
                           "group <a,b | b^2>\nrel P1 = <b>"}) {
    Setup s(text);
    for (std::size_t r = 3; r <= 6; ++r) {
      ConedView small(s.ps, r), big(s.ps, r + 2);
      auto      cone = small.cone_of(0, {});
      auto const& members = small.cosets().members(0, {}, r);
      for (auto const& x : members) {
        for (auto const& y : members) {
          auto a1 = angle(small, small.id(cone), small.id(Vertex::element(x)), small.id(Vertex::element(y)));
          auto a2 = angle(big, big.id(cone), big.id(Vertex::element(x)), big.id(Vertex::element(y)));
          if (a1) {
            REQUIRE(a2);
            CHECK(*a2 <= *a1);
          }
        }
      }
    }
  }
}

TEST_CASE("verdict classification", "[fineness]") {
  auto m = [](std::vector<std::size_t> values) {
    std::vector<Measurement> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out.push_back({4 * (i + 1), values[i], true});
    }
    return out;
  };
  CHECK(classify("q", m({5}), false).status == VerdictStatus::inconclusive);
  CHECK(classify("q", m({1, 2, 3}), false).status == VerdictStatus::growth_detected);
  CHECK(classify("q", m({1, 3, 3}), false).status == VerdictStatus::certified_stable);
  CHECK(classify("q", m({3, 3, 3}), true).status == VerdictStatus::inconclusive);
  CHECK(classify("q", m({3, 2, 4}), false).status == VerdictStatus::inconclusive);
  auto j = to_json(classify("q", m({1, 2, 3}), false));
  CHECK(j["status"] == "GrowthDetected");
  CHECK(j["evidence"].size() == 3);
}

TEST_CASE("fineness reports", "[fineness]") {
  Setup           f2("group <a,b | >\nrel P1 = <a>");
  Setup           z2("group <a,b | [a,b]>\nrel P1 = <a>");
  FinenessOptions circuits;
  circuits.circuit_length = 8;
  auto fr = fineness_report(f2.ps, {8, 12, 16}, circuits);
  CHECK(fr.status == VerdictStatus::certified_stable);
  circuits.circuit_length = 6;
  auto zr = fineness_report(z2.ps, {4, 8, 12}, circuits);
  CHECK(zr.status == VerdictStatus::growth_detected);
  CHECK(fineness_report(z2.ps, {4}, circuits).status == VerdictStatus::inconclusive);

  FinenessOptions angles;
  angles.mode = FinenessOptions::Mode::angle;
  CHECK(fineness_report(f2.ps, {8, 12, 16}, angles).status == VerdictStatus::certified_stable);
  CHECK(fineness_report(z2.ps, {4, 8, 12}, angles).status == VerdictStatus::growth_detected);

  Setup klein("group <a,b | a b a b->\nrel P1 = <a>");
  CHECK(fineness_report(klein.ps, {2, 3, 4}, circuits).status == VerdictStatus::inconclusive);

  circuits.threads = 3;
  CHECK(to_json(fineness_report(z2.ps, {4, 8, 12}, circuits)) == to_json(zr));
}
