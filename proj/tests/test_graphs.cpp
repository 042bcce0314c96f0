#include <catch_amalgamated.hpp>

#include <regex>

#include "relpair/graphs.hpp"

using namespace relpair;

namespace {
  struct Setup {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;
    explicit Setup(std::string const& text)
        : rp(parse_presentation(text)), wp(rp), ps(rp, wp) {}
  };

  std::size_t cones(Graph const& g) {
    return static_cast<std::size_t>(
        std::count_if(g.vertices.begin(), g.vertices.end(), [](Vertex const& v) { return v.cone; }));
  }

  std::set<std::string> neighbor_names(Graph const& g, std::size_t v) {
    std::set<std::string> out;
    for (auto w : g.neighbors(v)) {
      out.insert(g.name(w));
    }
    return out;
  }
}  // namespace

TEST_CASE("Cayley balls", "[graphs]") {
  Setup f2("group <a,b | >");
  auto  g = build_cayley_ball(f2.wp, f2.rp, 1);
  CHECK(g.size() == 5);
  CHECK(g.edges.size() == 4);

  Setup z2("group <a,b | [a,b]>");
  auto  h = build_cayley_ball(z2.wp, z2.rp, 2);
  CHECK(h.size() == 13);
  // oracle: lattice points with |x|+|y| <= 2 joined at distance one
  std::size_t expected = 0;
  for (int x = -2; x <= 2; ++x) {
    for (int y = -2; y <= 2; ++y) {
      if (std::abs(x) + std::abs(y) > 2) {
        continue;
      }
      expected += (std::abs(x + 1) + std::abs(y) <= 2) + (std::abs(x) + std::abs(y + 1) <= 2);
    }
  }
  CHECK(h.edges.size() == expected);
  CHECK(expected == 16);

  Setup z3("group <a | a^3>");
  auto  t = build_cayley_ball(z3.wp, z3.rp, 2);
  CHECK(t.size() == 3);
  CHECK(t.edges.size() == 3);
  CHECK(t.simplicial());
}

TEST_CASE("coned-off graphs", "[graphs]") {
  SECTION("free group relative to <a>") {
    Setup s("group <a,b | >\nrel P1 = <a>");
    auto  g = build_coned_off(s.ps, 1);
    CHECK(g.size() == 8);
    CHECK(cones(g) == 3);
    CHECK(g.find(Vertex::coset(0, {})));
    CHECK(g.find(Vertex::coset(0, {Letter::generator(1)})));
    CHECK(g.find(Vertex::coset(0, {Letter::generator(1, true)})));
    auto p = *g.find(Vertex::coset(0, {}));
    CHECK(neighbor_names(g, p) == std::set<std::string>{"1", "a", "a-"});
    CHECK(g.simplicial());
  }
  SECTION("no peripherals gives the Cayley graph") {
    Setup s("group <a,b | [a,b]>");
    auto  g = build_coned_off(s.ps, 3);
    auto  h = build_cayley_ball(s.wp, s.rp, 3);
    CHECK(g.size() == h.size());
    CHECK(g.edges.size() == h.edges.size());
    CHECK(cones(g) == 0);
  }
  SECTION("Z^2 relative to <a>") {
    Setup s("group <a,b | [a,b]>\nrel P1 = <a>");
    auto  g = build_coned_off(s.ps, 1);
    auto  p = *g.find(Vertex::coset(0, {}));
    CHECK(neighbor_names(g, p) == std::set<std::string>{"1", "a", "a-"});
    CHECK(cones(g) == 3);
  }
  SECTION("cone edges are exactly coset membership") {
    Setup s("group <a,b | [a,b]>\nrel P1 = <a>");
    auto  g = build_coned_off(s.ps, 4);
    CHECK(g.simplicial());
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (!g.vertices[c].cone) {
        continue;
      }
      CHECK_FALSE(g.neighbors(c).empty());
      long row = exponent_sum(g.vertices[c].word, 1);
      for (std::size_t x = 0; x < g.size(); ++x) {
        if (g.vertices[x].cone) {
          continue;
        }
        bool member = exponent_sum(g.vertices[x].word, 1) == row;
        CHECK(g.adjacent(x, c) == member);
      }
    }
  }
  SECTION("finite peripheral subgroup") {
    Setup s("group <a,b | b^2>\nrel P1 = <b>");
    auto  g = build_coned_off(s.ps, 3);
    CHECK(g.simplicial());
    auto p = *g.find(Vertex::coset(0, {}));
    CHECK(neighbor_names(g, p) == std::set<std::string>{"1", "b"});
  }
}

TEST_CASE("lazy view agrees with the built graph", "[graphs]") {
  for (std::string text : {"group <a,b | [a,b]>\nrel P1 = <a>", "group <a,b | >\nrel P1 = <a>",
                           "group <a,b | b^2>\nrel P1 = <b>"}) {
    Setup     s(text);
    auto      g = build_coned_off(s.ps, 4);
    ConedView view(s.ps, 4);
    auto      h = materialize(view, {Vertex::element({})}, 100);
    REQUIRE(h.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(h.vertices[i] == g.vertices[i]);
      CHECK(h.neighbors(i) == g.neighbors(i));
    }
  }
}

TEST_CASE("coned-off builds are monotone in the radius", "[graphs][property]") {
  Setup s("group <a,b | [a,b]>\nrel P1 = <a>");
  for (std::size_t r = 1; r < 5; ++r) {
    auto small = build_coned_off(s.ps, r);
    auto big   = build_coned_off(s.ps, r + 1);
    for (std::size_t i = 0; i < small.size(); ++i) {
      auto bi = big.find(small.vertices[i]);
      REQUIRE(bi);
      for (std::size_t j = 0; j < small.size(); ++j) {
        CHECK(small.adjacent(i, j) == big.adjacent(*bi, *big.find(small.vertices[j])));
      }
    }
  }
}

TEST_CASE("Osin graphs", "[graphs]") {
  Setup f2("group <a,b | >\nrel P1 = <a>");
  auto  g = build_osin_graph(f2.ps, 2, 2);
  auto  one = *g.find_element({});
  auto  a2  = *g.find_element({Letter::generator(0), Letter::generator(0)});
  bool  found = false;
  for (auto const& e : g.edges) {
    if (e.u == one && e.v == a2) {
      found = true;
      CHECK(e.kind == EdgeKind::peripheral);
      CHECK(e.label == "P1:a^2");
    }
  }
  CHECK(found);

  auto cap1   = build_osin_graph(f2.ps, 2, 1);
  auto cayley = build_cayley_ball(f2.wp, f2.rp, 2);
  std::size_t a_edges = 0;
  for (auto const& e : cayley.edges) {
    a_edges += e.element == Word{Letter::generator(0)} || e.element == Word{Letter::generator(0, true)};
  }
  CHECK(cap1.edges.size() == cayley.edges.size() + a_edges);
  CHECK_FALSE(cap1.simplicial());

  Setup z2("group <a,b | [a,b]>\nrel P1 = <a>");
  auto  h = build_osin_graph(z2.ps, 2, 4);
  CHECK_FALSE(h.find_element({Letter::generator(0), Letter::generator(0), Letter::generator(1)}));
  for (auto const& e : h.edges) {
    CHECK(h.vertices[e.u].word.size() <= 2);
    CHECK(h.vertices[e.v].word.size() <= 2);
  }
}

TEST_CASE("phi map", "[graphs]") {
  Setup       s("group <a,b | >\nrel P1 = <a>");
  auto        osin  = build_osin_graph(s.ps, 3, 3);
  auto        coned = build_coned_off(s.ps, 3);
  CosetOracle cosets(s.ps);
  for (std::size_t e = 0; e < osin.edges.size(); ++e) {
    auto const& edge = osin.edges[e];
    auto        path = phi_edge(osin, e, coned, cosets);
    if (edge.kind == EdgeKind::generator) {
      REQUIRE(path.size() == 2);
      CHECK(coned.adjacent(path[0], path[1]));
    } else {
      REQUIRE(path.size() == 3);
      CHECK(coned.vertices[path[1]].cone);
      CHECK(coned.adjacent(path[0], path[1]));
      CHECK(coned.adjacent(path[1], path[2]));
    }
    if (osin.name(edge.u) == "1" && osin.name(edge.v) == "a^3") {
      CHECK(coned.name(path[1]) == "P1");
    }
  }
  auto other = build_coned_off(s.ps, 2);
  CHECK_THROWS_AS(phi_edge(osin, 0, other, cosets), MismatchedProvenance);
}

TEST_CASE("phi is a (1,1)-quasi-isometry on interior vertices of Z^2 rel <a>", "[graphs]") {
  Setup s("group <a,b | [a,b]>\nrel P1 = <a>");
  std::size_t const r = 6, guard = 3;
  auto osin  = build_osin_graph(s.ps, r, 2 * r);
  auto coned = build_coned_off(s.ps, r);
  std::size_t violations = 0, pairs = 0;
  for (std::size_t x = 0; x < osin.size(); ++x) {
    if (osin.vertices[x].word.size() > guard) {
      continue;
    }
    auto d  = distances_from(osin, x);
    auto dc = distances_from(coned, phi_vertex(osin, x, coned));
    for (std::size_t y = 0; y < osin.size(); ++y) {
      if (osin.vertices[y].word.size() > guard) {
        continue;
      }
      std::size_t d1 = d[y], d2 = dc[phi_vertex(osin, y, coned)];
      ++pairs;
      violations += (d2 + 1 < d1) || (d2 > d1 + 1);
    }
  }
  CHECK(pairs == 25 * 25);
  CHECK(violations == 0);
}

TEST_CASE("exports", "[graphs]") {
  Graph empty;
  CHECK(to_dot(empty) == "graph G {\n}\n");
  CHECK(to_jsonl(empty).empty());

  Setup z3("group <a | a^3>");
  auto  dot = to_dot(build_cayley_ball(z3.wp, z3.rp, 2));
  std::regex node(R"(^  "[^"]*";$)"), edge(R"(^  "[^"]*" -- "[^"]*" \[label="[^"]*"\];$)");
  std::size_t nodes = 0, edges = 0;
  std::istringstream in(dot);
  for (std::string line; std::getline(in, line);) {
    nodes += std::regex_match(line, node);
    edges += std::regex_match(line, edge);
  }
  CHECK(nodes == 3);
  CHECK(edges == 3);

  Setup f2("group <a,b | >\nrel P1 = <a>");
  auto  jl = to_jsonl(build_coned_off(f2.ps, 1));
  std::size_t cone_records = 0, records = 0;
  std::istringstream jin(jl);
  for (std::string line; std::getline(jin, line);) {
    auto j = nlohmann::json::parse(line);
    ++records;
    cone_records += j.contains("cone") && j["cone"].get<bool>();
  }
  CHECK(cone_records == 3);
  CHECK(records == 8 + 4 + 5 * 1);
  CHECK(to_dot(build_coned_off(f2.ps, 2)) == to_dot(build_coned_off(f2.ps, 2)));
}
