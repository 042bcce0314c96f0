#include <catch_amalgamated.hpp>

#include <unordered_set>

#include "relpair/area.hpp"
#include "relpair/coarse.hpp"

#include "oracles.hpp"

using namespace relpair;
using namespace oracle;

namespace {
  Letter A(bool inv = false) {
    return Letter::generator(0, inv);
  }
  Letter B(bool inv = false) {
    return Letter::generator(1, inv);
  }

  Word commutator_power(std::size_t n) {
    Word w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(A());
    for (std::size_t i = 0; i < n; ++i) w.push_back(B());
    for (std::size_t i = 0; i < n; ++i) w.push_back(A(true));
    for (std::size_t i = 0; i < n; ++i) w.push_back(B(true));
    return w;
  }
}  // namespace

TEST_CASE("area of commutators in Z^2", "[area]") {
  auto wp = WordProblem(parse_presentation("group <a,b | [a,b]>"));
  for (std::size_t n = 1; n <= 4; ++n) {
    auto cert = area(commutator_power(n), wp);
    REQUIRE(cert.upper);
    CHECK(*cert.upper == n * n);
    CHECK(cert.optimal);
    CHECK(cert.lower == n * n);
    CHECK(replay_area(cert, wp));
  }
  CHECK_THROWS_AS(area(Word{A(), B()}, wp), NotNullHomotopic);
}

TEST_CASE("tampered certificates fail replay", "[area]") {
  auto wp   = WordProblem(parse_presentation("group <a,b | [a,b]>"));
  auto cert = area(commutator_power(2), wp);
  REQUIRE(replay_area(cert, wp));
  auto bad = cert;
  bad.moves.pop_back();
  CHECK_FALSE(replay_area(bad, wp));
  bad = cert;
  bad.moves[0].inverse = !bad.moves[0].inverse;
  CHECK_FALSE(replay_area(bad, wp));
}

TEST_CASE("area matches the conjugate-product oracle", "[area][oracle]") {
  struct Case {
    std::string text;
    std::size_t gens;
  };
  std::vector<Case> corpus = {{"group <a | a^3>", 1},
                              {"group <a | a^4>", 1},
                              {"group <a,b | [a,b]>", 2},
                              {"group <a,b | a b a b->", 2}};
  for (auto const& c : corpus) {
    auto                   p  = parse_presentation(c.text);
    WordProblem            wp(p);
    ConjugateProductOracle oracle(p.relators, c.gens);
    std::size_t            checked = 0;
    for (auto const& w : cyclic_reps(c.gens, 8)) {
      bool trivial = wp.exact() ? wp.normal_form(w).word.empty() : klein_trivial(w);
      if (!trivial) {
        continue;
      }
      auto expected = oracle.area(w);
      INFO(c.text << " " << to_string(w, p.names()));
      REQUIRE(expected.has_value());
      auto cert = area(w, wp);
      REQUIRE(cert.upper);
      CHECK(*cert.upper == *expected);
      CHECK(cert.optimal);
      CHECK(replay_area(cert, wp));
      ++checked;
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("area bounds are monotone in the node budget", "[area][property]") {
  auto wp = WordProblem(parse_presentation("group <a,b | a b a b->"));
  Word w  = {A(), A(), B(), A(), A(), B(true)};
  std::optional<std::size_t> prev_upper;
  std::size_t                prev_lower = 0;
  for (std::size_t budget : {2, 8, 32, 128, 1024, 100000}) {
    AreaCaps caps;
    caps.node_budget = budget;
    auto cert        = area(w, wp, caps);
    if (prev_upper) {
      REQUIRE(cert.upper);
      CHECK(*cert.upper <= *prev_upper);
    }
    CHECK(cert.lower >= prev_lower);
    prev_upper = cert.upper ? cert.upper : prev_upper;
    prev_lower = cert.lower;
  }
  CHECK(prev_upper == 2);
}

TEST_CASE("relative area", "[area]") {
  SECTION("pure peripheral cells are free") {
    auto rp = parse_presentation("group <a,b | >\nrel P1 = <a>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    auto cert = relative_area(parse_relative_word("{a^2}*{a^-2}", rp), ps);
    CHECK(cert.upper == 0);
  }
  SECTION("Z^2 relative to <a>: a^n b a^-n b^-1 costs n") {
    auto rp = parse_presentation("group <a,b | [a,b]>\nrel P1 = <a>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    RelativeArea        ra(ps);
    for (int n = 1; n <= 5; ++n) {
      std::string text = "{a^" + std::to_string(n) + "}*b*{a^-" + std::to_string(n) + "}*b-";
      auto        w    = parse_relative_word(text, rp);
      CHECK(ra.relative_length(ra.canonical(flatten(w))) == 4);
      auto cert = relative_area(w, ps);
      REQUIRE(cert.upper);
      CHECK(*cert.upper == static_cast<std::size_t>(n));
      CHECK(cert.optimal);
      CHECK(replay_relative_area(cert, ps));
    }
  }
  SECTION("no peripherals: relative area equals area") {
    auto rp = parse_presentation("group <a,b | [a,b]>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    for (auto const& w : cyclic_reps(2, 8)) {
      if (!wp.normal_form(w).word.empty()) {
        continue;
      }
      RelativeWord rw;
      for (Letter x : w) {
        rw.push_back({std::nullopt, Word{x}});
      }
      CHECK(relative_area(rw, ps).upper == area(w, wp).upper);
    }
  }
  SECTION("overlapping peripheral generators are unsupported") {
    auto rp = parse_presentation("group <a,b | [a,b]>\nrel P1 = <a>\nrel P2 = <a,b>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    CHECK_THROWS_AS(RelativeArea(ps), Unsupported);
  }
}

TEST_CASE("Dehn tables", "[area]") {
  auto wp = WordProblem(parse_presentation("group <a,b | [a,b]>"));
  auto t  = dehn_table(wp, 8);
  REQUIRE(t.rows.size() == 8);
  CHECK(t.rows[3].lower == 1);
  CHECK(t.rows[5].lower == 2);
  CHECK(t.rows[7].lower == 4);
  for (auto const& r : t.rows) {
    CHECK(r.exact);
  }
  auto tsv = to_tsv(t);
  CHECK(tsv.find("n\tlower\tupper\texact\tflags\twitness") != std::string::npos);
}

TEST_CASE("relative Dehn tables", "[area]") {
  SECTION("free group relative to <a> is all zero") {
    auto rp = parse_presentation("group <a,b | >\nrel P1 = <a>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    auto t = rel_dehn_table(ps, 10);
    REQUIRE(t.rows.size() == 10);
    for (auto const& r : t.rows) {
      CHECK(r.lower == 0);
      CHECK(r.upper == 0);
      CHECK(r.exact);
      CHECK_FALSE(divergence_suspected(r));
    }
  }
  SECTION("Z^2 relative to <a> diverges at n = 4") {
    auto rp = parse_presentation("group <a,b | [a,b]>\nrel P1 = <a>");
    WordProblem         wp(rp);
    PeripheralStructure ps(rp, wp);
    auto t = rel_dehn_table(ps, 4);
    auto const& row = t.rows[3];
    CHECK(divergence_suspected(row));
    CHECK(cap_lower_series(row) == std::vector<std::size_t>{1, 2, 3});
    CHECK_FALSE(divergence_suspected(t.rows[1]));
  }
}

namespace {
  struct Rel {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;
    explicit Rel(std::string const& text) : rp(parse_presentation(text)), wp(rp), ps(rp, wp) {}
  };

  VertexPath path_of(Graph const& g, std::vector<Vertex> const& vs) {
    VertexPath out;
    for (auto const& v : vs) {
      out.push_back(*g.find(v));
    }
    return out;
  }
}  // namespace

TEST_CASE("coarse fillings", "[area][coarse]") {
  Rel    f2("group <a,b | >\nrel P1 = <a>");
  auto   g   = build_coned_off(f2.ps, 3);
  Vertex one = Vertex::element({}), a = Vertex::element({A()}), ai = Vertex::element({A(true)});
  Vertex p   = Vertex::coset(0, {});

  auto tri = coarse_area(g, path_of(g, {one, a, p}), 3);
  CHECK(tri.upper == 1);
  CHECK(tri.optimal);

  CoarseFiller filler(g, 3);
  auto         sq = filler.fill(path_of(g, {one, a, p, ai}));
  CHECK(sq.upper == 2);
  CHECK(sq.optimal);
  CHECK(filler.replay(sq));
  auto bad = sq;
  bad.moves.pop_back();
  CHECK_FALSE(filler.replay(bad));

  CHECK(coarse_area(g, path_of(g, {one, a}), 3).upper == 0);
  CHECK(coarse_area(g, path_of(g, {one, a, Vertex::element({A(), B()}), a}), 3).upper == 0);
  CHECK_THROWS_AS(coarse_area(g, path_of(g, {one, Vertex::element({B(), B()})}), 3), NotClosed);

  std::optional<std::size_t> prev;
  for (std::size_t budget : {1, 2, 4, 16, 1000}) {
    CoarseCaps caps;
    caps.node_budget = budget;
    auto c = coarse_area(g, path_of(g, {one, a, Vertex::element({A(), A()}), p, ai}), 3, caps);
    if (prev) {
      REQUIRE(c.upper);
      CHECK(*c.upper <= *prev);
    }
    if (c.upper) {
      prev = c.upper;
    }
  }
  CHECK(prev == 3);
}

TEST_CASE("affine fits", "[area][coarse]") {
  std::vector<std::size_t> zero(12, 0), lin, quad;
  for (std::size_t n = 1; n <= 12; ++n) {
    lin.push_back(n);
    quad.push_back(n * n);
  }
  auto fit = fit_affine(zero, lin);
  REQUIRE(fit);
  CHECK(fit->L == 1);
  CHECK(fit_affine(lin, lin));
  CHECK_FALSE(fit_affine(quad, zero));
}

TEST_CASE("relative Dehn function and coarse isoperimetric function agree for F2 rel <a>",
          "[area][coarse]") {
  Rel       f2("group <a,b | >\nrel P1 = <a>");
  ConedView view(f2.ps, 10);
  Graph     g = materialize(view, {Vertex::element({})}, 6);
  auto coarse = coarse_table(g, *g.find_element({}), 4, 12);
  auto rel    = rel_dehn_table(f2.ps, 12);
  std::vector<std::size_t> fc, fr;
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(coarse.rows[i].exact);
    fc.push_back(coarse.rows[i].lower);
    fr.push_back(rel.rows[i].lower);
  }
  CHECK(fc[2] == 1);
  CHECK(fc[11] == 5);
  auto fit = fit_affine(fr, fc);
  REQUIRE(fit);
  CHECK(fit->C <= 4);
  CHECK(fit->K <= 4);
  CHECK(fit->L <= 4);
}
