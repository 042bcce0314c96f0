#include <catch_amalgamated.hpp>

#include <set>

#include "relpair/wordproblem.hpp"

using namespace relpair;

namespace {
  Letter A(bool inv = false) {
    return Letter::generator(0, inv);
  }
  Letter B(bool inv = false) {
    return Letter::generator(1, inv);
  }

  // Every word of length exactly n over 2k letters.
  std::vector<Word> all_words(std::size_t gens, std::size_t n) {
    std::vector<Word> out = {Word{}};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Word> next;
      for (auto const& w : out) {
        for (std::size_t c = 0; c < 2 * gens; ++c) {
          Word v = w;
          v.push_back(Letter::from_code(static_cast<std::uint16_t>(c)));
          next.push_back(std::move(v));
        }
      }
      out = std::move(next);
    }
    return out;
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

TEST_CASE("strategy detection", "[wordproblem]") {
  CHECK(WordProblem(parse_presentation("group <a,b | >")).strategy() == Strategy::free_product);
  CHECK(WordProblem(parse_presentation("group <a | a^3>")).strategy() == Strategy::free_product);
  CHECK(WordProblem(parse_presentation("group <a,b | [a,b]>")).strategy() == Strategy::abelian);
  CHECK(WordProblem(parse_presentation("group <a,b | a^2, b^3, (a b)^2>")).strategy()
        == Strategy::finite);
  CHECK(WordProblem(parse_presentation("group <a,b | a b a b->")).strategy() == Strategy::generic);
}

TEST_CASE("normal forms", "[wordproblem]") {
  auto f2 = WordProblem(parse_presentation("group <a,b | >"));
  CHECK(f2.normal_form(Word{A(), B(), B(true)}).word == Word{A()});
  auto z2 = WordProblem(parse_presentation("group <a,b | [a,b]>"));
  CHECK(z2.normal_form(Word{B(), A()}).word == Word{A(), B()});
  auto z3 = WordProblem(parse_presentation("group <a | a^3>"));
  CHECK(z3.normal_form(Word{A(), A(), A()}).word.empty());
  CHECK(z3.normal_form(Word{A(), A()}).word == Word{A(true)});
  auto z4 = WordProblem(parse_presentation("group <a | a^4>"));
  CHECK(z4.normal_form(Word{A(true), A(true)}).word == Word{A(), A()});
}

TEST_CASE("finite groups by coset enumeration", "[wordproblem]") {
  auto s3 = WordProblem(parse_presentation("group <a,b | a^2, b^3, (a b)^2>"));
  CHECK(s3.finite_order() == 6);
  auto a5 = WordProblem(parse_presentation("group <a,b | a^2, b^3, (a b)^5>"));
  CHECK(a5.finite_order() == 60);
  auto q8 = WordProblem(parse_presentation("group <i,j | i^4, i^2 j^-2, i j i j->"));
  CHECK(q8.finite_order() == 8);
  // normal forms are shortlex-least over the whole group
  auto b = element_ball(s3, 10);
  CHECK(b.size() == 6);
}

TEST_CASE("is_identity", "[wordproblem]") {
  auto z2p = parse_presentation("group <a,b | [a,b]>");
  auto z2  = WordProblem(z2p);
  auto v   = z2.is_identity(commutator_power(1));
  REQUIRE(v.kind == EqualityVerdict::Kind::equal);
  CHECK(v.witness.size() == 1);
  CHECK(z2.replay(commutator_power(1), v.witness).empty());

  auto f2 = WordProblem(parse_presentation("group <a,b | >"));
  CHECK(f2.is_identity(Word{A(), B()}).kind == EqualityVerdict::Kind::not_equal);

  auto v3 = z2.is_identity(commutator_power(3));
  REQUIRE(v3.kind == EqualityVerdict::Kind::equal);
  CHECK(v3.witness.size() == 9);
  CHECK(z2.replay(commutator_power(3), v3.witness).empty());
}

TEST_CASE("ball sizes against enumeration oracles", "[wordproblem]") {
  auto f2 = WordProblem(parse_presentation("group <a,b | >"));
  auto z2 = WordProblem(parse_presentation("group <a,b | [a,b]>"));
  // oracle: distinct reduced words / distinct lattice points of all words
  for (std::size_t r = 0; r <= 4; ++r) {
    std::set<Word>                  reduced;
    std::set<std::pair<long, long>> points;
    for (std::size_t n = 0; n <= r; ++n) {
      for (auto const& w : all_words(2, n)) {
        reduced.insert(free_reduce(w));
        points.emplace(exponent_sum(w, 0), exponent_sum(w, 1));
      }
    }
    CHECK(element_ball(f2, r).size() == reduced.size());
    CHECK(element_ball(z2, r).size() == points.size());
  }
  CHECK(element_ball(f2, 3).size() == 53);
  CHECK(element_ball(z2, 3).size() == 25);
  CHECK(element_ball(f2, 0).size() == 1);
  CHECK(element_ball(z2, 0).elements[0].empty());
}

TEST_CASE("ball invariants", "[wordproblem][property]") {
  std::vector<std::string> corpus = {"group <a,b | >", "group <a,b | [a,b]>",
                                     "group <a | a^3>", "group <a,b | a^2, b^3, (a b)^2>",
                                     "group <a,b | b^2>"};
  for (auto const& text : corpus) {
    auto wp = WordProblem(parse_presentation(text));
    GroupBall prev = element_ball(wp, 0);
    for (std::size_t r = 1; r <= 4; ++r) {
      auto ball = element_ball(wp, r);
      CHECK(ball.canonical);
      for (auto const& w : prev.elements) {
        CHECK(ball.find(w).has_value());
      }
      for (std::size_t i = 0; i < ball.size(); ++i) {
        auto const& w = ball.elements[i];
        CHECK(w.size() <= r);
        CHECK(ball.find(wp.normal_form(inverse(w)).word).has_value());
        for (auto [x, j] : ball.neighbors[i]) {
          bool back = false;
          for (auto [y, k] : ball.neighbors[j]) {
            back = back || (k == i && y == x.inverse());
          }
          CHECK(back);
        }
      }
      prev = std::move(ball);
    }
  }
}

TEST_CASE("is_identity agrees with normal forms", "[wordproblem][property]") {
  std::vector<std::string> corpus = {"group <a,b | >", "group <a,b | [a,b]>",
                                     "group <a,b | a^3>"};
  for (auto const& text : corpus) {
    auto wp = WordProblem(parse_presentation(text));
    std::map<Word, EqualityVerdict::Kind> memo;
    auto check = [&](Word const& w) {
      bool nf_trivial = wp.normal_form(w).word.empty();
      Word key        = cyclic_canonical(w);
      auto it         = memo.find(key);
      if (it == memo.end()) {
        auto v = wp.is_identity(w);
        if (v.kind == EqualityVerdict::Kind::equal) {
          REQUIRE(wp.replay(w, v.witness).empty());
        }
        it = memo.emplace(key, v.kind).first;
      }
      INFO(text << " word " << to_string(w, {"a", "b"}));
      REQUIRE(it->second
              == (nf_trivial ? EqualityVerdict::Kind::equal
                             : EqualityVerdict::Kind::not_equal));
    };
    for (std::size_t n = 0; n <= 8; ++n) {
      for (auto const& w : all_words(2, n)) {
        check(w);
      }
    }
    // longer words: one representative per cyclic class
    std::vector<Word> layer = all_words(2, 8);
    for (std::size_t n = 9; n <= 12; ++n) {
      std::vector<Word> next;
      for (auto const& w : layer) {
        for (std::uint16_t c = 0; c < 4; ++c) {
          Word v = w;
          v.push_back(Letter::from_code(c));
          if (!is_freely_reduced(v)) {
            continue;
          }
          if (cyclic_canonical(v) == v) {
            check(v);
          }
          next.push_back(std::move(v));
        }
      }
      layer = std::move(next);
    }
  }
}

TEST_CASE("generic strategy taints balls", "[wordproblem]") {
  auto klein = WordProblem(parse_presentation("group <a,b | a b a b->"));
  CHECK_FALSE(klein.exact());
  auto ball = element_ball(klein, 2);
  CHECK_FALSE(ball.canonical);
  auto v = klein.is_identity(Word{A(), B(), A(), B(true)});
  CHECK(v.kind == EqualityVerdict::Kind::equal);
}

TEST_CASE("ball json", "[wordproblem]") {
  auto p    = parse_presentation("group <a | a^3>");
  auto ball = element_ball(p, 2);
  auto j    = to_json(ball, p.names());
  CHECK(j["size"] == 3);
  CHECK(j["elements"][0] == "1");
  CHECK(j["edges"].size() == 3);
}
