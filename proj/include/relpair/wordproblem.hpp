// Bounded word problem: exact normal forms for free products of cyclic
// groups, finitely generated abelian groups given by commutators and powers,
// and finite groups found by coset enumeration; a budgeted search otherwise.

#ifndef RELPAIR_WORDPROBLEM_HPP_
#define RELPAIR_WORDPROBLEM_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "presentation.hpp"
#include "rewriting.hpp"
#include "todd_coxeter.hpp"
#include "word.hpp"

namespace relpair {

  enum class Strategy { free_product, abelian, finite, generic };

  inline char const* to_string(Strategy s) {
    switch (s) {
      case Strategy::free_product: return "free_product";
      case Strategy::abelian: return "abelian";
      case Strategy::finite: return "finite";
      default: return "generic";
    }
  }

  // Relators of the ambient group: R plus the multiplication table of every
  // table peripheral that introduces its own symbols.
  inline std::vector<Word> ambient_relators(RelativePresentation const& rp) {
    std::vector<Word> out = rp.relators;
    for (auto const& p : rp.peripherals) {
      auto const* ft = std::get_if<FiniteTableStrategy>(&p.strategy);
      if (ft == nullptr || p.table_path.empty()) {
        continue;
      }
      auto const& t = ft->table;
      // local generator k <-> non-identity element
      std::vector<std::size_t> local(t.size(), static_cast<std::size_t>(-1));
      for (std::size_t e = 0, k = 0; e < t.size(); ++e) {
        if (e != t.identity) {
          local[e] = k++;
        }
      }
      auto image = [&](std::size_t e) -> Word {
        return e == t.identity ? Word{} : p.inclusion.at(local[e]);
      };
      for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < t.size(); ++j) {
          if (i == t.identity || j == t.identity) {
            continue;
          }
          Word r = concat(image(i), image(j));
          Word k = inverse(image(t.product[i][j]));
          r.insert(r.end(), k.begin(), k.end());
          out.push_back(r);
        }
      }
    }
    return canonical_relators(out);
  }

  struct WordProblemOptions {
    std::size_t max_cosets        = 20'000;
    std::size_t generic_budget    = 4'000;
    std::size_t identity_budget   = 400'000;
  };

  struct NormalForm {
    Word word;
    bool certain = true;  // false: shortlex-least word found within budget
  };

  struct EqualityVerdict {
    enum class Kind { equal, not_equal, unknown };
    Kind              kind = Kind::unknown;
    std::vector<Move> witness;       // equal: replays to the empty word
    Word              normal_form;   // not_equal: nonempty normal form
  };

  class WordProblem {
   public:
    explicit WordProblem(RelativePresentation const& rp, WordProblemOptions opts = {})
        : alphabet_(rp.alphabet_size()),
          relators_(ambient_relators(rp)),
          opts_(opts) {
      names_      = rp.names();
      conjugates_ = relator_conjugates(relators_);
      winding_    = WindingBound(relators_, alphabet_);
      detect();
    }

    Strategy strategy() const noexcept {
      return strategy_;
    }
    bool exact() const noexcept {
      return strategy_ != Strategy::generic;
    }
    std::size_t alphabet_size() const noexcept {
      return alphabet_;
    }
    std::vector<Word> const& relators() const noexcept {
      return relators_;
    }
    std::vector<Conjugate> const& conjugates() const noexcept {
      return conjugates_;
    }
    std::vector<std::string> const& names() const noexcept {
      return names_;
    }
    WindingBound const& winding() const noexcept {
      return winding_;
    }
    // Order of each generator in the free-product strategy (0 = infinite).
    std::vector<std::size_t> const& orders() const noexcept {
      return orders_;
    }
    std::size_t finite_order() const noexcept {
      return elements_.size();
    }

    NormalForm normal_form(std::span<Letter const> w) const {
      switch (strategy_) {
        case Strategy::free_product: return {free_product_form(w), true};
        case Strategy::abelian: return {abelian_form(w), true};
        case Strategy::finite: return {elements_[trace(w)], true};
        default: return generic_form(w);
      }
    }

    Word multiply(std::span<Letter const> g, std::span<Letter const> h) const {
      return normal_form(concat(g, h)).word;
    }

    // Word length of g^-1 h; exact strategies return geodesic distance.
    std::size_t distance(std::span<Letter const> g, std::span<Letter const> h) const {
      return normal_form(concat(inverse(g), h)).word.size();
    }

    bool equal(std::span<Letter const> g, std::span<Letter const> h) const {
      return normal_form(concat(inverse(g), h)).word.empty();
    }

    // Searches for a filling of w, i.e. a witness that w is trivial.
    SearchResult find_filling(Word const& w, std::size_t maxlen, std::size_t budget) const {
      auto canon = [](Word const& x) { return cyclic_canonical(x); };
      auto admit = [maxlen](Word const& x) { return x.size() <= maxlen; };
      auto positions = [](Word const& x) { return std::max<std::size_t>(x.size(), 1); };
      auto contact = [](Word const& x, std::size_t p, Word const& piece) {
        return cancels_at(x, p, piece);
      };
      return astar_fill(w, relators_, conjugates_, canon, admit, winding_, positions,
                        contact, SearchLimits{budget});
    }

    EqualityVerdict is_identity(Word const& w, std::size_t budget = 0) const {
      if (budget == 0) {
        budget = opts_.identity_budget;
      }
      EqualityVerdict v;
      auto            nf = normal_form(w);
      if (nf.certain && !nf.word.empty()) {
        v.kind        = EqualityVerdict::Kind::not_equal;
        v.normal_form = nf.word;
        return v;
      }
      std::size_t maxrel = 0;
      for (auto const& r : relators_) {
        maxrel = std::max(maxrel, r.size());
      }
      auto res = find_filling(w, 2 * w.size() + 2 * maxrel, budget);
      if (res.found) {
        v.kind    = EqualityVerdict::Kind::equal;
        v.witness = std::move(res.moves);
      }
      return v;
    }

    Word replay(Word const& w, std::vector<Move> const& moves) const {
      return replay_moves(w, moves, relators_, [](Word const& x) { return cyclic_canonical(x); });
    }

   private:
    void detect() {
      orders_.assign(alphabet_, 0);
      bool all_powers = true;
      for (auto const& r : relators_) {
        bool single = std::all_of(r.begin(), r.end(),
                                  [&](Letter x) { return x.index() == r[0].index(); });
        if (single) {
          orders_[r[0].index()] = std::gcd(orders_[r[0].index()], r.size());
        } else {
          all_powers = false;
        }
      }
      if (all_powers) {
        strategy_ = Strategy::free_product;
        return;
      }
      if (alphabet_ >= 2 && detect_abelian()) {
        strategy_ = Strategy::abelian;
        return;
      }
      detail::ToddCoxeter tc(alphabet_, relators_, opts_.max_cosets);
      if (auto table = tc.run()) {
        table_    = std::move(table->table);
        strategy_ = Strategy::finite;
        // Shortlex-least word per element by breadth-first search.
        elements_.assign(table_.size(), Word{});
        std::vector<bool>       seen(table_.size(), false);
        std::vector<std::uint32_t> frontier = {0};
        seen[0] = true;
        while (!frontier.empty()) {
          std::vector<std::uint32_t> next;
          for (auto c : frontier) {
            for (std::size_t x = 0; x < 2 * alphabet_; ++x) {
              auto d = table_[c][x];
              if (!seen[d]) {
                seen[d]     = true;
                elements_[d] = elements_[c];
                elements_[d].push_back(Letter::from_code(static_cast<std::uint16_t>(x)));
                next.push_back(d);
              }
            }
          }
          frontier = std::move(next);
        }
        return;
      }
      strategy_ = Strategy::generic;
    }

    bool detect_abelian() {
      std::vector<std::vector<bool>> covered(alphabet_, std::vector<bool>(alphabet_, false));
      for (auto const& r : relators_) {
        if (r.size() == 4 && r[0].index() == r[2].index() && r[1].index() == r[3].index()
            && r[0] == r[2].inverse() && r[1] == r[3].inverse()
            && r[0].index() != r[1].index()) {
          covered[r[0].index()][r[1].index()] = true;
          covered[r[1].index()][r[0].index()] = true;
          continue;
        }
        bool single = std::all_of(r.begin(), r.end(),
                                  [&](Letter x) { return x.index() == r[0].index(); });
        if (!single) {
          return false;
        }
      }
      for (std::size_t i = 0; i < alphabet_; ++i) {
        for (std::size_t j = i + 1; j < alphabet_; ++j) {
          if (!covered[i][j]) {
            return false;
          }
        }
      }
      return true;
    }

    // Exponent in (-n/2, n/2], ties resolved towards the positive power.
    static long reduce_exponent(long e, std::size_t order) {
      if (order == 0) {
        return e;
      }
      long n = static_cast<long>(order);
      e %= n;
      if (e < 0) {
        e += n;
      }
      if (2 * e > n) {
        e -= n;
      }
      return e;
    }

    static void emit(Word& out, std::size_t gen, long e) {
      for (long k = 0; k < std::labs(e); ++k) {
        out.push_back(Letter::generator(gen, e < 0));
      }
    }

    Word free_product_form(std::span<Letter const> w) const {
      std::vector<std::pair<std::size_t, long>> syl;
      for (Letter x : w) {
        if (!syl.empty() && syl.back().first == x.index()) {
          auto& s  = syl.back();
          s.second = reduce_exponent(s.second + x.sign(), orders_[x.index()]);
          if (s.second == 0) {
            syl.pop_back();
          }
        } else {
          long e = reduce_exponent(x.sign(), orders_[x.index()]);
          if (e != 0) {
            syl.emplace_back(x.index(), e);
          }
        }
      }
      Word out;
      for (auto [g, e] : syl) {
        emit(out, g, e);
      }
      return out;
    }

    Word abelian_form(std::span<Letter const> w) const {
      std::vector<long> ex(alphabet_, 0);
      for (Letter x : w) {
        ex[x.index()] += x.sign();
      }
      Word out;
      for (std::size_t g = 0; g < alphabet_; ++g) {
        emit(out, g, reduce_exponent(ex[g], orders_[g]));
      }
      return out;
    }

    std::uint32_t trace(std::span<Letter const> w) const {
      std::uint32_t c = 0;
      for (Letter x : w) {
        c = table_[c][x.code()];
      }
      return c;
    }

    // Shortlex-least word reachable by relator insertions and free
    // reductions within the budget.
    NormalForm generic_form(std::span<Letter const> w) const {
      Word start = free_reduce(w);
      {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(start); it != cache_.end()) {
          return {it->second, false};
        }
      }
      std::size_t maxrel = 0;
      for (auto const& r : relators_) {
        maxrel = std::max(maxrel, r.size());
      }
      std::size_t const                     cap = start.size() + maxrel;
      std::unordered_set<Word, WordHash>    seen = {start};
      std::deque<Word>                      queue = {start};
      Word                                  best = start;
      while (!queue.empty() && seen.size() < opts_.generic_budget) {
        Word cur = std::move(queue.front());
        queue.pop_front();
        for (std::size_t p = 0; p <= cur.size(); ++p) {
          for (auto const& c : conjugates_) {
            Word next = free_reduce(insert_at(cur, p, c.word));
            if (next.size() > cap || !seen.insert(next).second) {
              continue;
            }
            if (shortlex_less(next, best)) {
              best = next;
            }
            queue.push_back(std::move(next));
          }
        }
      }
      std::lock_guard lock(cache_mutex_);
      cache_.emplace(start, best);
      return {best, false};
    }

    std::size_t                             alphabet_;
    std::vector<Word>                       relators_;
    WordProblemOptions                      opts_;
    std::vector<std::string>                names_;
    std::vector<Conjugate>                  conjugates_;
    WindingBound                            winding_;
    Strategy                                strategy_ = Strategy::generic;
    std::vector<std::size_t>                orders_;
    std::vector<std::vector<std::uint32_t>> table_;
    std::vector<Word>                       elements_;
    mutable std::mutex                      cache_mutex_;
    mutable std::unordered_map<Word, Word, WordHash> cache_;
  };

  inline NormalForm normal_form(Word const& w, RelativePresentation const& rp) {
    return WordProblem(rp).normal_form(w);
  }

  inline EqualityVerdict is_identity(Word const& w, RelativePresentation const& rp,
                                     std::size_t budget = 0) {
    return WordProblem(rp).is_identity(w, budget);
  }

  struct GroupBall {
    std::size_t       radius    = 0;
    bool              canonical = true;
    std::vector<Word> elements;  // shortlex order; elements[0] is the identity
    std::vector<std::size_t> depth;
    // neighbors[i] lists (letter, j) with elements[i] * letter = elements[j]
    std::vector<std::vector<std::pair<Letter, std::size_t>>> neighbors;
    std::unordered_map<Word, std::size_t, WordHash>          index;

    std::size_t size() const noexcept {
      return elements.size();
    }
    std::optional<std::size_t> find(Word const& w) const {
      auto it = index.find(w);
      if (it == index.end()) {
        return std::nullopt;
      }
      return it->second;
    }
    // Unordered pairs {g, gs}, self-loops excluded.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const {
      std::set<std::pair<std::size_t, std::size_t>> out;
      for (std::size_t i = 0; i < neighbors.size(); ++i) {
        for (auto [x, j] : neighbors[i]) {
          if (i != j) {
            out.emplace(std::min(i, j), std::max(i, j));
          }
        }
      }
      return {out.begin(), out.end()};
    }
  };

  // Breadth-first closure of {1} under multiplication by generators and
  // their inverses, deduplicated by normal form.
  inline GroupBall element_ball(WordProblem const& wp, std::size_t r) {
    GroupBall ball;
    ball.radius    = r;
    ball.canonical = wp.exact();
    std::vector<Word>        found = {Word{}};
    std::vector<std::size_t> depth = {0};
    std::unordered_map<Word, std::size_t, WordHash> index = {{Word{}, 0}};
    std::vector<std::size_t> frontier = {0};
    for (std::size_t d = 0; d < r; ++d) {
      std::vector<std::size_t> next;
      for (auto i : frontier) {
        for (std::size_t code = 0; code < 2 * wp.alphabet_size(); ++code) {
          Letter x  = Letter::from_code(static_cast<std::uint16_t>(code));
          Word   nf = wp.normal_form(concat(found[i], Word{x})).word;
          if (index.count(nf) != 0) {
            continue;
          }
          if (wp.exact() && nf.size() != d + 1) {
            continue;
          }
          index.emplace(nf, found.size());
          found.push_back(nf);
          depth.push_back(d + 1);
          next.push_back(found.size() - 1);
        }
      }
      frontier = std::move(next);
    }
    std::vector<std::size_t> order(found.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (depth[a] != depth[b]) {
        return depth[a] < depth[b];
      }
      return shortlex_less(found[a], found[b]);
    });
    for (auto i : order) {
      ball.index.emplace(found[i], ball.elements.size());
      ball.elements.push_back(found[i]);
      ball.depth.push_back(depth[i]);
    }
    ball.neighbors.resize(ball.elements.size());
    for (std::size_t i = 0; i < ball.elements.size(); ++i) {
      for (std::size_t code = 0; code < 2 * wp.alphabet_size(); ++code) {
        Letter x  = Letter::from_code(static_cast<std::uint16_t>(code));
        Word   nf = wp.normal_form(concat(ball.elements[i], Word{x})).word;
        if (auto j = ball.find(nf)) {
          ball.neighbors[i].emplace_back(x, *j);
        }
      }
    }
    return ball;
  }

  inline GroupBall element_ball(RelativePresentation const& rp, std::size_t r) {
    return element_ball(WordProblem(rp), r);
  }

  inline nlohmann::json to_json(GroupBall const& ball, std::vector<std::string> const& names) {
    nlohmann::json j;
    j["radius"]    = ball.radius;
    j["canonical"] = ball.canonical;
    j["size"]      = ball.size();
    auto& el       = j["elements"];
    el             = nlohmann::json::array();
    for (auto const& w : ball.elements) {
      el.push_back(to_string(w, names));
    }
    auto& ed = j["edges"];
    ed       = nlohmann::json::array();
    for (std::size_t i = 0; i < ball.neighbors.size(); ++i) {
      for (auto [x, k] : ball.neighbors[i]) {
        if (!x.inverted() && i != k) {
          ed.push_back({i, k, names[x.index()]});
        }
      }
    }
    return j;
  }

}  // namespace relpair

#endif  // RELPAIR_WORDPROBLEM_HPP_
