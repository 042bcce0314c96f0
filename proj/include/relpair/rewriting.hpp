// Least-cost search over words where one move inserts a cyclic conjugate of a
// relator (or its inverse) at some position and the result is canonicalized.
// Used by the equality oracle and by every area computation.

#ifndef RELPAIR_REWRITING_HPP_
#define RELPAIR_REWRITING_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "word.hpp"

namespace relpair {

  struct Conjugate {
    std::size_t relator  = 0;
    bool        inverse  = false;
    std::size_t rotation = 0;
    Word        word;
  };

  // Distinct cyclic conjugates of every relator and its inverse.
  inline std::vector<Conjugate> relator_conjugates(std::vector<Word> const& relators) {
    std::vector<Conjugate> out;
    std::vector<Word>      seen;
    for (std::size_t i = 0; i < relators.size(); ++i) {
      for (bool inv : {false, true}) {
        Word base = inv ? inverse(relators[i]) : relators[i];
        for (std::size_t k = 0; k < base.size(); ++k) {
          Word w = rotate_left(base, k);
          if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
            seen.push_back(w);
            out.push_back({i, inv, k, std::move(w)});
          }
        }
      }
    }
    return out;
  }

  struct Move {
    std::size_t position = 0;
    std::size_t relator  = 0;
    bool        inverse  = false;
    std::size_t rotation = 0;

    bool operator==(Move const&) const = default;
  };

  inline Word cyclic_canonical(std::span<Letter const> w) {
    return least_rotation(cyclic_reduce(w));
  }

  // True when piece, inserted at p of the cyclic word state, cancels against
  // a neighboring letter. Some cell of a reduced diagram for a nonempty
  // cyclically reduced word shares a boundary edge, so restricting the search
  // to such moves loses no fillings.
  inline bool cancels_at(std::span<Letter const> state,
                         std::size_t             p,
                         std::span<Letter const> piece) {
    if (state.empty() || piece.empty()) {
      return true;
    }
    std::size_t const n     = state.size();
    Letter            left  = state[(p + n - 1) % n];
    Letter            right = state[p % n];
    return piece.front() == left.inverse() || piece.back() == right.inverse();
  }

  inline Word insert_at(Word const& state, std::size_t pos, Word const& piece) {
    Word out;
    out.reserve(state.size() + piece.size());
    out.insert(out.end(), state.begin(), state.begin() + static_cast<long>(pos));
    out.insert(out.end(), piece.begin(), piece.end());
    out.insert(out.end(), state.begin() + static_cast<long>(pos), state.end());
    return out;
  }

  inline Word conjugate_word(std::vector<Word> const& relators, Move const& m) {
    Word const& r = relators.at(m.relator);
    return rotate_left(m.inverse ? inverse(r) : r, m.rotation);
  }

  // Applies moves starting from canon(start); returns the final state.
  template <typename Canon>
  Word replay_moves(Word const&              start,
                    std::vector<Move> const& moves,
                    std::vector<Word> const& relators,
                    Canon&&                  canon) {
    Word state = canon(start);
    for (auto const& m : moves) {
      if (m.position > state.size()) {
        throw std::out_of_range("move position beyond word length");
      }
      state = canon(insert_at(state, m.position, conjugate_word(relators, m)));
    }
    return state;
  }

  // Lower bound from algebraic winding numbers. For letters x, y whose
  // exponent sums vanish in every relator,
  //   A(w) = sum over x-letters of sign * (y-exponent sum of the prefix)
  // is invariant under rotation and free moves and changes by at most
  // max |A(r)| per relator insertion.
  class WindingBound {
   public:
    WindingBound() = default;

    WindingBound(std::vector<Word> const&        relators,
                 std::size_t                     alphabet,
                 std::vector<std::size_t> const& forbidden = {}) {
      std::vector<bool> zero_sum(alphabet, true);
      for (auto const& r : relators) {
        for (std::size_t x = 0; x < alphabet; ++x) {
          if (exponent_sum(r, x) != 0) {
            zero_sum[x] = false;
          }
        }
      }
      for (auto f : forbidden) {
        if (f < alphabet) {
          zero_sum[f] = false;
        }
      }
      for (std::size_t x = 0; x < alphabet; ++x) {
        for (std::size_t y = x + 1; y < alphabet; ++y) {
          if (!zero_sum[x] || !zero_sum[y]) {
            continue;
          }
          long c = 0;
          for (auto const& r : relators) {
            c = std::max(c, std::labs(winding(r, x, y)));
          }
          if (c > 0) {
            pairs_.push_back({x, y, c});
          }
        }
      }
    }

    // Removes pairs rejected by `keep(x, y)`.
    template <typename Pred>
    void restrict(Pred&& keep) {
      std::erase_if(pairs_, [&](Pair const& p) { return !keep(p.x, p.y); });
    }

    bool empty() const noexcept {
      return pairs_.empty();
    }

    std::size_t operator()(std::span<Letter const> w) const {
      std::size_t h = 0;
      for (auto const& p : pairs_) {
        long a = std::labs(winding(w, p.x, p.y));
        h      = std::max(h, static_cast<std::size_t>((a + p.c - 1) / p.c));
      }
      return h;
    }

    static long winding(std::span<Letter const> w, std::size_t x, std::size_t y) {
      long a = 0, ysum = 0;
      for (Letter l : w) {
        if (l.index() == x) {
          a += l.sign() * ysum;
        } else if (l.index() == y) {
          ysum += l.sign();
        }
      }
      return a;
    }

   private:
    struct Pair {
      std::size_t x, y;
      long        c;
    };
    std::vector<Pair> pairs_;
  };

  struct SearchLimits {
    std::size_t node_budget = 400'000;
  };

  struct SearchResult {
    bool              found     = false;
    bool              exhausted = false;  // budget ran out before a verdict
    std::size_t       cost      = 0;
    // Valid lower bound on the cost within the admitted state space; max()
    // when the space was exhausted without reaching the goal.
    std::size_t       lower_bound = 0;
    std::vector<Move> moves;
    std::size_t       nodes = 0;
  };

  // A* from canon(start) to the empty word with unit move costs.
  //   canon(word)       canonical state
  //   admit(state)      length caps on states
  //   heuristic(state)  consistent lower bound on the remaining cost
  //   positions(state)  number of insertion positions to try
  //   contact(state, p, piece) whether inserting piece at p is worth trying
  template <typename Canon, typename Admit, typename Heuristic, typename Positions,
            typename Contact>
  SearchResult astar_fill(Word const&                   start,
                          std::vector<Word> const&      relators,
                          std::vector<Conjugate> const& conjugates,
                          Canon&&                       canon,
                          Admit&&                       admit,
                          Heuristic&&                   heuristic,
                          Positions&&                   positions,
                          Contact&&                     contact,
                          SearchLimits const&           limits) {
    struct Node {
      Word        state;
      std::size_t parent;
      Move        move;
      std::size_t g;
    };
    struct Entry {
      std::size_t f, g, len, id;
      bool operator<(Entry const& o) const {
        // priority_queue pops the largest element
        if (f != o.f) {
          return f > o.f;
        }
        if (g != o.g) {
          return g < o.g;
        }
        if (len != o.len) {
          return len > o.len;
        }
        return id > o.id;
      }
    };
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    SearchResult                                   result;
    std::vector<Node>                              nodes;
    std::unordered_map<Word, std::size_t, WordHash> index;
    std::priority_queue<Entry>                     open;

    Word s0 = canon(start);
    nodes.push_back({s0, none, {}, 0});
    index.emplace(s0, 0);
    open.push({heuristic(s0), 0, s0.size(), 0});
    (void) relators;

    while (!open.empty()) {
      Entry top = open.top();
      open.pop();
      Node const& node = nodes[top.id];
      if (top.g != node.g) {
        continue;
      }
      if (node.state.empty()) {
        result.found       = true;
        result.cost        = node.g;
        result.lower_bound = node.g;
        for (std::size_t id = top.id; nodes[id].parent != none; id = nodes[id].parent) {
          result.moves.push_back(nodes[id].move);
        }
        std::reverse(result.moves.begin(), result.moves.end());
        result.nodes = nodes.size();
        return result;
      }
      if (nodes.size() >= limits.node_budget) {
        result.exhausted   = true;
        result.lower_bound = top.f;
        result.nodes       = nodes.size();
        return result;
      }
      Word const        state = node.state;
      std::size_t const g     = node.g;
      std::size_t const npos  = positions(state);
      for (std::size_t p = 0; p < npos; ++p) {
        for (auto const& c : conjugates) {
          if (!contact(state, p, c.word)) {
            continue;
          }
          Word next = canon(insert_at(state, p, c.word));
          if (!admit(next)) {
            continue;
          }
          auto it = index.find(next);
          if (it != index.end()) {
            Node& old = nodes[it->second];
            if (old.g <= g + 1) {
              continue;
            }
            old.g      = g + 1;
            old.parent = top.id;
            old.move   = {p, c.relator, c.inverse, c.rotation};
            open.push({g + 1 + heuristic(next), g + 1, next.size(), it->second});
            continue;
          }
          std::size_t id = nodes.size();
          std::size_t h  = heuristic(next);
          std::size_t len = next.size();
          index.emplace(next, id);
          nodes.push_back({std::move(next), top.id, {p, c.relator, c.inverse, c.rotation}, g + 1});
          open.push({g + 1 + h, g + 1, len, id});
        }
      }
    }
    result.lower_bound = std::numeric_limits<std::size_t>::max();
    result.nodes       = nodes.size();
    return result;
  }

}  // namespace relpair

#endif  // RELPAIR_REWRITING_HPP_
