// Coarse fillings of closed paths in a graph. The 2-complex is the graph with
// a 2-cell on every circuit of length <= m; one move inserts such a circuit at
// a vertex of the path (cost 1), and backtracks cancel for free. A filling is
// a move sequence that shrinks the path to a point.

#ifndef RELPAIR_COARSE_HPP_
#define RELPAIR_COARSE_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "area.hpp"
#include "errors.hpp"
#include "fineness.hpp"
#include "parallel.hpp"

namespace relpair {

  using VertexPath = std::vector<std::size_t>;

  struct VertexPathHash {
    std::size_t operator()(VertexPath const& p) const noexcept {
      std::size_t h = 1469598103934665603ULL;
      for (auto x : p) {
        h = (h ^ (x + 1)) * 1099511628211ULL;
      }
      return h;
    }
  };

  // Insert `circuit` (which starts at the path vertex at `position` and
  // returns to it) right after that vertex.
  struct FillingMove {
    std::size_t position = 0;
    VertexPath  circuit;
  };

  struct FillingCost {
    VertexPath                 cycle;
    std::size_t                m = 0;
    std::optional<std::size_t> upper;
    std::size_t                lower   = 0;
    bool                       optimal = false;
    std::vector<FillingMove>   moves;
    std::size_t                nodes = 0;
  };

  struct CoarseCaps {
    std::size_t maxlen      = 0;  // 0: |cycle| + 2m
    std::size_t node_budget = 200000;
  };

  // Removes backtracks x y x, including across the closing edge, and rotates
  // to the least rotation. A closed path reducing to a point becomes empty.
  inline VertexPath reduce_closed_path(VertexPath const& p) {
    VertexPath s;
    for (auto x : p) {
      if (s.size() >= 2 && s[s.size() - 2] == x) {
        s.pop_back();
      } else if (s.empty() || s.back() != x) {
        s.push_back(x);
      }
    }
    while (s.size() > 2) {
      std::size_t n = s.size();
      if (s[n - 1] == s[1]) {
        s.pop_back();
        s.erase(s.begin());
      } else if (s[n - 2] == s[0]) {
        s.pop_back();
        s.pop_back();
      } else if (s[n - 1] == s[0]) {
        s.pop_back();
      } else {
        break;
      }
    }
    if (s.size() <= 2) {
      return {};
    }
    VertexPath best = s;
    for (std::size_t k = 1; k < s.size(); ++k) {
      std::rotate(s.begin(), s.begin() + 1, s.end());
      if (s < best) {
        best = s;
      }
    }
    return best;
  }

  inline void require_closed(Graph const& g, VertexPath const& c) {
    for (std::size_t i = 0; i < c.size() && c.size() > 1; ++i) {
      std::size_t x = c[i], y = c[(i + 1) % c.size()];
      if (x >= g.size() || y >= g.size() || !g.adjacent(x, y)) {
        throw NotClosed("closed path uses a missing edge");
      }
    }
  }

  class CoarseFiller {
   public:
    CoarseFiller(Graph const& g, std::size_t m) : g_(&g), m_(m) {}

    std::size_t m() const noexcept {
      return m_;
    }

    // Circuits of length <= m through x, each as a sequence starting at x,
    // in both orientations.
    std::vector<VertexPath> const& loops_at(std::size_t x) const {
      if (auto it = loops_.find(x); it != loops_.end()) {
        return it->second;
      }
      std::set<VertexPath> seen;
      for (auto y : g_->neighbors(x)) {
        for (auto const& c : circuits_through_edge(*g_, x, y, m_)) {
          auto const& v = c.vertices;
          auto        at = std::find(v.begin(), v.end(), x) - v.begin();
          VertexPath  fwd, bwd;
          for (std::size_t k = 0; k < v.size(); ++k) {
            fwd.push_back(v[(at + k) % v.size()]);
            bwd.push_back(v[(at + v.size() - k) % v.size()]);
          }
          seen.insert(fwd);
          seen.insert(bwd);
        }
      }
      return loops_.emplace(x, std::vector<VertexPath>(seen.begin(), seen.end())).first->second;
    }

    static VertexPath apply(VertexPath const& p, FillingMove const& mv) {
      VertexPath out(p.begin(), p.begin() + static_cast<long>(mv.position) + 1);
      out.insert(out.end(), mv.circuit.begin() + 1, mv.circuit.end());
      out.insert(out.end(), p.begin() + static_cast<long>(mv.position), p.end());
      return reduce_closed_path(out);
    }

    FillingCost fill(VertexPath const& cycle, CoarseCaps const& caps = {}) const {
      require_closed(*g_, cycle);
      FillingCost out;
      out.cycle      = cycle;
      out.m          = m_;
      VertexPath start = reduce_closed_path(cycle);
      if (start.empty()) {
        out.upper   = 0;
        out.optimal = true;
        return out;
      }
      std::size_t const maxlen = caps.maxlen ? caps.maxlen : cycle.size() + 2 * m_;

      struct Node {
        VertexPath  path;
        std::size_t g;
        std::size_t parent;
        FillingMove move;
      };
      std::vector<Node>                                     nodes;
      std::unordered_map<VertexPath, std::size_t, VertexPathHash> best;
      // Uniform cost: removing one loop can let its neighbours cancel too, so
      // no length-based bound is admissible. Shorter paths first among ties.
      using Key = std::tuple<std::size_t, std::size_t, std::size_t>;  // g, len, id
      std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
      auto push = [&](VertexPath p, std::size_t gcost, std::size_t parent, FillingMove mv) {
        auto it = best.find(p);
        if (it != best.end() && it->second <= gcost) {
          return;
        }
        best[p] = gcost;
        open.emplace(gcost, p.size(), nodes.size());
        nodes.push_back({std::move(p), gcost, parent, std::move(mv)});
      };
      push(start, 0, 0, {});
      std::size_t expanded = 0;
      while (!open.empty()) {
        auto [gcost, len, id] = open.top();
        if (expanded >= caps.node_budget) {
          out.lower = gcost;
          break;
        }
        open.pop();
        Node const cur = nodes[id];
        if (best[cur.path] < cur.g) {
          continue;
        }
        ++expanded;
        if (cur.path.empty()) {
          out.upper   = cur.g;
          out.lower   = cur.g;
          out.optimal = true;
          for (std::size_t k = id; k != 0; k = nodes[k].parent) {
            out.moves.push_back(nodes[k].move);
          }
          std::reverse(out.moves.begin(), out.moves.end());
          break;
        }
        std::size_t const k = cur.path.size();
        for (std::size_t i = 0; i < k; ++i) {
          std::size_t prev = cur.path[(i + k - 1) % k], next = cur.path[(i + 1) % k];
          for (auto const& loop : loops_at(cur.path[i])) {
            if (loop[1] != prev && loop.back() != next) {
              continue;
            }
            FillingMove mv{i, loop};
            VertexPath  np = apply(cur.path, mv);
            if (np.size() > maxlen) {
              continue;
            }
            push(std::move(np), cur.g + 1, id, std::move(mv));
          }
        }
      }
      if (!out.upper && open.empty()) {
        // capped space exhausted without reaching a point
        out.lower = std::numeric_limits<std::size_t>::max();
      }
      out.nodes = expanded;
      return out;
    }

    // Replays a witness; every inserted loop must be a circuit of length <= m
    // through the vertex at its position.
    bool replay(FillingCost const& cost) const {
      if (!cost.upper) {
        return false;
      }
      VertexPath p = reduce_closed_path(cost.cycle);
      for (auto const& mv : cost.moves) {
        if (mv.position >= p.size() || mv.circuit.empty() || mv.circuit.front() != p[mv.position]) {
          return false;
        }
        auto const& loops = loops_at(p[mv.position]);
        if (!std::binary_search(loops.begin(), loops.end(), mv.circuit)) {
          return false;
        }
        p = apply(p, mv);
      }
      return p.empty() && cost.moves.size() == *cost.upper;
    }

   private:
    Graph const*                                            g_;
    std::size_t                                             m_;
    mutable std::unordered_map<std::size_t, std::vector<VertexPath>> loops_;
  };

  inline FillingCost coarse_area(Graph const& g, VertexPath const& cycle, std::size_t m,
                                 CoarseCaps const& caps = {}) {
    return CoarseFiller(g, m).fill(cycle, caps);
  }

  // Simple cycles of length 3..maxlen through `base`, canonical and sorted.
  inline std::vector<Circuit> circuits_through_vertex(Graph const& g, std::size_t base,
                                                      std::size_t maxlen) {
    std::set<Circuit> out;
    for (auto y : g.neighbors(base)) {
      for (auto& c : circuits_through_edge(g, base, y, maxlen)) {
        out.insert(std::move(c));
      }
    }
    return {out.begin(), out.end()};
  }

  struct CoarseTableOptions {
    CoarseCaps  caps;
    std::size_t threads = 1;
  };

  // f_m(l) over circuits through the base vertex: a cumulative maximum of
  // filling costs. Every circuit contains an element vertex, so a single
  // element base covers all circuits up to translation.
  inline DehnTable coarse_table(Graph const& g, std::size_t base, std::size_t m, std::size_t l_max,
                                CoarseTableOptions const& opts = {}) {
    auto cycles = circuits_through_vertex(g, base, l_max);
    auto costs = parallel_map(cycles.size(), opts.threads, [&](std::size_t i) {
      CoarseFiller local(g, m);
      return local.fill(cycles[i].vertices, opts.caps);
    });
    DehnTable table;
    table.caps = "m=" + std::to_string(m) + " node_budget=" + std::to_string(opts.caps.node_budget);
    for (std::size_t n = 1; n <= l_max; ++n) {
      DehnRow row;
      row.n     = n;
      row.upper = 0;
      row.exact = true;
      for (std::size_t i = 0; i < cycles.size(); ++i) {
        if (cycles[i].length() > n) {
          continue;
        }
        auto const& c = costs[i];
        if (!c.optimal) {
          row.exact = false;
          if (std::find(row.flags.begin(), row.flags.end(), "BUDGET") == row.flags.end()) {
            row.flags.push_back("BUDGET");
          }
          table.budget_exhausted = true;
        }
        if (row.upper && c.upper) {
          row.upper = std::max(*row.upper, *c.upper);
        } else {
          row.upper = std::nullopt;
        }
        std::size_t lo = c.upper && c.optimal ? *c.upper : c.lower;
        if (row.witness.empty() || lo > row.lower) {
          row.lower = lo;
          std::string w;
          for (auto v : cycles[i].vertices) {
            w += (w.empty() ? "" : " ") + g.name(v);
          }
          row.witness = w;
        }
      }
      if (!g.canonical) {
        row.exact = false;
        row.flags.push_back("TAINTED");
      }
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  struct AffineFit {
    std::size_t C = 0, K = 0, L = 0;
  };

  // Smallest constants (by C+K+L, then C, K) with f(n) <= C g(Kn) + L n and
  // g(n) <= C f(Kn) + L n for 1 <= n <= size. Values past the end of a table
  // are replaced by its last entry, which is a lower bound for a
  // non-decreasing function, so a fit found here is sound for the data given.
  inline std::optional<AffineFit> fit_affine(std::vector<std::size_t> const& f,
                                             std::vector<std::size_t> const& g, std::size_t bound = 4) {
    std::size_t const n = std::min(f.size(), g.size());
    auto at = [](std::vector<std::size_t> const& t, std::size_t i) {
      return t[std::min(i, t.size()) - 1];
    };
    auto holds = [&](std::vector<std::size_t> const& a, std::vector<std::size_t> const& b,
                     std::size_t C, std::size_t K, std::size_t L) {
      for (std::size_t i = 1; i <= n; ++i) {
        if (at(a, i) > C * at(b, K * i) + L * i) {
          return false;
        }
      }
      return true;
    };
    std::optional<AffineFit> best;
    for (std::size_t sum = 0; sum <= 3 * bound && !best; ++sum) {
      for (std::size_t C = 0; C <= bound && !best; ++C) {
        for (std::size_t K = 1; K <= bound && !best; ++K) {
          if (C + K > sum || sum - C - K > bound) {
            continue;
          }
          std::size_t L = sum - C - K;
          if (holds(f, g, C, K, L) && holds(g, f, C, K, L)) {
            best = AffineFit{C, K, L};
          }
        }
      }
    }
    return best;
  }

}  // namespace relpair

#endif  // RELPAIR_COARSE_HPP_
