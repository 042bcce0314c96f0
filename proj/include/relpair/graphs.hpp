// Truncated Cayley, coned-off Cayley and Osin-Cayley graphs, the map from
// Osin edges to coned-off paths, and DOT / JSON-lines exporters.
//
// Truncation is by the word metric: element vertices are the ball of radius r,
// a cone vertex is present iff its coset meets that ball. Coned-off graphs can
// also be explored lazily (ConedView), which is how large radii are handled:
// only the part of the graph a query touches is ever built.

#ifndef RELPAIR_GRAPHS_HPP_
#define RELPAIR_GRAPHS_HPP_

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "peripheral.hpp"
#include "wordproblem.hpp"

namespace relpair {

  // Element vertex (cone = false) or cone vertex for the coset word * P_pid,
  // where word is the shortlex-least element of the coset.
  struct Vertex {
    bool        cone = false;
    std::size_t pid  = 0;
    Word        word;

    bool operator==(Vertex const&) const = default;

    static Vertex element(Word w) {
      return {false, 0, std::move(w)};
    }
    static Vertex coset(std::size_t pid, Word rep) {
      return {true, pid, std::move(rep)};
    }
  };

  // Elements before cones; cones by subgroup; shortlex within each class.
  inline bool vertex_less(Vertex const& x, Vertex const& y) {
    if (x.cone != y.cone) {
      return !x.cone;
    }
    if (x.pid != y.pid) {
      return x.pid < y.pid;
    }
    return shortlex_less(x.word, y.word);
  }

  struct VertexHash {
    std::size_t operator()(Vertex const& v) const noexcept {
      std::size_t h = WordHash{}(v.word);
      return h ^ (v.cone ? 0x9e3779b97f4a7c15ULL * (v.pid + 1) : 0);
    }
  };

  inline std::string vertex_name(Vertex const& v, RelativePresentation const& rp) {
    if (!v.cone) {
      return to_string(v.word, rp.names());
    }
    std::string const& p = rp.peripherals.at(v.pid).name;
    return v.word.empty() ? p : to_string(v.word, rp.names()) + "*" + p;
  }

  enum class EdgeKind { generator, cone, peripheral };

  struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    EdgeKind    kind = EdgeKind::generator;
    std::size_t pid  = 0;   // cone and peripheral edges
    Word        element;    // u^-1 v for generator and peripheral edges
    std::string label;
  };

  class Graph {
   public:
    std::string                 kind;
    RelativePresentation const* source = nullptr;
    std::size_t                 radius = 0;
    std::size_t                 peripheral_cap = 0;
    // False when element or coset identities rest on a non-exact strategy.
    bool canonical = true;

    std::vector<Vertex> vertices;
    std::vector<Edge>   edges;

    std::size_t size() const noexcept {
      return vertices.size();
    }

    std::optional<std::size_t> find(Vertex const& v) const {
      auto it = index_.find(v);
      if (it == index_.end()) {
        return std::nullopt;
      }
      return it->second;
    }
    std::optional<std::size_t> find_element(Word const& w) const {
      return find(Vertex::element(w));
    }

    // Distinct neighbours, ascending.
    std::vector<std::size_t> const& neighbors(std::size_t i) const {
      return adj_.at(i);
    }

    bool adjacent(std::size_t i, std::size_t j) const {
      auto const& a = adj_.at(i);
      return std::binary_search(a.begin(), a.end(), j);
    }

    bool simplicial() const {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (auto const& e : edges) {
        if (e.u == e.v || !seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
          return false;
        }
      }
      return true;
    }

    std::string name(std::size_t i) const {
      return source ? vertex_name(vertices.at(i), *source) : std::to_string(i);
    }

    // Builders call these; vertices must be added in their final order.
    std::size_t add_vertex(Vertex v) {
      auto [it, fresh] = index_.emplace(v, vertices.size());
      if (fresh) {
        vertices.push_back(std::move(v));
        adj_.emplace_back();
      }
      return it->second;
    }

    void add_edge(Edge e) {
      insert_sorted(adj_.at(e.u), e.v);
      insert_sorted(adj_.at(e.v), e.u);
      edges.push_back(std::move(e));
    }

    // Plain graph on vertices 0..n-1, for tests and generic algorithms.
    static Graph plain(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> const& es) {
      Graph g;
      g.kind = "plain";
      for (std::size_t i = 0; i < n; ++i) {
        g.add_vertex(Vertex::element(Word(i, Letter{})));
      }
      for (auto [u, v] : es) {
        g.add_edge({u, v, EdgeKind::generator, 0, {}, ""});
      }
      return g;
    }

   private:
    static void insert_sorted(std::vector<std::size_t>& a, std::size_t x) {
      auto it = std::lower_bound(a.begin(), a.end(), x);
      if (it == a.end() || *it != x) {
        a.insert(it, x);
      }
    }

    std::unordered_map<Vertex, std::size_t, VertexHash> index_;
    std::vector<std::vector<std::size_t>>               adj_;
  };

  // Coset representatives and coset members inside a ball. Membership is
  // decided through the peripheral strategy; elements of P are searched up to
  // local length equal to the ambient distance bound.
  class CosetOracle {
   public:
    explicit CosetOracle(PeripheralStructure const& ps) : ps_(&ps) {}

    PeripheralStructure const& structure() const noexcept {
      return *ps_;
    }

    // Shortlex-least element of g P_pid; g is an ambient normal form.
    Word const& rep(std::size_t pid, Word const& g) const {
      auto key = std::make_pair(pid, g);
      if (auto it = reps_.find(key); it != reps_.end()) {
        return it->second;
      }
      Word              best = g;
      std::vector<Word> seen;
      for (auto const& [p, len] : ps_->elements(pid, search_length(pid, 2 * g.size()))) {
        Word x = ps_->ambient().multiply(g, p);
        if (shortlex_less(x, best)) {
          best = x;
        }
        seen.push_back(std::move(x));
      }
      // every element met lies in the same coset
      for (auto& x : seen) {
        reps_.emplace(std::make_pair(pid, std::move(x)), best);
      }
      return reps_.emplace(key, std::move(best)).first->second;
    }

    // Elements of c P_pid of length <= r, in shortlex order.
    std::vector<Word> const& members(std::size_t pid, Word const& c, std::size_t r) const {
      auto key = std::make_tuple(pid, c, r);
      if (auto it = members_.find(key); it != members_.end()) {
        return it->second;
      }
      std::set<Word, ShortlexLess> out;
      for (auto const& [p, len] : ps_->elements(pid, search_length(pid, c.size() + r))) {
        Word x = ps_->ambient().multiply(c, p);
        if (x.size() <= r) {
          out.insert(std::move(x));
        }
      }
      return members_.emplace(key, std::vector<Word>(out.begin(), out.end())).first->second;
    }

    bool same_coset(std::size_t pid, Word const& g, Word const& h) const {
      return rep(pid, g) == rep(pid, h);
    }

   private:
    std::size_t search_length(std::size_t pid, std::size_t len) const {
      auto const& p = ps_->presentation().peripherals.at(pid);
      if (std::holds_alternative<FiniteTableStrategy>(p.strategy)) {
        return ps_->local(pid).finite_order() + 1;
      }
      return len;
    }

    struct PairHash {
      std::size_t operator()(std::pair<std::size_t, Word> const& k) const noexcept {
        return WordHash{}(k.second) * 31 + k.first;
      }
    };

    PeripheralStructure const*                                         ps_;
    mutable std::unordered_map<std::pair<std::size_t, Word>, Word, PairHash> reps_;
    mutable std::map<std::tuple<std::size_t, Word, std::size_t>, std::vector<Word>> members_;
  };

  // Lazily explored coned-off graph of radius r. Vertex ids are assigned on
  // first sight, so they depend on exploration order; use vertex() to get
  // identities. Not thread-safe: use one view per thread.
  class ConedView {
   public:
    ConedView(PeripheralStructure const& ps, std::size_t r) : cosets_(ps), r_(r) {}

    std::size_t radius() const noexcept {
      return r_;
    }
    PeripheralStructure const& structure() const noexcept {
      return cosets_.structure();
    }
    CosetOracle const& cosets() const noexcept {
      return cosets_;
    }
    bool canonical() const {
      auto const& ps = cosets_.structure();
      bool        ok = ps.ambient().exact();
      for (std::size_t pid = 0; pid < ps.count(); ++pid) {
        ok = ok && ps.exact(pid);
      }
      return ok;
    }

    std::size_t id(Vertex const& v) const {
      auto [it, fresh] = ids_.emplace(v, vertices_.size());
      if (fresh) {
        vertices_.push_back(v);
        adj_.emplace_back();
      }
      return it->second;
    }
    std::optional<std::size_t> try_id(Vertex const& v) const {
      if (!contains(v)) {
        return std::nullopt;
      }
      return id(v);
    }
    Vertex const& vertex(std::size_t i) const {
      return vertices_.at(i);
    }
    std::size_t explored() const noexcept {
      return vertices_.size();
    }

    bool contains(Vertex const& v) const {
      if (!v.cone) {
        return v.word.size() <= r_;
      }
      return !cosets_.members(v.pid, v.word, r_).empty();
    }

    // Cone vertex of g's coset.
    Vertex cone_of(std::size_t pid, Word const& g) const {
      return Vertex::coset(pid, cosets_.rep(pid, g));
    }

    std::vector<std::size_t> const& neighbors(std::size_t i) const {
      if (adj_[i]) {
        return *adj_[i];
      }
      Vertex const             v = vertices_[i];
      std::vector<Vertex>      found;
      auto const&              ps = cosets_.structure();
      if (!v.cone) {
        auto const& wp = ps.ambient();
        for (std::size_t code = 0; code < 2 * wp.alphabet_size(); ++code) {
          Word h = wp.multiply(v.word, Word{Letter::from_code(static_cast<std::uint16_t>(code))});
          if (h.size() <= r_ && h != v.word) {
            found.push_back(Vertex::element(std::move(h)));
          }
        }
        for (std::size_t pid = 0; pid < ps.count(); ++pid) {
          found.push_back(cone_of(pid, v.word));
        }
      } else {
        for (auto const& x : cosets_.members(v.pid, v.word, r_)) {
          found.push_back(Vertex::element(x));
        }
      }
      std::vector<std::size_t> out;
      for (auto& w : found) {
        out.push_back(id(w));
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      adj_[i] = std::move(out);
      return *adj_[i];
    }

   private:
    CosetOracle                                                  cosets_;
    std::size_t                                                  r_;
    mutable std::unordered_map<Vertex, std::size_t, VertexHash>  ids_;
    mutable std::deque<Vertex>                                   vertices_;
    mutable std::deque<std::optional<std::vector<std::size_t>>>  adj_;
  };

  namespace detail {
    inline std::string letter_label(Letter x, RelativePresentation const& rp) {
      return rp.symbols.at(x.index()).name + (x.inverted() ? "-" : "");
    }

    // Generator edges of the ball, one per unordered pair, labelled by the
    // first letter (in code order) that realizes it from the smaller vertex.
    inline void add_generator_edges(Graph& g, GroupBall const& ball, RelativePresentation const& rp) {
      for (std::size_t i = 0; i < ball.size(); ++i) {
        for (auto [x, j] : ball.neighbors[i]) {
          if (i < j && !g.adjacent(i, j)) {
            g.add_edge({i, j, EdgeKind::generator, 0, Word{x}, letter_label(x, rp)});
          }
        }
      }
    }

    inline Graph ball_graph(std::string kind, RelativePresentation const& rp, GroupBall const& ball) {
      Graph g;
      g.kind      = std::move(kind);
      g.source    = &rp;
      g.radius    = ball.radius;
      g.canonical = ball.canonical;
      for (auto const& w : ball.elements) {
        g.add_vertex(Vertex::element(w));
      }
      add_generator_edges(g, ball, rp);
      return g;
    }
  }  // namespace detail

  inline Graph build_cayley_ball(WordProblem const& wp, RelativePresentation const& rp, std::size_t r) {
    return detail::ball_graph("cayley", rp, element_ball(wp, r));
  }

  // Coned-off Cayley graph truncated at radius r: the ball, one cone vertex per
  // coset meeting the ball, and an edge from each ball element to its cones.
  inline Graph build_coned_off(PeripheralStructure const& ps, std::size_t r) {
    auto const& rp   = ps.presentation();
    GroupBall   ball = element_ball(ps.ambient(), r);
    Graph       g    = detail::ball_graph("coned", rp, ball);
    CosetOracle cosets(ps);
    std::set<Vertex, decltype(&vertex_less)> cones(&vertex_less);
    std::vector<std::vector<Vertex>>         cone_of(ball.size());
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (std::size_t pid = 0; pid < ps.count(); ++pid) {
        Vertex c = Vertex::coset(pid, cosets.rep(pid, ball.elements[i]));
        cones.insert(c);
        cone_of[i].push_back(std::move(c));
      }
    }
    for (auto const& c : cones) {
      g.add_vertex(c);
    }
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (auto const& c : cone_of[i]) {
        g.add_edge({i, *g.find(c), EdgeKind::cone, c.pid, {}, rp.peripherals[c.pid].name});
      }
    }
    for (std::size_t pid = 0; pid < ps.count(); ++pid) {
      g.canonical = g.canonical && ps.exact(pid);
    }
    return g;
  }

  // Osin-Cayley graph truncated at radius r: generator edges plus an edge
  // {g, gp} for every nontrivial p in a peripheral subgroup with local length
  // <= cap and both endpoints in the ball. Parallel edges are kept.
  inline Graph build_osin_graph(PeripheralStructure const& ps, std::size_t r, std::size_t cap) {
    auto const& rp   = ps.presentation();
    auto const& wp   = ps.ambient();
    GroupBall   ball = element_ball(wp, r);
    Graph       g    = detail::ball_graph("osin", rp, ball);
    g.peripheral_cap = cap;
    for (std::size_t pid = 0; pid < ps.count(); ++pid) {
      g.canonical  = g.canonical && ps.exact(pid);
      auto letters = ps.elements(pid, cap);
      std::set<std::pair<std::size_t, std::size_t>> seen;
      for (std::size_t i = 0; i < ball.size(); ++i) {
        for (auto const& [p, len] : letters) {
          if (len == 0 || p.empty()) {
            continue;
          }
          auto j = ball.find(wp.multiply(ball.elements[i], p));
          if (!j || *j <= i || !seen.emplace(i, *j).second) {
            continue;
          }
          g.add_edge({i, *j, EdgeKind::peripheral, pid, p,
                      rp.peripherals[pid].name + ":" + to_string(p, rp.names())});
        }
      }
    }
    return g;
  }

  // Image of an Osin vertex or edge in the coned-off graph built from the same
  // presentation and radius.
  inline std::size_t phi_vertex(Graph const& osin, std::size_t v, Graph const& coned) {
    if (osin.source != coned.source || osin.radius != coned.radius || osin.kind != "osin"
        || coned.kind != "coned") {
      throw MismatchedProvenance("phi needs an Osin graph and a coned-off graph of the same build");
    }
    auto j = coned.find(osin.vertices.at(v));
    if (!j) {
      throw MismatchedProvenance("vertex missing from the coned-off graph");
    }
    return *j;
  }

  inline std::vector<std::size_t> phi_edge(Graph const& osin, std::size_t e, Graph const& coned,
                                           CosetOracle const& cosets) {
    auto const& edge = osin.edges.at(e);
    std::size_t u    = phi_vertex(osin, edge.u, coned);
    std::size_t v    = phi_vertex(osin, edge.v, coned);
    if (edge.kind != EdgeKind::peripheral) {
      return {u, v};
    }
    auto c = coned.find(Vertex::coset(edge.pid, cosets.rep(edge.pid, osin.vertices[edge.u].word)));
    if (!c) {
      throw MismatchedProvenance("cone vertex missing from the coned-off graph");
    }
    return {u, *c, v};
  }

  inline constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

  // Breadth-first distances from src up to `limit`, optionally with one
  // vertex deleted. Works on Graph and ConedView.
  template <typename G>
  std::unordered_map<std::size_t, std::size_t> bfs_distances(
      G const& g, std::size_t src, std::size_t limit = unreachable,
      std::optional<std::size_t> removed = std::nullopt) {
    std::unordered_map<std::size_t, std::size_t> dist = {{src, 0}};
    std::vector<std::size_t>                     frontier = {src};
    for (std::size_t d = 0; d < limit && !frontier.empty(); ++d) {
      std::vector<std::size_t> next;
      for (auto x : frontier) {
        for (auto y : g.neighbors(x)) {
          if (removed && y == *removed) {
            continue;
          }
          if (dist.emplace(y, d + 1).second) {
            next.push_back(y);
          }
        }
      }
      frontier = std::move(next);
    }
    return dist;
  }

  // Dense all-sources distance vector for a materialized graph.
  inline std::vector<std::size_t> distances_from(Graph const& g, std::size_t src) {
    std::vector<std::size_t> out(g.size(), unreachable);
    for (auto [v, d] : bfs_distances(g, src)) {
      out[v] = d;
    }
    return out;
  }

  // Induced subgraph of a lazy view on everything within `depth` of the
  // given centres, with vertices in canonical order.
  inline Graph materialize(ConedView const& view, std::vector<Vertex> const& centers,
                           std::size_t depth) {
    std::set<std::size_t> keep;
    for (auto const& c : centers) {
      for (auto [v, d] : bfs_distances(view, view.id(c), depth)) {
        keep.insert(v);
      }
    }
    std::vector<std::size_t> order(keep.begin(), keep.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return vertex_less(view.vertex(a), view.vertex(b));
    });
    auto const& rp = view.structure().presentation();
    Graph       g;
    g.kind      = "coned";
    g.source    = &rp;
    g.radius    = view.radius();
    g.canonical = view.canonical();
    for (auto v : order) {
      g.add_vertex(view.vertex(v));
    }
    for (auto v : order) {
      std::size_t i = *g.find(view.vertex(v));
      for (auto w : view.neighbors(v)) {
        if (keep.count(w) == 0) {
          continue;
        }
        std::size_t j = *g.find(view.vertex(w));
        if (i < j) {
          Vertex const& a = g.vertices[i];
          Vertex const& b = g.vertices[j];
          if (b.cone) {
            g.add_edge({i, j, EdgeKind::cone, b.pid, {}, rp.peripherals[b.pid].name});
          } else {
            Word el = view.structure().ambient().multiply(inverse(a.word), b.word);
            g.add_edge({i, j, EdgeKind::generator, 0, el, to_string(el, rp.names())});
          }
        }
      }
    }
    return g;
  }

  inline std::string to_dot(Graph const& g) {
    std::ostringstream out;
    out << "graph " << (g.kind.empty() ? "G" : g.kind) << " {\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
      out << "  " << nlohmann::json(g.name(i)).dump();
      if (g.vertices[i].cone) {
        out << " [cone=true]";
      }
      out << ";\n";
    }
    for (auto const& e : g.edges) {
      out << "  " << nlohmann::json(g.name(e.u)).dump() << " -- " << nlohmann::json(g.name(e.v)).dump()
          << " [label=" << nlohmann::json(e.label).dump() << "];\n";
    }
    out << "}\n";
    return out.str();
  }

  inline std::string to_jsonl(Graph const& g) {
    std::ostringstream out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      out << nlohmann::json{{"v", g.name(i)}, {"cone", g.vertices[i].cone}}.dump() << "\n";
    }
    for (auto const& e : g.edges) {
      out << nlohmann::json{{"u", g.name(e.u)}, {"v", g.name(e.v)}, {"label", e.label}}.dump() << "\n";
    }
    return out.str();
  }

}  // namespace relpair

#endif  // RELPAIR_GRAPHS_HPP_
