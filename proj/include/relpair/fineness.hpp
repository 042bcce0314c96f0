// Circuits through an edge, the angle metric at a vertex, and three-valued
// fineness reports over a schedule of truncation radii.

#ifndef RELPAIR_FINENESS_HPP_
#define RELPAIR_FINENESS_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "graphs.hpp"
#include "parallel.hpp"

namespace relpair {

  // Simple cycle as a vertex sequence, stored starting at its smallest vertex
  // and oriented so the second vertex is smaller than the last.
  struct Circuit {
    std::vector<std::size_t> vertices;

    std::size_t length() const noexcept {
      return vertices.size();
    }
    auto operator<=>(Circuit const&) const = default;

    static Circuit canonical(std::vector<std::size_t> cycle) {
      auto m = std::min_element(cycle.begin(), cycle.end());
      std::rotate(cycle.begin(), m, cycle.end());
      if (cycle.size() > 2 && cycle.back() < cycle[1]) {
        std::reverse(cycle.begin() + 1, cycle.end());
      }
      return {std::move(cycle)};
    }
  };

  namespace detail {
    // Simple paths from `from` to `to` of at most `max_edges` edges that do not
    // use the edge {from, to} itself. Calls emit(path) for each.
    template <typename Emit>
    void paths_closing_edge(Graph const& g, std::size_t from, std::size_t to, std::size_t max_edges,
                            Emit&& emit) {
      std::vector<std::size_t> dist(g.size(), unreachable);
      for (auto [v, d] : bfs_distances(g, to, max_edges)) {
        dist[v] = d;
      }
      std::vector<char>        on_path(g.size(), 0);
      std::vector<std::size_t> path = {from};
      on_path[from]                 = 1;
      auto dfs = [&](auto&& self, std::size_t x) -> void {
        std::size_t used = path.size() - 1;
        for (auto y : g.neighbors(x)) {
          if (y == to) {
            if (x != from) {
              path.push_back(y);
              emit(path);
              path.pop_back();
            }
            continue;
          }
          if (on_path[y] || dist[y] == unreachable || used + 1 + dist[y] > max_edges) {
            continue;
          }
          on_path[y] = 1;
          path.push_back(y);
          self(self, y);
          path.pop_back();
          on_path[y] = 0;
        }
      };
      dfs(dfs, from);
    }
  }  // namespace detail

  // Simple cycles of length <= maxlen containing the edge {u, v}, in
  // canonical order.
  inline std::vector<Circuit> circuits_through_edge(Graph const& g, std::size_t u, std::size_t v,
                                                    std::size_t maxlen) {
    if (!g.adjacent(u, v)) {
      throw NotNeighbor("circuits_through_edge: not an edge");
    }
    std::vector<Circuit> out;
    if (maxlen < 3) {
      return out;
    }
    detail::paths_closing_edge(g, v, u, maxlen - 1, [&](std::vector<std::size_t> const& path) {
      out.push_back(Circuit::canonical(path));
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  inline std::size_t count_circuits_through_edge(Graph const& g, std::size_t u, std::size_t v,
                                                 std::size_t maxlen) {
    if (!g.adjacent(u, v)) {
      throw NotNeighbor("count_circuits_through_edge: not an edge");
    }
    std::size_t n = 0;
    if (maxlen >= 3) {
      detail::paths_closing_edge(g, v, u, maxlen - 1, [&](auto const&) { ++n; });
    }
    return n;
  }

  // Circuits through {u, v} in a lazily explored coned-off graph: every such
  // circuit stays within maxlen / 2 of the edge, so only that part is built.
  inline std::size_t count_circuits_through_edge(ConedView const& view, Vertex const& u,
                                                 Vertex const& v, std::size_t maxlen) {
    Graph local = materialize(view, {u, v}, maxlen / 2);
    auto  iu = local.find(u), iv = local.find(v);
    if (!iu || !iv || !local.adjacent(*iu, *iv)) {
      throw NotNeighbor("count_circuits_through_edge: not an edge");
    }
    return count_circuits_through_edge(local, *iu, *iv, maxlen);
  }

  template <typename G>
  void require_neighbor(G const& g, std::size_t v, std::size_t x) {
    auto const& n = g.neighbors(v);
    if (std::find(n.begin(), n.end(), x) == n.end()) {
      throw NotNeighbor("angle: vertex is not a neighbour of the base");
    }
  }

  // Angle at v between neighbours x and y: the length of a shortest x-y path
  // avoiding v; nullopt when there is none within the truncation (or within
  // `limit` steps).
  template <typename G>
  std::optional<std::size_t> angle(G const& g, std::size_t v, std::size_t x, std::size_t y,
                                   std::size_t limit = unreachable) {
    require_neighbor(g, v, x);
    require_neighbor(g, v, y);
    auto dist = bfs_distances(g, x, limit, v);
    auto it   = dist.find(y);
    if (it == dist.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  struct AngleBall {
    std::size_t              base   = 0;
    std::size_t              center = 0;
    std::size_t              radius = 0;
    std::size_t              truncation = 0;
    std::vector<std::size_t> members;  // ascending ids
  };

  template <typename G>
  AngleBall angle_ball(G const& g, std::size_t v, std::size_t x, std::size_t R,
                       std::size_t truncation = 0) {
    require_neighbor(g, v, x);
    AngleBall ball{v, x, R, truncation, {}};
    auto      dist = bfs_distances(g, x, R, v);
    for (auto w : g.neighbors(v)) {
      if (dist.count(w) != 0) {
        ball.members.push_back(w);
      }
    }
    std::sort(ball.members.begin(), ball.members.end());
    return ball;
  }

  enum class VerdictStatus { certified_stable, growth_detected, inconclusive };

  inline std::string to_string(VerdictStatus s) {
    switch (s) {
      case VerdictStatus::certified_stable:
        return "CertifiedStable";
      case VerdictStatus::growth_detected:
        return "GrowthDetected";
      default:
        return "Inconclusive";
    }
  }

  struct Measurement {
    std::size_t radius  = 0;
    std::size_t value   = 0;
    bool        guarded = true;  // all queries inside the interior ball
  };

  struct TruncatedVerdict {
    VerdictStatus            status = VerdictStatus::inconclusive;
    std::string              quantity;
    std::vector<Measurement> evidence;
    bool                     tainted = false;
    std::string              reason;
  };

  // Growth needs strict increase over the last three radii; stability needs
  // equal values at the last two guarded radii.
  inline TruncatedVerdict classify(std::string quantity, std::vector<Measurement> evidence,
                                   bool tainted) {
    TruncatedVerdict v{VerdictStatus::inconclusive, std::move(quantity), std::move(evidence), tainted, ""};
    auto const& e = v.evidence;
    std::size_t n = e.size();
    for (std::size_t i = 1; i < n; ++i) {
      if (e[i].radius <= e[i - 1].radius) {
        v.reason = "radii must increase strictly";
        return v;
      }
    }
    if (tainted) {
      v.reason = "inexact word problem or coset identification";
    } else if (n < 3) {
      v.reason = "fewer than three radii";
    } else if (e[n - 3].value < e[n - 2].value && e[n - 2].value < e[n - 1].value) {
      v.status = VerdictStatus::growth_detected;
      v.reason = "strict growth over the last three radii";
    } else if (e[n - 2].value == e[n - 1].value && e[n - 2].guarded && e[n - 1].guarded) {
      v.status = VerdictStatus::certified_stable;
      v.reason = "equal at the last two radii";
    } else {
      v.reason = "no stable or growing tail";
    }
    return v;
  }

  inline nlohmann::json to_json(TruncatedVerdict const& v) {
    nlohmann::json j;
    j["status"]   = to_string(v.status);
    j["quantity"] = v.quantity;
    j["tainted"]  = v.tainted;
    j["reason"]   = v.reason;
    j["evidence"] = nlohmann::json::array();
    for (auto const& m : v.evidence) {
      j["evidence"].push_back({{"radius", m.radius}, {"value", m.value}, {"guarded", m.guarded}});
    }
    j["scope"] = "evidence at the listed truncation radii only";
    return j;
  }

  struct FinenessOptions {
    enum class Mode { circuits, angle } mode = Mode::circuits;
    std::size_t circuit_length = 6;
    std::size_t angle_radius   = 4;
    // Extra angle probes per cone, taken in shortlex order from the cone's
    // members at the smallest radius.
    std::size_t angle_probes = 1;
    std::size_t threads      = 1;
  };

  // Target edges at the identity: every generator edge and every cone edge.
  inline std::vector<std::pair<Vertex, Vertex>> identity_edges(ConedView const& view) {
    std::vector<std::pair<Vertex, Vertex>> out;
    Vertex const one = Vertex::element({});
    for (auto w : view.neighbors(view.id(one))) {
      out.emplace_back(one, view.vertex(w));
    }
    std::sort(out.begin(), out.end(),
              [](auto const& p, auto const& q) { return vertex_less(p.second, q.second); });
    return out;
  }

  // Measures circuit counts (or angle-ball sizes) at each radius and
  // classifies the series.
  inline TruncatedVerdict fineness_report(PeripheralStructure const& ps,
                                          std::vector<std::size_t> const& radii,
                                          FinenessOptions const& opts = {}) {
    bool tainted = !ps.ambient().exact();
    for (std::size_t pid = 0; pid < ps.count(); ++pid) {
      tainted = tainted || !ps.exact(pid);
    }
    bool const circuits = opts.mode == FinenessOptions::Mode::circuits;

    // Angle probes are fixed once so every radius measures the same thing.
    std::vector<std::pair<Vertex, Vertex>> probes;
    if (!circuits && !radii.empty()) {
      ConedView view(ps, radii.front());
      for (std::size_t pid = 0; pid < ps.count(); ++pid) {
        Vertex cone = view.cone_of(pid, {});
        probes.emplace_back(cone, Vertex::element({}));
        std::size_t extra = 0;
        for (auto const& m : view.cosets().members(pid, {}, radii.front())) {
          if (extra == opts.angle_probes) {
            break;
          }
          if (!m.empty()) {
            probes.emplace_back(cone, Vertex::element(m));
            ++extra;
          }
        }
      }
    }

    auto measure = [&](std::size_t i) -> Measurement {
      std::size_t r = radii[i];
      ConedView   view(ps, r);
      Measurement m{r, 0, true};
      if (circuits) {
        for (auto const& [u, v] : identity_edges(view)) {
          m.value += count_circuits_through_edge(view, u, v, opts.circuit_length);
        }
        m.guarded = r >= opts.circuit_length / 2 + 1;
      } else {
        std::size_t depth = 0;
        for (auto const& [base, x] : probes) {
          m.value += angle_ball(view, view.id(base), view.id(x), opts.angle_radius).members.size();
          depth = std::max(depth, x.word.size());
        }
        m.guarded = r >= depth + opts.angle_radius;
      }
      return m;
    };
    auto evidence = parallel_map(radii.size(), opts.threads, measure);
    return classify(circuits ? "circuits through identity edges, length <= "
                                   + std::to_string(opts.circuit_length)
                             : "angle-ball sizes at identity cones, radius "
                                   + std::to_string(opts.angle_radius),
                    std::move(evidence), tainted);
  }

}  // namespace relpair

#endif  // RELPAIR_FINENESS_HPP_
