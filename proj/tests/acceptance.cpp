// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "relpair/area.hpp"
#include "relpair/coarse.hpp"
#include "relpair/fineness.hpp"
#include "relpair/graphs.hpp"
#include "relpair/pairs.hpp"

#include "cli_support.hpp"
#include "oracles.hpp"

using namespace relpair;

namespace {
  struct Setup {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;
    explicit Setup(std::string const& text)
        : rp(parse_presentation(text)), wp(rp), ps(rp, wp) {}
  };

  std::string const kF2 = "group <a,b | >\nrel P1 = <a>";
  std::string const kZ2 = "group <a,b | [a,b]>\nrel P1 = <a>";

  double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  Word commutator_power(std::size_t n) {
    Word w;
    for (auto [gen, inv] : {std::pair{0, false}, {1, false}, {0, true}, {1, true}}) {
      w.insert(w.end(), n, Letter::generator(static_cast<std::uint16_t>(gen), inv));
    }
    return w;
  }

  // Each check fills `detail` and returns whether the criterion holds.
  using Check = std::function<bool(std::string& detail)>;

  bool ball_sizes(std::string& detail) {
    bool ok = true;
    for (auto [text, expected] : {std::pair{"group <a,b | >", 53}, {"group <a,b | [a,b]>", 25}}) {
      auto t0   = std::chrono::steady_clock::now();
      auto wp   = WordProblem(parse_presentation(text));
      auto size = element_ball(wp, 3).size();
      auto s    = seconds_since(t0);
      detail += std::to_string(size) + " in " + std::to_string(s) + "s; ";
      ok = ok && size == static_cast<std::size_t>(expected) && s < 1.0;
    }
    return ok;
  }

  bool commutator_areas(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    auto wp = WordProblem(parse_presentation("group <a,b | [a,b]>"));
    bool ok = true;
    for (std::size_t n = 1; n <= 4; ++n) {
      auto cert = area(commutator_power(n), wp);
      ok = ok && cert.upper == n * n && cert.optimal && replay_area(cert, wp);
      detail += (cert.upper ? std::to_string(*cert.upper) : "?") + " ";
    }
    auto s = seconds_since(t0);
    detail += "in " + std::to_string(s) + "s";
    return ok && s < 60.0;
  }

  bool fineness_and_dehn(std::string& detail) {
    Setup           f2(kF2), z2(kZ2);
    FinenessOptions opts;
    opts.circuit_length = 8;
    auto fr             = fineness_report(f2.ps, {8, 12, 16}, opts);
    opts.circuit_length = 6;
    auto zr             = fineness_report(z2.ps, {4, 8, 12}, opts);
    bool f2_flat        = true;
    for (auto const& row : rel_dehn_table(f2.ps, 10).rows) {
      f2_flat = f2_flat && !divergence_suspected(row) && row.lower == 0;
    }
    auto zt  = rel_dehn_table(z2.ps, 4);
    bool z2d = divergence_suspected(zt.rows[3])
               && cap_lower_series(zt.rows[3]) == std::vector<std::size_t>{1, 2, 3};
    detail = "F2 " + to_string(fr.status) + ", Z2 " + to_string(zr.status);
    return fr.status == VerdictStatus::certified_stable
           && zr.status == VerdictStatus::growth_detected && f2_flat && z2d;
  }

  bool phi_quasi_isometry(std::string& detail) {
    Setup             s(kZ2);
    std::size_t const r = 6, guard = 3;
    auto              osin  = build_osin_graph(s.ps, r, 2 * r);
    auto              coned = build_coned_off(s.ps, r);
    std::size_t       violations = 0, pairs = 0;
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
    detail = std::to_string(pairs) + " pairs, " + std::to_string(violations) + " violations";
    return pairs > 0 && violations == 0;
  }

  bool angle_properties(std::string& detail) {
    std::mt19937 rng(11);
    std::size_t  samples = 0, failures = 0;
    for (std::string text : {kF2, kZ2, std::string("group <a,b | b^2>\nrel P1 = <b>"),
                             std::string("group <a | a^3>\nrel P1 = <a>")}) {
      Setup s(text);
      auto  g = build_coned_off(s.ps, 4);
      for (int trial = 0; trial < 3000; ++trial) {
        std::size_t v  = rng() % g.size();
        auto const& nb = g.neighbors(v);
        if (nb.size() < 2) {
          continue;
        }
        std::size_t x = nb[rng() % nb.size()], y = nb[rng() % nb.size()], z = nb[rng() % nb.size()];
        auto xy = angle(g, v, x, y), yx = angle(g, v, y, x);
        auto yz = angle(g, v, y, z), xz = angle(g, v, x, z);
        ++samples;
        failures += xy != yx;
        if (xy && yz) {
          failures += !xz || *xz > *xy + *yz;
        }
      }
    }

    std::size_t non_monotone = 0;
    for (std::string text : {kF2, kZ2}) {
      Setup s(text);
      for (std::size_t r = 3; r <= 5; ++r) {
        ConedView small(s.ps, r), big(s.ps, r + 2);
        auto      cone    = small.cone_of(0, {});
        auto const& members = small.cosets().members(0, {}, r);
        for (auto const& x : members) {
          for (auto const& y : members) {
            auto a1 = angle(small, small.id(cone), small.id(Vertex::element(x)), small.id(Vertex::element(y)));
            auto a2 = angle(big, big.id(cone), big.id(Vertex::element(x)), big.id(Vertex::element(y)));
            non_monotone += a1 && (!a2 || *a2 > *a1);
          }
        }
      }
    }

    Setup     f2(kF2);
    ConedView view(f2.ps, 8);
    auto      v = view.id(view.cone_of(0, {}));
    auto      x = view.id(Vertex::element({}));
    bool      balls = true;
    for (std::size_t R = 0; R <= 5; ++R) {
      balls = balls && angle_ball(view, v, x, R).members.size() == 2 * R + 1;
    }
    detail = std::to_string(samples) + " samples, " + std::to_string(failures) + " axiom failures, "
             + std::to_string(non_monotone) + " monotonicity failures";
    return samples >= 10000 && failures == 0 && non_monotone == 0 && balls;
  }

  bool malnormality(std::string& detail) {
    Setup       f2(kF2);
    std::size_t pairs = 0;
    bool        ok    = true;
    for (std::size_t n : {1, 2}) {
      auto sweep = malnormal_sweep(f2.ps, 6, n, {14, 16, 18}, 4);
      pairs += sweep.pairs;
      ok = ok && sweep.pairs > 0 && sweep.counts[VerdictStatus::certified_stable] == sweep.pairs;
    }
    Setup       z2(kZ2);
    CosetOracle zc(z2.ps);
    auto        pb  = coset_of(zc, 0, z2.wp.normal_form(parse_word("b", z2.rp)).word);
    auto        res = malnormal_check(z2.ps, {0, {}}, pb, 1, {4, 6, 8});
    ok = ok && res.verdict.status == VerdictStatus::growth_detected;
    for (auto const& m : res.verdict.evidence) {
      ok = ok && m.value + 2 >= 2 * m.radius && m.value <= 2 * m.radius + 2;
      detail += std::to_string(m.value) + " ";
    }
    detail = std::to_string(pairs) + " F2 pairs stable; Z2 " + detail;
    return ok;
  }

  bool oracles_agree(std::string& detail) {
    std::size_t words = 0, area_mismatch = 0;
    for (auto [text, gens] : {std::pair{"group <a | a^3>", 1}, {"group <a,b | [a,b]>", 2}}) {
      auto                           p = parse_presentation(text);
      WordProblem                    wp(p);
      oracle::ConjugateProductOracle brute(p.relators, static_cast<std::size_t>(gens));
      for (auto const& w : oracle::cyclic_reps(static_cast<std::size_t>(gens), 8)) {
        if (!wp.normal_form(w).word.empty()) {
          continue;
        }
        ++words;
        auto cert = area(w, wp);
        area_mismatch += cert.upper != brute.area(w) || !cert.optimal;
      }
    }
    std::size_t edges = 0, circuit_mismatch = 0;
    for (std::string text : {kF2, kZ2, std::string("group <a,b | b^2>\nrel P1 = <b>")}) {
      Setup s(text);
      auto  g      = build_coned_off(s.ps, 1);
      auto  cycles = oracle::all_cycles(g);
      for (std::size_t u = 0; u < g.size(); ++u) {
        for (auto v : g.neighbors(u)) {
          if (v < u) {
            continue;
          }
          ++edges;
          for (std::size_t n = 3; n <= g.size(); ++n) {
            std::size_t expected = 0;
            for (auto const& c : cycles) {
              expected += c.size() <= n && oracle::uses_edge(c, u, v);
            }
            circuit_mismatch += count_circuits_through_edge(g, u, v, n) != expected;
          }
        }
      }
    }
    detail = std::to_string(words) + " words, " + std::to_string(area_mismatch) + " area mismatches; "
             + std::to_string(edges) + " edges, " + std::to_string(circuit_mismatch)
             + " circuit mismatches";
    return words > 0 && edges > 0 && area_mismatch == 0 && circuit_mismatch == 0;
  }

  bool coarse_agrees(std::string& detail) {
    Setup     f2(kF2);
    ConedView view(f2.ps, 10);
    Graph     g      = materialize(view, {Vertex::element({})}, 6);
    auto      coarse = coarse_table(g, *g.find_element({}), 4, 12);
    auto      rel    = rel_dehn_table(f2.ps, 12);
    std::vector<std::size_t> fc, fr;
    for (std::size_t i = 0; i < 12; ++i) {
      fc.push_back(coarse.rows[i].lower);
      fr.push_back(rel.rows[i].lower);
    }
    auto fit = fit_affine(fr, fc);
    if (!fit) {
      detail = "no affine fit";
      return false;
    }
    detail = "L=" + std::to_string(fit->L) + " K=" + std::to_string(fit->K) + " C="
             + std::to_string(fit->C);
    return fit->L <= 4 && fit->K <= 4 && fit->C <= 4;
  }

  bool cli_determinism(std::string& detail) {
    std::size_t commands = 0, differing = 0;
    for (auto const& args : cli::command_set()) {
      auto first = cli::run(args);
      ++commands;
      bool same = first.code == 0 && !first.out.empty();
      for (int i = 0; i < 2; ++i) {
        same = same && cli::run(args).out == first.out;
      }
      same = same && cli::run("--threads 1 " + args).out == first.out
             && cli::run("--threads 4 " + args).out == first.out;
      if (!same) {
        ++differing;
        detail += "[" + args + "] ";
      }
    }
    detail = std::to_string(commands) + " commands, " + std::to_string(differing) + " differing "
             + detail;
    return differing == 0;
  }
}  // namespace

int main() {
  std::vector<std::pair<std::string, Check>> criteria = {
      {"ball sizes", ball_sizes},
      {"commutator areas", commutator_areas},
      {"fineness and relative Dehn", fineness_and_dehn},
      {"Osin to coned-off map", phi_quasi_isometry},
      {"angle properties", angle_properties},
      {"almost malnormality", malnormality},
      {"brute-force oracles", oracles_agree},
      {"coarse isoperimetry", coarse_agrees},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool        ok = false;
    try {
      ok = criteria[i].second(detail);
    } catch (std::exception const& e) {
      detail = std::string("exception: ") + e.what();
    }
    failed += !ok;
    std::printf("%s %zu %s: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
