// relpair command-line front end.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "relpair/area.hpp"
#include "relpair/coarse.hpp"
#include "relpair/corpus.hpp"
#include "relpair/fineness.hpp"
#include "relpair/graphs.hpp"
#include "relpair/pairs.hpp"
#include "relpair/pairspec.hpp"

using namespace relpair;
using nlohmann::json;

namespace {

  struct UsageError : Error {
    using Error::Error;
  };

  // Exit code 2: partial output after a budget ran out.
  struct Partial {
    std::string text;
  };

  struct Source {
    std::string pres;
    std::string corpus;

    void add(CLI::App* cmd) {
      cmd->add_option("--pres", pres, "presentation file");
      cmd->add_option("--corpus", corpus, "built-in presentation, ID or ID:choice");
    }
  };

  // A loaded presentation; pinned because the structure points into it.
  struct Loaded {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;
    explicit Loaded(RelativePresentation p) : rp(std::move(p)), wp(rp), ps(rp, wp) {}
  };

  std::unique_ptr<Loaded> load(Source const& s) {
    if (s.pres.empty() == s.corpus.empty()) {
      throw UsageError("give exactly one of --pres or --corpus");
    }
    if (!s.corpus.empty()) {
      return std::make_unique<Loaded>(corpus_presentation(s.corpus));
    }
    std::filesystem::path path(s.pres);
    ParseOptions          opts;
    opts.base_dir = path.parent_path();
    return std::make_unique<Loaded>(parse_presentation(detail::read_file(path), opts));
  }

  void check_radii(std::vector<std::size_t> const& radii) {
    if (radii.empty()) {
      throw UsageError("--radii must not be empty");
    }
    for (std::size_t i = 1; i < radii.size(); ++i) {
      if (radii[i] <= radii[i - 1]) {
        throw UsageError("--radii must increase strictly");
      }
    }
  }

  Word element(Loaded const& l, std::string const& text) {
    return l.wp.normal_form(parse_word(text, l.rp)).word;
  }

  // "P1" and "w*P1" name cosets; anything else is an element word.
  std::optional<CosetRef> parse_coset(Loaded const& l, std::string const& text) {
    auto        star = text.rfind('*');
    std::string tail = star == std::string::npos ? text : text.substr(star + 1);
    auto        pid  = l.rp.peripheral_index(tail);
    if (!pid) {
      return std::nullopt;
    }
    Word g = star == std::string::npos ? Word{} : element(l, text.substr(0, star));
    CosetOracle cosets(l.ps);
    return coset_of(cosets, *pid, g);
  }

  CosetRef require_coset(Loaded const& l, std::string const& text) {
    auto c = parse_coset(l, text);
    if (!c) {
      throw UsageError("'" + text + "' does not name a coset (expected P or w*P)");
    }
    return *c;
  }

  Vertex parse_vertex(Loaded const& l, std::string const& text) {
    if (auto c = parse_coset(l, text)) {
      return Vertex::coset(c->pid, c->rep);
    }
    return Vertex::element(element(l, text));
  }

  std::size_t vertex_id(Graph const& g, Vertex const& v, std::string const& text) {
    auto id = g.find(v);
    if (!id) {
      throw UsageError("vertex '" + text + "' is not in the truncated graph");
    }
    return *id;
  }

  Graph build(Loaded const& l, std::string const& kind, std::size_t r, std::size_t cap) {
    if (kind == "cayley") {
      return build_cayley_ball(l.wp, l.rp, r);
    }
    if (kind == "coned") {
      return build_coned_off(l.ps, r);
    }
    if (kind == "osin") {
      return build_osin_graph(l.ps, r, cap);
    }
    throw UsageError("unknown graph kind '" + kind + "'");
  }

  json area_json(AreaCertificate const& c, Loaded const& l, std::vector<Word> const* relators) {
    json j;
    j["input"]       = l.rp.word_to_string(c.input);
    j["relative"]    = c.relative;
    j["area"]        = c.upper ? json(*c.upper) : json(nullptr);
    j["lower"]       = c.lower;
    j["optimal"]     = c.optimal;
    j["maxlen"]      = c.maxlen;
    j["node_budget"] = c.node_budget;
    j["nodes"]       = c.nodes;
    j["moves"]       = json::array();
    for (auto const& m : c.moves) {
      json mj = {{"position", m.position},
                 {"relator", m.relator},
                 {"inverse", m.inverse},
                 {"rotation", m.rotation}};
      if (relators && m.relator < relators->size()) {
        mj["relator_word"] = l.rp.word_to_string((*relators)[m.relator]);
      }
      j["moves"].push_back(std::move(mj));
    }
    return j;
  }

  std::string dump(json const& j) {
    return j.dump(2) + "\n";
  }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative presentations, coned-off graphs, fineness, Dehn functions and pairs"};
  app.require_subcommand(1);

  std::size_t   threads = 1;
  std::uint64_t seed    = 1;
  std::string   output;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for sampling-based checks");
  app.add_option("--output,-o", output, "write to this file instead of stdout");

  std::function<std::string()> run;
  Source                       src;

  // parse
  auto* parse = app.add_subcommand("parse", "parse a presentation and report its strategies");
  src.add(parse);
  parse->callback([&] {
    run = [&] {
      auto l = load(src);
      json j;
      j["presentation"] = print(l->rp);
      j["strategy"]     = to_string(l->wp.strategy());
      j["exact"]        = l->wp.exact();
      j["peripherals"]  = json::array();
      for (std::size_t pid = 0; pid < l->ps.count(); ++pid) {
        j["peripherals"].push_back({{"name", l->rp.peripherals[pid].name},
                                    {"strategy", to_string(l->ps.local(pid).strategy())},
                                    {"exact", l->ps.exact(pid)}});
      }
      j["diagnostics"] = json::array();
      for (auto const& d : validate(l->rp)) {
        j["diagnostics"].push_back(
            {{"code", d.code},
             {"severity", d.severity == Severity::error ? "error" : "warning"},
             {"message", d.message}});
      }
      return dump(j);
    };
  });

  // ball
  std::size_t radius = 2;
  auto*       ball   = app.add_subcommand("ball", "element ball of the ambient group");
  src.add(ball);
  ball->add_option("--radius,-r", radius, "radius");
  ball->callback([&] {
    run = [&] {
      auto l = load(src);
      return dump(to_json(element_ball(l->wp, radius), l->rp.names()));
    };
  });

  // graph
  std::string kind   = "coned";
  std::string format = "dot";
  std::size_t cap    = 2;
  auto*       graph  = app.add_subcommand("graph", "Cayley, coned-off or Osin graph of a ball");
  src.add(graph);
  graph->add_option("--kind", kind, "cayley|coned|osin")
      ->check(CLI::IsMember({"cayley", "coned", "osin"}));
  graph->add_option("--radius,-r", radius, "radius");
  graph->add_option("--cap", cap, "peripheral edge length cap (osin)");
  graph->add_option("--format", format, "dot|jsonl")->check(CLI::IsMember({"dot", "jsonl"}));
  graph->callback([&] {
    run = [&] {
      auto l = load(src);
      auto g = build(*l, kind, radius, cap);
      return format == "dot" ? to_dot(g) : to_jsonl(g);
    };
  });

  // circuits
  std::string u_text, v_text;
  std::size_t maxlen = 6;
  auto*       circ   = app.add_subcommand("circuits", "circuits through an edge");
  src.add(circ);
  circ->add_option("--kind", kind, "cayley|coned|osin")
      ->check(CLI::IsMember({"cayley", "coned", "osin"}));
  circ->add_option("--radius,-r", radius, "radius");
  circ->add_option("--cap", cap, "peripheral edge length cap (osin)");
  circ->add_option("--u", u_text, "first endpoint (word, P or w*P)")->required();
  circ->add_option("--v", v_text, "second endpoint")->required();
  circ->add_option("--maxlen", maxlen, "maximum circuit length");
  circ->callback([&] {
    run = [&] {
      auto l  = load(src);
      auto g  = build(*l, kind, radius, cap);
      auto iu = vertex_id(g, parse_vertex(*l, u_text), u_text);
      auto iv = vertex_id(g, parse_vertex(*l, v_text), v_text);
      auto cs = circuits_through_edge(g, iu, iv, maxlen);
      json j;
      j["edge"]     = {g.name(iu), g.name(iv)};
      j["maxlen"]   = maxlen;
      j["count"]    = cs.size();
      j["circuits"] = json::array();
      for (auto const& c : cs) {
        json names = json::array();
        for (auto x : c.vertices) {
          names.push_back(g.name(x));
        }
        j["circuits"].push_back(std::move(names));
      }
      return dump(j);
    };
  });

  // angle
  std::string at_text, x_text, y_text;
  std::optional<std::size_t> angle_ball_radius;
  auto* ang = app.add_subcommand("angle", "angle between neighbours of a vertex, or an angle ball");
  src.add(ang);
  ang->add_option("--radius,-r", radius, "radius of the coned-off truncation");
  ang->add_option("--at", at_text, "base vertex")->required();
  ang->add_option("--x", x_text, "neighbour of the base")->required();
  ang->add_option("--y", y_text, "second neighbour");
  ang->add_option("--ball", angle_ball_radius, "angle-ball radius around x");
  ang->callback([&] {
    run = [&] {
      auto l  = load(src);
      auto g  = build_coned_off(l->ps, radius);
      auto iv = vertex_id(g, parse_vertex(*l, at_text), at_text);
      auto ix = vertex_id(g, parse_vertex(*l, x_text), x_text);
      json j;
      j["at"]     = g.name(iv);
      j["x"]      = g.name(ix);
      j["radius"] = radius;
      if (angle_ball_radius) {
        auto b = angle_ball(g, iv, ix, *angle_ball_radius, radius);
        j["ball_radius"] = *angle_ball_radius;
        j["size"]        = b.members.size();
        j["members"]     = json::array();
        for (auto m : b.members) {
          j["members"].push_back(g.name(m));
        }
      } else {
        if (y_text.empty()) {
          throw UsageError("give --y or --ball");
        }
        auto iy  = vertex_id(g, parse_vertex(*l, y_text), y_text);
        auto a   = angle(g, iv, ix, iy);
        j["y"]     = g.name(iy);
        j["angle"] = a ? json(*a) : json(nullptr);
      }
      return dump(j);
    };
  });

  // fineness
  std::vector<std::size_t> radii = {4, 8, 12};
  std::size_t              circuit_n = 6;
  std::string              mode      = "circuits";
  FinenessOptions          fopts;
  auto* fin = app.add_subcommand("fineness", "three-valued fineness report over a radius schedule");
  src.add(fin);
  fin->add_option("--n", circuit_n, "circuit length");
  fin->add_option("--radii", radii, "radius schedule, e.g. 4,8,12")->delimiter(',');
  fin->add_option("--mode", mode, "circuits|angle")->check(CLI::IsMember({"circuits", "angle"}));
  fin->add_option("--angle-radius", fopts.angle_radius, "angle-ball radius");
  fin->add_option("--probes", fopts.angle_probes, "extra angle probes per cone");
  fin->callback([&] {
    run = [&] {
      check_radii(radii);
      auto l               = load(src);
      fopts.circuit_length = circuit_n;
      fopts.mode    = mode == "angle" ? FinenessOptions::Mode::angle : FinenessOptions::Mode::circuits;
      fopts.threads = threads;
      return dump(to_json(fineness_report(l->ps, radii, fopts)));
    };
  });

  // area and rel-area
  std::string word_text;
  AreaCaps    caps;
  auto*       ar = app.add_subcommand("area", "least number of relator cells filling a word");
  src.add(ar);
  ar->add_option("--word,-w", word_text, "null-homotopic word")->required();
  ar->add_option("--maxlen", caps.maxlen, "longest intermediate word (0: automatic)");
  ar->add_option("--budget", caps.node_budget, "search node budget");
  ar->callback([&] {
    run = [&] {
      auto l    = load(src);
      auto cert = area(parse_word(word_text, l->rp), l->wp, caps);
      auto out  = dump(area_json(cert, *l, &l->wp.relators()));
      if (!cert.optimal) {
        throw Partial{out};
      }
      return out;
    };
  });

  auto* rar = app.add_subcommand("rel-area", "relative area; peripheral cells are free");
  src.add(rar);
  rar->add_option("--word,-w", word_text, "relative word, peripheral letters in braces")->required();
  rar->add_option("--maxlen", caps.maxlen, "longest intermediate relative word (0: automatic)");
  rar->add_option("--ambient-maxlen", caps.ambient_maxlen, "longest flattened word (0: automatic)");
  rar->add_option("--budget", caps.node_budget, "search node budget");
  rar->callback([&] {
    run = [&] {
      auto l    = load(src);
      auto cert = relative_area(parse_relative_word(word_text, l->rp), l->ps, caps);
      auto out  = dump(area_json(cert, *l, nullptr));
      if (!cert.optimal) {
        throw Partial{out};
      }
      return out;
    };
  });

  // dehn and rel-dehn
  std::size_t              nmax = 6;
  std::vector<std::size_t> pcaps = {2, 3, 4};
  auto* dehn = app.add_subcommand("dehn", "Dehn function table");
  src.add(dehn);
  dehn->add_option("--nmax", nmax, "largest word length");
  dehn->add_option("--maxlen", caps.maxlen, "longest intermediate word (0: automatic)");
  dehn->add_option("--budget", caps.node_budget, "search node budget per word");
  dehn->callback([&] {
    run = [&] {
      auto t = dehn_table(load(src)->wp, nmax, DehnOptions{caps, threads});
      if (t.budget_exhausted) {
        throw Partial{to_tsv(t)};
      }
      return to_tsv(t);
    };
  });

  auto* rdehn = app.add_subcommand("rel-dehn", "relative Dehn function table");
  src.add(rdehn);
  rdehn->add_option("--nmax", nmax, "largest relative word length");
  rdehn->add_option("--caps", pcaps, "peripheral-letter length caps, e.g. 2,3,4")->delimiter(',');
  rdehn->add_option("--maxlen", caps.maxlen, "longest intermediate word (0: automatic)");
  rdehn->add_option("--budget", caps.node_budget, "search node budget per word");
  rdehn->callback([&] {
    run = [&] {
      check_radii(pcaps);
      auto l = load(src);
      auto t = rel_dehn_table(l->ps, nmax, RelDehnOptions{caps, pcaps, threads});
      if (t.budget_exhausted) {
        throw Partial{to_tsv(t)};
      }
      return to_tsv(t);
    };
  });

  // coarse
  std::size_t m = 4, lmax = 12;
  std::optional<std::size_t> depth;
  CoarseCaps                 ccaps;
  auto* coarse = app.add_subcommand("coarse", "coarse filling table of the coned-off graph");
  src.add(coarse);
  coarse->add_option("--radius,-r", radius, "truncation radius")->default_val(10);
  coarse->add_option("--depth", depth, "exploration depth around the identity (default lmax/2)");
  coarse->add_option("--m", m, "longest circuit used as a cell");
  coarse->add_option("--lmax", lmax, "longest circuit filled");
  coarse->add_option("--budget", ccaps.node_budget, "search node budget per circuit");
  coarse->callback([&] {
    run = [&] {
      auto      l = load(src);
      ConedView view(l->ps, radius);
      auto      g    = materialize(view, {Vertex::element({})}, depth.value_or(lmax / 2));
      auto      base = *g.find_element({});
      auto      t    = coarse_table(g, base, m, lmax, CoarseTableOptions{ccaps, threads});
      if (t.budget_exhausted) {
        throw Partial{to_tsv(t)};
      }
      return to_tsv(t);
    };
  });

  // hausdorff
  std::string a_text, b_text;
  auto*       haus = app.add_subcommand("hausdorff", "truncated Hausdorff distance of two cosets");
  src.add(haus);
  haus->add_option("--A", a_text, "first coset, P or w*P")->required();
  haus->add_option("--B", b_text, "second coset")->required();
  haus->add_option("--radii", radii, "radius schedule")->delimiter(',');
  haus->callback([&] {
    run = [&] {
      check_radii(radii);
      auto l = load(src);
      auto v = hausdorff_truncated(l->ps, require_coset(*l, a_text), require_coset(*l, b_text), radii,
                                   threads);
      return dump(hausdorff_json(v));
    };
  });

  // dotq
  std::string            spec_path;
  std::optional<std::size_t> qi_radius;
  std::optional<double>  scale;
  bool                   hat = false;
  auto* dotq = app.add_subcommand("dotq", "coset relation of a map between pairs");
  dotq->add_option("--spec", spec_path, "pair-spec file")->required();
  dotq->add_option("--radius,-r", qi_radius, "truncation radius (default: last of the spec radii)");
  dotq->add_option("--M", scale, "Hausdorff scale (default: from the spec)");
  dotq->add_flag("--hat", hat, "also check the induced map on coned-off graphs");
  dotq->callback([&] {
    run = [&] {
      auto spec = parse_pair_spec(detail::read_file(spec_path),
                                  std::filesystem::path(spec_path).parent_path());
      if (app.get_option("--seed")->count() > 0) {
        spec.seed = seed;
      }
      QIPair pair(std::move(spec));
      auto   v = pair.validate(pair.spec().radii.front());
      if (!v.ok()) {
        throw Error("map violates the declared (L, C) bounds on " + std::to_string(v.violations)
                    + " of " + std::to_string(v.pairs) + " sampled pairs");
      }
      std::size_t r = qi_radius.value_or(pair.spec().radii.back());
      auto        j = to_json(check_pair_qi(pair, r, scale), pair);
      if (hat) {
        j["induced"] = to_json(induced_hat_q_check(pair, r));
      }
      return dump(j);
    };
  });

  // malnormal
  std::size_t                n = 1;
  std::optional<std::size_t> sweep_radius;
  auto* mal = app.add_subcommand("malnormal", "neighbourhood intersections of coset pairs");
  src.add(mal);
  mal->add_option("--A", a_text, "first coset, P or w*P");
  mal->add_option("--B", b_text, "second coset");
  mal->add_option("--n", n, "neighbourhood radius");
  mal->add_option("--radii", radii, "radius schedule")->delimiter(',');
  mal->add_option("--sweep", sweep_radius, "check every pair of cosets meeting this ball");
  mal->callback([&] {
    run = [&] {
      check_radii(radii);
      auto l = load(src);
      if (sweep_radius) {
        return dump(to_json(malnormal_sweep(l->ps, *sweep_radius, n, radii, threads), l->rp));
      }
      if (a_text.empty() || b_text.empty()) {
        throw UsageError("give --A and --B, or --sweep");
      }
      auto res = malnormal_check(l->ps, require_coset(*l, a_text), require_coset(*l, b_text), n,
                                 radii, threads);
      return dump(to_json(res, l->rp));
    };
  });

  // commensurable
  std::string p_name = "P1", q_name, g_text = "1";
  std::size_t sample = 1;
  auto* comm = app.add_subcommand("commensurable", "commensurability certificate for P and gQg^-1");
  src.add(comm);
  comm->add_option("--P", p_name, "peripheral subgroup");
  comm->add_option("--Q", q_name, "peripheral subgroup (default: P)");
  comm->add_option("--g", g_text, "conjugating element");
  comm->add_option("--radii", radii, "radius schedule")->delimiter(',');
  comm->add_option("--sample", sample, "radius of the ball sampled by the reduced spot checks");
  comm->callback([&] {
    run = [&] {
      check_radii(radii);
      auto l = load(src);
      auto p = l->rp.peripheral_index(p_name);
      auto q = l->rp.peripheral_index(q_name.empty() ? p_name : q_name);
      if (!p || !q) {
        throw UsageError("unknown peripheral subgroup");
      }
      auto rep = commensurability_certificate(l->ps, *p, element(*l, g_text), *q, radii, sample, threads);
      return dump(to_json(rep, l->rp));
    };
  });

  // refine
  auto* refine = app.add_subcommand("refine", "refine peripherals by supplied commensurators");
  refine->add_option("--spec", spec_path, "pair-spec file with commensurator entries")->required();
  refine->add_option("--radius,-r", qi_radius, "truncation radius");
  refine->callback([&] {
    run = [&] {
      auto spec = parse_pair_spec(detail::read_file(spec_path),
                                  std::filesystem::path(spec_path).parent_path());
      auto src_side = std::make_unique<Loaded>(spec.source);
      auto refined  = refined_presentation(spec.source, src_side->wp, spec.commensurators);
      QIPairSpec id;
      id.source = spec.source;
      id.target = refined;
      id.M      = spec.M;
      id.seed   = app.get_option("--seed")->count() > 0 ? seed : spec.seed;
      QIPair      pair(std::move(id));
      std::size_t r = qi_radius.value_or(spec.radii.back());
      json        j;
      j["refined"]  = print(refined);
      j["identity"] = to_json(check_pair_qi(pair, r), pair);
      return dump(j);
    };
  });

  // corpus
  auto* corp = app.add_subcommand("corpus", "list built-in presentations");
  corp->callback([&] {
    run = [&] {
      std::ostringstream out;
      out << "id\tdescription\tgroup\tchoices\n";
      for (auto const& e : corpus()) {
        std::string choices;
        for (auto const& c : e.choices) {
          choices += (choices.empty() ? "" : " ") + e.id + ":" + c;
        }
        out << e.id << '\t' << e.description << '\t' << e.group << '\t' << choices << '\n';
      }
      return out.str();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const& e) {
    return app.exit(e);
  } catch (CLI::CallForAllHelp const& e) {
    return app.exit(e);
  } catch (CLI::ParseError const& e) {
    std::cerr << "relpair: " << e.what() << "\n";
    return 1;
  }

  auto emit = [&](std::string const& text) {
    if (output.empty()) {
      std::cout << text;
      return true;
    }
    std::ofstream out(output);
    if (!out) {
      std::cerr << "relpair: cannot write " << output << "\n";
      return false;
    }
    out << text;
    return true;
  };

  try {
    return emit(run()) ? 0 : 1;
  } catch (Partial const& p) {
    std::cerr << "relpair: budget exhausted; output is partial\n";
    emit(p.text);
    return 2;
  } catch (BudgetExhausted const& e) {
    std::cerr << "relpair: " << e.what() << "\n";
    return 2;
  } catch (Unsupported const& e) {
    std::cerr << "relpair: Unsupported: " << e.what() << "\n";
    return 1;
  } catch (std::exception const& e) {
    std::cerr << "relpair: " << e.what() << "\n";
    return 1;
  }
}
