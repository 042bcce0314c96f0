// Pair-spec files. A TOML document such as
//
//   source = "f2.pres"        # path, relative to the spec file
//   target_corpus = "F2:a"    # or a built-in reference
//   map.a = "b"               # generator substitution; or map = "identity"
//   L = 1
//   C = 0
//   M = 1
//   radii = [4, 6]
//   seed = 7
//   commensurator.P1 = ["a"]
//
// A finite map is given as a [table] of source word -> target word instead
// of map. Presentations may also be inline via source_text / target_text.

#ifndef RELPAIR_PAIRSPEC_HPP_
#define RELPAIR_PAIRSPEC_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "corpus.hpp"
#include "pairs.hpp"

namespace relpair {

  namespace detail {
    inline std::string read_file(std::filesystem::path const& p) {
      std::ifstream in(p);
      if (!in) {
        throw Error("cannot read " + p.string());
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }

    inline RelativePresentation spec_side(toml::table const& t, std::string const& side,
                                          std::filesystem::path const& dir) {
      ParseOptions opts;
      opts.base_dir = dir;
      if (auto path = t[side].value<std::string>()) {
        auto full     = dir / *path;
        opts.base_dir = full.parent_path();
        return parse_presentation(read_file(full), opts);
      }
      if (auto text = t[side + "_text"].value<std::string>()) {
        return parse_presentation(*text, opts);
      }
      if (auto ref = t[side + "_corpus"].value<std::string>()) {
        return corpus_presentation(*ref);
      }
      throw Error("pair spec names no " + side + " presentation");
    }

    inline double spec_number(toml::table const& t, std::string const& key, double fallback) {
      auto node = t[key];
      if (!node) {
        return fallback;
      }
      if (auto v = node.value<double>()) {
        return *v;
      }
      throw Error("pair spec key " + key + " must be a number");
    }
  }  // namespace detail

  inline QIPairSpec parse_pair_spec(std::string_view text, std::filesystem::path const& dir = ".") {
    toml::table t;
    try {
      t = toml::parse(text);
    } catch (toml::parse_error const& e) {
      auto const& where = e.source().begin;
      throw SyntaxError(where.line, where.column, std::string(e.description()));
    }
    QIPairSpec spec;
    spec.source = detail::spec_side(t, "source", dir);
    spec.target = detail::spec_side(t, "target", dir);

    auto map = t["map"];
    if (auto tab = t["table"].as_table()) {
      spec.map.kind = QIMap::Kind::table;
      WordProblem swp(spec.source);
      for (auto const& [key, value] : *tab) {
        auto img = value.value<std::string>();
        if (!img) {
          throw Error("table entries must be words");
        }
        spec.map.table[swp.normal_form(parse_word(key.str(), spec.source)).word] =
            parse_word(*img, spec.target);
      }
    } else if (auto name = map.value<std::string>()) {
      if (*name != "identity") {
        throw Error("unknown map '" + *name + "'");
      }
      spec.map.kind = QIMap::Kind::identity;
    } else if (auto sub = map.as_table()) {
      spec.map.kind = QIMap::Kind::substitution;
      spec.map.images.assign(spec.source.alphabet_size(), Word{});
      std::vector<bool> given(spec.source.alphabet_size(), false);
      for (auto const& [key, value] : *sub) {
        auto idx = spec.source.symbol_index(key.str());
        if (!idx) {
          throw UndeclaredSymbol(std::string(key.str()));
        }
        auto img = value.value<std::string>();
        if (!img) {
          throw Error("map." + std::string(key.str()) + " must be a word");
        }
        spec.map.images[*idx] = parse_word(*img, spec.target);
        given[*idx]           = true;
      }
      for (std::size_t i = 0; i < given.size(); ++i) {
        if (!given[i]) {
          throw Error("map gives no image for " + spec.source.symbols[i].name);
        }
      }
    } else if (map) {
      throw Error("map must be \"identity\" or a table of images");
    }

    spec.L = detail::spec_number(t, "L", 1);
    spec.C = detail::spec_number(t, "C", 0);
    spec.M = detail::spec_number(t, "M", 1);
    if (auto seed = t["seed"].value<std::int64_t>()) {
      spec.seed = static_cast<std::uint64_t>(*seed);
    }
    if (auto radii = t["radii"].as_array()) {
      spec.radii.clear();
      for (auto const& r : *radii) {
        auto v = r.value<std::int64_t>();
        if (!v || *v < 0) {
          throw Error("radii must be nonnegative integers");
        }
        if (!spec.radii.empty() && static_cast<std::size_t>(*v) <= spec.radii.back()) {
          throw Error("radii must increase strictly");
        }
        spec.radii.push_back(static_cast<std::size_t>(*v));
      }
      if (spec.radii.empty()) {
        throw Error("radii must not be empty");
      }
    }
    if (auto comm = t["commensurator"].as_table()) {
      for (auto const& [key, value] : *comm) {
        auto arr = value.as_array();
        if (!arr) {
          throw Error("commensurator." + std::string(key.str()) + " must be a list of words");
        }
        auto& gens = spec.commensurators[std::string(key.str())];
        for (auto const& w : *arr) {
          auto s = w.value<std::string>();
          if (!s) {
            throw Error("commensurator generators must be words");
          }
          gens.push_back(parse_word(*s, spec.source));
        }
      }
    }
    return spec;
  }

  // Parses and validates: the declared (L, C) bounds must hold on the
  // interior of the first radius.
  inline std::unique_ptr<QIPair> load_pair_spec(std::filesystem::path const& path) {
    auto pair = std::make_unique<QIPair>(
        parse_pair_spec(detail::read_file(path), path.parent_path()));
    auto v = pair->validate(pair->spec().radii.front());
    if (!v.ok()) {
      throw Error("map violates the declared (L, C) bounds on " + std::to_string(v.violations)
                  + " of " + std::to_string(v.pairs) + " sampled pairs");
    }
    return pair;
  }

}  // namespace relpair

#endif  // RELPAIR_PAIRSPEC_HPP_
