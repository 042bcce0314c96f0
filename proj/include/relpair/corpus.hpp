// Built-in presentations with their standard peripheral choices.
//
// A corpus reference is ID or ID:choice, where a choice lists peripheral
// subgroups separated by ';' and their generators separated by ','. So
// "F2:a" is F(a,b) relative to <a> and "F2:a;b" is F(a,b) relative to <a>
// and <b>.

#ifndef RELPAIR_CORPUS_HPP_
#define RELPAIR_CORPUS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "presentation.hpp"

namespace relpair {

  struct CorpusEntry {
    std::string              id;
    std::string              description;
    std::string              group;    // "group <...>" line
    std::vector<std::string> choices;  // standard peripheral choices
  };

  inline std::vector<CorpusEntry> const& corpus() {
    static std::vector<CorpusEntry> const entries = {
        {"F2", "free group of rank two", "group <a,b | >", {"a", "a;b", "a,b"}},
        {"Z2", "free abelian group of rank two", "group <a,b | [a,b]>", {"a", "a,b"}},
        {"Z3", "cyclic group of order three", "group <a | a^3>", {"a"}},
        {"Klein", "Klein bottle group", "group <a,b | a b a b->", {"a", "b"}},
        {"FreeZZ2", "free product of Z and Z/2", "group <a,b | b^2>", {"b", "a", "a;b"}},
    };
    return entries;
  }

  inline CorpusEntry const& corpus_entry(std::string_view id) {
    for (auto const& e : corpus()) {
      if (e.id == id) {
        return e;
      }
    }
    throw Error("unknown corpus entry '" + std::string(id) + "'");
  }

  // Presentation text for ID or ID:choice.
  inline std::string corpus_text(std::string_view ref) {
    auto        colon = ref.find(':');
    auto const& entry = corpus_entry(ref.substr(0, colon));
    std::string text  = entry.group + "\n";
    if (colon == std::string_view::npos) {
      return text;
    }
    std::string_view choice = ref.substr(colon + 1);
    std::size_t      k      = 0;
    while (!choice.empty()) {
      auto        semi = choice.find(';');
      std::string gens(choice.substr(0, semi));
      if (gens.empty()) {
        throw Error("empty peripheral in corpus reference '" + std::string(ref) + "'");
      }
      text += "rel P" + std::to_string(++k) + " = <" + gens + ">\n";
      choice = semi == std::string_view::npos ? std::string_view{} : choice.substr(semi + 1);
    }
    return text;
  }

  inline RelativePresentation corpus_presentation(std::string_view ref) {
    return parse_presentation(corpus_text(ref));
  }

}  // namespace relpair

#endif  // RELPAIR_CORPUS_HPP_
