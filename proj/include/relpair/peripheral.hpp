// Peripheral subgroups seen from the ambient group: local word problems,
// element enumeration by local length, membership and block normal forms.

#ifndef RELPAIR_PERIPHERAL_HPP_
#define RELPAIR_PERIPHERAL_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "presentation.hpp"
#include "wordproblem.hpp"

namespace relpair {

  // Presentation of P over its local generators (one per inclusion word).
  inline RelativePresentation local_presentation(PeripheralSubgroup const& p) {
    RelativePresentation lp;
    std::size_t const    k = p.inclusion.size();
    for (std::size_t i = 0; i < k; ++i) {
      lp.symbols.push_back({"p" + std::to_string(i), SymbolKind::standard, 0});
    }
    std::vector<Word> rels;
    std::visit(
        [&](auto const& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FiniteTableStrategy>) {
            auto const&              t = s.table;
            std::vector<std::size_t> local(t.size(), 0);
            for (std::size_t e = 0, j = 0; e < t.size(); ++e) {
              if (e != t.identity) {
                local[e] = j++;
              }
            }
            for (std::size_t a = 0; a < t.size(); ++a) {
              for (std::size_t b = 0; b < t.size(); ++b) {
                if (a == t.identity || b == t.identity) {
                  continue;
                }
                Word        r = {Letter::generator(local[a]), Letter::generator(local[b])};
                std::size_t c = t.product[a][b];
                if (c != t.identity) {
                  r.push_back(Letter::generator(local[c], true));
                }
                rels.push_back(r);
              }
            }
          } else if constexpr (std::is_same_v<T, FreeAbelianStrategy>) {
            for (std::size_t i = 0; i < k; ++i) {
              for (std::size_t j = i + 1; j < k; ++j) {
                rels.push_back({Letter::generator(i), Letter::generator(j),
                                Letter::generator(i, true), Letter::generator(j, true)});
              }
            }
          } else if constexpr (std::is_same_v<T, PresentedStrategy>) {
            rels = s.presentation.relators;
          }
        },
        p.strategy);
    lp.relators = canonical_relators(rels);
    return lp;
  }

  class PeripheralStructure {
   public:
    PeripheralStructure(RelativePresentation const& rp, WordProblem const& wp)
        : rp_(&rp), wp_(&wp), owner_(rp.alphabet_size()) {
      for (std::size_t pid = 0; pid < rp.peripherals.size(); ++pid) {
        auto const& p = rp.peripherals[pid];
        Local       loc;
        loc.wp = std::make_unique<WordProblem>(local_presentation(p));
        for (std::size_t k = 0; k < p.inclusion.size(); ++k) {
          auto const& w = p.inclusion[k];
          if (w.size() == 1 && !w[0].inverted()) {
            std::size_t x = w[0].index();
            if (loc.local_of.count(x) == 0) {
              loc.local_of[x] = k;
            }
          }
        }
        for (auto const& [x, k] : loc.local_of) {
          if (owner_[x] && *owner_[x] != pid) {
            blocks_supported_ = false;
            reason_ = "peripheral subgroups " + rp.peripherals[*owner_[x]].name + " and "
                      + p.name + " share the letter " + rp.symbols[x].name;
          }
          owner_[x] = pid;
        }
        for (auto const& w : p.inclusion) {
          for (Letter x : w) {
            if (loc.local_of.count(x.index()) == 0) {
              blocks_supported_ = false;
              reason_ = "inclusion of " + p.name + " is not a word in its single-letter generators";
            }
          }
        }
        if (p.inclusion.empty()) {
          blocks_supported_ = false;
          reason_           = p.name + " has no inclusion into the ambient group";
        }
        locals_.push_back(std::move(loc));
      }
    }

    PeripheralStructure(PeripheralStructure const&)            = delete;
    PeripheralStructure& operator=(PeripheralStructure const&) = delete;

    std::size_t count() const noexcept {
      return locals_.size();
    }
    RelativePresentation const& presentation() const noexcept {
      return *rp_;
    }
    WordProblem const& ambient() const noexcept {
      return *wp_;
    }
    WordProblem const& local(std::size_t pid) const {
      return *locals_.at(pid).wp;
    }

    // Peripheral subgroup whose single-letter generators include `letter`.
    std::optional<std::size_t> owner(std::size_t letter) const {
      return letter < owner_.size() ? owner_[letter] : std::nullopt;
    }

    // Whether words over S u P can be split into peripheral blocks.
    bool blocks_supported() const noexcept {
      return blocks_supported_;
    }
    std::string const& unsupported_reason() const noexcept {
      return reason_;
    }

    // Exact local word problem for P.
    bool exact(std::size_t pid) const {
      return locals_.at(pid).wp->exact();
    }

    // Ambient word of a local word.
    Word include(std::size_t pid, std::span<Letter const> local_word) const {
      auto const& incl = rp_->peripherals.at(pid).inclusion;
      Word        out;
      for (Letter x : local_word) {
        Word const& w = incl.at(x.index());
        if (x.inverted()) {
          Word wi = inverse(w);
          out.insert(out.end(), wi.begin(), wi.end());
        } else {
          out.insert(out.end(), w.begin(), w.end());
        }
      }
      return out;
    }

    // Local word of a block of ambient letters owned by pid.
    Word to_local(std::size_t pid, std::span<Letter const> block) const {
      auto const& loc = locals_.at(pid);
      Word        out;
      for (Letter x : block) {
        auto it = loc.local_of.find(x.index());
        if (it == loc.local_of.end()) {
          throw Unsupported("letter outside peripheral generators");
        }
        out.push_back(Letter::generator(it->second, x.inverted()));
      }
      return out;
    }

    // Canonical block: local normal form written back in ambient letters.
    Word block_normal_form(std::size_t pid, std::span<Letter const> block) const {
      return include(pid, local(pid).normal_form(to_local(pid, block)).word);
    }

    // Local length of a block, the number of peripheral letters it spells.
    std::size_t block_length(std::size_t pid, std::span<Letter const> block) const {
      return local(pid).normal_form(to_local(pid, block)).word.size();
    }

    // Elements of P with local length <= len, as ambient normal forms,
    // paired with their local length; sorted by (local length, shortlex).
    std::vector<std::pair<Word, std::size_t>> elements(std::size_t pid, std::size_t len) const {
      auto& loc = locals_.at(pid);
      std::lock_guard lock(*loc.mutex);
      extend(loc, pid, len);
      std::vector<std::pair<Word, std::size_t>> out;
      for (auto const& [w, l] : loc.listed) {
        if (l <= len) {
          out.emplace_back(w, l);
        }
      }
      return out;
    }

    // Local length of the ambient element g if it lies in P with local
    // length <= len.
    std::optional<std::size_t> local_length(std::size_t pid, Word const& g, std::size_t len) const {
      Word  nf  = wp_->normal_form(g).word;
      auto& loc = locals_.at(pid);
      std::lock_guard lock(*loc.mutex);
      extend(loc, pid, len);
      auto it = loc.length.find(nf);
      if (it == loc.length.end() || it->second > len) {
        return std::nullopt;
      }
      return it->second;
    }

    // Membership test of g in P, searching P up to local length
    // factor * |g| + slack.
    bool contains(std::size_t pid, Word const& g, std::size_t factor = 1, std::size_t slack = 0) const {
      Word nf = wp_->normal_form(g).word;
      auto const& p = rp_->peripherals.at(pid);
      if (std::holds_alternative<FiniteTableStrategy>(p.strategy)) {
        return local_length(pid, nf, local(pid).finite_order() + 1).has_value();
      }
      return local_length(pid, nf, factor * nf.size() + slack).has_value();
    }

   private:
    struct Local {
      std::unique_ptr<WordProblem>                    wp;
      std::map<std::size_t, std::size_t>              local_of;  // ambient letter -> local generator
      std::unique_ptr<std::mutex>                     mutex = std::make_unique<std::mutex>();
      std::size_t                                     built   = 0;
      bool                                            started = false;
      std::vector<std::pair<Word, std::size_t>>       listed;
      std::unordered_map<Word, std::size_t, WordHash> length;
      std::vector<Word>                               frontier;  // local normal forms at depth `built`
      std::unordered_map<Word, bool, WordHash>        seen_local;
    };

    void record(Local& loc, std::size_t pid, Word const& local_nf, std::size_t depth) const {
      Word amb = wp_->normal_form(include(pid, local_nf)).word;
      if (loc.length.emplace(amb, depth).second) {
        loc.listed.emplace_back(amb, depth);
      }
    }

    // Breadth-first enumeration of P by local length, resumable.
    void extend(Local& loc, std::size_t pid, std::size_t len) const {
      auto const& lwp = *loc.wp;
      if (!loc.started) {
        loc.started = true;
        loc.frontier = {Word{}};
        loc.seen_local.emplace(Word{}, true);
        record(loc, pid, Word{}, 0);
      }
      while (loc.built < len && !loc.frontier.empty()) {
        std::vector<Word> next;
        for (auto const& u : loc.frontier) {
          for (std::size_t code = 0; code < 2 * lwp.alphabet_size(); ++code) {
            Word v  = concat(u, Word{Letter::from_code(static_cast<std::uint16_t>(code))});
            Word nf = lwp.normal_form(v).word;
            if (loc.seen_local.emplace(nf, true).second) {
              next.push_back(nf);
            }
          }
        }
        std::sort(next.begin(), next.end(), ShortlexLess{});
        ++loc.built;
        for (auto const& nf : next) {
          record(loc, pid, nf, loc.built);
        }
        loc.frontier = std::move(next);
      }
    }

    RelativePresentation const*             rp_;
    WordProblem const*                      wp_;
    std::vector<std::optional<std::size_t>> owner_;
    mutable std::vector<Local>              locals_;
    bool                                    blocks_supported_ = true;
    std::string                             reason_;
  };

}  // namespace relpair

#endif  // RELPAIR_PERIPHERAL_HPP_
