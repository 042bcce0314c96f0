// Budgeted HLT coset enumeration over the trivial subgroup.

#ifndef RELPAIR_TODD_COXETER_HPP_
#define RELPAIR_TODD_COXETER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "word.hpp"

namespace relpair::detail {

  // table[c][code] is the coset reached from c by the letter with that code.
  struct CosetTable {
    std::vector<std::vector<std::uint32_t>> table;
  };

  class ToddCoxeter {
   public:
    static constexpr std::uint32_t undef = static_cast<std::uint32_t>(-1);

    ToddCoxeter(std::size_t generators, std::vector<Word> relators, std::size_t max_cosets)
        : letters_(2 * generators), relators_(std::move(relators)), max_(max_cosets) {}

    // Returns the complete table, or nullopt if the coset budget ran out.
    std::optional<CosetTable> run() {
      new_coset();
      for (std::uint32_t c = 0; c < table_.size(); ++c) {
        if (!alive(c)) {
          continue;
        }
        for (auto const& r : relators_) {
          if (!alive(c)) {
            break;
          }
          scan_and_fill(c, r);
          if (overflow_) {
            return std::nullopt;
          }
        }
        for (std::size_t x = 0; x < letters_ && alive(c); ++x) {
          if (table_[c][x] == undef) {
            define(c, x);
            if (overflow_) {
              return std::nullopt;
            }
          }
        }
      }
      // Compact the surviving cosets, keeping coset 0 first.
      std::vector<std::uint32_t> renum(table_.size(), undef);
      std::uint32_t              n = 0;
      for (std::uint32_t c = 0; c < table_.size(); ++c) {
        if (alive(c)) {
          renum[c] = n++;
        }
      }
      CosetTable out;
      out.table.assign(n, std::vector<std::uint32_t>(letters_));
      for (std::uint32_t c = 0; c < table_.size(); ++c) {
        if (alive(c)) {
          for (std::size_t x = 0; x < letters_; ++x) {
            out.table[renum[c]][x] = renum[rep(table_[c][x])];
          }
        }
      }
      return out;
    }

   private:
    static std::size_t inv(std::size_t x) {
      return x ^ 1U;
    }

    bool alive(std::uint32_t c) const {
      return parent_[c] == c;
    }

    std::uint32_t rep(std::uint32_t c) {
      std::uint32_t r = c;
      while (parent_[r] != r) {
        r = parent_[r];
      }
      while (parent_[c] != r) {
        std::uint32_t next = parent_[c];
        parent_[c]         = r;
        c                  = next;
      }
      return r;
    }

    std::uint32_t new_coset() {
      if (table_.size() >= max_) {
        overflow_ = true;
        return undef;
      }
      auto c = static_cast<std::uint32_t>(table_.size());
      table_.emplace_back(letters_, undef);
      parent_.push_back(c);
      return c;
    }

    void define(std::uint32_t c, std::size_t x) {
      std::uint32_t d = new_coset();
      if (d == undef) {
        return;
      }
      table_[c][x]      = d;
      table_[d][inv(x)] = c;
    }

    void scan_and_fill(std::uint32_t c, Word const& w) {
      std::uint32_t f = c, b = c;
      std::size_t   i = 0;
      std::size_t   j = w.size();  // letters w[i..j) still unscanned
      for (;;) {
        while (i < j && table_[f][w[i].code()] != undef) {
          f = table_[f][w[i].code()];
          ++i;
        }
        if (i == j) {
          if (f != b) {
            coincidence(f, b);
          }
          return;
        }
        while (j > i && table_[b][inv(w[j - 1].code())] != undef) {
          b = table_[b][inv(w[j - 1].code())];
          --j;
        }
        if (j == i) {
          coincidence(f, b);
          return;
        }
        if (j == i + 1) {
          table_[f][w[i].code()]      = b;
          table_[b][inv(w[i].code())] = f;
          return;
        }
        define(f, w[i].code());
        if (overflow_) {
          return;
        }
      }
    }

    void merge(std::uint32_t k, std::uint32_t l, std::vector<std::uint32_t>& queue) {
      k = rep(k);
      l = rep(l);
      if (k == l) {
        return;
      }
      if (k > l) {
        std::swap(k, l);
      }
      parent_[l] = k;
      queue.push_back(l);
    }

    void coincidence(std::uint32_t a, std::uint32_t b) {
      std::vector<std::uint32_t> queue;
      merge(a, b, queue);
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        std::uint32_t c = queue[qi];
        for (std::size_t x = 0; x < letters_; ++x) {
          std::uint32_t d = table_[c][x];
          if (d == undef) {
            continue;
          }
          table_[d][inv(x)] = undef;
          std::uint32_t e   = rep(c);
          std::uint32_t f   = rep(d);
          if (table_[e][x] != undef) {
            merge(f, table_[e][x], queue);
          } else if (table_[f][inv(x)] != undef) {
            merge(e, table_[f][inv(x)], queue);
          } else {
            table_[e][x]      = f;
            table_[f][inv(x)] = e;
          }
        }
      }
    }

    std::size_t                             letters_;
    std::vector<Word>                       relators_;
    std::size_t                             max_;
    std::vector<std::vector<std::uint32_t>> table_;
    std::vector<std::uint32_t>              parent_;
    bool                                    overflow_ = false;
  };

}  // namespace relpair::detail

#endif  // RELPAIR_TODD_COXETER_HPP_
