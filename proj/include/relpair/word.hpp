// Letters and words over a finite alphabet of generators and their inverses.
//
// A letter is stored as the code 2*i + inv, so the natural order on codes is
// the declared generator order with each generator immediately followed by its
// inverse (a < a^-1 < b < b^-1 < ...). Shortlex over this order is the
// canonical order used throughout the library.

#ifndef RELPAIR_WORD_HPP_
#define RELPAIR_WORD_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace relpair {

  class Letter {
   public:
    constexpr Letter() = default;

    static constexpr Letter generator(std::size_t index, bool inverted = false) {
      return Letter(static_cast<std::uint16_t>(2 * index + (inverted ? 1 : 0)));
    }

    static constexpr Letter from_code(std::uint16_t code) {
      return Letter(code);
    }

    constexpr std::size_t index() const noexcept {
      return code_ >> 1;
    }
    constexpr bool inverted() const noexcept {
      return (code_ & 1U) != 0;
    }
    constexpr Letter inverse() const noexcept {
      return Letter(static_cast<std::uint16_t>(code_ ^ 1U));
    }
    constexpr std::uint16_t code() const noexcept {
      return code_;
    }
    // +1 or -1
    constexpr int sign() const noexcept {
      return inverted() ? -1 : 1;
    }

    constexpr auto operator<=>(Letter const&) const = default;

   private:
    constexpr explicit Letter(std::uint16_t code) : code_(code) {}
    std::uint16_t code_ = 0;
  };

  using Word = std::vector<Letter>;

  struct WordHash {
    std::size_t operator()(Word const& w) const noexcept {
      std::uint64_t h = 1469598103934665603ULL;
      for (Letter x : w) {
        h ^= x.code() + 1;
        h *= 1099511628211ULL;
      }
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  // Shortlex: shorter first, then lexicographic on letter codes.
  inline bool shortlex_less(std::span<Letter const> u, std::span<Letter const> v) {
    if (u.size() != v.size()) {
      return u.size() < v.size();
    }
    return std::lexicographical_compare(u.begin(), u.end(), v.begin(), v.end());
  }

  struct ShortlexLess {
    bool operator()(Word const& u, Word const& v) const {
      return shortlex_less(u, v);
    }
  };

  inline Word inverse(std::span<Letter const> w) {
    Word out;
    out.reserve(w.size());
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      out.push_back(it->inverse());
    }
    return out;
  }

  inline Word concat(std::span<Letter const> u, std::span<Letter const> v) {
    Word out(u.begin(), u.end());
    out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  // Unique freely reduced representative, computed with a single stack pass.
  inline Word free_reduce(std::span<Letter const> w) {
    Word out;
    out.reserve(w.size());
    for (Letter x : w) {
      if (!out.empty() && out.back() == x.inverse()) {
        out.pop_back();
      } else {
        out.push_back(x);
      }
    }
    return out;
  }

  inline bool is_freely_reduced(std::span<Letter const> w) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i] == w[i - 1].inverse()) {
        return false;
      }
    }
    return true;
  }

  // Freely and cyclically reduce.
  inline Word cyclic_reduce(std::span<Letter const> w) {
    Word r = free_reduce(w);
    std::size_t lo = 0, hi = r.size();
    while (hi - lo >= 2 && r[lo] == r[hi - 1].inverse()) {
      ++lo;
      --hi;
    }
    return Word(r.begin() + lo, r.begin() + hi);
  }

  inline Word rotate_left(std::span<Letter const> w, std::size_t k) {
    Word out;
    out.reserve(w.size());
    if (w.empty()) {
      return out;
    }
    k %= w.size();
    out.insert(out.end(), w.begin() + k, w.end());
    out.insert(out.end(), w.begin(), w.begin() + k);
    return out;
  }

  // Offset of the lexicographically least rotation; O(n^2), words stay short.
  inline std::size_t least_rotation_offset(std::span<Letter const> w) {
    std::size_t const n = w.size();
    std::size_t best    = 0;
    for (std::size_t k = 1; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        Letter x = w[(k + i) % n], y = w[(best + i) % n];
        if (x != y) {
          if (x < y) {
            best = k;
          }
          break;
        }
      }
    }
    return best;
  }

  inline Word least_rotation(std::span<Letter const> w) {
    return rotate_left(w, least_rotation_offset(w));
  }

  // Sum of exponents of generator `index` in w.
  inline long exponent_sum(std::span<Letter const> w, std::size_t index) {
    long s = 0;
    for (Letter x : w) {
      if (x.index() == index) {
        s += x.sign();
      }
    }
    return s;
  }

  inline Word power(std::span<Letter const> w, long n) {
    Word base = n < 0 ? inverse(w) : Word(w.begin(), w.end());
    Word out;
    for (long i = 0; i < (n < 0 ? -n : n); ++i) {
      out.insert(out.end(), base.begin(), base.end());
    }
    return out;
  }

  // Prints w with run-length powers: a^3*b-*a^-2. The empty word prints as 1.
  inline std::string to_string(std::span<Letter const> w,
                               std::vector<std::string> const& names) {
    if (w.empty()) {
      return "1";
    }
    std::string out;
    std::size_t i = 0;
    while (i < w.size()) {
      std::size_t j = i;
      while (j < w.size() && w[j] == w[i]) {
        ++j;
      }
      long run = static_cast<long>(j - i);
      if (!out.empty()) {
        out += '*';
      }
      std::string const& name = names.at(w[i].index());
      if (run == 1) {
        out += name;
        if (w[i].inverted()) {
          out += '-';
        }
      } else {
        out += name + "^" + std::to_string(w[i].inverted() ? -run : run);
      }
      i = j;
    }
    return out;
  }

}  // namespace relpair

template <>
struct std::hash<relpair::Letter> {
  std::size_t operator()(relpair::Letter x) const noexcept {
    return x.code();
  }
};

#endif  // RELPAIR_WORD_HPP_
