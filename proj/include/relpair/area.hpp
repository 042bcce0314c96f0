// Area of null-homotopic words by least-cost rewriting, relative area with
// free peripheral cells, and Dehn / relative Dehn tables.

#ifndef RELPAIR_AREA_HPP_
#define RELPAIR_AREA_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "peripheral.hpp"
#include "presentation.hpp"
#include "rewriting.hpp"
#include "wordproblem.hpp"

namespace relpair {

  struct AreaCaps {
    std::size_t maxlen         = 0;  // 0: 2|w| + 2 max|r|
    std::size_t ambient_maxlen = 0;  // relative searches only; 0: same rule on letters
    std::size_t node_budget    = 400'000;
  };

  struct AreaCertificate {
    Word                       input;
    std::optional<std::size_t> upper;  // cost of the witness, if one was found
    std::size_t                lower   = 0;
    bool                       optimal = false;
    bool                       relative = false;
    std::vector<Move>          moves;
    std::size_t                maxlen         = 0;
    std::size_t                ambient_maxlen = 0;
    std::size_t                node_budget    = 0;
    std::size_t                nodes          = 0;

    std::size_t cost() const {
      return upper.value_or(std::numeric_limits<std::size_t>::max());
    }
  };

  inline std::size_t max_length(std::vector<Word> const& ws) {
    std::size_t m = 0;
    for (auto const& w : ws) {
      m = std::max(m, w.size());
    }
    return m;
  }

  inline AreaCertificate certificate_from(Word const& w, SearchResult&& res) {
    AreaCertificate cert;
    cert.input = w;
    cert.nodes = res.nodes;
    if (res.found) {
      cert.upper   = res.cost;
      cert.lower   = res.cost;
      cert.optimal = true;
      cert.moves   = std::move(res.moves);
    } else if (res.exhausted) {
      cert.lower = res.lower_bound;
    }
    return cert;
  }

  // Least number of relator cells in a filling of w, searching cyclic words
  // of length <= maxlen.
  inline AreaCertificate area(Word const& w, WordProblem const& wp, AreaCaps caps = {}) {
    if (wp.exact() && !wp.normal_form(w).word.empty()) {
      throw NotNullHomotopic("word is not trivial in the group");
    }
    std::size_t maxlen = caps.maxlen != 0 ? caps.maxlen
                                          : 2 * w.size() + 2 * max_length(wp.relators());
    auto        cert   = certificate_from(w, wp.find_filling(w, maxlen, caps.node_budget));
    cert.maxlen        = maxlen;
    cert.node_budget   = caps.node_budget;
    return cert;
  }

  inline bool replay_area(AreaCertificate const& cert, WordProblem const& wp) {
    if (!cert.upper || cert.moves.size() != *cert.upper) {
      return false;
    }
    try {
      return wp.replay(cert.input, cert.moves).empty();
    } catch (std::out_of_range const&) {
      return false;
    }
  }

  // Relative words are handled as ambient words in which every maximal run
  // of letters owned by one peripheral subgroup is a single peripheral
  // letter, kept in its local normal form.
  class RelativeArea {
   public:
    explicit RelativeArea(PeripheralStructure const& ps)
        : ps_(&ps), relators_(ps.presentation().relators) {
      if (!ps.blocks_supported()) {
        throw Unsupported(ps.unsupported_reason());
      }
      conjugates_ = relator_conjugates(relators_);
      std::size_t const        n = ps.presentation().alphabet_size();
      std::vector<std::size_t> forbidden;
      for (std::size_t x = 0; x < n; ++x) {
        if (auto pid = ps.owner(x)) {
          auto const& s = ps.presentation().peripherals[*pid].strategy;
          bool ordered = std::holds_alternative<FreeStrategy>(s)
                         || (std::holds_alternative<FreeAbelianStrategy>(s));
          if (!ordered) {
            forbidden.push_back(x);
          }
        }
      }
      winding_ = WindingBound(relators_, n, forbidden);
      winding_.restrict([&](std::size_t x, std::size_t y) {
        auto px = ps.owner(x), py = ps.owner(y);
        if (px && py && *px == *py) {
          return std::holds_alternative<FreeStrategy>(ps.presentation().peripherals[*px].strategy);
        }
        return true;
      });
    }

    PeripheralStructure const& structure() const noexcept {
      return *ps_;
    }
    std::vector<Word> const& relators() const noexcept {
      return relators_;
    }

    std::optional<std::size_t> owner(Letter x) const {
      return ps_->owner(x.index());
    }

    // Splits a cyclically normalized word into tokens [begin, end).
    std::vector<std::pair<std::size_t, std::size_t>> tokens(std::span<Letter const> w) const {
      std::vector<std::pair<std::size_t, std::size_t>> out;
      std::size_t                                      i = 0;
      while (i < w.size()) {
        std::size_t j   = i + 1;
        auto        own = owner(w[i]);
        if (own) {
          while (j < w.size() && owner(w[j]) == own) {
            ++j;
          }
        }
        out.emplace_back(i, j);
        i = j;
      }
      return out;
    }

    std::size_t relative_length(std::span<Letter const> w) const {
      return tokens(w).size();
    }

    // Canonical cyclic state.
    Word canonical(std::span<Letter const> input) const {
      Word w = cyclic_reduce(input);
      for (;;) {
        if (w.empty()) {
          return w;
        }
        // rotate so that w does not start inside a peripheral run
        std::size_t n = w.size(), start = 0;
        bool        single_run = true;
        for (std::size_t i = 0; i < n; ++i) {
          auto cur  = owner(w[i]);
          auto prev = owner(w[(i + n - 1) % n]);
          if (!cur || cur != prev) {
            start      = i;
            single_run = false;
            break;
          }
        }
        if (single_run) {
          Word nf = ps_->block_normal_form(*owner(w[0]), w);
          if (nf == w) {
            return w;
          }
          w = cyclic_reduce(nf);
          continue;
        }
        w = rotate_left(w, start);
        Word out;
        bool changed = false;
        for (auto [b, e] : tokens(w)) {
          std::span<Letter const> piece(w.data() + b, e - b);
          if (auto own = owner(w[b])) {
            Word nf = ps_->block_normal_form(*own, piece);
            changed = changed || !std::equal(nf.begin(), nf.end(), piece.begin(), piece.end());
            out.insert(out.end(), nf.begin(), nf.end());
          } else {
            out.push_back(w[b]);
          }
        }
        Word red = cyclic_reduce(out);
        if (!changed && red.size() == w.size()) {
          w = std::move(red);
          break;
        }
        w = std::move(red);
      }
      // least rotation among token boundaries
      auto toks = tokens(w);
      Word best;
      for (auto [b, e] : toks) {
        Word r = rotate_left(w, b);
        if (best.empty() || r < best) {
          best = std::move(r);
        }
      }
      return best;
    }

    bool touches(std::span<Letter const> state, std::size_t p, std::span<Letter const> piece) const {
      if (cancels_at(state, p, piece)) {
        return true;
      }
      std::size_t const n = state.size();
      auto lo = owner(state[(p + n - 1) % n]);
      auto ro = owner(state[p % n]);
      return (lo && lo == owner(piece.front())) || (ro && ro == owner(piece.back()));
    }

    AreaCertificate fill(Word const& flat, AreaCaps caps) const {
      Word start = canonical(flat);
      std::size_t maxlen = caps.maxlen != 0
                               ? caps.maxlen
                               : 2 * relative_length(start) + 2 * max_length(relators_);
      std::size_t amb = caps.ambient_maxlen != 0
                            ? caps.ambient_maxlen
                            : 2 * flat.size() + 2 * max_length(relators_);
      AreaCertificate cert;
      if (relators_.empty()) {
        cert.input = flat;
        if (start.empty()) {
          cert.upper = 0;
          cert.optimal = true;
        }
      } else {
        auto canon = [this](Word const& x) { return canonical(x); };
        auto admit = [&](Word const& x) {
          return x.size() <= amb && relative_length(x) <= maxlen;
        };
        auto positions = [](Word const& x) { return std::max<std::size_t>(x.size(), 1); };
        auto contact = [this](Word const& x, std::size_t p, Word const& piece) {
          return touches(x, p, piece);
        };
        cert = certificate_from(flat, astar_fill(flat, relators_, conjugates_, canon, admit,
                                                 winding_, positions, contact,
                                                 SearchLimits{caps.node_budget}));
      }
      cert.relative       = true;
      cert.maxlen         = maxlen;
      cert.ambient_maxlen = amb;
      cert.node_budget    = caps.node_budget;
      return cert;
    }

    Word replay(AreaCertificate const& cert) const {
      return replay_moves(cert.input, cert.moves, relators_,
                          [this](Word const& x) { return canonical(x); });
    }

    RelativeWord to_relative(Word const& w) const {
      RelativeWord out;
      for (auto [b, e] : tokens(w)) {
        Word piece(w.begin() + static_cast<long>(b), w.begin() + static_cast<long>(e));
        out.push_back({owner(w[b]), piece});
      }
      return out;
    }

   private:
    PeripheralStructure const* ps_;
    std::vector<Word>          relators_;
    std::vector<Conjugate>     conjugates_;
    WindingBound               winding_;
  };

  // Relative area: R-cells cost 1, peripheral cells are free.
  inline AreaCertificate relative_area(RelativeWord const& w, PeripheralStructure const& ps,
                                       AreaCaps caps = {}) {
    Word flat = flatten(w);
    if (ps.ambient().exact() && !ps.ambient().normal_form(flat).word.empty()) {
      throw NotNullHomotopic("word is not trivial in the group");
    }
    return RelativeArea(ps).fill(flat, caps);
  }

  inline bool replay_relative_area(AreaCertificate const& cert, PeripheralStructure const& ps) {
    if (!cert.upper || cert.moves.size() != *cert.upper) {
      return false;
    }
    try {
      return RelativeArea(ps).replay(cert).empty();
    } catch (std::out_of_range const&) {
      return false;
    }
  }

  struct DehnRow {
    std::size_t                n     = 0;
    std::size_t                lower = 0;
    std::optional<std::size_t> upper;
    bool                       exact = false;
    std::vector<std::string>   flags;
    std::string                witness;
  };

  struct DehnTable {
    std::vector<DehnRow> rows;
    std::string          caps;
    bool                 budget_exhausted = false;
  };

  inline std::string to_tsv(DehnTable const& t) {
    std::ostringstream out;
    out << "# " << t.caps << "\n";
    out << "n\tlower\tupper\texact\tflags\twitness\n";
    for (auto const& r : t.rows) {
      out << r.n << '\t' << r.lower << '\t' << (r.upper ? std::to_string(*r.upper) : "-") << '\t'
          << (r.exact ? "yes" : "no") << '\t';
      if (r.flags.empty()) {
        out << '-';
      }
      for (std::size_t i = 0; i < r.flags.size(); ++i) {
        out << (i ? "," : "") << r.flags[i];
      }
      out << '\t' << (r.witness.empty() ? "-" : r.witness) << '\n';
    }
    return out.str();
  }

  namespace detail {

    inline bool is_least_rotation(std::vector<std::size_t> const& w) {
      std::size_t const n = w.size();
      for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          std::size_t a = w[(k + i) % n], b = w[i];
          if (a != b) {
            if (a < b) {
              return false;
            }
            break;
          }
        }
      }
      return true;
    }

    // Cyclically reduced words of length n over an alphabet of tokens, one
    // per cyclic class (the token-wise least rotation). `compatible(a, b)`
    // says whether token b may follow token a.
    template <typename Compatible>
    std::vector<std::vector<std::size_t>> cyclic_token_words(std::size_t ntokens, std::size_t n,
                                                             Compatible&& compatible) {
      std::vector<std::vector<std::size_t>> out;
      std::vector<std::size_t>              cur;
      auto rec = [&](auto&& self) -> void {
        if (cur.size() == n) {
          if (n > 1 && !compatible(cur.back(), cur.front())) {
            return;
          }
          if (!is_least_rotation(cur)) {
            return;
          }
          out.push_back(cur);
          return;
        }
        for (std::size_t t = 0; t < ntokens; ++t) {
          if (!cur.empty() && !compatible(cur.back(), t)) {
            continue;
          }
          if (!cur.empty() && t < cur.front()) {
            continue;  // a rotation starting at t would be smaller
          }
          cur.push_back(t);
          self(self);
          cur.pop_back();
        }
      };
      if (n > 0) {
        rec(rec);
      }
      return out;
    }

    struct Measured {
      std::size_t                lower = 0;
      std::optional<std::size_t> upper;
      bool                       exhausted = false;
      bool                       circuit   = false;
      std::string                word;
    };

    inline void accumulate(DehnRow& row, std::optional<std::size_t>& circuit_max,
                           Measured const& m, bool& all_upper) {
      if (row.witness.empty() || m.lower > row.lower) {
        row.lower   = m.lower;
        row.witness = m.word;
      }
      if (m.upper) {
        row.upper = std::max(row.upper.value_or(0), *m.upper);
      } else {
        all_upper = false;
      }
      if (m.circuit && m.upper) {
        circuit_max = std::max(circuit_max.value_or(0), *m.upper);
      }
    }

  }  // namespace detail

  struct DehnOptions {
    AreaCaps    caps;
    std::size_t threads = 1;
  };

  // Delta(n) over cyclically reduced null-homotopic words of length <= n,
  // with a circuit-only maximum reported in the flags.
  inline DehnTable dehn_table(WordProblem const& wp, std::size_t n_max, DehnOptions opts = {}) {
    DehnTable table;
    table.caps = "node_budget=" + std::to_string(opts.caps.node_budget) + " maxlen="
                 + (opts.caps.maxlen ? std::to_string(opts.caps.maxlen) : std::string("2|w|+2max|r|"));
    std::size_t const ntok = 2 * wp.alphabet_size();
    auto compatible = [](std::size_t a, std::size_t b) { return (a ^ 1U) != b; };
    std::optional<std::size_t> circuit_max;
    DehnRow                    acc;
    bool                       all_upper = true;
    for (std::size_t n = 1; n <= n_max; ++n) {
      std::vector<Word> words;
      if (!wp.relators().empty()) {
        for (auto const& t : detail::cyclic_token_words(ntok, n, compatible)) {
          Word w;
          for (auto c : t) {
            w.push_back(Letter::from_code(static_cast<std::uint16_t>(c)));
          }
          if (!wp.exact() || wp.normal_form(w).word.empty()) {
            words.push_back(std::move(w));
          }
        }
      }
      auto measured = parallel_map(words.size(), opts.threads, [&](std::size_t i) {
        detail::Measured m;
        Word const&      w    = words[i];
        auto             cert = area(w, wp, opts.caps);
        m.lower               = cert.lower;
        m.upper               = cert.upper;
        m.exhausted           = !cert.upper;
        m.word                = to_string(w, wp.names());
        // circuit: no proper cyclic subword is trivial
        m.circuit = wp.exact();
        for (std::size_t s = 0; s < w.size() && m.circuit; ++s) {
          for (std::size_t len = 1; len < w.size() && m.circuit; ++len) {
            Word sub;
            for (std::size_t k = 0; k < len; ++k) {
              sub.push_back(w[(s + k) % w.size()]);
            }
            m.circuit = !wp.normal_form(sub).word.empty();
          }
        }
        return m;
      });
      for (auto const& m : measured) {
        if (!wp.exact() && !m.upper) {
          continue;  // not known to be trivial
        }
        table.budget_exhausted = table.budget_exhausted || m.exhausted;
        detail::accumulate(acc, circuit_max, m, all_upper);
      }
      DehnRow row = acc;
      row.n       = n;
      if (!all_upper) {
        row.upper.reset();
      } else if (!row.upper) {
        row.upper = 0;
      }
      row.exact = row.upper && *row.upper == row.lower;
      row.flags.clear();
      row.flags.push_back("circuit_max=" + std::to_string(circuit_max.value_or(0)));
      if (!row.exact) {
        row.flags.push_back("BUDGET");
      }
      if (!wp.exact()) {
        row.flags.push_back("TAINTED");
      }
      table.rows.push_back(row);
    }
    return table;
  }

  struct RelDehnOptions {
    AreaCaps                 caps;
    std::vector<std::size_t> peripheral_caps = {2, 3, 4};  // peripheral letters have length < cap
    std::size_t              threads         = 1;
  };

  // Relative Dehn function rows; each row is measured once per peripheral
  // cap and flagged DIVERGENCE-SUSPECTED when its lower bound strictly
  // increases along at least three caps.
  inline DehnTable rel_dehn_table(PeripheralStructure const& ps, std::size_t n_max,
                                  RelDehnOptions opts = {}) {
    DehnTable table;
    {
      std::string caps = "peripheral_caps=";
      for (std::size_t i = 0; i < opts.peripheral_caps.size(); ++i) {
        caps += (i ? "," : "") + std::to_string(opts.peripheral_caps[i]);
      }
      table.caps = caps + " node_budget=" + std::to_string(opts.caps.node_budget);
    }
    auto const& rp = ps.presentation();
    if (rp.relators.empty()) {
      for (std::size_t n = 1; n <= n_max; ++n) {
        DehnRow row;
        row.n     = n;
        row.upper = 0;
        row.exact = true;
        table.rows.push_back(row);
      }
      return table;
    }
    RelativeArea ra(ps);
    auto const&  wp = ps.ambient();
    // per cap, per n: cumulative lower/upper
    std::vector<std::vector<DehnRow>> per_cap;
    for (auto cap : opts.peripheral_caps) {
      // tokens: free letters and peripheral elements of local length < cap
      std::vector<Word>                       tok;
      std::vector<std::optional<std::size_t>> tok_owner;
      for (std::size_t x = 0; x < rp.alphabet_size(); ++x) {
        if (!ps.owner(x)) {
          tok.push_back({Letter::generator(x)});
          tok_owner.push_back(std::nullopt);
          tok.push_back({Letter::generator(x, true)});
          tok_owner.push_back(std::nullopt);
        }
      }
      for (std::size_t pid = 0; pid < ps.count(); ++pid) {
        auto const& lwp = ps.local(pid);
        auto        ball = element_ball(lwp, cap == 0 ? 0 : cap - 1);
        for (auto const& lw : ball.elements) {
          if (!lw.empty()) {
            tok.push_back(ps.include(pid, lw));
            tok_owner.push_back(pid);
          }
        }
      }
      auto compatible = [&](std::size_t a, std::size_t b) {
        if (tok_owner[a] || tok_owner[b]) {
          return tok_owner[a] != tok_owner[b];
        }
        return tok[a][0] != tok[b][0].inverse();
      };
      std::vector<DehnRow>       rows;
      DehnRow                    acc;
      std::optional<std::size_t> circuit_max;
      bool                       all_upper = true;
      for (std::size_t n = 1; n <= n_max; ++n) {
        std::vector<Word> words;
        for (auto const& t : detail::cyclic_token_words(tok.size(), n, compatible)) {
          Word w;
          for (auto c : t) {
            w.insert(w.end(), tok[c].begin(), tok[c].end());
          }
          if (!wp.exact() || wp.normal_form(w).word.empty()) {
            words.push_back(std::move(w));
          }
        }
        auto measured = parallel_map(words.size(), opts.threads, [&](std::size_t i) {
          detail::Measured m;
          auto             cert = ra.fill(words[i], opts.caps);
          m.lower               = cert.lower;
          m.upper               = cert.upper;
          m.exhausted           = !cert.upper;
          m.word                = rp.to_string(ra.to_relative(ra.canonical(words[i])));
          return m;
        });
        for (auto const& m : measured) {
          if (!wp.exact() && !m.upper) {
            continue;
          }
          table.budget_exhausted = table.budget_exhausted || m.exhausted;
          detail::accumulate(acc, circuit_max, m, all_upper);
        }
        DehnRow row = acc;
        row.n       = n;
        if (!all_upper) {
          row.upper.reset();
        } else if (!row.upper) {
          row.upper = 0;
        }
        row.exact = row.upper && *row.upper == row.lower;
        rows.push_back(row);
      }
      per_cap.push_back(std::move(rows));
    }
    for (std::size_t n = 1; n <= n_max; ++n) {
      DehnRow row = per_cap.back()[n - 1];
      row.flags.clear();
      std::string series = "cap_lower=";
      bool        strict = per_cap.size() >= 3;
      for (std::size_t c = 0; c < per_cap.size(); ++c) {
        std::size_t lo = per_cap[c][n - 1].lower;
        series += (c ? "/" : "") + std::to_string(lo);
        if (c > 0 && lo <= per_cap[c - 1][n - 1].lower) {
          strict = false;
        }
      }
      row.flags.push_back(series);
      if (strict) {
        row.flags.push_back("DIVERGENCE-SUSPECTED");
      }
      if (!row.exact) {
        row.flags.push_back("BUDGET");
      }
      if (!wp.exact()) {
        row.flags.push_back("TAINTED");
      }
      table.rows.push_back(row);
    }
    return table;
  }

  inline bool divergence_suspected(DehnRow const& row) {
    return std::find(row.flags.begin(), row.flags.end(), "DIVERGENCE-SUSPECTED") != row.flags.end();
  }

  // Lower bounds of a row per peripheral cap, parsed back from the flags.
  inline std::vector<std::size_t> cap_lower_series(DehnRow const& row) {
    std::vector<std::size_t> out;
    for (auto const& f : row.flags) {
      if (f.rfind("cap_lower=", 0) == 0) {
        std::istringstream in(f.substr(10));
        std::string        part;
        while (std::getline(in, part, '/')) {
          out.push_back(std::stoul(part));
        }
      }
    }
    return out;
  }

}  // namespace relpair

#endif  // RELPAIR_AREA_HPP_
