// Finite presentations relative to a finite collection of peripheral
// subgroups: data model, text grammar, printer and validator.
//
// Grammar (one statement per line, '#' starts a comment):
//
//   group <g1, ..., gk | r1, r2, ...>
//   rel P = <gi, gj, ...> [: free | abelian | cyclic N | <t1,... | rels>]
//   rel P = table FILE
//
// Relator expressions use juxtaposition or '*' for concatenation, '^n' for
// (signed) powers, a '-' suffix for inverses, '[x,y]' for x*y*x-*y- and
// parentheses for grouping. '1' is the empty word.

#ifndef RELPAIR_PRESENTATION_HPP_
#define RELPAIR_PRESENTATION_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "word.hpp"

namespace relpair {

  enum class SymbolKind { standard, peripheral };

  struct GeneratorSymbol {
    std::string name;
    SymbolKind  kind     = SymbolKind::standard;
    std::size_t subgroup = 0;  // meaningful for peripheral symbols only

    bool operator==(GeneratorSymbol const&) const = default;
  };

  // product[i][j] is the index of element i * element j.
  struct MultiplicationTable {
    std::vector<std::string>              elements;
    std::vector<std::vector<std::size_t>> product;
    std::size_t                           identity = 0;

    std::size_t size() const noexcept {
      return elements.size();
    }
    std::size_t inverse_of(std::size_t i) const {
      for (std::size_t j = 0; j < size(); ++j) {
        if (product[i][j] == identity) {
          return j;
        }
      }
      throw InvalidTable("element " + elements.at(i) + " has no inverse");
    }
    bool operator==(MultiplicationTable const&) const = default;
  };

  // Group presentation over locally named generators; used for Presented
  // peripheral strategies.
  struct GroupPresentation {
    std::vector<std::string> generators;
    std::vector<Word>        relators;
    bool operator==(GroupPresentation const&) const = default;
  };

  struct FiniteTableStrategy {
    MultiplicationTable table;
    bool operator==(FiniteTableStrategy const&) const = default;
  };
  struct FreeAbelianStrategy {
    std::size_t rank = 1;
    bool operator==(FreeAbelianStrategy const&) const = default;
  };
  struct FreeStrategy {
    std::size_t rank = 1;
    bool operator==(FreeStrategy const&) const = default;
  };
  struct PresentedStrategy {
    GroupPresentation presentation;
    bool operator==(PresentedStrategy const&) const = default;
  };

  using PeripheralStrategy = std::variant<FiniteTableStrategy,
                                          FreeAbelianStrategy,
                                          FreeStrategy,
                                          PresentedStrategy>;

  struct PeripheralSubgroup {
    std::string        name;
    PeripheralStrategy strategy = FreeAbelianStrategy{1};
    // inclusion[i] is the ambient word of local generator i. For FiniteTable
    // the local generators are the non-identity elements in table order.
    std::vector<Word> inclusion;
    // Ambient generators listed in `rel P = <...>`, in order; empty for tables.
    std::vector<std::size_t> listed;
    std::string              table_path;
    bool                     strategy_inferred = false;

    bool operator==(PeripheralSubgroup const&) const = default;

    std::size_t local_rank() const;
  };

  inline std::size_t PeripheralSubgroup::local_rank() const {
    return std::visit(
        [](auto const& s) -> std::size_t {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FiniteTableStrategy>) {
            return s.table.size() == 0 ? 0 : s.table.size() - 1;
          } else if constexpr (std::is_same_v<T, PresentedStrategy>) {
            return s.presentation.generators.size();
          } else {
            return s.rank;
          }
        },
        strategy);
  }

  // A letter of a relative word: either a single standard letter or one
  // peripheral letter, i.e. a nontrivial element of a peripheral subgroup
  // written as an ambient word.
  struct RelLetter {
    std::optional<std::size_t> peripheral;
    Word                       word;
    bool operator==(RelLetter const&) const = default;
  };
  using RelativeWord = std::vector<RelLetter>;

  inline Word flatten(RelativeWord const& w) {
    Word out;
    for (auto const& x : w) {
      out.insert(out.end(), x.word.begin(), x.word.end());
    }
    return out;
  }

  class RelativePresentation {
   public:
    std::vector<GeneratorSymbol>    symbols;
    std::vector<PeripheralSubgroup> peripherals;
    std::vector<Word>               relators;

    bool operator==(RelativePresentation const&) const = default;

    std::vector<std::string> names() const {
      std::vector<std::string> out;
      out.reserve(symbols.size());
      for (auto const& s : symbols) {
        out.push_back(s.name);
      }
      return out;
    }

    std::optional<std::size_t> symbol_index(std::string_view name) const {
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i].name == name) {
          return i;
        }
      }
      return std::nullopt;
    }

    std::optional<std::size_t> peripheral_index(std::string_view name) const {
      for (std::size_t i = 0; i < peripherals.size(); ++i) {
        if (peripherals[i].name == name) {
          return i;
        }
      }
      return std::nullopt;
    }

    std::size_t alphabet_size() const noexcept {
      return symbols.size();
    }

    std::size_t max_relator_length() const {
      std::size_t m = 0;
      for (auto const& r : relators) {
        m = std::max(m, r.size());
      }
      return m;
    }

    std::string word_to_string(Word const& w) const {
      return relpair::to_string(w, names());
    }

    std::string to_string(RelativeWord const& w) const {
      if (w.empty()) {
        return "1";
      }
      std::string out;
      for (auto const& x : w) {
        if (!out.empty()) {
          out += '*';
        }
        if (x.peripheral) {
          out += "{" + word_to_string(x.word) + "}";
        } else {
          out += word_to_string(x.word);
        }
      }
      return out;
    }
  };

  // Cyclically reduced, lexicographically least rotation; empty words dropped
  // and duplicates removed (order of first appearance kept).
  inline std::vector<Word> canonical_relators(std::vector<Word> const& rs) {
    std::vector<Word> out;
    for (auto const& r : rs) {
      Word c = least_rotation(cyclic_reduce(r));
      if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) {
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  inline MultiplicationTable cyclic_table(std::size_t order,
                                          std::string const& generator) {
    MultiplicationTable t;
    t.identity = 0;
    for (std::size_t k = 0; k < order; ++k) {
      t.elements.push_back(k == 0   ? std::string("1")
                           : k == 1 ? generator
                                    : generator + "^" + std::to_string(k));
    }
    t.product.assign(order, std::vector<std::size_t>(order));
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        t.product[i][j] = (i + j) % order;
      }
    }
    return t;
  }

  namespace detail {

    inline bool is_ident_start(char c) {
      return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    inline bool is_ident_char(char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_'
             || c == '\'';
    }

    // Recursive-descent reader over one logical line.
    class LineReader {
     public:
      LineReader(std::string_view text, std::size_t line)
          : text_(text), line_(line) {}

      void skip_ws() {
        while (pos_ < text_.size()
               && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
      }
      bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
      }
      char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
      }
      // peek without skipping whitespace
      char peek_raw() const {
        return pos_ < text_.size() ? text_[pos_] : '\0';
      }
      bool accept(char c) {
        if (peek() == c) {
          ++pos_;
          return true;
        }
        return false;
      }
      void expect(char c) {
        if (!accept(c)) {
          fail(std::string("expected '") + c + "'");
        }
      }
      bool accept_keyword(std::string_view kw) {
        skip_ws();
        if (text_.substr(pos_, kw.size()) == kw
            && (pos_ + kw.size() == text_.size()
                || !is_ident_char(text_[pos_ + kw.size()]))) {
          pos_ += kw.size();
          return true;
        }
        return false;
      }
      std::string identifier() {
        skip_ws();
        if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) {
          fail("expected identifier");
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
          ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
      }
      long integer() {
        skip_ws();
        bool neg = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
          neg = text_[pos_] == '-';
          ++pos_;
        }
        if (pos_ >= text_.size()
            || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          fail("expected integer");
        }
        long v = 0;
        while (pos_ < text_.size()
               && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          v = v * 10 + (text_[pos_] - '0');
          if (v > 1'000'000) {
            fail("integer too large");
          }
          ++pos_;
        }
        return neg ? -v : v;
      }
      std::string rest() {
        skip_ws();
        std::string r(text_.substr(pos_));
        pos_ = text_.size();
        while (!r.empty()
               && std::isspace(static_cast<unsigned char>(r.back()))) {
          r.pop_back();
        }
        return r;
      }
      [[noreturn]] void fail(std::string const& what) const {
        throw SyntaxError(line_, pos_ + 1, what);
      }
      std::size_t pos() const {
        return pos_;
      }

     private:
      std::string_view text_;
      std::size_t      line_;
      std::size_t      pos_ = 0;
    };

    using Resolver = std::function<Word(std::string const&, LineReader&)>;

    // expr := term ('*'? term)*
    // term := atom ('-' | '^' INT)*
    // atom := ID | '1' | '(' expr ')' | '[' expr ',' expr ']'
    inline Word parse_expr(LineReader& in, Resolver const& resolve);

    inline Word parse_atom(LineReader& in, Resolver const& resolve) {
      char c = in.peek();
      if (c == '(') {
        in.expect('(');
        Word w = parse_expr(in, resolve);
        in.expect(')');
        return w;
      }
      if (c == '[') {
        in.expect('[');
        Word x = parse_expr(in, resolve);
        in.expect(',');
        Word y = parse_expr(in, resolve);
        in.expect(']');
        Word out = concat(x, y);
        Word xi  = inverse(x);
        Word yi  = inverse(y);
        out.insert(out.end(), xi.begin(), xi.end());
        out.insert(out.end(), yi.begin(), yi.end());
        return out;
      }
      if (c == '1') {
        in.integer();
        return {};
      }
      std::string name = in.identifier();
      return resolve(name, in);
    }

    inline Word parse_term(LineReader& in, Resolver const& resolve) {
      Word w = parse_atom(in, resolve);
      for (;;) {
        char c = in.peek_raw();
        if (c == '-') {
          in.accept('-');
          w = inverse(w);
        } else if (c == '^') {
          in.accept('^');
          w = power(w, in.integer());
        } else {
          return w;
        }
      }
    }

    inline bool starts_atom(char c) {
      return c == '(' || c == '[' || c == '1' || is_ident_start(c);
    }

    inline Word parse_expr(LineReader& in, Resolver const& resolve) {
      Word w = parse_term(in, resolve);
      for (;;) {
        char c = in.peek();
        if (c == '*') {
          in.accept('*');
          Word t = parse_term(in, resolve);
          w.insert(w.end(), t.begin(), t.end());
        } else if (starts_atom(c)) {
          Word t = parse_term(in, resolve);
          w.insert(w.end(), t.begin(), t.end());
        } else {
          return w;
        }
      }
    }

    inline std::vector<std::string> parse_ident_list(LineReader& in,
                                                     char terminator) {
      std::vector<std::string> out;
      if (in.peek() == terminator) {
        return out;
      }
      out.push_back(in.identifier());
      while (in.accept(',')) {
        out.push_back(in.identifier());
      }
      return out;
    }

    inline std::vector<Word> parse_relator_list(LineReader&     in,
                                                Resolver const& resolve,
                                                char            terminator) {
      std::vector<Word> out;
      if (in.peek() == terminator) {
        return out;
      }
      out.push_back(parse_expr(in, resolve));
      while (in.accept(',')) {
        out.push_back(parse_expr(in, resolve));
      }
      return out;
    }

    inline void check_unique(std::vector<std::string> const& names) {
      std::vector<std::string> seen;
      for (auto const& n : names) {
        if (std::find(seen.begin(), seen.end(), n) != seen.end()) {
          throw DuplicateName(n);
        }
        seen.push_back(n);
      }
    }

  }  // namespace detail

  // TSV rows "x <tab> y <tab> x*y"; '#' comments and blank lines ignored.
  inline MultiplicationTable parse_table(std::string_view text) {
    MultiplicationTable                                t;
    std::map<std::string, std::size_t>                 index;
    std::vector<std::array<std::string, 3>>            rows;
    std::istringstream                                 in{std::string(text)};
    std::string                                        line;
    std::size_t                                        lineno = 0;
    auto intern = [&](std::string const& s) {
      auto [it, inserted] = index.emplace(s, t.elements.size());
      if (inserted) {
        t.elements.push_back(s);
      }
      return it->second;
    };
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) {
        line.erase(hash);
      }
      std::istringstream fields(line);
      std::array<std::string, 3> row;
      std::size_t                k = 0;
      while (k < 3 && fields >> row[k]) {
        ++k;
      }
      if (k == 0) {
        continue;
      }
      std::string extra;
      if (k != 3 || (fields >> extra)) {
        throw SyntaxError(lineno, 1, "table rows need exactly three fields");
      }
      intern(row[0]);
      intern(row[1]);
      intern(row[2]);
      rows.push_back(row);
    }
    std::size_t const n = t.elements.size();
    constexpr std::size_t missing = static_cast<std::size_t>(-1);
    t.product.assign(n, std::vector<std::size_t>(n, missing));
    for (auto const& row : rows) {
      t.product[index[row[0]]][index[row[1]]] = index[row[2]];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (t.product[i][j] == missing) {
          throw InvalidTable("missing product " + t.elements[i] + "*"
                             + t.elements[j]);
        }
      }
    }
    t.identity = n;
    for (std::size_t e = 0; e < n && t.identity == n; ++e) {
      bool ok = true;
      for (std::size_t x = 0; x < n && ok; ++x) {
        ok = t.product[e][x] == x && t.product[x][e] == x;
      }
      if (ok) {
        t.identity = e;
      }
    }
    if (t.identity == n) {
      // Left for validate() to report; keep a definite value.
      t.identity = 0;
    }
    return t;
  }

  struct ParseOptions {
    // Directory used to resolve relative table paths.
    std::filesystem::path base_dir = ".";
  };

  namespace detail {

    inline bool commutes_syntactically(std::vector<Word> const& relators,
                                       std::size_t              x,
                                       std::size_t              y) {
      Word c = {Letter::generator(x),
                Letter::generator(y),
                Letter::generator(x, true),
                Letter::generator(y, true)};
      Word canon_c  = least_rotation(c);
      Word canon_ci = least_rotation(inverse(c));
      for (auto const& r : relators) {
        if (r == canon_c || r == canon_ci) {
          return true;
        }
      }
      return false;
    }

    // Largest common order forced by relators that are powers of x alone.
    inline std::size_t power_order(std::vector<Word> const& relators,
                                   std::size_t              x) {
      std::size_t g = 0;
      for (auto const& r : relators) {
        bool only_x = std::all_of(
            r.begin(), r.end(), [&](Letter l) { return l.index() == x; });
        if (only_x && !r.empty()) {
          g = std::gcd(g, r.size());
        }
      }
      return g;
    }

    // Syntactic strategy inference for `rel P = <...>` without annotation.
    inline void infer_strategy(PeripheralSubgroup&      p,
                               std::vector<Word> const& relators,
                               std::vector<std::string> const& names) {
      p.strategy_inferred = true;
      auto const& gens    = p.listed;
      if (gens.size() == 1) {
        std::size_t n = power_order(relators, gens[0]);
        if (n > 0) {
          p.strategy = FiniteTableStrategy{cyclic_table(n, names[gens[0]])};
          p.inclusion.clear();
          for (std::size_t k = 1; k < n; ++k) {
            p.inclusion.push_back(Word(k, Letter::generator(gens[0])));
          }
          return;
        }
        p.strategy = FreeAbelianStrategy{1};
        return;
      }
      if (relators.empty()) {
        p.strategy = FreeStrategy{gens.size()};
        return;
      }
      bool abelian = true;
      for (std::size_t i = 0; i < gens.size() && abelian; ++i) {
        abelian = power_order(relators, gens[i]) == 0;
        for (std::size_t j = i + 1; j < gens.size() && abelian; ++j) {
          abelian = commutes_syntactically(relators, gens[i], gens[j]);
        }
      }
      if (abelian) {
        p.strategy = FreeAbelianStrategy{gens.size()};
        return;
      }
      // Relators supported on the listed generators, rewritten locally.
      GroupPresentation gp;
      for (auto g : gens) {
        gp.generators.push_back(names[g]);
      }
      for (auto const& r : relators) {
        Word local;
        bool ok = true;
        for (Letter l : r) {
          auto it = std::find(gens.begin(), gens.end(), l.index());
          if (it == gens.end()) {
            ok = false;
            break;
          }
          local.push_back(Letter::generator(
              static_cast<std::size_t>(it - gens.begin()), l.inverted()));
        }
        if (ok) {
          gp.relators.push_back(local);
        }
      }
      p.strategy = PresentedStrategy{gp};
    }

  }  // namespace detail

  inline RelativePresentation parse_presentation(std::string_view     text,
                                                 ParseOptions const& opts = {}) {
    RelativePresentation     rp;
    bool                     have_group = false;
    std::vector<std::string> lines;
    {
      std::string       cur;
      std::istringstream in{std::string(text)};
      while (std::getline(in, cur)) {
        lines.push_back(cur);
      }
    }
    auto resolve_ambient = [&](std::string const& name, detail::LineReader& in) {
      auto idx = rp.symbol_index(name);
      if (!idx) {
        (void) in;
        throw UndeclaredSymbol(name);
      }
      return Word{Letter::generator(*idx)};
    };
    // Relators are resolved after all statements, since table peripherals may
    // introduce new symbols that relators mention.
    std::vector<std::pair<std::size_t, std::string>> relator_source;

    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
      std::string line = lines[ln];
      auto        hash = line.find('#');
      if (hash != std::string::npos) {
        line.erase(hash);
      }
      detail::LineReader in(line, ln + 1);
      if (in.at_end()) {
        continue;
      }
      if (in.accept_keyword("group")) {
        if (have_group) {
          in.fail("second group statement");
        }
        have_group = true;
        in.expect('<');
        auto gens = detail::parse_ident_list(in, '|');
        detail::check_unique(gens);
        for (auto const& g : gens) {
          rp.symbols.push_back({g, SymbolKind::standard, 0});
        }
        in.expect('|');
        // Keep the raw relator text; resolve later.
        std::size_t start = in.pos();
        int         depth = 0;
        std::size_t end   = start;
        for (; end < line.size(); ++end) {
          char c = line[end];
          if (c == '[' || c == '(') {
            ++depth;
          } else if (c == ']' || c == ')') {
            --depth;
          } else if (c == '>' && depth == 0) {
            break;
          }
        }
        if (end >= line.size()) {
          in.fail("expected '>'");
        }
        relator_source.emplace_back(ln + 1, line.substr(0, end));
        detail::LineReader tail(std::string_view(line).substr(end + 1),
                                ln + 1);
        if (!tail.at_end()) {
          throw SyntaxError(ln + 1, end + 2, "trailing input");
        }
        continue;
      }
      if (in.accept_keyword("rel")) {
        if (!have_group) {
          in.fail("rel before group statement");
        }
        PeripheralSubgroup p;
        p.name = in.identifier();
        if (rp.peripheral_index(p.name) || rp.symbol_index(p.name)) {
          throw DuplicateName(p.name);
        }
        in.expect('=');
        if (in.accept_keyword("table")) {
          std::string path = in.rest();
          if (path.empty()) {
            in.fail("expected table path");
          }
          p.table_path = path;
          std::filesystem::path full = std::filesystem::path(path);
          if (full.is_relative()) {
            full = opts.base_dir / full;
          }
          std::ifstream file(full);
          if (!file) {
            throw Error("cannot open table file " + full.string());
          }
          std::stringstream buf;
          buf << file.rdbuf();
          auto table = parse_table(buf.str());
          for (std::size_t e = 0; e < table.size(); ++e) {
            if (e == table.identity) {
              continue;
            }
            auto const& name = table.elements[e];
            auto        idx  = rp.symbol_index(name);
            if (!idx) {
              if (rp.peripheral_index(name)) {
                throw DuplicateName(name);
              }
              rp.symbols.push_back(
                  {name, SymbolKind::peripheral, rp.peripherals.size()});
              idx = rp.symbols.size() - 1;
            } else if (rp.symbols[*idx].kind == SymbolKind::peripheral) {
              throw DuplicateName(name);
            }
            p.inclusion.push_back(Word{Letter::generator(*idx)});
          }
          p.strategy = FiniteTableStrategy{std::move(table)};
        } else {
          in.expect('<');
          auto gens = detail::parse_ident_list(in, '>');
          in.expect('>');
          detail::check_unique(gens);
          for (auto const& g : gens) {
            auto idx = rp.symbol_index(g);
            if (!idx) {
              throw UndeclaredSymbol(g);
            }
            p.listed.push_back(*idx);
            p.inclusion.push_back(Word{Letter::generator(*idx)});
          }
          if (in.accept(':')) {
            if (in.accept_keyword("free")) {
              p.strategy = FreeStrategy{gens.size()};
            } else if (in.accept_keyword("abelian")) {
              p.strategy = FreeAbelianStrategy{gens.size()};
            } else if (in.accept_keyword("cyclic")) {
              long n = in.integer();
              if (n < 1 || gens.size() != 1) {
                in.fail("cyclic needs one generator and a positive order");
              }
              p.strategy = FiniteTableStrategy{
                  cyclic_table(static_cast<std::size_t>(n), gens[0])};
              p.inclusion.clear();
              for (long k = 1; k < n; ++k) {
                p.inclusion.push_back(
                    Word(static_cast<std::size_t>(k), Letter::generator(p.listed[0])));
              }
            } else if (in.peek() == '<') {
              in.expect('<');
              GroupPresentation gp;
              gp.generators = detail::parse_ident_list(in, '|');
              detail::check_unique(gp.generators);
              if (gp.generators.size() != gens.size()) {
                in.fail("presented strategy must name one local generator per "
                        "listed generator");
              }
              in.expect('|');
              detail::Resolver local = [&](std::string const& name,
                                           detail::LineReader&) {
                auto it = std::find(
                    gp.generators.begin(), gp.generators.end(), name);
                if (it == gp.generators.end()) {
                  throw UndeclaredSymbol(name);
                }
                return Word{Letter::generator(
                    static_cast<std::size_t>(it - gp.generators.begin()))};
              };
              gp.relators = canonical_relators(
                  detail::parse_relator_list(in, local, '>'));
              in.expect('>');
              p.strategy = PresentedStrategy{gp};
            } else {
              in.fail("unknown peripheral strategy");
            }
          } else {
            p.strategy_inferred = true;  // resolved once relators are known
          }
          if (!in.at_end()) {
            in.fail("trailing input");
          }
        }
        rp.peripherals.push_back(std::move(p));
        continue;
      }
      in.fail("expected 'group' or 'rel'");
    }
    if (!have_group) {
      throw SyntaxError(lines.size() + 1, 1, "missing group statement");
    }
    for (auto const& [ln, src] : relator_source) {
      detail::LineReader in(src, ln);
      in.accept_keyword("group");
      in.expect('<');
      detail::parse_ident_list(in, '|');
      in.expect('|');
      auto rs = detail::parse_relator_list(in, resolve_ambient, '\0');
      if (!in.at_end()) {
        in.fail("unexpected character in relator list");
      }
      rp.relators = canonical_relators(rs);
    }
    auto names = rp.names();
    for (auto& p : rp.peripherals) {
      if (p.strategy_inferred) {
        detail::infer_strategy(p, rp.relators, names);
      }
    }
    return rp;
  }

  namespace detail {
    inline std::string join(std::vector<std::string> const& xs) {
      std::string out;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? "," : "") + xs[i];
      }
      return out;
    }
  }  // namespace detail

  // Canonical printed form; parse_presentation(print(p)) == p for
  // presentations without table peripherals.
  inline std::string print(RelativePresentation const& rp) {
    auto                     names = rp.names();
    std::vector<std::string> standard;
    for (auto const& s : rp.symbols) {
      if (s.kind == SymbolKind::standard) {
        standard.push_back(s.name);
      }
    }
    std::vector<std::string> rels;
    for (auto const& r : rp.relators) {
      rels.push_back(to_string(r, names));
    }
    std::string out = "group <" + detail::join(standard) + " | ";
    for (std::size_t i = 0; i < rels.size(); ++i) {
      out += (i ? ", " : "") + rels[i];
    }
    out += ">\n";
    for (auto const& p : rp.peripherals) {
      out += "rel " + p.name + " = ";
      if (!p.table_path.empty()) {
        out += "table " + p.table_path + "\n";
        continue;
      }
      std::vector<std::string> listed;
      for (auto g : p.listed) {
        listed.push_back(names[g]);
      }
      out += "<" + detail::join(listed) + ">";
      if (!p.strategy_inferred) {
        std::visit(
            [&](auto const& s) {
              using T = std::decay_t<decltype(s)>;
              if constexpr (std::is_same_v<T, FreeStrategy>) {
                out += " : free";
              } else if constexpr (std::is_same_v<T, FreeAbelianStrategy>) {
                out += " : abelian";
              } else if constexpr (std::is_same_v<T, FiniteTableStrategy>) {
                out += " : cyclic " + std::to_string(s.table.size());
              } else {
                std::vector<std::string> lr;
                for (auto const& r : s.presentation.relators) {
                  lr.push_back(to_string(r, s.presentation.generators));
                }
                out += " : <" + detail::join(s.presentation.generators) + " | ";
                for (std::size_t i = 0; i < lr.size(); ++i) {
                  out += (i ? ", " : "") + lr[i];
                }
                out += ">";
              }
            },
            p.strategy);
      }
      out += "\n";
    }
    return out;
  }

  // Parses a word over the ambient alphabet.
  inline Word parse_word(std::string_view text, RelativePresentation const& rp) {
    detail::LineReader in(text, 1);
    detail::Resolver   resolve = [&](std::string const& name,
                                   detail::LineReader&) {
      auto idx = rp.symbol_index(name);
      if (!idx) {
        throw UndeclaredSymbol(name);
      }
      return Word{Letter::generator(*idx)};
    };
    if (in.at_end()) {
      return {};
    }
    Word w = detail::parse_expr(in, resolve);
    if (!in.at_end()) {
      in.fail("trailing input");
    }
    return w;
  }

  namespace detail {
    // Letters that are exactly the image of a local generator of P.
    inline std::vector<std::size_t> peripheral_letters(PeripheralSubgroup const& p) {
      std::vector<std::size_t> out;
      for (auto const& w : p.inclusion) {
        if (w.size() == 1) {
          out.push_back(w[0].index());
        }
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
  }  // namespace detail

  // Relative words: standard letters as usual, and one peripheral letter per
  // brace group, e.g. `{a^5}*b*{a^-5}*b-` or `{P1: a^5}`.
  inline RelativeWord parse_relative_word(std::string_view            text,
                                          RelativePresentation const& rp) {
    RelativeWord out;
    std::size_t  i = 0;
    std::string  plain;
    auto         flush_plain = [&]() {
      while (!plain.empty()
             && (plain.back() == '*'
                 || std::isspace(static_cast<unsigned char>(plain.back())))) {
        plain.pop_back();
      }
      Word w = parse_word(plain, rp);
      for (Letter x : w) {
        out.push_back({std::nullopt, Word{x}});
      }
      plain.clear();
    };
    while (i < text.size()) {
      if (text[i] == '{') {
        flush_plain();
        auto close = text.find('}', i);
        if (close == std::string_view::npos) {
          throw SyntaxError(1, i + 1, "unterminated '{'");
        }
        std::string_view          inner = text.substr(i + 1, close - i - 1);
        std::optional<std::size_t> pid;
        auto                      colon = inner.find(':');
        if (colon != std::string_view::npos) {
          std::string name(inner.substr(0, colon));
          name.erase(std::remove_if(name.begin(), name.end(), ::isspace),
                     name.end());
          pid = rp.peripheral_index(name);
          if (!pid) {
            throw UndeclaredSymbol(name);
          }
          inner = inner.substr(colon + 1);
        }
        Word w = free_reduce(parse_word(inner, rp));
        if (!pid) {
          for (std::size_t k = 0; k < rp.peripherals.size() && !pid; ++k) {
            auto letters = detail::peripheral_letters(rp.peripherals[k]);
            bool ok      = std::all_of(w.begin(), w.end(), [&](Letter x) {
              return std::binary_search(letters.begin(), letters.end(), x.index());
            });
            if (ok) {
              pid = k;
            }
          }
          if (!pid) {
            throw SyntaxError(1, i + 1, "no peripheral subgroup contains the letter");
          }
        }
        if (!w.empty()) {
          out.push_back({pid, w});
        }
        i = close + 1;
        // a '*' right after a brace is a separator
        while (i < text.size() && (text[i] == '*' || std::isspace(static_cast<unsigned char>(text[i])))) {
          ++i;
        }
      } else {
        if (text[i] == '*' && plain.empty()) {
          ++i;
          continue;
        }
        plain += text[i++];
      }
    }
    flush_plain();
    return out;
  }

  enum class Severity { error, warning };

  struct Diagnostic {
    std::string code;
    Severity    severity = Severity::error;
    std::string message;
  };

  // Table checks: closure, identity, inverses (Latin rows) and associativity
  // (exhaustive for tables up to 32 elements, a fixed sample above that).
  inline std::vector<Diagnostic> check_table(MultiplicationTable const& t,
                                             std::string const& where) {
    std::vector<Diagnostic> out;
    std::size_t const       n = t.size();
    auto                    bad = [&](std::string msg) {
      out.push_back({"InvalidTable", Severity::error, where + ": " + msg});
    };
    if (n == 0) {
      bad("empty table");
      return out;
    }
    if (t.product.size() != n) {
      bad("wrong number of rows");
      return out;
    }
    for (auto const& row : t.product) {
      if (row.size() != n
          || std::any_of(row.begin(), row.end(), [n](std::size_t x) { return x >= n; })) {
        bad("row out of range");
        return out;
      }
    }
    if (t.identity >= n) {
      bad("identity out of range");
      return out;
    }
    for (std::size_t x = 0; x < n; ++x) {
      if (t.product[t.identity][x] != x || t.product[x][t.identity] != x) {
        bad("no identity element");
        return out;
      }
    }
    for (std::size_t x = 0; x < n; ++x) {
      std::vector<bool> row_seen(n), col_seen(n);
      for (std::size_t y = 0; y < n; ++y) {
        row_seen[t.product[x][y]] = true;
        col_seen[t.product[y][x]] = true;
      }
      if (std::count(row_seen.begin(), row_seen.end(), true) != static_cast<long>(n)
          || std::count(col_seen.begin(), col_seen.end(), true) != static_cast<long>(n)) {
        bad("element " + t.elements[x] + " has no two-sided inverse");
        return out;
      }
    }
    std::size_t const step = n <= 32 ? 1 : n / 17 + 1;
    for (std::size_t x = 0; x < n; x += step) {
      for (std::size_t y = 0; y < n; y += step) {
        for (std::size_t z = 0; z < n; z += step) {
          if (t.product[t.product[x][y]][z] != t.product[x][t.product[y][z]]) {
            bad("associativity fails at (" + t.elements[x] + "," + t.elements[y]
                + "," + t.elements[z] + ")");
            return out;
          }
        }
      }
    }
    return out;
  }

  inline std::vector<Diagnostic> validate(RelativePresentation const& rp) {
    std::vector<Diagnostic> out;
    std::size_t const       n = rp.symbols.size();
    {
      std::vector<std::string> seen;
      for (auto const& s : rp.symbols) {
        if (std::find(seen.begin(), seen.end(), s.name) != seen.end()) {
          out.push_back({"DuplicateName", Severity::error, s.name});
        }
        seen.push_back(s.name);
      }
      for (auto const& p : rp.peripherals) {
        if (std::find(seen.begin(), seen.end(), p.name) != seen.end()) {
          out.push_back({"DuplicateName", Severity::error, p.name});
        }
        seen.push_back(p.name);
      }
    }
    for (auto const& s : rp.symbols) {
      if (s.kind == SymbolKind::peripheral && s.subgroup >= rp.peripherals.size()) {
        out.push_back({"UndeclaredSymbol", Severity::error,
                       "peripheral symbol " + s.name + " names no subgroup"});
      }
    }
    auto word_ok = [&](Word const& w, std::string const& where) {
      for (Letter x : w) {
        if (x.index() >= n) {
          out.push_back({"UndeclaredSymbol", Severity::error,
                         where + ": generator #" + std::to_string(x.index())});
          return false;
        }
      }
      return true;
    };
    for (std::size_t i = 0; i < rp.relators.size(); ++i) {
      auto const& r = rp.relators[i];
      if (word_ok(r, "relator " + std::to_string(i))) {
        if (least_rotation(cyclic_reduce(r)) != r) {
          out.push_back({"NonCanonicalRelator", Severity::warning,
                         "relator " + std::to_string(i)
                             + " is not in canonical rotation"});
        }
      }
    }
    for (auto const& p : rp.peripherals) {
      for (auto const& w : p.inclusion) {
        if (word_ok(w, "inclusion of " + p.name) && !is_freely_reduced(w)) {
          out.push_back({"NonReducedInclusion", Severity::error,
                         "inclusion word of " + p.name + " is not reduced"});
        }
      }
      if (!p.inclusion.empty() && p.inclusion.size() != p.local_rank()) {
        out.push_back({"InclusionArity", Severity::error,
                       p.name + ": inclusion has " + std::to_string(p.inclusion.size())
                           + " words for " + std::to_string(p.local_rank())
                           + " local generators"});
      }
      if (auto const* ft = std::get_if<FiniteTableStrategy>(&p.strategy)) {
        auto d = check_table(ft->table, p.name);
        out.insert(out.end(), d.begin(), d.end());
      }
      for (std::size_t k = 0; k < rp.symbols.size(); ++k) {
        auto const& s = rp.symbols[k];
        if (s.kind == SymbolKind::peripheral
            && s.subgroup < rp.peripherals.size()
            && &rp.peripherals[s.subgroup] == &p) {
          bool used = std::any_of(p.inclusion.begin(), p.inclusion.end(),
                                  [&](Word const& w) {
                                    return w.size() == 1 && w[0].index() == k;
                                  });
          if (!used) {
            out.push_back({"UndeclaredSymbol", Severity::error,
                           "peripheral symbol " + s.name
                               + " is not an element of " + p.name});
          }
        }
      }
    }
    return out;
  }

}  // namespace relpair

#endif  // RELPAIR_PRESENTATION_HPP_
