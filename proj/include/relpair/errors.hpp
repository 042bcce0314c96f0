// Exception types shared by every relpair module.

#ifndef RELPAIR_ERRORS_HPP_
#define RELPAIR_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace relpair {

  class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  class SyntaxError : public Error {
   public:
    SyntaxError(std::size_t line, std::size_t col, std::string const& what)
        : Error("syntax error at " + std::to_string(line) + ":"
                + std::to_string(col) + ": " + what),
          line_(line),
          col_(col) {}

    std::size_t line() const noexcept {
      return line_;
    }
    std::size_t col() const noexcept {
      return col_;
    }

   private:
    std::size_t line_;
    std::size_t col_;
  };

  class UndeclaredSymbol : public Error {
   public:
    explicit UndeclaredSymbol(std::string name)
        : Error("undeclared symbol '" + name + "'"), name_(std::move(name)) {}
    std::string const& name() const noexcept {
      return name_;
    }

   private:
    std::string name_;
  };

  class DuplicateName : public Error {
   public:
    explicit DuplicateName(std::string name)
        : Error("duplicate name '" + name + "'"), name_(std::move(name)) {}
    std::string const& name() const noexcept {
      return name_;
    }

   private:
    std::string name_;
  };

  class InvalidTable : public Error {
    using Error::Error;
  };

  class NotNullHomotopic : public Error {
    using Error::Error;
  };

  class BudgetExhausted : public Error {
    using Error::Error;
  };

  class NotNeighbor : public Error {
    using Error::Error;
  };

  class NotClosed : public Error {
    using Error::Error;
  };

  class MismatchedProvenance : public Error {
    using Error::Error;
  };

  class Unsupported : public Error {
    using Error::Error;
  };

}  // namespace relpair

#endif  // RELPAIR_ERRORS_HPP_
