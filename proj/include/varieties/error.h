#ifndef VARIETIES_ERROR_H_
#define VARIETIES_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varieties {

// Input or argument rejected before any work was done. The CLI maps this
// to exit code 1; every other exception maps to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record in an input file could not be parsed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An iterative solver hit its iteration budget without meeting its
// stopping criterion.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace varieties

#endif  // VARIETIES_ERROR_H_
