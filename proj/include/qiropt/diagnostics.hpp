#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qiropt {

struct Diagnostic {
  std::string code;     // stable identifier, e.g. "DuplicateSSAName"
  std::string message;  // human-readable detail
  std::string where;    // "function:block:index" or file:line anchor
};

using DiagList = std::vector<Diagnostic>;

inline void note(DiagList *diags, std::string code, std::string message,
                 std::string where = {}) {
  if (diags)
    diags->push_back({std::move(code), std::move(message), std::move(where)});
}

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string &message)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + message),
        line(line),
        col(col),
        message(message) {}
  int line;
  int col;
  std::string message;
};

class UnsupportedConstruct : public ParseError {
 public:
  UnsupportedConstruct(int line, int col, const std::string &construct)
      : ParseError(line, col, "unsupported construct: " + construct),
        construct(construct) {}
  std::string construct;
};

}  // namespace qiropt
