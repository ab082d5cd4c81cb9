#pragma once

#include <stdexcept>
#include <string>

#include "cgbp/apps.hpp"

namespace cgbp {

// Unparseable or schema-violating instance text. Syntax errors carry the
// line and column; schema errors carry the offending field as a JSON
// pointer (line 0).
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& message, int line, int column, std::string field)
      : std::runtime_error(message), line_(line), column_(column), field_(std::move(field)) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  int column_;
  std::string field_;
};

Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);

nlohmann::json instance_to_json(const Instance& instance);
// Pretty-printed, newline-terminated; identical instances give identical
// text.
std::string dump_instance(const Instance& instance);

}  // namespace cgbp
