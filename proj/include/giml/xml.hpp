#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace giml::xml {

struct Attribute {
  std::string name;
  std::string value;
};

struct Node {
  enum class Kind { element, comment };
  Kind kind = Kind::element;
  std::string name;  // element name, or comment body
  std::vector<Attribute> attributes;
  std::vector<Node> children;
  std::string text;  // concatenated non-whitespace character data
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_element() const { return kind == Kind::element; }
};

struct Document {
  bool has_declaration = false;
  std::vector<Node> prolog_comments;
  Node root;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column)
      : std::runtime_error(std::move(message)), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses UTF-8 XML (a leading byte-order mark is tolerated). Throws ParseError.
Document parse(std::string_view bytes);

/// Serializes with two-space indentation and an XML declaration when the
/// source had one. Attribute order is preserved.
std::string write(const Document& doc);

std::string escape_attribute(std::string_view value);

}  // namespace giml::xml
