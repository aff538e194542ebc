#include "giml/xml.hpp"

#include <expat.h>

#include <memory>

namespace giml::xml {
namespace {

bool is_blank(std::string_view s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  return true;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
    --e;
  return std::string(s.substr(b, e - b));
}

struct Builder {
  XML_Parser parser = nullptr;
  Document doc;
  std::vector<Node*> stack;
  bool root_seen = false;

  std::size_t line() const { return XML_GetCurrentLineNumber(parser); }
  std::size_t column() const { return XML_GetCurrentColumnNumber(parser) + 1; }

  static void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<Builder*>(user);
    Node node;
    node.name = name;
    node.line = self->line();
    node.column = self->column();
    for (std::size_t i = 0; atts[i] != nullptr; i += 2) node.attributes.push_back({atts[i], atts[i + 1]});
    if (self->stack.empty()) {
      self->doc.root = std::move(node);
      self->root_seen = true;
      self->stack.push_back(&self->doc.root);
    } else {
      Node* parent = self->stack.back();
      parent->children.push_back(std::move(node));
      self->stack.push_back(&parent->children.back());
    }
  }

  static void on_end(void* user, const XML_Char*) {
    auto* self = static_cast<Builder*>(user);
    Node* n = self->stack.back();
    n->text = trim(n->text);
    self->stack.pop_back();
  }

  static void on_text(void* user, const XML_Char* s, int len) {
    auto* self = static_cast<Builder*>(user);
    if (self->stack.empty()) return;
    self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }

  static void on_comment(void* user, const XML_Char* data) {
    auto* self = static_cast<Builder*>(user);
    Node c;
    c.kind = Node::Kind::comment;
    c.name = data;
    c.line = self->line();
    c.column = self->column();
    if (self->stack.empty()) {
      if (!self->root_seen) self->doc.prolog_comments.push_back(std::move(c));
    } else {
      self->stack.back()->children.push_back(std::move(c));
    }
  }

  static void on_decl(void* user, const XML_Char*, const XML_Char*, int) {
    static_cast<Builder*>(user)->doc.has_declaration = true;
  }
};

void write_node(const Node& n, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  if (n.kind == Node::Kind::comment) {
    out += indent + "<!--" + n.name + "-->\n";
    return;
  }
  out += indent + "<" + n.name;
  for (const auto& a : n.attributes) out += " " + a.name + "=\"" + escape_attribute(a.value) + "\"";
  const bool has_text = !is_blank(n.text);
  if (n.children.empty() && !has_text) {
    out += " />\n";
    return;
  }
  out += ">";
  if (n.children.empty()) {
    out += escape_attribute(n.text) + "</" + n.name + ">\n";
    return;
  }
  out += "\n";
  if (has_text) out += indent + "  " + escape_attribute(n.text) + "\n";
  for (const auto& c : n.children) write_node(c, depth + 1, out);
  out += indent + "</" + n.name + ">\n";
}

}  // namespace

Document parse(std::string_view bytes) {
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                      &XML_ParserFree);
  if (!parser) throw ParseError("cannot allocate XML parser", 0, 0);
  Builder b;
  b.parser = parser.get();
  XML_SetUserData(parser.get(), &b);
  XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);
  XML_SetCommentHandler(parser.get(), &Builder::on_comment);
  XML_SetXmlDeclHandler(parser.get(), &Builder::on_decl);
  if (XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw ParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                     XML_GetCurrentLineNumber(parser.get()),
                     XML_GetCurrentColumnNumber(parser.get()) + 1);
  }
  if (!b.root_seen) throw ParseError("no root element", 1, 1);
  return std::move(b.doc);
}

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string write(const Document& doc) {
  std::string out;
  if (doc.has_declaration) out += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  for (const auto& c : doc.prolog_comments) write_node(c, 0, out);
  write_node(doc.root, 0, out);
  return out;
}

}  // namespace giml::xml
