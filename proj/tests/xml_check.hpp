// Minimal XML well-formedness checker for the SVG outputs: declaration,
// balanced tags, quoted attributes, and legal entity references. Returns an
// empty string when the document parses, otherwise a description of the
// first problem.
#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace facetrack::xmltest {

inline std::string check_well_formed(const std::string& doc) {
  std::size_t i = 0;
  const std::size_t n = doc.size();
  std::vector<std::string> stack;

  auto fail = [&](const std::string& why) {
    return why + " at offset " + std::to_string(i);
  };
  auto is_name_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
           c == ':' || c == '.';
  };
  auto check_entity = [&](std::size_t at) -> bool {
    static const char* entities[] = {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"};
    for (const char* e : entities) {
      if (doc.compare(at, std::string(e).size(), e) == 0) return true;
    }
    return false;
  };

  // Optional XML declaration.
  if (doc.compare(0, 5, "<?xml") == 0) {
    const std::size_t end = doc.find("?>");
    if (end == std::string::npos) return "unterminated XML declaration";
    i = end + 2;
  }

  bool saw_root = false;
  while (i < n) {
    const char c = doc[i];
    if (c == '<') {
      if (i + 1 >= n) return fail("dangling '<'");
      if (doc[i + 1] == '/') {
        // Closing tag.
        std::size_t j = i + 2;
        std::string name;
        while (j < n && is_name_char(doc[j])) name += doc[j++];
        if (j >= n || doc[j] != '>') return fail("malformed closing tag");
        if (stack.empty()) return fail("closing tag with empty stack: " + name);
        if (stack.back() != name) {
          return fail("mismatched closing tag " + name + ", expected " + stack.back());
        }
        stack.pop_back();
        i = j + 1;
        continue;
      }
      // Opening tag.
      std::size_t j = i + 1;
      std::string name;
      while (j < n && is_name_char(doc[j])) name += doc[j++];
      if (name.empty()) return fail("empty tag name");
      // Attributes.
      while (j < n && doc[j] != '>' && !(doc[j] == '/' && j + 1 < n && doc[j + 1] == '>')) {
        if (std::isspace(static_cast<unsigned char>(doc[j]))) {
          ++j;
          continue;
        }
        std::string attr;
        while (j < n && is_name_char(doc[j])) attr += doc[j++];
        if (attr.empty()) return fail("bad attribute name in <" + name + ">");
        if (j >= n || doc[j] != '=') return fail("attribute without '=' in <" + name + ">");
        ++j;
        if (j >= n || doc[j] != '"') return fail("unquoted attribute in <" + name + ">");
        ++j;
        while (j < n && doc[j] != '"') {
          if (doc[j] == '<') return fail("raw '<' inside attribute");
          if (doc[j] == '&' && !check_entity(j)) return fail("bad entity in attribute");
          ++j;
        }
        if (j >= n) return fail("unterminated attribute value");
        ++j;
      }
      if (j >= n) return fail("unterminated tag <" + name + ">");
      if (doc[j] == '/') {
        i = j + 2;  // self-closing
      } else {
        stack.push_back(name);
        i = j + 1;
      }
      saw_root = true;
      continue;
    }
    if (c == '&') {
      if (!check_entity(i)) return fail("bad entity reference");
      i = doc.find(';', i) + 1;
      continue;
    }
    if (c == '>') return fail("stray '>'");
    ++i;
  }
  if (!stack.empty()) return "unclosed tag: " + stack.back();
  if (!saw_root) return "no root element";
  return "";
}

}  // namespace facetrack::xmltest
