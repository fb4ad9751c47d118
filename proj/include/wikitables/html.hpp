#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace wikitables::html {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct Attribute {
  std::string name;
  std::string value;
};

enum class NodeKind { document, element, text };

struct Node {
  NodeKind kind = NodeKind::element;
  std::string name;  // lower-case tag name; empty for text and document
  std::vector<Attribute> attributes;
  std::string text;  // entity-decoded, text nodes only
  std::size_t parent = npos;
  std::vector<std::size_t> children;

  bool is(std::string_view tag) const {
    return kind == NodeKind::element && name == tag;
  }
  const std::string* attribute(std::string_view attr) const;
};

/// Tolerant HTML tree: unknown or stray end tags are ignored, table and list
/// elements are closed implicitly the way browsers do, and missing end tags
/// are closed at end of input. Nodes live in one vector in document order.
class Document {
 public:
  /// Throws HtmlError for input that is not UTF-8 or nests deeper than
  /// kMaxDepth elements.
  static Document parse(std::string_view markup);

  static constexpr std::size_t kMaxDepth = 1024;

  const Node& node(std::size_t index) const { return nodes_[index]; }
  std::size_t root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

std::string decode_entities(std::string_view text);

bool is_void_element(std::string_view tag);

/// Elements whose boundaries separate words in rendered text.
bool is_block_element(std::string_view tag);

/// Elements whose content is never rendered as page text.
bool is_hidden_element(std::string_view tag);
/// Inline style hides the element (sort keys are commonly written this way).
bool is_styled_hidden(const Node& node);

bool is_heading(std::string_view tag);

}  // namespace wikitables::html
