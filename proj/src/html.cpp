#include "wikitables/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <initializer_list>
#include <unordered_map>

#include "wikitables/error.hpp"
#include "wikitables/unicode.hpp"

namespace wikitables::html {

namespace {

bool one_of(std::string_view tag, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), tag) != set.end();
}

bool is_raw_text_element(std::string_view tag) {
  return one_of(tag, {"script", "style", "textarea", "title", "xmp", "noscript"});
}

bool closes_paragraph(std::string_view tag) {
  return one_of(tag, {"address", "article", "aside", "blockquote", "center", "details",
                      "dir", "div", "dl", "fieldset", "figcaption", "figure", "footer",
                      "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main",
                      "menu", "nav", "ol", "p", "pre", "section", "table", "ul"});
}

bool is_table_section(std::string_view tag) {
  return one_of(tag, {"tbody", "thead", "tfoot"});
}

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", U'&'},     {"lt", U'<'},       {"gt", U'>'},      {"quot", U'"'},
      {"apos", U'\''},   {"nbsp", 0x00A0},   {"ensp", 0x2002},  {"emsp", 0x2003},
      {"thinsp", 0x2009}, {"zwnj", 0x200C},  {"zwj", 0x200D},   {"lrm", 0x200E},
      {"rlm", 0x200F},   {"ndash", 0x2013},  {"mdash", 0x2014}, {"minus", 0x2212},
      {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"sbquo", 0x201A}, {"ldquo", 0x201C},
      {"rdquo", 0x201D}, {"bdquo", 0x201E},  {"laquo", 0x00AB}, {"raquo", 0x00BB},
      {"hellip", 0x2026}, {"bull", 0x2022},  {"middot", 0x00B7}, {"shy", 0x00AD},
      {"copy", 0x00A9},  {"reg", 0x00AE},    {"trade", 0x2122}, {"deg", 0x00B0},
      {"times", 0x00D7}, {"divide", 0x00F7}, {"plusmn", 0x00B1}, {"sup1", 0x00B9},
      {"sup2", 0x00B2},  {"sup3", 0x00B3},   {"frac12", 0x00BD}, {"frac14", 0x00BC},
      {"frac34", 0x00BE}, {"prime", 0x2032}, {"Prime", 0x2033}, {"euro", 0x20AC},
      {"pound", 0x00A3}, {"yen", 0x00A5},    {"cent", 0x00A2},  {"sect", 0x00A7},
      {"para", 0x00B6},  {"dagger", 0x2020}, {"Dagger", 0x2021}, {"permil", 0x2030},
      {"larr", 0x2190},  {"uarr", 0x2191},   {"rarr", 0x2192},  {"darr", 0x2193},
      {"harr", 0x2194},  {"le", 0x2264},     {"ge", 0x2265},    {"ne", 0x2260},
      {"asymp", 0x2248}, {"infin", 0x221E},  {"iexcl", 0x00A1}, {"iquest", 0x00BF},
      {"ordf", 0x00AA},  {"ordm", 0x00BA},   {"not", 0x00AC},   {"micro", 0x00B5},
      {"acute", 0x00B4}, {"uml", 0x00A8},    {"eacute", 0x00E9}, {"Eacute", 0x00C9},
      {"egrave", 0x00E8}, {"agrave", 0x00E0}, {"aacute", 0x00E1}, {"ouml", 0x00F6},
      {"uuml", 0x00FC},  {"auml", 0x00E4},   {"szlig", 0x00DF}, {"ccedil", 0x00E7},
      {"ntilde", 0x00F1}, {"oacute", 0x00F3}, {"iacute", 0x00ED}, {"uacute", 0x00FA},
      {"alpha", 0x03B1}, {"beta", 0x03B2},   {"gamma", 0x03B3}, {"delta", 0x03B4},
      {"pi", 0x03C0},    {"mu", 0x03BC},     {"sigma", 0x03C3}, {"omega", 0x03C9},
      {"star", 0x2606},  {"check", 0x2713},  {"hearts", 0x2665}, {"loz", 0x25CA},
  };
  return table;
}

}  // namespace

const std::string* Node::attribute(std::string_view attr) const {
  for (const auto& a : attributes)
    if (a.name == attr) return &a.value;
  return nullptr;
}

bool is_void_element(std::string_view tag) {
  return one_of(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link",
                      "meta", "param", "source", "track", "wbr"});
}

bool is_block_element(std::string_view tag) {
  return closes_paragraph(tag) ||
         one_of(tag, {"body", "br", "caption", "dd", "dt", "html", "li", "tbody", "td",
                      "tfoot", "th", "thead", "tr", "option", "legend"});
}

bool is_hidden_element(std::string_view tag) {
  return one_of(tag, {"script", "style", "noscript", "template", "title", "head"});
}

bool is_styled_hidden(const Node& node) {
  const std::string* style = node.attribute("style");
  if (style == nullptr) return false;
  std::string compact;
  for (const char c : *style)
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r')
      compact.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return compact.find("display:none") != std::string::npos;
}

bool is_heading(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::string_view body = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() >= 2 && body[0] == '#') {
      unsigned long value = 0;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                             value, hex ? 16 : 10);
      if (!digits.empty() && ec == std::errc{} && end == digits.data() + digits.size()) {
        char32_t cp = static_cast<char32_t>(value);
        if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF))
          cp = unicode::kReplacement;
        unicode::append_utf8(out, cp);
        decoded = true;
      }
    } else {
      const auto& table = named_entities();
      if (const auto it = table.find(body); it != table.end()) {
        unicode::append_utf8(out, it->second);
        decoded = true;
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view markup) : in_(markup) {
    Node root;
    root.kind = NodeKind::document;
    doc_.nodes_.push_back(std::move(root));
    open_.push_back(0);
  }

  Document build() {
    while (pos_ < in_.size()) {
      const std::size_t lt = in_.find('<', pos_);
      if (lt == std::string_view::npos) {
        add_text(in_.substr(pos_));
        break;
      }
      if (lt > pos_) add_text(in_.substr(pos_, lt - pos_));
      pos_ = lt;
      markup();
    }
    return std::move(doc_);
  }

 private:
  void markup() {
    const std::string_view rest = in_.substr(pos_);
    if (rest.starts_with("<!--")) {
      const std::size_t end = in_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? in_.size() : end + 3;
      return;
    }
    if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
      skip_past('>');
      return;
    }
    if (rest.size() >= 3 && rest[1] == '/' && is_name_start(rest[2])) {
      pos_ += 2;
      const std::string name = read_name();
      skip_past('>');
      end_tag(name);
      return;
    }
    if (rest.size() >= 2 && rest[1] == '/') {
      skip_past('>');
      return;
    }
    if (rest.size() >= 2 && is_name_start(rest[1])) {
      start_tag_token();
      return;
    }
    add_text("<");
    ++pos_;
  }

  void skip_past(char c) {
    const std::size_t end = in_.find(c, pos_);
    pos_ = end == std::string_view::npos ? in_.size() : end + 1;
  }

  std::string read_name() {
    std::string name;
    while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '>' &&
           in_[pos_] != '/')
      name.push_back(lower(in_[pos_++]));
    return name;
  }

  void skip_spaces() {
    while (pos_ < in_.size() && is_space(in_[pos_])) ++pos_;
  }

  void start_tag_token() {
    ++pos_;
    Node element;
    element.kind = NodeKind::element;
    element.name = read_name();
    bool self_closing = false;
    while (true) {
      skip_spaces();
      if (pos_ >= in_.size()) return;  // EOF inside a tag drops the tag
      if (in_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (in_[pos_] == '/') {
        ++pos_;
        if (pos_ < in_.size() && in_[pos_] == '>') {
          self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      Attribute attr;
      while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '>' &&
             in_[pos_] != '=' && !(in_[pos_] == '/' && pos_ + 1 < in_.size() &&
                                   in_[pos_ + 1] == '>'))
        attr.name.push_back(lower(in_[pos_++]));
      if (attr.name.empty()) attr.name.push_back(in_[pos_++]);
      skip_spaces();
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        skip_spaces();
        if (pos_ < in_.size() && (in_[pos_] == '"' || in_[pos_] == '\'')) {
          const char quote = in_[pos_++];
          const std::size_t end = in_.find(quote, pos_);
          if (end == std::string_view::npos) {
            pos_ = in_.size();
            return;
          }
          attr.value = decode_entities(in_.substr(pos_, end - pos_));
          pos_ = end + 1;
        } else {
          const std::size_t start = pos_;
          while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '>') ++pos_;
          attr.value = decode_entities(in_.substr(start, pos_ - start));
        }
      }
      const bool duplicate = std::any_of(
          element.attributes.begin(), element.attributes.end(),
          [&](const Attribute& a) { return a.name == attr.name; });
      if (!duplicate) element.attributes.push_back(std::move(attr));
    }
    start_tag(std::move(element), self_closing);
  }

  const Node& top() const { return doc_.nodes_[open_.back()]; }

  // Index into open_ of the nearest element named in `targets`, searching
  // from the top and not crossing any element named in `barriers`.
  std::size_t find_open(std::initializer_list<std::string_view> targets,
                        std::initializer_list<std::string_view> barriers) const {
    for (std::size_t i = open_.size(); i-- > 1;) {
      const auto& name = doc_.nodes_[open_[i]].name;
      if (one_of(name, targets)) return i;
      if (one_of(name, barriers)) return npos;
    }
    return npos;
  }

  void pop_to(std::size_t depth) { open_.resize(depth); }

  std::size_t append(Node node) {
    const std::size_t parent = open_.back();
    node.parent = parent;
    const std::size_t index = doc_.nodes_.size();
    doc_.nodes_.push_back(std::move(node));
    doc_.nodes_[parent].children.push_back(index);
    return index;
  }

  void push(Node node) {
    const std::size_t index = append(std::move(node));
    open_.push_back(index);
    if (open_.size() > Document::kMaxDepth)
      throw HtmlError("element nesting deeper than " +
                      std::to_string(Document::kMaxDepth));
  }

  void start_tag(Node element, bool self_closing) {
    const std::string name = element.name;

    if (closes_paragraph(name)) {
      const std::size_t p = find_open({"p"}, {"table", "td", "th", "caption", "button"});
      if (p != npos) pop_to(p);
    }
    if (is_heading(name) && is_heading(top().name)) open_.pop_back();

    if (name == "li") {
      const std::size_t li = find_open({"li"}, {"ul", "ol", "table", "td", "th"});
      if (li != npos) pop_to(li);
    } else if (name == "dt" || name == "dd") {
      const std::size_t d = find_open({"dt", "dd"}, {"dl", "table", "td", "th"});
      if (d != npos) pop_to(d);
    } else if (name == "tr") {
      const std::size_t t = find_open({"table", "tbody", "thead", "tfoot"}, {});
      if (t == npos) return;
      pop_to(t + 1);
    } else if (name == "td" || name == "th") {
      const std::size_t t =
          find_open({"td", "th", "tr", "table", "tbody", "thead", "tfoot"}, {});
      if (t == npos) return;
      const auto& found = doc_.nodes_[open_[t]].name;
      if (found == "td" || found == "th") {
        pop_to(t);
      } else {
        pop_to(t + 1);
      }
      if (top().name != "tr") {
        Node tr;
        tr.name = "tr";
        push(std::move(tr));
      }
    } else if (is_table_section(name) || name == "caption" || name == "colgroup") {
      const std::size_t t = find_open({"table"}, {});
      if (t == npos) return;
      pop_to(t + 1);
    } else if (name == "option") {
      if (top().name == "option") open_.pop_back();
    }

    if (is_void_element(name) || self_closing) {
      append(std::move(element));
      return;
    }
    if (is_raw_text_element(name)) {
      push(std::move(element));
      raw_text(name);
      open_.pop_back();
      return;
    }
    push(std::move(element));
  }

  void raw_text(const std::string& name) {
    const std::string closing = "</" + name;
    std::size_t search = pos_;
    std::size_t end = std::string_view::npos;
    while (search < in_.size()) {
      const std::size_t lt = in_.find("</", search);
      if (lt == std::string_view::npos) break;
      bool match = lt + closing.size() <= in_.size();
      for (std::size_t k = 0; match && k < closing.size(); ++k)
        match = lower(in_[lt + k]) == closing[k];
      if (match) {
        end = lt;
        break;
      }
      search = lt + 2;
    }
    const std::size_t stop = end == std::string_view::npos ? in_.size() : end;
    if (stop > pos_) {
      Node text;
      text.kind = NodeKind::text;
      text.text = std::string(in_.substr(pos_, stop - pos_));
      append(std::move(text));
    }
    pos_ = stop;
    if (end != std::string_view::npos) skip_past('>');
  }

  void end_tag(const std::string& name) {
    std::size_t found = npos;
    if (name == "table") {
      found = find_open({"table"}, {});
    } else if (name == "td" || name == "th" || name == "tr" || is_table_section(name) ||
               name == "caption" || name == "colgroup") {
      found = find_open({name}, {"table"});
    } else {
      // Generic end tags cannot close elements outside the current cell.
      for (std::size_t i = open_.size(); i-- > 1;) {
        const auto& open_name = doc_.nodes_[open_[i]].name;
        if (open_name == name) {
          found = i;
          break;
        }
        if (one_of(open_name, {"table", "td", "th", "caption"})) break;
      }
    }
    if (found != npos) pop_to(found);
  }

  void add_text(std::string_view raw) {
    if (raw.empty()) return;
    std::string decoded = decode_entities(raw);
    const std::size_t parent = open_.back();
    auto& siblings = doc_.nodes_[parent].children;
    if (!siblings.empty() && doc_.nodes_[siblings.back()].kind == NodeKind::text) {
      doc_.nodes_[siblings.back()].text += decoded;
      return;
    }
    Node text;
    text.kind = NodeKind::text;
    text.text = std::move(decoded);
    append(std::move(text));
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  Document doc_;
  std::vector<std::size_t> open_;
};

Document Document::parse(std::string_view markup) {
  if (!unicode::valid_utf8(markup)) throw HtmlError("page is not valid UTF-8");
  return TreeBuilder(markup).build();
}

}  // namespace wikitables::html
