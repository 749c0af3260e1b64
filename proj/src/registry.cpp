// Copyright 2026 The AdaptLeak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adaptleak/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "adaptleak/error.hpp"

namespace adaptleak {

bool is_method_id(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

int AdaptationRule::action_index(std::string_view action) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] == action) return static_cast<int>(i);
  }
  return -1;
}

const AdaptationRule& Registry::rule(int id) const {
  for (const auto& r : rules) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kMalformedDocument, "no adaptation with id " + std::to_string(id));
}

int Registry::owner_of(std::string_view action) const {
  for (const auto& r : rules) {
    if (r.action_index(action) >= 0) return r.id;
  }
  return -1;
}

void validate(const Registry& reg) {
  if (reg.rules.empty()) {
    throw Error(ErrorCode::kMalformedDocument, "registry has no adaptation");
  }
  std::vector<bool> seen_id(reg.rules.size(), false);
  std::set<std::string, std::less<>> owned;
  for (const auto& rule : reg.rules) {
    if (rule.id < 0 || static_cast<std::size_t>(rule.id) >= reg.rules.size() || seen_id[rule.id]) {
      throw Error(ErrorCode::kMalformedDocument,
                  "adaptation ids must be unique and dense from 0 (got " +
                      std::to_string(rule.id) + ")");
    }
    seen_id[rule.id] = true;
    if (rule.contexts.empty()) {
      throw Error(ErrorCode::kEmptyContextList,
                  "adaptation " + std::to_string(rule.id) + " lists no context method");
    }
    if (rule.actions.empty()) {
      throw Error(ErrorCode::kEmptyActionList,
                  "adaptation " + std::to_string(rule.id) + " lists no action method");
    }
    std::set<std::string, std::less<>> contexts;
    for (const auto& c : rule.contexts) {
      if (!is_method_id(c)) throw Error(ErrorCode::kMalformedDocument, "bad method name '" + c + "'");
      if (!contexts.insert(c).second) {
        throw Error(ErrorCode::kMalformedDocument, "context '" + c + "' listed twice");
      }
    }
    std::set<std::string, std::less<>> actions;
    for (const auto& a : rule.actions) {
      if (!is_method_id(a)) throw Error(ErrorCode::kMalformedDocument, "bad method name '" + a + "'");
      if (!actions.insert(a).second) {
        throw Error(ErrorCode::kMalformedDocument, "action '" + a + "' listed twice");
      }
      if (contexts.count(a) != 0) {
        throw Error(ErrorCode::kContextActionOverlap,
                    "'" + a + "' is both context and action of adaptation " +
                        std::to_string(rule.id));
      }
      if (!owned.insert(a).second) {
        throw Error(ErrorCode::kDuplicateActionAcrossRules,
                    "action '" + a + "' appears in more than one adaptation");
      }
    }
  }
}

namespace {

struct Attribute {
  std::string name;
  std::string value;
};

// Recursive-descent reader for the registry subset of XML. Accepts an
// optional <?xml ...?> declaration and comments between elements; anything
// else outside the grammar is rejected with a line:column diagnostic.
class RegistryReader {
 public:
  explicit RegistryReader(std::string_view text) : text_(text) {
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  Registry read() {
    skip_misc(/*allow_declaration=*/true);
    expect_open("registry", nullptr);
    Registry reg;
    for (;;) {
      skip_misc(false);
      if (peek_close("registry")) break;
      std::optional<int> id;
      expect_open("adaptation", &id);
      AdaptationRule rule;
      rule.id = id.value_or(static_cast<int>(reg.rules.size()));
      skip_misc(false);
      rule.contexts = read_method_list("context");
      skip_misc(false);
      rule.actions = read_method_list("action");
      skip_misc(false);
      expect_close("adaptation");
      reg.rules.push_back(std::move(rule));
    }
    expect_close("registry");
    skip_misc(false);
    if (pos_ != text_.size()) fail("content after </registry>");
    validate(reg);
    return reg;
  }

 private:
  std::vector<std::string> read_method_list(const char* tag) {
    expect_open(tag, nullptr);
    std::vector<std::string> methods;
    for (;;) {
      skip_misc(false);
      if (peek_close(tag)) break;
      expect_open("method", nullptr);
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != '<') ++pos_;
      std::string_view body = trim(text_.substr(start, pos_ - start));
      if (!is_method_id(body)) fail("method name '" + std::string(body) + "' is not a valid identifier");
      expect_close("method");
      methods.emplace_back(body);
    }
    expect_close(tag);
    if (methods.empty()) {
      throw Error(std::string_view(tag) == "context" ? ErrorCode::kEmptyContextList
                                                     : ErrorCode::kEmptyActionList,
                  location() + ": <" + tag + "> has no <method>");
    }
    return methods;
  }

  void expect_open(const char* tag, std::optional<int>* id) {
    if (!consume("<")) fail(std::string("expected <") + tag + ">");
    std::string_view name = read_name();
    if (name != tag) fail(std::string("expected <") + tag + ">, found <" + std::string(name) + ">");
    for (;;) {
      bool had_space = skip_space();
      if (consume(">")) return;
      if (consume("/>")) fail("self-closing <" + std::string(tag) + "/> is not allowed");
      if (!had_space) fail("malformed start tag <" + std::string(tag) + ">");
      Attribute attr = read_attribute();
      if (id == nullptr || attr.name != "id") {
        fail("attribute '" + attr.name + "' not allowed on <" + tag + ">");
      }
      if (id->has_value()) fail("duplicate id attribute");
      int value = 0;
      auto [ptr, ec] = std::from_chars(attr.value.data(), attr.value.data() + attr.value.size(), value);
      if (ec != std::errc() || ptr != attr.value.data() + attr.value.size() || attr.value.empty()) {
        fail("id attribute must be an integer, got '" + attr.value + "'");
      }
      *id = value;
    }
  }

  void expect_close(const char* tag) {
    if (!consume("</")) fail(std::string("expected </") + tag + ">");
    std::string_view name = read_name();
    if (name != tag) fail(std::string("expected </") + tag + ">, found </" + std::string(name) + ">");
    skip_space();
    if (!consume(">")) fail(std::string("malformed </") + tag + ">");
  }

  bool peek_close(const char* tag) const {
    std::string_view rest = text_.substr(pos_);
    if (rest.substr(0, 2) != "</") return false;
    std::string_view t(tag);
    return rest.substr(2, t.size()) == t;
  }

  Attribute read_attribute() {
    Attribute attr;
    attr.name = std::string(read_name());
    skip_space();
    if (!consume("=")) fail("expected '=' after attribute " + attr.name);
    skip_space();
    if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
      fail("attribute value must be quoted");
    }
    char quote = text_[pos_++];
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
    if (pos_ >= text_.size()) fail("unterminated attribute value");
    attr.value = std::string(text_.substr(start, pos_ - start));
    ++pos_;
    return attr;
  }

  std::string_view read_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                c == '_' || c == '-' || c == ':' || c == '.';
      if (!ok) break;
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }

  void skip_misc(bool allow_declaration) {
    for (;;) {
      skip_space();
      if (allow_declaration && text_.substr(pos_, 5) == "<?xml") {
        std::size_t end = text_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated XML declaration");
        pos_ = end + 2;
        allow_declaration = false;
        continue;
      }
      if (text_.substr(pos_, 4) == "<!--") {
        std::size_t end = text_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] != '<') fail("unexpected text between elements");
      return;
    }
  }

  bool skip_space() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    return pos_ != start;
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
  }

  std::string location() const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return std::to_string(line) + ":" + std::to_string(col);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::kMalformedDocument, location() + ": " + message);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Registry parse_registry(std::string_view text) { return RegistryReader(text).read(); }

Registry load_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_registry(buf.str());
}

std::string serialize_registry(const Registry& reg) {
  validate(reg);
  std::string out = "<registry>\n";
  auto methods = [&out](const char* tag, const std::vector<std::string>& names) {
    out += "    <";
    out += tag;
    out += ">\n";
    for (const auto& n : names) {
      out += "      <method>" + n + "</method>\n";
    }
    out += "    </";
    out += tag;
    out += ">\n";
  };
  for (const auto& rule : reg.rules) {
    out += "  <adaptation id=\"" + std::to_string(rule.id) + "\">\n";
    methods("context", rule.contexts);
    methods("action", rule.actions);
    out += "  </adaptation>\n";
  }
  out += "</registry>\n";
  return out;
}

bool ProtectionLists::protects(int rule_id, std::string_view action) const {
  if (rule_id < 0 || static_cast<std::size_t>(rule_id) >= lists.size()) return false;
  const auto& list = lists[rule_id];
  return std::find(list.begin(), list.end(), action) != list.end();
}

ProtectionLists build_protection_lists(const Registry& reg) {
  ProtectionLists out;
  out.lists.resize(reg.rules.size());
  for (const auto& rule : reg.rules) out.lists[rule.id] = rule.actions;
  return out;
}

MITables init_mi_tables(const Registry& reg, int max_actions_per_rule) {
  MITables tables(reg.rules.size());
  for (const auto& rule : reg.rules) {
    if (static_cast<int>(rule.actions.size()) > max_actions_per_rule || rule.actions.size() > 31) {
      throw Error(ErrorCode::kTooManyActions,
                  "adaptation " + std::to_string(rule.id) + " has " +
                      std::to_string(rule.actions.size()) + " actions; cap is " +
                      std::to_string(max_actions_per_rule));
    }
    MITable& t = tables[rule.id];
    t.rule_id = rule.id;
    t.actions = rule.actions;
    t.values.assign(std::size_t{1} << rule.actions.size(), 0.0);
  }
  return tables;
}

std::vector<std::string> mask_to_names(const std::vector<std::string>& actions, ActionMask mask) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (mask & (ActionMask{1} << i)) names.push_back(actions[i]);
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace adaptleak
