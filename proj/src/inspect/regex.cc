// Copyright 2026 The MCP Gateway Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcpgw/inspect/regex.h"

#include <cctype>
#include <memory>

namespace mcpgw::inspect {

namespace {

constexpr int kMaxRepeat = 1000;
constexpr std::size_t kMaxProgram = 50'000;

struct Node {
  enum class Kind { empty, byte, any, cls, concat, alt, repeat, bol, eol, word_b, not_word_b };
  Kind kind = Kind::empty;
  std::uint8_t byte = 0;
  std::bitset<256> set;
  int min = 0;
  int max = 0;  // -1 = unbounded
  std::vector<std::unique_ptr<Node>> kids;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Node::Kind k) {
  auto n = std::make_unique<Node>();
  n->kind = k;
  return n;
}

bool is_word(unsigned char c) { return std::isalnum(c) || c == '_'; }

std::bitset<256> class_of(char esc) {
  std::bitset<256> s;
  for (int c = 0; c < 256; ++c) {
    auto uc = static_cast<unsigned char>(c);
    bool in = false;
    switch (std::tolower(esc)) {
      case 'd': in = std::isdigit(uc); break;
      case 'w': in = is_word(uc); break;
      case 's': in = uc == ' ' || uc == '\t' || uc == '\n' || uc == '\r' || uc == '\f' || uc == '\v'; break;
    }
    s[c] = in;
  }
  if (std::isupper(static_cast<unsigned char>(esc))) s.flip();
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view p) : p_(p) {}

  NodePtr parse() {
    auto n = parse_alt();
    if (!error_ && pos_ < p_.size()) fail(p_[pos_] == ')' ? "unmatched ')'" : "unexpected character");
    return n;
  }

  const std::optional<RegexError>& error() const { return error_; }

 private:
  void fail(std::string msg) {
    if (!error_) error_ = RegexError{std::move(msg), pos_};
  }
  bool eof() const { return pos_ >= p_.size(); }
  char peek() const { return p_[pos_]; }

  NodePtr parse_alt() {
    auto first = parse_concat();
    if (eof() || peek() != '|') return first;
    auto alt = make(Node::Kind::alt);
    alt->kids.push_back(std::move(first));
    while (!eof() && peek() == '|') {
      ++pos_;
      alt->kids.push_back(parse_concat());
    }
    return alt;
  }

  NodePtr parse_concat() {
    auto cat = make(Node::Kind::concat);
    while (!eof() && peek() != '|' && peek() != ')' && !error_) {
      cat->kids.push_back(parse_repeat());
    }
    return cat;
  }

  std::optional<int> parse_int() {
    std::size_t start = pos_;
    long v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      if (v > 100000) v = 100000;
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    return static_cast<int>(v);
  }

  NodePtr parse_repeat() {
    auto atom = parse_atom();
    while (!eof() && !error_) {
      char c = peek();
      int min = 0;
      int max = 0;
      if (c == '*') {
        min = 0, max = -1, ++pos_;
      } else if (c == '+') {
        min = 1, max = -1, ++pos_;
      } else if (c == '?') {
        min = 0, max = 1, ++pos_;
      } else if (c == '{') {
        std::size_t save = pos_;
        ++pos_;
        auto lo = parse_int();
        if (!lo) {
          // Not a quantifier; treat '{' literally.
          pos_ = save;
          break;
        }
        min = *lo;
        max = min;
        if (!eof() && peek() == ',') {
          ++pos_;
          auto hi = parse_int();
          max = hi ? *hi : -1;
        }
        if (eof() || peek() != '}') {
          fail("unterminated repetition");
          return atom;
        }
        ++pos_;
        if (min > kMaxRepeat || max > kMaxRepeat) {
          fail("repetition count too large");
          return atom;
        }
        if (max != -1 && max < min) {
          fail("invalid repetition range");
          return atom;
        }
      } else {
        break;
      }
      if (!eof() && peek() == '?') ++pos_;  // lazy: same match set
      auto rep = make(Node::Kind::repeat);
      rep->min = min;
      rep->max = max;
      rep->kids.push_back(std::move(atom));
      atom = std::move(rep);
    }
    return atom;
  }

  std::optional<std::uint8_t> parse_hex_escape() {
    if (pos_ + 2 > p_.size()) return std::nullopt;
    auto hexval = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      return -1;
    };
    int hi = hexval(p_[pos_]);
    int lo = hexval(p_[pos_ + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    pos_ += 2;
    return static_cast<std::uint8_t>(hi * 16 + lo);
  }

  /// Escape after the backslash. Returns a class for \d etc, otherwise a byte.
  std::variant<std::uint8_t, std::bitset<256>, Node::Kind> parse_escape(bool in_class) {
    if (eof()) {
      fail("trailing backslash");
      return std::uint8_t{0};
    }
    char c = p_[pos_++];
    switch (c) {
      case 'd': case 'D': case 'w': case 'W': case 's': case 'S':
        return class_of(c);
      case 'n': return std::uint8_t{'\n'};
      case 'r': return std::uint8_t{'\r'};
      case 't': return std::uint8_t{'\t'};
      case 'f': return std::uint8_t{'\f'};
      case 'v': return std::uint8_t{'\v'};
      case 'x': {
        auto b = parse_hex_escape();
        if (!b) fail("bad \\x escape");
        return b.value_or(0);
      }
      case 'b':
        if (in_class) return std::uint8_t{'\b'};
        return Node::Kind::word_b;
      case 'B':
        if (in_class) break;
        return Node::Kind::not_word_b;
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      fail("backreferences are not supported");
      return std::uint8_t{0};
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      fail(std::string("unknown escape \\") + c);
      return std::uint8_t{0};
    }
    return static_cast<std::uint8_t>(c);
  }

  NodePtr parse_class() {
    // '[' already consumed
    auto n = make(Node::Kind::cls);
    bool negate = false;
    if (!eof() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    bool first = true;
    while (true) {
      if (eof()) {
        fail("unterminated character class");
        return n;
      }
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      std::optional<std::uint8_t> lo;
      ++pos_;
      if (c == '\\') {
        auto e = parse_escape(true);
        if (auto* set = std::get_if<std::bitset<256>>(&e)) {
          n->set |= *set;
          continue;
        }
        if (auto* b = std::get_if<std::uint8_t>(&e)) lo = *b;
        else {
          fail("invalid escape in class");
          return n;
        }
      } else {
        lo = static_cast<std::uint8_t>(c);
      }
      if (pos_ + 1 < p_.size() && peek() == '-' && p_[pos_ + 1] != ']') {
        ++pos_;
        char hc = p_[pos_++];
        std::uint8_t hi = static_cast<std::uint8_t>(hc);
        if (hc == '\\') {
          auto e = parse_escape(true);
          auto* b = std::get_if<std::uint8_t>(&e);
          if (!b) {
            fail("invalid class range");
            return n;
          }
          hi = *b;
        }
        if (hi < *lo) {
          fail("invalid class range");
          return n;
        }
        for (int v = *lo; v <= hi; ++v) n->set[v] = true;
      } else {
        n->set[*lo] = true;
      }
    }
    if (negate) n->set.flip();
    return n;
  }

  NodePtr parse_atom() {
    char c = p_[pos_++];
    switch (c) {
      case '(': {
        if (!eof() && peek() == '?') {
          if (pos_ + 1 < p_.size() && p_[pos_ + 1] == ':') {
            pos_ += 2;
          } else {
            fail("lookaround and inline flags are not supported");
            return make(Node::Kind::empty);
          }
        }
        auto inner = parse_alt();
        if (eof() || peek() != ')') {
          fail("missing ')'");
          return inner;
        }
        ++pos_;
        return inner;
      }
      case '[': return parse_class();
      case '.': return make(Node::Kind::any);
      case '^': return make(Node::Kind::bol);
      case '$': return make(Node::Kind::eol);
      case '*': case '+': case '?':
        --pos_;
        fail("nothing to repeat");
        ++pos_;
        return make(Node::Kind::empty);
      case '\\': {
        auto e = parse_escape(false);
        if (auto* set = std::get_if<std::bitset<256>>(&e)) {
          auto n = make(Node::Kind::cls);
          n->set = *set;
          return n;
        }
        if (auto* k = std::get_if<Node::Kind>(&e)) return make(*k);
        auto n = make(Node::Kind::byte);
        n->byte = std::get<std::uint8_t>(e);
        return n;
      }
      default: {
        auto n = make(Node::Kind::byte);
        n->byte = static_cast<std::uint8_t>(c);
        return n;
      }
    }
  }

  std::string_view p_;
  std::size_t pos_ = 0;
  std::optional<RegexError> error_;
};

}  // namespace

class RegexCompiler {
 public:
  RegexCompiler(Regex& re) : re_(re) {}

  bool emit(const Node& n) {
    if (re_.program_.size() > kMaxProgram) return false;
    using Op = Regex::Inst::Op;
    switch (n.kind) {
      case Node::Kind::empty:
        return true;
      case Node::Kind::byte: {
        auto uc = n.byte;
        if (re_.icase_ && std::isalpha(uc)) {
          std::bitset<256> s;
          s[std::tolower(uc)] = s[std::toupper(uc)] = true;
          push_class(s);
        } else {
          push({Op::byte, uc, 0, 0});
        }
        return true;
      }
      case Node::Kind::any:
        push({Op::any, 0, 0, 0});
        return true;
      case Node::Kind::cls: {
        auto s = n.set;
        if (re_.icase_) {
          for (int c = 0; c < 256; ++c) {
            if (n.set[c] && std::isalpha(c)) s[std::tolower(c)] = s[std::toupper(c)] = true;
          }
        }
        push_class(s);
        return true;
      }
      case Node::Kind::bol: push({Op::bol, 0, 0, 0}); return true;
      case Node::Kind::eol: push({Op::eol, 0, 0, 0}); return true;
      case Node::Kind::word_b: push({Op::word_b, 0, 0, 0}); return true;
      case Node::Kind::not_word_b: push({Op::not_word_b, 0, 0, 0}); return true;
      case Node::Kind::concat:
        for (const auto& k : n.kids) {
          if (!emit(*k)) return false;
        }
        return true;
      case Node::Kind::alt: {
        std::vector<int> jumps;
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          bool last = i + 1 == n.kids.size();
          int split = -1;
          if (!last) split = push({Op::split, 0, 0, 0});
          if (!last) re_.program_[split].x = here();
          if (!emit(*n.kids[i])) return false;
          if (!last) {
            jumps.push_back(push({Op::jmp, 0, 0, 0}));
            re_.program_[split].y = here();
          }
        }
        for (int j : jumps) re_.program_[j].x = here();
        return true;
      }
      case Node::Kind::repeat: {
        const Node& child = *n.kids.front();
        for (int i = 0; i < n.min; ++i) {
          if (!emit(child)) return false;
        }
        if (n.max == -1) {
          int split = push({Op::split, 0, 0, 0});
          re_.program_[split].x = here();
          if (!emit(child)) return false;
          push({Op::jmp, 0, split, 0});
          re_.program_[split].y = here();
        } else {
          std::vector<int> splits;
          for (int i = n.min; i < n.max; ++i) {
            int split = push({Op::split, 0, 0, 0});
            re_.program_[split].x = here();
            splits.push_back(split);
            if (!emit(child)) return false;
          }
          for (int s : splits) re_.program_[s].y = here();
        }
        return true;
      }
    }
    return true;
  }

  void finish() { push({Regex::Inst::Op::match, 0, 0, 0}); }

 private:
  int here() const { return static_cast<int>(re_.program_.size()); }
  int push(Regex::Inst inst) {
    re_.program_.push_back(inst);
    return here() - 1;
  }
  void push_class(const std::bitset<256>& s) {
    re_.classes_.push_back(s);
    push({Regex::Inst::Op::cls, 0, static_cast<int>(re_.classes_.size() - 1), 0});
  }

  Regex& re_;
};

std::variant<Regex, RegexError> Regex::compile(std::string_view pattern, bool case_insensitive) {
  Regex re;
  re.pattern_ = std::string(pattern);
  re.icase_ = case_insensitive;
  NodePtr root;
  if (pattern.empty()) {
    root = make(Node::Kind::empty);
  } else {
    Parser parser(pattern);
    root = parser.parse();
    if (parser.error()) return *parser.error();
  }
  RegexCompiler compiler(re);
  if (!compiler.emit(*root)) return RegexError{"pattern too large", 0};
  compiler.finish();
  if (re.program_.size() > kMaxProgram) return RegexError{"pattern too large", 0};
  return re;
}

std::optional<RegexMatch> Regex::search(std::string_view input) const {
  using Op = Inst::Op;
  struct Thread {
    int pc;
    std::size_t start;
  };
  const std::size_t n = program_.size();
  std::vector<Thread> clist;
  std::vector<Thread> nlist;
  clist.reserve(n);
  nlist.reserve(n);
  std::vector<std::uint32_t> mark(n, 0);
  std::uint32_t gen = 1;
  std::vector<int> stack;

  auto word_at = [&](std::size_t pos) {
    return pos < input.size() && is_word(static_cast<unsigned char>(input[pos]));
  };

  auto add = [&](std::vector<Thread>& list, int pc0, std::size_t start, std::size_t pos) {
    // Iterative epsilon closure; split pushes y then x so x has priority.
    stack.clear();
    stack.push_back(pc0);
    while (!stack.empty()) {
      int pc = stack.back();
      stack.pop_back();
      if (mark[pc] == gen) continue;
      mark[pc] = gen;
      const auto& inst = program_[pc];
      switch (inst.op) {
        case Op::jmp: stack.push_back(inst.x); break;
        case Op::split:
          stack.push_back(inst.y);
          stack.push_back(inst.x);
          break;
        case Op::bol:
          if (pos == 0) stack.push_back(pc + 1);
          break;
        case Op::eol:
          if (pos == input.size()) stack.push_back(pc + 1);
          break;
        case Op::word_b:
        case Op::not_word_b: {
          bool before = pos > 0 && word_at(pos - 1);
          bool boundary = before != word_at(pos);
          if (boundary == (inst.op == Op::word_b)) stack.push_back(pc + 1);
          break;
        }
        default:
          list.push_back({pc, start});
      }
    }
  };

  std::optional<RegexMatch> found;
  for (std::size_t pos = 0; pos <= input.size(); ++pos) {
    if (!found) add(clist, 0, pos, pos);
    if (clist.empty()) break;
    ++gen;
    nlist.clear();
    const bool has_char = pos < input.size();
    const auto ch = has_char ? static_cast<unsigned char>(input[pos]) : 0;
    for (const auto& t : clist) {
      const auto& inst = program_[t.pc];
      bool advance = false;
      switch (inst.op) {
        case Op::match:
          found = RegexMatch{t.start, pos};
          break;
        case Op::byte: advance = has_char && ch == inst.byte; break;
        case Op::any: advance = has_char; break;
        case Op::cls: advance = has_char && classes_[inst.x][ch]; break;
        default: break;
      }
      if (inst.op == Op::match) break;  // lower-priority threads are cut
      if (advance) add(nlist, t.pc + 1, t.start, pos + 1);
    }
    std::swap(clist, nlist);
  }
  return found;
}

}  // namespace mcpgw::inspect
