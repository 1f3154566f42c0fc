#include "toolgate/pattern.hpp"

#include "toolgate/pattern_ast.hpp"

#include <cctype>

namespace toolgate {
namespace detail {
namespace {

ByteSet digit_set() {
  ByteSet s;
  for (int c = '0'; c <= '9'; ++c) s.set(c);
  return s;
}

ByteSet word_set() {
  ByteSet s = digit_set();
  for (int c = 'a'; c <= 'z'; ++c) s.set(c);
  for (int c = 'A'; c <= 'Z'; ++c) s.set(c);
  s.set('_');
  return s;
}

ByteSet space_set() {
  ByteSet s;
  for (char c : std::string_view(" \t\n\r\f\v")) s.set(static_cast<unsigned char>(c));
  return s;
}

ByteSet single(unsigned char c) {
  ByteSet s;
  s.set(c);
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  PatternNode run() {
    PatternNode node = parse_alternation();
    if (pos_ < src_.size()) {
      // Only an unmatched ')' stops the top-level alternation early.
      throw PatternError("unbalanced ')'", pos_);
    }
    return node;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  PatternNode parse_alternation() {
    std::vector<PatternNode> branches;
    branches.push_back(parse_concat());
    while (!at_end() && peek() == '|') {
      ++pos_;
      branches.push_back(parse_concat());
    }
    if (branches.size() == 1) return std::move(branches.front());
    PatternNode node;
    node.kind = PatternNode::Kind::Alternate;
    node.children = std::move(branches);
    return node;
  }

  PatternNode parse_concat() {
    PatternNode node;
    node.kind = PatternNode::Kind::Concat;
    while (!at_end() && peek() != '|' && peek() != ')') {
      node.children.push_back(parse_repeat());
    }
    if (node.children.empty()) return PatternNode{};
    if (node.children.size() == 1) return std::move(node.children.front());
    return node;
  }

  // Recognizes {n}, {n,}, {n,m} starting at pos_ without consuming.
  bool brace_quantifier(std::size_t at, int& lo, int& hi, std::size_t& end) const {
    if (at >= src_.size() || src_[at] != '{') return false;
    std::size_t i = at + 1;
    auto read_number = [&](int& out) {
      const std::size_t start = i;
      long value = 0;
      while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) {
        value = value * 10 + (src_[i] - '0');
        if (value > 1'000'000) value = 1'000'000;
        ++i;
      }
      out = static_cast<int>(value);
      return i > start;
    };
    if (!read_number(lo)) return false;
    hi = lo;
    if (i < src_.size() && src_[i] == ',') {
      ++i;
      if (i < src_.size() && src_[i] == '}') {
        hi = -1;
      } else if (!read_number(hi)) {
        return false;
      }
    }
    if (i >= src_.size() || src_[i] != '}') return false;
    end = i + 1;
    return true;
  }

  PatternNode parse_repeat() {
    const std::size_t atom_pos = pos_;
    PatternNode atom = parse_atom();
    for (;;) {
      if (at_end()) break;
      int lo = 0;
      int hi = -1;
      std::size_t end = 0;
      const char c = peek();
      if (c == '*') {
        lo = 0, hi = -1, end = pos_ + 1;
      } else if (c == '+') {
        lo = 1, hi = -1, end = pos_ + 1;
      } else if (c == '?') {
        lo = 0, hi = 1, end = pos_ + 1;
      } else if (!brace_quantifier(pos_, lo, hi, end)) {
        break;
      }
      if (atom.kind == PatternNode::Kind::LineStart || atom.kind == PatternNode::Kind::LineEnd) {
        throw PatternError("nothing to repeat", atom_pos);
      }
      if (hi != -1 && hi < lo) throw PatternError("quantifier range out of order", pos_);
      if (lo > kMaxRepeat || hi > kMaxRepeat) throw PatternError("repetition count too large", pos_);
      pos_ = end;
      if (!at_end() && peek() == '?') ++pos_;  // lazy suffix; longest-match ignores it
      PatternNode rep;
      rep.kind = PatternNode::Kind::Repeat;
      rep.min = lo;
      rep.max = hi;
      rep.children.push_back(std::move(atom));
      atom = std::move(rep);
    }
    return atom;
  }

  ByteSet parse_escape_set(bool in_class) {
    // pos_ points just past the backslash.
    if (at_end()) throw PatternError("trailing backslash", pos_ - 1);
    const char c = src_[pos_++];
    switch (c) {
      case 'd': return digit_set();
      case 'D': return ~digit_set();
      case 'w': return word_set();
      case 'W': return ~word_set();
      case 's': return space_set();
      case 'S': return ~space_set();
      case 'n': return single('\n');
      case 't': return single('\t');
      case 'r': return single('\r');
      case 'f': return single('\f');
      case 'v': return single('\v');
      default: break;
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      throw PatternError(std::string("unsupported escape \\") + c, pos_ - 2);
    }
    (void)in_class;
    return single(static_cast<unsigned char>(c));
  }

  PatternNode parse_class() {
    // pos_ points just past '['.
    const std::size_t open = pos_ - 1;
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    ByteSet set;
    bool first = true;
    for (;;) {
      if (at_end()) throw PatternError("unterminated character class", open);
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      ByteSet item;
      int lo_char = -1;
      if (c == '\\') {
        ++pos_;
        item = parse_escape_set(true);
        if (item.count() == 1) {
          for (int b = 0; b < 256; ++b) {
            if (item.test(b)) lo_char = b;
          }
        }
      } else {
        ++pos_;
        lo_char = static_cast<unsigned char>(c);
        item = single(static_cast<unsigned char>(c));
      }
      if (lo_char >= 0 && pos_ + 1 < src_.size() && peek() == '-' && src_[pos_ + 1] != ']') {
        ++pos_;
        int hi_char = 0;
        if (peek() == '\\') {
          ++pos_;
          ByteSet hi_set = parse_escape_set(true);
          if (hi_set.count() != 1) throw PatternError("invalid class range", pos_);
          for (int b = 0; b < 256; ++b) {
            if (hi_set.test(b)) hi_char = b;
          }
        } else {
          hi_char = static_cast<unsigned char>(src_[pos_++]);
        }
        if (hi_char < lo_char) throw PatternError("invalid class range", pos_ - 1);
        for (int b = lo_char; b <= hi_char; ++b) item.set(b);
      }
      set |= item;
    }
    PatternNode node;
    node.kind = PatternNode::Kind::Set;
    node.set = negate ? ~set : set;
    return node;
  }

  PatternNode parse_atom() {
    const std::size_t at = pos_;
    const char c = src_[pos_++];
    PatternNode node;
    switch (c) {
      case '(': {
        if (pos_ + 1 < src_.size() && src_[pos_] == '?' && src_[pos_ + 1] == ':') pos_ += 2;
        node = parse_alternation();
        if (at_end() || peek() != ')') throw PatternError("unbalanced '('", at);
        ++pos_;
        return node;
      }
      case '[':
        return parse_class();
      case '.':
        node.kind = PatternNode::Kind::Set;
        node.set = ~single('\n');
        return node;
      case '^':
        node.kind = PatternNode::Kind::LineStart;
        return node;
      case '$':
        node.kind = PatternNode::Kind::LineEnd;
        return node;
      case '\\':
        node.kind = PatternNode::Kind::Set;
        node.set = parse_escape_set(false);
        return node;
      case '*':
      case '+':
      case '?':
        throw PatternError("nothing to repeat", at);
      case '{': {
        int lo = 0;
        int hi = 0;
        std::size_t end = 0;
        if (brace_quantifier(at, lo, hi, end)) throw PatternError("nothing to repeat", at);
        break;
      }
      default:
        break;
    }
    node.kind = PatternNode::Kind::Set;
    node.set = single(static_cast<unsigned char>(c));
    return node;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

PatternNode parse_pattern(std::string_view source) { return Parser(source).run(); }

struct Inst {
  enum class Op { Byte, Split, Jmp, Match, LineStart, LineEnd };
  Op op = Op::Match;
  int x = 0;
  int y = 0;
  int set = -1;
};

struct Program {
  std::vector<Inst> code;
  std::vector<ByteSet> sets;
};

namespace {

constexpr std::size_t kMaxProgram = 200'000;

class Compiler {
 public:
  Program run(const PatternNode& root) {
    emit(root);
    push({Inst::Op::Match});
    return std::move(prog_);
  }

 private:
  int push(Inst inst) {
    if (prog_.code.size() >= kMaxProgram) throw PatternError("pattern too large", 0);
    prog_.code.push_back(inst);
    return static_cast<int>(prog_.code.size()) - 1;
  }

  void emit(const PatternNode& node) {
    switch (node.kind) {
      case PatternNode::Kind::Empty:
        return;
      case PatternNode::Kind::Set: {
        prog_.sets.push_back(node.set);
        Inst inst{Inst::Op::Byte};
        inst.set = static_cast<int>(prog_.sets.size()) - 1;
        push(inst);
        return;
      }
      case PatternNode::Kind::LineStart:
        push({Inst::Op::LineStart});
        return;
      case PatternNode::Kind::LineEnd:
        push({Inst::Op::LineEnd});
        return;
      case PatternNode::Kind::Concat:
        for (const auto& child : node.children) emit(child);
        return;
      case PatternNode::Kind::Alternate: {
        std::vector<int> jumps;
        for (std::size_t i = 0; i + 1 < node.children.size(); ++i) {
          const int split = push({Inst::Op::Split});
          prog_.code[split].x = split + 1;
          emit(node.children[i]);
          jumps.push_back(push({Inst::Op::Jmp}));
          prog_.code[split].y = static_cast<int>(prog_.code.size());
        }
        emit(node.children.back());
        for (int j : jumps) prog_.code[j].x = static_cast<int>(prog_.code.size());
        return;
      }
      case PatternNode::Kind::Repeat: {
        const PatternNode& child = node.children.front();
        for (int i = 0; i < node.min; ++i) emit(child);
        if (node.max == -1) {
          const int split = push({Inst::Op::Split});
          prog_.code[split].x = split + 1;
          emit(child);
          Inst back{Inst::Op::Jmp};
          back.x = split;
          push(back);
          prog_.code[split].y = static_cast<int>(prog_.code.size());
        } else {
          std::vector<int> splits;
          for (int i = node.min; i < node.max; ++i) {
            const int split = push({Inst::Op::Split});
            prog_.code[split].x = split + 1;
            splits.push_back(split);
            emit(child);
          }
          for (int s : splits) prog_.code[s].y = static_cast<int>(prog_.code.size());
        }
        return;
      }
    }
  }

  Program prog_;
};

// Thread list keyed by program counter; first insertion wins, and threads
// are inserted in nondecreasing start order, so each pc keeps its earliest
// start.
class ThreadList {
 public:
  explicit ThreadList(std::size_t size) : index_(size, 0), pcs_(), starts_() {
    pcs_.reserve(size);
    starts_.reserve(size);
  }

  void clear() {
    ++generation_;
    pcs_.clear();
    starts_.clear();
    if (generation_ == 0) {
      std::fill(index_.begin(), index_.end(), 0);
      generation_ = 1;
    }
  }

  bool insert(int pc, std::size_t start) {
    if (index_[pc] == generation_) return false;
    index_[pc] = generation_;
    pcs_.push_back(pc);
    starts_.push_back(start);
    return true;
  }

  std::size_t size() const { return pcs_.size(); }
  int pc(std::size_t i) const { return pcs_[i]; }
  std::size_t start(std::size_t i) const { return starts_[i]; }

 private:
  std::vector<std::uint32_t> index_;
  std::uint32_t generation_ = 1;
  std::vector<int> pcs_;
  std::vector<std::size_t> starts_;
};

struct RunResult {
  bool found = false;
  std::size_t start = 0;
  std::size_t end = 0;
};

class Vm {
 public:
  Vm(const Program& prog, std::string_view text, bool require_end)
      : prog_(prog), text_(text), require_end_(require_end), stack_() {}

  RunResult run(std::size_t from, bool anchored) {
    ThreadList clist(prog_.code.size());
    ThreadList nlist(prog_.code.size());
    clist.clear();
    const std::size_t n = text_.size();
    for (std::size_t i = from;; ++i) {
      if (!best_.found && (!anchored || i == from)) add(clist, 0, i, i);
      if (clist.size() == 0) {
        if (best_.found || i >= n || anchored) break;
        continue;
      }
      if (i >= n) break;
      nlist.clear();
      const auto byte = static_cast<unsigned char>(text_[i]);
      for (std::size_t t = 0; t < clist.size(); ++t) {
        const std::size_t start = clist.start(t);
        if (best_.found && start > best_.start) continue;
        const Inst& inst = prog_.code[clist.pc(t)];
        if (inst.op == Inst::Op::Byte && prog_.sets[inst.set].test(byte)) {
          add(nlist, clist.pc(t) + 1, start, i + 1);
        }
      }
      std::swap(clist, nlist);
      if (clist.size() == 0 && (best_.found || anchored)) break;
    }
    return best_;
  }

 private:
  void record(std::size_t start, std::size_t pos) {
    if (require_end_ && pos != text_.size()) return;
    if (!best_.found || start < best_.start || (start == best_.start && pos > best_.end)) {
      best_ = {true, start, pos};
    }
  }

  void add(ThreadList& list, int pc0, std::size_t start, std::size_t pos) {
    stack_.clear();
    stack_.push_back(pc0);
    while (!stack_.empty()) {
      const int pc = stack_.back();
      stack_.pop_back();
      if (!list.insert(pc, start)) continue;
      const Inst& inst = prog_.code[pc];
      switch (inst.op) {
        case Inst::Op::Jmp:
          stack_.push_back(inst.x);
          break;
        case Inst::Op::Split:
          stack_.push_back(inst.y);
          stack_.push_back(inst.x);
          break;
        case Inst::Op::LineStart:
          if (pos == 0) stack_.push_back(pc + 1);
          break;
        case Inst::Op::LineEnd:
          if (pos == text_.size()) stack_.push_back(pc + 1);
          break;
        case Inst::Op::Match:
          record(start, pos);
          break;
        case Inst::Op::Byte:
          break;
      }
    }
  }

  const Program& prog_;
  std::string_view text_;
  bool require_end_;
  RunResult best_;
  std::vector<int> stack_;
};

}  // namespace
}  // namespace detail

Pattern Pattern::compile(std::string_view source) {
  detail::PatternNode root = detail::parse_pattern(source);
  auto program = std::make_shared<detail::Program>(detail::Compiler().run(root));
  return Pattern(std::string(source), std::move(program));
}

std::optional<PatternMatch> Pattern::find(std::string_view text, std::size_t from) const {
  if (from > text.size()) return std::nullopt;
  detail::Vm vm(*program_, text, false);
  const auto result = vm.run(from, false);
  if (!result.found) return std::nullopt;
  return PatternMatch{result.start, result.end - result.start};
}

bool Pattern::search(std::string_view text) const { return find(text).has_value(); }

std::vector<PatternMatch> Pattern::find_all(std::string_view text) const {
  std::vector<PatternMatch> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto m = find(text, pos);
    if (!m) break;
    out.push_back(*m);
    pos = m->length == 0 ? m->offset + 1 : m->offset + m->length;
  }
  return out;
}

bool Pattern::full_match(std::string_view text) const {
  detail::Vm vm(*program_, text, true);
  return vm.run(0, true).found;
}

}  // namespace toolgate
