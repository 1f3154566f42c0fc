#include "toolgate/dsl.hpp"

#include <charconv>
#include <cmath>
#include <cctype>
#include <set>
#include <sstream>

namespace toolgate {

namespace {

struct Token {
  enum class Kind { Ident, String, Number, Punct, Op, Newline, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      out.push_back({Token::Kind::Newline, "\n", line, col});
      advance();
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance();
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    Token tok{Token::Kind::End, "", line, col};
    if (c == '"') {
      tok.kind = Token::Kind::String;
      advance();
      for (;;) {
        if (i >= src.size() || src[i] == '\n') throw DslError("unterminated string", tok.line, tok.column);
        const char d = src[i];
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\' && i + 1 < src.size()) {
          const char e = src[i + 1];
          if (e == '\\' || e == '"') {
            tok.text += e;
          } else if (e == 'n') {
            tok.text += '\n';
          } else if (e == 't') {
            tok.text += '\t';
          } else {
            tok.text += d;
            tok.text += e;
          }
          advance(2);
          continue;
        }
        tok.text += d;
        advance();
      }
    } else if (ident_start(c)) {
      tok.kind = Token::Kind::Ident;
      while (i < src.size() && ident_char(src[i])) {
        tok.text += src[i];
        advance();
      }
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      tok.kind = Token::Kind::Number;
      tok.text += c;
      advance();
      while (i < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.' || src[i] == 'e' || src[i] == 'E' ||
              ((src[i] == '-' || src[i] == '+') && (tok.text.back() == 'e' || tok.text.back() == 'E')))) {
        tok.text += src[i];
        advance();
      }
    } else if ((c == '=' || c == '!') && i + 1 < src.size() && src[i + 1] == '=') {
      tok.kind = Token::Kind::Op;
      tok.text = std::string{c, '='};
      advance(2);
    } else if (c == '<' || c == '>') {
      tok.kind = Token::Kind::Op;
      tok.text = std::string(1, c);
      advance();
    } else if (std::string_view("{}[](),:=").find(c) != std::string_view::npos) {
      tok.kind = Token::Kind::Punct;
      tok.text = std::string(1, c);
      advance();
    } else {
      throw DslError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(tok));
  }
  out.push_back({Token::Kind::End, "", line, col});
  return out;
}

std::string derive_redact_id(const std::string& policy, const std::string& source, std::size_t index) {
  if (source.find("AKIA") != std::string::npos) return "aws_key";
  if (source.find("PRIVATE KEY") != std::string::npos) return "private_key";
  return policy + "_" + std::to_string(index);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  PolicyPack run() {
    PolicyPack pack;
    std::set<std::string> policy_names;
    std::set<std::string> blocks_seen;
    for (;;) {
      skip_newlines();
      if (peek().kind == Token::Kind::End) break;
      const Token head = expect_ident("block keyword");
      if (head.text == "policy") {
        Policy p = parse_policy(head);
        if (!policy_names.insert(p.name).second) {
          throw DslError("duplicate policy '" + p.name + "'", head.line, head.column);
        }
        pack.policies.push_back(std::move(p));
      } else if (head.text == "pack") {
        if (!blocks_seen.insert("pack").second) throw DslError("duplicate pack block", head.line, head.column);
        parse_pack_block(pack);
      } else if (head.text == "risk") {
        if (!blocks_seen.insert("risk").second) throw DslError("duplicate risk block", head.line, head.column);
        parse_risk(pack.risk, head);
      } else if (head.text == "recovery") {
        const Token name = expect(Token::Kind::String, "recovery class name");
        if (name.text != "default" && !parse_category(name.text)) {
          throw DslError("unknown recovery class '" + name.text + "'", name.line, name.column);
        }
        if (!blocks_seen.insert("recovery:" + name.text).second) {
          throw DslError("duplicate recovery block '" + name.text + "'", name.line, name.column);
        }
        pack.recovery[name.text] = parse_recovery(head);
      } else {
        throw DslError("unknown block '" + head.text + "'", head.line, head.column);
      }
    }
    finalize(pack);
    return pack;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_punct(const char* p) const { return peek().kind == Token::Kind::Punct && peek().text == p; }
  bool at_ident(const char* word) const { return peek().kind == Token::Kind::Ident && peek().text == word; }
  void skip_newlines() {
    while (peek().kind == Token::Kind::Newline) take();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::Newline: return "end of line";
      case Token::Kind::End: return "end of input";
      case Token::Kind::String: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void error_at(const Token& t, const std::string& message) const {
    throw DslError(message, t.line, t.column);
  }

  Token expect(Token::Kind kind, const char* what) {
    if (peek().kind != kind) error_at(peek(), std::string("expected ") + what + ", found " + describe(peek()));
    return take();
  }
  Token expect_ident(const char* what) { return expect(Token::Kind::Ident, what); }
  void expect_punct(const char* p) {
    if (!at_punct(p)) error_at(peek(), std::string("expected '") + p + "', found " + describe(peek()));
    take();
  }
  void end_entry() {
    if (peek().kind == Token::Kind::Newline) {
      take();
      return;
    }
    if (at_punct("}")) return;
    error_at(peek(), "unexpected " + describe(peek()) + " after value");
  }

  // Iterates `key: value` entries of a block until the closing brace.
  template <typename Fn>
  void entries(Fn&& on_entry) {
    expect_punct("{");
    std::set<std::string> keys;
    for (;;) {
      skip_newlines();
      if (at_punct("}")) {
        take();
        return;
      }
      const Token key = expect_ident("key");
      if (!keys.insert(key.text).second) error_at(key, "duplicate key '" + key.text + "'");
      expect_punct(":");
      on_entry(key);
      end_entry();
    }
  }

  std::string parse_string_value() {
    if (peek().kind == Token::Kind::String || peek().kind == Token::Kind::Ident) return take().text;
    error_at(peek(), "expected string, found " + describe(peek()));
  }

  bool parse_bool() {
    if (at_ident("true")) {
      take();
      return true;
    }
    if (at_ident("false")) {
      take();
      return false;
    }
    error_at(peek(), "expected true or false, found " + describe(peek()));
  }

  double parse_number() {
    const Token t = expect(Token::Kind::Number, "number");
    double v = 0;
    const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) error_at(t, "malformed number");
    return v;
  }

  std::int64_t parse_count() {
    const Token t = peek();
    const double v = parse_number();
    if (v < 0 || v != std::floor(v) || v > 9.0e15) error_at(t, "expected non-negative integer");
    return static_cast<std::int64_t>(v);
  }

  std::vector<std::string> parse_string_list() {
    std::vector<std::string> out;
    expect_punct("[");
    skip_newlines();
    while (!at_punct("]")) {
      out.push_back(parse_string_value());
      skip_newlines();
      if (at_punct(",")) {
        take();
        skip_newlines();
      } else if (!at_punct("]")) {
        error_at(peek(), "expected ',' or ']', found " + describe(peek()));
      }
    }
    take();
    return out;
  }

  // `a = 1, b = 2`
  template <typename Fn>
  void parse_assignments(Fn&& on_item) {
    std::set<std::string> seen;
    for (;;) {
      const Token name = expect_ident("name");
      if (!seen.insert(name.text).second) error_at(name, "duplicate assignment '" + name.text + "'");
      expect_punct("=");
      on_item(name);
      if (!at_punct(",")) break;
      take();
      skip_newlines();
    }
  }

  void parse_pack_block(PolicyPack& pack) {
    pack.name = expect(Token::Kind::String, "pack name").text;
    entries([&](const Token& key) {
      if (key.text == "level") {
        const Token t = peek();
        const auto level = parse_level(parse_string_value());
        if (!level) error_at(t, "unknown level");
        pack.level = *level;
      } else if (key.text == "schema_validation") {
        pack.schema_validation = parse_bool();
      } else if (key.text == "root_prefix") {
        pack.root_prefix = parse_string_value();
      } else {
        error_at(key, "unknown pack key '" + key.text + "'");
      }
    });
  }

  void parse_risk(RiskConfig& risk, const Token&) {
    entries([&](const Token& key) {
      if (key.text == "weights") {
        parse_assignments([&](const Token& name) {
          const double v = parse_number();
          if (name.text == "tool") risk.w_tool = v;
          else if (name.text == "args") risk.w_args = v;
          else if (name.text == "context") risk.w_context = v;
          else error_at(name, "unknown weight '" + name.text + "'");
        });
      } else if (key.text == "threshold") {
        risk.threshold = parse_number();
      } else if (key.text == "gating") {
        risk.gating = parse_bool();
      } else if (key.text == "side_effect_risk" || key.text == "feature_risk") {
        std::map<std::string, double> table;
        parse_assignments([&](const Token& name) { table[name.text] = parse_number(); });
        (key.text == "side_effect_risk" ? risk.side_effect_risk : risk.feature_risk) = std::move(table);
      } else if (key.text == "hazard_patterns") {
        risk.hazard_patterns = parse_string_list();
      } else if (key.text == "approved_domains") {
        risk.approved_domains = parse_string_list();
      } else {
        error_at(key, "unknown risk key '" + key.text + "'");
      }
    });
  }

  RecoveryConfig parse_recovery(const Token&) {
    RecoveryConfig r;
    entries([&](const Token& key) {
      if (key.text == "max_retries") {
        if (at_ident("unbounded")) {
          take();
          r.max_retries.reset();
        } else {
          r.max_retries = parse_count();
        }
      } else if (key.text == "base_backoff_ms") {
        r.base_backoff_ms = parse_count();
      } else if (key.text == "jitter_fraction") {
        const Token t = peek();
        r.jitter_fraction = parse_number();
        if (r.jitter_fraction < 0 || r.jitter_fraction > 1) error_at(t, "jitter_fraction must be in [0,1]");
      } else if (key.text == "failure_threshold") {
        r.failure_threshold = parse_count();
      } else if (key.text == "cooldown_ms") {
        r.cooldown_ms = parse_count();
      } else if (key.text == "idempotency") {
        r.idempotency = parse_bool();
      } else if (key.text == "key_fields") {
        r.key_fields = parse_string_list();
      } else {
        error_at(key, "unknown recovery key '" + key.text + "'");
      }
    });
    return r;
  }

  Policy parse_policy(const Token& head) {
    Policy p;
    p.pos = {head.line, head.column};
    p.name = expect(Token::Kind::String, "policy name").text;
    bool scoped = false;
    entries([&](const Token& key) {
      const std::string& k = key.text;
      if (k == "tool" || k == "tool_group") {
        if (scoped) error_at(key, "policy scope given twice");
        scoped = true;
        p.tool_group = k == "tool_group";
        if (p.tool_group) {
          p.tools = parse_string_list();
        } else {
          p.tools = {parse_string_value()};
        }
      } else if (k == "on_output") {
        p.on_output = parse_bool();
      } else if (k == "allow_if") {
        p.allow_if = parse_predicate();
      } else if (k == "deny_if") {
        p.deny_if = parse_predicate();
      } else if (k == "require_approval_if") {
        p.require_approval_if = parse_predicate();
      } else if (k == "budget") {
        BudgetSpec b;
        parse_assignments([&](const Token& name) {
          const std::int64_t v = parse_count();
          if (name.text == "max_calls_per_minute") b.max_calls_per_minute = v;
          else if (name.text == "max_calls") b.max_calls = v;
          else if (name.text == "max_cost") b.max_cost = v;
          else if (name.text == "max_retries") b.max_retries = v;
          else error_at(name, "unknown budget field '" + name.text + "'");
        });
        p.budget = b;
      } else if (k == "redact_patterns") {
        parse_redact_list(p);
      } else if (k == "sanitize") {
        for (const auto& s : parse_string_list()) {
          if (s == "canonicalize_path") p.sanitize.push_back(Sanitizer::CanonicalizePath);
          else if (s == "strip_secret_query") p.sanitize.push_back(Sanitizer::StripSecretQuery);
          else error_at(key, "unknown sanitizer '" + s + "'");
        }
      } else if (k == "fix_hint") {
        p.fix_hint = expect(Token::Kind::String, "fix hint string").text;
      } else {
        error_at(key, "unknown policy key '" + k + "'");
      }
    });
    if (!p.allow_if && !p.deny_if && !p.require_approval_if && !p.budget && p.redact_patterns.empty() &&
        p.sanitize.empty()) {
      throw DslError("policy '" + p.name + "' declares no rules", head.line, head.column);
    }
    return p;
  }

  void parse_redact_list(Policy& p) {
    expect_punct("[");
    skip_newlines();
    while (!at_punct("]")) {
      RedactPattern r;
      const Token start = peek();
      if (peek().kind == Token::Kind::Ident) {
        r.id = take().text;
        expect_punct("=");
        r.source = expect(Token::Kind::String, "pattern").text;
      } else {
        r.source = expect(Token::Kind::String, "pattern").text;
        r.id = derive_redact_id(p.name, r.source, p.redact_patterns.size());
      }
      try {
        r.compiled = std::make_shared<const Pattern>(Pattern::compile(r.source));
      } catch (const PatternError& e) {
        error_at(start, std::string("pattern does not compile: ") + e.what());
      }
      p.redact_patterns.push_back(std::move(r));
      skip_newlines();
      if (at_punct(",")) {
        take();
        skip_newlines();
      } else if (!at_punct("]")) {
        error_at(peek(), "expected ',' or ']', found " + describe(peek()));
      }
    }
    take();
  }

  Predicate parse_predicate() {
    if (peek().kind == Token::Kind::Newline || at_punct("}") || peek().kind == Token::Kind::End) {
      error_at(peek(), "missing predicate");
    }
    return parse_or();
  }

  Predicate parse_or() {
    Predicate first = parse_and();
    if (!at_ident("or")) return first;
    Predicate node;
    node.kind = Predicate::Kind::Or;
    node.pos = first.pos;
    node.children.push_back(std::move(first));
    while (at_ident("or")) {
      take();
      skip_newlines();
      node.children.push_back(parse_and());
    }
    return node;
  }

  Predicate parse_and() {
    Predicate first = parse_not();
    if (!at_ident("and")) return first;
    Predicate node;
    node.kind = Predicate::Kind::And;
    node.pos = first.pos;
    node.children.push_back(std::move(first));
    while (at_ident("and")) {
      take();
      skip_newlines();
      node.children.push_back(parse_not());
    }
    return node;
  }

  Predicate parse_not() {
    if (at_ident("not")) {
      const Token t = take();
      skip_newlines();
      Predicate node;
      node.kind = Predicate::Kind::Not;
      node.pos = {t.line, t.column};
      node.children.push_back(parse_not());
      return node;
    }
    if (at_punct("(")) {
      take();
      skip_newlines();
      Predicate inner = parse_or();
      skip_newlines();
      expect_punct(")");
      return inner;
    }
    return parse_comparison();
  }

  Predicate parse_comparison() {
    Predicate node;
    node.kind = Predicate::Kind::Compare;
    node.pos = {peek().line, peek().column};
    node.lhs = parse_operand();
    const Token op = peek();
    if (op.kind == Token::Kind::Newline || op.kind == Token::Kind::End || (op.kind == Token::Kind::Punct && op.text != "=")) {
      error_at(op, "missing operator");
    }
    if (op.text == "==") node.op = CompareOp::Eq;
    else if (op.text == "!=") node.op = CompareOp::Ne;
    else if (op.text == "<") node.op = CompareOp::Lt;
    else if (op.text == ">") node.op = CompareOp::Gt;
    else if (op.kind == Token::Kind::Ident && op.text == "starts_with") node.op = CompareOp::StartsWith;
    else if (op.kind == Token::Kind::Ident && op.text == "matches") node.op = CompareOp::Matches;
    else if (op.kind == Token::Kind::Ident && op.text == "in") node.op = CompareOp::In;
    else error_at(op, "unknown operator " + describe(op));
    take();
    node.rhs = parse_operand();
    return node;
  }

  Operand parse_operand() {
    const Token t = peek();
    Operand o;
    switch (t.kind) {
      case Token::Kind::String:
        take();
        o.literal = t.text;
        return o;
      case Token::Kind::Number: {
        take();
        if (t.text.find_first_of(".eE") == std::string::npos) {
          std::int64_t v = 0;
          const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
          if (res.ec != std::errc()) error_at(t, "malformed number");
          o.literal = v;
        } else {
          double v = 0;
          const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
          if (res.ec != std::errc()) error_at(t, "malformed number");
          o.literal = v;
        }
        return o;
      }
      case Token::Kind::Punct:
        if (t.text == "[") {
          o.literal = parse_literal_list();
          return o;
        }
        break;
      case Token::Kind::Ident: {
        if (t.text == "true" || t.text == "false") {
          take();
          o.literal = t.text == "true";
          return o;
        }
        if (t.text == "tool") {
          take();
          o.kind = Operand::Kind::Tool;
          return o;
        }
        if (t.text.rfind("args.", 0) == 0 && t.text.size() > 5) {
          take();
          o.kind = Operand::Kind::Arg;
          o.field = t.text.substr(5);
          return o;
        }
        if (t.text.rfind("context.", 0) == 0) {
          const std::string field = t.text.substr(8);
          if (field != "workspace_root" && field != "repo_state" && field != "env") {
            error_at(t, "unknown context field '" + field + "'");
          }
          take();
          o.kind = Operand::Kind::Context;
          o.field = field;
          return o;
        }
        error_at(t, "unknown operand '" + t.text + "'");
      }
      default:
        break;
    }
    error_at(t, "missing operand, found " + describe(t));
  }

  Json parse_literal_list() {
    Json list = Json::array();
    expect_punct("[");
    skip_newlines();
    while (!at_punct("]")) {
      const Token t = peek();
      const Operand item = parse_operand();
      if (item.kind != Operand::Kind::Literal) error_at(t, "list items must be literals");
      list.push_back(item.literal);
      skip_newlines();
      if (at_punct(",")) {
        take();
        skip_newlines();
      } else if (!at_punct("]")) {
        error_at(peek(), "expected ',' or ']', found " + describe(peek()));
      }
    }
    take();
    return list;
  }

  void compile_patterns(Predicate& p, const std::string& root) {
    if (p.kind != Predicate::Kind::Compare) {
      for (auto& c : p.children) compile_patterns(c, root);
      return;
    }
    if (p.op != CompareOp::Matches || p.rhs.kind != Operand::Kind::Literal) return;
    if (!p.rhs.literal.is_string()) throw DslError("matches needs a string pattern", p.pos.line, p.pos.column);
    try {
      p.pattern = std::make_shared<const Pattern>(Pattern::compile(expand_root(p.rhs.literal.get<std::string>(), root)));
    } catch (const PatternError& e) {
      throw DslError(std::string("pattern does not compile: ") + e.what(), p.pos.line, p.pos.column);
    }
  }

  void finalize(PolicyPack& pack) {
    for (auto& policy : pack.policies) {
      for (auto* pred : {&policy.allow_if, &policy.deny_if, &policy.require_approval_if}) {
        if (*pred) compile_patterns(**pred, pack.root_prefix);
      }
    }
    RiskConfig& risk = pack.risk;
    if (risk.w_tool < 0 || risk.w_args < 0 || risk.w_context < 0 ||
        std::abs(risk.w_tool + risk.w_args + risk.w_context - 1.0) > 1e-9) {
      throw DslError("risk weights must be non-negative and sum to 1", 0, 0);
    }
    if (risk.threshold < 0 || risk.threshold > 1) throw DslError("risk threshold must be in [0,1]", 0, 0);
    risk.hazard_compiled.clear();
    for (const auto& h : risk.hazard_patterns) {
      try {
        risk.hazard_compiled.push_back(std::make_shared<const Pattern>(Pattern::compile(expand_root(h, pack.root_prefix))));
      } catch (const PatternError& e) {
        throw DslError(std::string("hazard pattern does not compile: ") + e.what(), 0, 0);
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\\' || c == '"') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string literal_text(const Json& v) {
  if (v.is_string()) return quote(v.get<std::string>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return number(v.get<double>());
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + literal_text(v[i]);
    return s + "]";
  }
  return "null";
}

std::string operand_text(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Arg: return "args." + o.field;
    case Operand::Kind::Context: return "context." + o.field;
    case Operand::Kind::Tool: return "tool";
    case Operand::Kind::Literal: return literal_text(o.literal);
  }
  return "";
}

int precedence(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Or: return 1;
    case Predicate::Kind::And: return 2;
    case Predicate::Kind::Not: return 3;
    case Predicate::Kind::Compare: return 4;
  }
  return 4;
}

std::string pred_text(const Predicate& p) {
  auto child = [&](const Predicate& c) {
    const std::string s = pred_text(c);
    // Same-kind children keep their grouping so the tree shape survives.
    return precedence(c) <= precedence(p) && c.kind != Predicate::Kind::Compare && c.kind != Predicate::Kind::Not
               ? "(" + s + ")"
               : s;
  };
  switch (p.kind) {
    case Predicate::Kind::Compare:
      return operand_text(p.lhs) + " " + std::string(to_string(p.op)) + " " + operand_text(p.rhs);
    case Predicate::Kind::Not: {
      const Predicate& c = p.children.front();
      const std::string s = pred_text(c);
      return c.kind == Predicate::Kind::Compare || c.kind == Predicate::Kind::Not ? "not " + s : "not (" + s + ")";
    }
    case Predicate::Kind::And:
    case Predicate::Kind::Or: {
      const char* sep = p.kind == Predicate::Kind::And ? " and " : " or ";
      std::string s;
      for (std::size_t i = 0; i < p.children.size(); ++i) s += (i ? sep : "") + child(p.children[i]);
      return s;
    }
  }
  return "";
}

std::string string_list(const std::vector<std::string>& items) {
  std::string s = "[";
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + quote(items[i]);
  return s + "]";
}

std::string assignments(const std::map<std::string, double>& table) {
  std::string s;
  for (const auto& [k, v] : table) s += (s.empty() ? "" : ", ") + k + " = " + number(v);
  return s;
}

}  // namespace

std::string expand_root(std::string_view pattern, std::string_view root_prefix) {
  std::string out;
  const std::string_view word = "ROOT";
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.compare(i, word.size(), word) == 0) {
      const bool left_ok = i == 0 || !(std::isalnum(static_cast<unsigned char>(pattern[i - 1])) || pattern[i - 1] == '_');
      const std::size_t after = i + word.size();
      const bool right_ok = after >= pattern.size() ||
                            !(std::isalnum(static_cast<unsigned char>(pattern[after])) || pattern[after] == '_');
      if (left_ok && right_ok) {
        std::string prefix(root_prefix);
        // "ROOT/" names the root itself, so the separator is absorbed.
        if (after < pattern.size() && pattern[after] == '/' && !prefix.empty() && prefix.back() == '/') {
          out += prefix;
          i = after + 1;
        } else {
          out += prefix;
          i = after;
        }
        continue;
      }
    }
    out += pattern[i++];
  }
  return out;
}

PolicyPack parse_pack(std::string_view text) { return Parser(text).run(); }

std::string print_predicate(const Predicate& pred) { return pred_text(pred); }

std::string print_pack(const PolicyPack& pack) {
  std::ostringstream out;
  out << "pack " << quote(pack.name) << " {\n";
  out << "  level: " << to_string(pack.level) << "\n";
  out << "  schema_validation: " << (pack.schema_validation ? "true" : "false") << "\n";
  out << "  root_prefix: " << quote(pack.root_prefix) << "\n";
  out << "}\n\n";

  const RiskConfig& r = pack.risk;
  out << "risk {\n";
  out << "  weights: tool = " << number(r.w_tool) << ", args = " << number(r.w_args) << ", context = "
      << number(r.w_context) << "\n";
  out << "  threshold: " << number(r.threshold) << "\n";
  out << "  gating: " << (r.gating ? "true" : "false") << "\n";
  out << "  side_effect_risk: " << assignments(r.side_effect_risk) << "\n";
  out << "  feature_risk: " << assignments(r.feature_risk) << "\n";
  out << "  hazard_patterns: " << string_list(r.hazard_patterns) << "\n";
  out << "  approved_domains: " << string_list(r.approved_domains) << "\n";
  out << "}\n";

  for (const auto& [name, rc] : pack.recovery) {
    out << "\nrecovery " << quote(name) << " {\n";
    out << "  max_retries: " << (rc.max_retries ? std::to_string(*rc.max_retries) : "unbounded") << "\n";
    out << "  base_backoff_ms: " << rc.base_backoff_ms << "\n";
    out << "  jitter_fraction: " << number(rc.jitter_fraction) << "\n";
    out << "  failure_threshold: " << rc.failure_threshold << "\n";
    out << "  cooldown_ms: " << rc.cooldown_ms << "\n";
    out << "  idempotency: " << (rc.idempotency ? "true" : "false") << "\n";
    out << "  key_fields: " << string_list(rc.key_fields) << "\n";
    out << "}\n";
  }

  for (const auto& p : pack.policies) {
    out << "\npolicy " << quote(p.name) << " {\n";
    if (p.tool_group) {
      out << "  tool_group: " << string_list(p.tools) << "\n";
    } else if (!p.tools.empty()) {
      out << "  tool: " << quote(p.tools.front()) << "\n";
    }
    if (p.on_output) out << "  on_output: true\n";
    if (p.allow_if) out << "  allow_if: " << pred_text(*p.allow_if) << "\n";
    if (p.deny_if) out << "  deny_if: " << pred_text(*p.deny_if) << "\n";
    if (p.require_approval_if) out << "  require_approval_if: " << pred_text(*p.require_approval_if) << "\n";
    if (p.budget) {
      std::string s;
      auto add = [&](const char* k, const std::optional<std::int64_t>& v) {
        if (v) s += (s.empty() ? "" : ", ") + std::string(k) + " = " + std::to_string(*v);
      };
      add("max_calls_per_minute", p.budget->max_calls_per_minute);
      add("max_calls", p.budget->max_calls);
      add("max_cost", p.budget->max_cost);
      add("max_retries", p.budget->max_retries);
      if (!s.empty()) out << "  budget: " << s << "\n";
    }
    if (!p.redact_patterns.empty()) {
      out << "  redact_patterns: [";
      for (std::size_t i = 0; i < p.redact_patterns.size(); ++i) {
        const auto& rp = p.redact_patterns[i];
        out << (i ? ", " : "");
        if (rp.id != derive_redact_id(p.name, rp.source, i)) out << rp.id << " = ";
        out << quote(rp.source);
      }
      out << "]\n";
    }
    if (!p.sanitize.empty()) {
      out << "  sanitize: [";
      for (std::size_t i = 0; i < p.sanitize.size(); ++i) out << (i ? ", " : "") << to_string(p.sanitize[i]);
      out << "]\n";
    }
    if (!p.fix_hint.empty()) out << "  fix_hint: " << quote(p.fix_hint) << "\n";
    out << "}\n";
  }
  return out.str();
}

}  // namespace toolgate
