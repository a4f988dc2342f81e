#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "emsim/postdsl.hpp"

namespace emsim::post {

std::string format(const Diagnostic& d) {
  std::string s = d.layer + " " + (d.severity == Severity::Error ? "error" : "warning");
  if (d.loc.line > 0) s += " at " + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column);
  return s + ": " + d.message;
}

DslSyntaxError::DslSyntaxError(std::vector<Diagnostic> diags)
    : Error("DslSyntaxError", diags.empty() ? std::string("syntax error") : format(diags.front())),
      diags_(std::move(diags)) {
  if (diags_.empty()) diags_.push_back({Severity::Error, "dsl_syntax", "syntax error", {}});
}

bool FieldExpr::operator==(const FieldExpr& o) const {
  return kind == o.kind && number == o.number && name == o.name && op == o.op && args == o.args;
}
bool PostQuantity::operator==(const PostQuantity& o) const {
  return name == o.name && wrapper == o.wrapper && expr == o.expr && regions == o.regions &&
         region_list == o.region_list && jacobian == o.jacobian;
}
bool PostProcessingBlock::operator==(const PostProcessingBlock& o) const {
  return name == o.name && formulation == o.formulation && quantities == o.quantities;
}
bool PrintSpec::operator==(const PrintSpec& o) const {
  return quantity == o.quantity && region == o.region && file == o.file && label == o.label &&
         format == o.format;
}
bool PostOperationBlock::operator==(const PostOperationBlock& o) const {
  return name == o.name && processing == o.processing && prints == o.prints;
}

const PostQuantity* PostProgram::find_quantity(std::string_view name) const {
  for (const auto& p : processings)
    for (const auto& q : p.quantities)
      if (q.name == name) return &q;
  return nullptr;
}

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourceLoc loc;
};

[[noreturn]] void fail(SourceLoc loc, std::string msg, std::vector<Diagnostic> notes = {}) {
  std::vector<Diagnostic> d{{Severity::Error, "dsl_syntax", std::move(msg), loc}};
  for (auto& n : notes) d.push_back(std::move(n));
  throw DslSyntaxError(std::move(d));
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const SourceLoc start{line, col};
      const auto end = src.find("*/", i + 2);
      if (end == std::string_view::npos) fail(start, "unterminated /* comment");
      advance(end + 2 - i);
      continue;
    }
    const SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0.0, loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      Token t{Tok::Number, std::string(src.substr(i, j - i)), 0.0, loc};
      const auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (r.ec != std::errc() || r.ptr != t.text.data() + t.text.size())
        fail(loc, "malformed number '" + t.text + "'");
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') fail(loc, "unterminated string literal");
      out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), 0.0, loc});
      advance(j + 1 - i);
      continue;
    }
    if (std::string_view("{}[]();,+-*/^").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), 0.0, loc});
      advance(1);
      continue;
    }
    fail(loc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", 0.0, {line, col}});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

char closer_of(char open) { return open == '{' ? '}' : open == '[' ? ']' : ')'; }

// Bracket balance over the whole token stream, so a missing or extra brace
// is reported against the construct it belongs to before parsing starts.
void check_brackets(const std::vector<Token>& toks) {
  struct Open {
    char ch;
    SourceLoc loc;
    std::string what;
  };
  std::vector<Open> stack;
  int n_open = 0, n_close = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != Tok::Punct) continue;
    const char c = t.text[0];
    if (c == '{' || c == '[' || c == '(') {
      if (c == '{') ++n_open;
      std::string what;
      const Token* prev = i > 0 ? &toks[i - 1] : nullptr;
      if (c == '{' && prev && prev->kind == Tok::Ident) {
        what = "'" + prev->text + "' block";
      } else if (c == '{' && prev && prev->kind == Tok::Punct && prev->text == "{") {
        what = "item block";
      } else if (c == '{' && i + 2 < toks.size() && toks[i + 1].kind == Tok::Ident &&
                 toks[i + 2].kind == Tok::Punct && toks[i + 2].text == "}") {
        what = "field reference {" + toks[i + 1].text + "}";
      } else if (c == '{') {
        what = "'{' group";
      } else if (c == '[' && prev && prev->kind == Tok::Ident) {
        what = "'" + prev->text + "[' argument list";
      } else if (c == '[') {
        what = "'[' expression";
      } else {
        what = "parenthesis";
      }
      stack.push_back({c, t.loc, what});
      continue;
    }
    if (c == '}' || c == ']' || c == ')') {
      if (c == '}') ++n_close;
      if (stack.empty())
        fail(t.loc, std::string("superfluous '") + c + "' with no matching opening bracket");
      const Open top = stack.back();
      if (closer_of(top.ch) != c) {
        fail(t.loc,
             std::string("expected '") + closer_of(top.ch) + "' to close the " + top.what +
                 " opened at " + std::to_string(top.loc.line) + ":" + std::to_string(top.loc.column) +
                 ", found '" + c + "'",
             {{Severity::Error, "dsl_syntax", "the " + top.what + " starts here", top.loc}});
      }
      stack.pop_back();
    }
  }
  if (!stack.empty()) {
    const Open& top = stack.back();
    std::vector<Diagnostic> notes;
    for (std::size_t k = stack.size() - 1; k-- > 0;)
      notes.push_back({Severity::Error, "dsl_syntax", "enclosing " + stack[k].what + " is open here",
                       stack[k].loc});
    std::string msg = std::string("missing '") + closer_of(top.ch) + "': the " + top.what +
                      " opened here is never closed";
    if (n_open != n_close)
      msg += " (" + std::to_string(n_open) + " '{' vs " + std::to_string(n_close) + " '}')";
    fail(top.loc, msg, std::move(notes));
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  PostProgram program() {
    PostProgram p;
    while (!at_end()) {
      const Token& t = peek();
      if (is_ident("PostProcessing")) {
        next();
        expect_punct('{', "after PostProcessing");
        while (!is_punct('}')) p.processings.push_back(processing());
        next();
      } else if (is_ident("PostOperation")) {
        next();
        expect_punct('{', "after PostOperation");
        while (!is_punct('}')) p.operations.push_back(operation());
        next();
      } else {
        fail(t.loc, "expected PostProcessing or PostOperation, found " + describe(t));
      }
    }
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(char c) const { return peek().kind == Tok::Punct && peek().text[0] == c; }
  bool is_ident(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

  const Token& expect_punct(char c, const std::string& context) {
    if (!is_punct(c))
      fail(peek().loc, std::string("expected '") + c + "' " + context + ", found " + describe(peek()));
    return next();
  }
  std::string expect_ident(const std::string& context) {
    if (peek().kind != Tok::Ident) fail(peek().loc, "expected a name " + context + ", found " + describe(peek()));
    return next().text;
  }
  void expect_keyword(std::string_view kw, const std::string& context) {
    if (!is_ident(kw))
      fail(peek().loc, "expected '" + std::string(kw) + "' " + context + ", found " + describe(peek()));
    next();
  }
  std::string expect_string(const std::string& context) {
    if (peek().kind != Tok::String) fail(peek().loc, "expected a string " + context + ", found " + describe(peek()));
    return next().text;
  }

  PostProcessingBlock processing() {
    PostProcessingBlock b;
    b.loc = expect_punct('{', "to open a PostProcessing item").loc;
    while (!is_punct('}')) {
      const Token& t = peek();
      if (is_ident("Name")) {
        next();
        b.name = expect_ident("after Name");
        expect_punct(';', "after the PostProcessing name");
      } else if (is_ident("NameOfFormulation")) {
        next();
        b.formulation = expect_ident("after NameOfFormulation");
        expect_punct(';', "after NameOfFormulation");
      } else if (is_ident("PostQuantity")) {
        next();
        expect_punct('{', "after PostQuantity");
        while (!is_punct('}')) b.quantities.push_back(quantity());
        next();
      } else {
        fail(t.loc, "unexpected " + describe(t) + " in PostProcessing item");
      }
    }
    next();
    return b;
  }

  PostQuantity quantity() {
    PostQuantity q;
    q.loc = expect_punct('{', "to open a PostQuantity item").loc;
    bool have_value = false;
    while (!is_punct('}')) {
      const Token& t = peek();
      if (is_ident("Name")) {
        next();
        q.name = expect_ident("after Name");
        expect_punct(';', "after the quantity name");
      } else if (is_ident("Value")) {
        next();
        expect_punct('{', "after Value");
        if (!is_ident("Local") && !is_ident("Term"))
          fail(peek().loc, "expected Local or Term inside Value, found " + describe(peek()));
        q.wrapper = next().text;
        expect_punct('{', "after " + q.wrapper);
        expect_punct('[', "to open the expression");
        q.expr = expression();
        expect_punct(']', "to close the expression");
        expect_punct(';', "after the expression");
        expect_keyword("In", "after the expression");
        if (is_ident("Region")) {
          next();
          q.region_list = true;
          expect_punct('[', "after Region");
          if (is_punct('{')) {
            next();
            q.regions.push_back(expect_ident("in the region list"));
            while (is_punct(',')) {
              next();
              q.regions.push_back(expect_ident("in the region list"));
            }
            expect_punct('}', "to close the region list");
          } else {
            q.regions.push_back(expect_ident("in Region[]"));
          }
          expect_punct(']', "to close Region[");
        } else {
          q.region_list = false;
          q.regions.push_back(expect_ident("after In"));
        }
        expect_punct(';', "after the region");
        expect_keyword("Jacobian", "after the region");
        q.jacobian = expect_ident("after Jacobian");
        expect_punct(';', "after the Jacobian");
        expect_punct('}', "to close " + q.wrapper);
        expect_punct('}', "to close Value");
        have_value = true;
      } else {
        fail(t.loc, "unexpected " + describe(t) + " in PostQuantity item");
      }
    }
    if (q.name.empty()) fail(q.loc, "PostQuantity item has no Name");
    if (!have_value) fail(q.loc, "PostQuantity " + q.name + " has no Value");
    next();
    return q;
  }

  PostOperationBlock operation() {
    PostOperationBlock b;
    b.loc = expect_punct('{', "to open a PostOperation item").loc;
    while (!is_punct('}')) {
      const Token& t = peek();
      if (is_ident("Name")) {
        next();
        b.name = expect_ident("after Name");
        expect_punct(';', "after the PostOperation name");
      } else if (is_ident("NameOfPostProcessing")) {
        next();
        b.processing = expect_ident("after NameOfPostProcessing");
        expect_punct(';', "after NameOfPostProcessing");
      } else if (is_ident("Operation")) {
        next();
        expect_punct('{', "after Operation");
        while (!is_punct('}')) b.prints.push_back(print());
        next();
      } else {
        fail(t.loc, "unexpected " + describe(t) + " in PostOperation item");
      }
    }
    next();
    return b;
  }

  PrintSpec print() {
    PrintSpec p;
    p.loc = peek().loc;
    expect_keyword("Print", "in Operation");
    expect_punct('[', "after Print");
    p.quantity = expect_ident("as the printed quantity");
    while (is_punct(',')) {
      next();
      const Token& key = peek();
      if (is_ident("OnElementsOf")) {
        next();
        p.region = expect_ident("after OnElementsOf");
      } else if (is_ident("File")) {
        next();
        p.file = expect_string("after File");
      } else if (is_ident("Name")) {
        next();
        p.label = expect_string("after Name");
      } else if (is_ident("Format")) {
        next();
        p.format = expect_ident("after Format");
      } else {
        fail(key.loc, "unknown Print option " + describe(key));
      }
    }
    expect_punct(']', "to close Print[");
    expect_punct(';', "after Print[...]");
    if (p.region.empty()) fail(p.loc, "Print of " + p.quantity + " needs OnElementsOf");
    return p;
  }

  // additive := multiplicative (('+'|'-') multiplicative)*
  FieldExpr expression() {
    FieldExpr lhs = multiplicative();
    while (is_punct('+') || is_punct('-')) {
      const Token& op = next();
      FieldExpr rhs = multiplicative();
      lhs = binary(op.text[0], std::move(lhs), std::move(rhs), op.loc);
    }
    return lhs;
  }

  FieldExpr multiplicative() {
    FieldExpr lhs = unary();
    while (is_punct('*') || is_punct('/')) {
      const Token& op = next();
      FieldExpr rhs = unary();
      lhs = binary(op.text[0], std::move(lhs), std::move(rhs), op.loc);
    }
    return lhs;
  }

  FieldExpr unary() {
    if (is_punct('-')) {
      const SourceLoc loc = next().loc;
      FieldExpr e;
      e.kind = FieldExpr::Kind::Negate;
      e.loc = loc;
      e.args.push_back(unary());
      return e;
    }
    if (is_punct('+')) next();
    return power();
  }

  FieldExpr power() {
    FieldExpr base = primary();
    if (is_punct('^')) {
      const Token& op = next();
      FieldExpr exp = unary();  // right associative, allows x^-1
      return binary('^', std::move(base), std::move(exp), op.loc);
    }
    return base;
  }

  static FieldExpr binary(char op, FieldExpr l, FieldExpr r, SourceLoc loc) {
    FieldExpr e;
    e.kind = FieldExpr::Kind::Binary;
    e.op = op;
    e.loc = loc;
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
  }

  FieldExpr primary() {
    const Token& t = peek();
    FieldExpr e;
    e.loc = t.loc;
    if (t.kind == Tok::Number) {
      e.kind = FieldExpr::Kind::Number;
      e.number = next().number;
      return e;
    }
    if (is_punct('(')) {
      next();
      e = expression();
      expect_punct(')', "to close the parenthesis");
      return e;
    }
    if (is_punct('{')) {
      next();
      e.kind = FieldExpr::Kind::Field;
      e.name = expect_ident("in the field reference");
      while (peek().kind == Tok::Ident) e.name += " " + next().text;
      expect_punct('}', "to close the field reference");
      return e;
    }
    if (t.kind == Tok::Ident) {
      e.kind = FieldExpr::Kind::Call;
      e.name = next().text;
      expect_punct('[', "after function name " + e.name);
      if (!is_punct(']')) {
        e.args.push_back(expression());
        while (is_punct(',')) {
          next();
          e.args.push_back(expression());
        }
      }
      expect_punct(']', "to close " + e.name + "[");
      return e;
    }
    fail(t.loc, "expected an operand, found " + describe(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

PostProgram parse_post(std::string_view source) {
  auto toks = lex(source);
  check_brackets(toks);
  return Parser(std::move(toks)).program();
}

}  // namespace emsim::post
