#include <cctype>
#include <charconv>
#include <sstream>

#include "emsim/layoutlang.hpp"

namespace emsim::layout {

std::string format(const Diagnostic& d) {
  std::ostringstream os;
  os << d.loc.line << ':' << d.loc.column << ": " << d.message;
  return os.str();
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += format(d);
  }
  return out;
}

}  // namespace

LayoutSyntaxError::LayoutSyntaxError(std::vector<Diagnostic> diags)
    : Error("LayoutSyntaxError", join_diagnostics(diags)), diags_(std::move(diags)) {}

namespace {

enum class Tok {
  Number,
  Ident,
  Let,
  For,
  In,
  If,
  Else,
  Emit,
  Pi,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Assign,
  Range,
  Semicolon,
  Less,
  LessEq,
  Greater,
  GreaterEq,
  Equal,
  NotEqual,
  End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  SourceLoc loc;
  bool integral = false;
};

std::string describe(const Token& t) {
  if (t.type == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.type = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_word(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    bool integral = true;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    // "0..12" is a range, not the literal "0."
    if (pos_ < src_.size() && src_[pos_] == '.' &&
        !(pos_ + 1 < src_.size() && src_[pos_ + 1] == '.')) {
      integral = false;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        integral = false;
        while (pos_ < look) advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      }
    }
    t.type = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.integral = integral;
  }

  void lex_word(Token& t) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance();
    t.text = std::string(src_.substr(start, pos_ - start));
    if (t.text == "let") t.type = Tok::Let;
    else if (t.text == "for") t.type = Tok::For;
    else if (t.text == "in") t.type = Tok::In;
    else if (t.text == "if") t.type = Tok::If;
    else if (t.text == "else") t.type = Tok::Else;
    else if (t.text == "emit") t.type = Tok::Emit;
    else if (t.text == "pi") t.type = Tok::Pi;
    else t.type = Tok::Ident;
  }

  void lex_punct(Token& t) {
    const char c = src_[pos_];
    const char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto two = [&](Tok type, const char* text) {
      t.type = type;
      t.text = text;
      advance();
      advance();
    };
    auto one = [&](Tok type) {
      t.type = type;
      t.text = std::string(1, c);
      advance();
    };
    switch (c) {
      case '.':
        if (n == '.') return two(Tok::Range, "..");
        break;
      case '<':
        if (n == '=') return two(Tok::LessEq, "<=");
        return one(Tok::Less);
      case '>':
        if (n == '=') return two(Tok::GreaterEq, ">=");
        return one(Tok::Greater);
      case '=':
        if (n == '=') return two(Tok::Equal, "==");
        return one(Tok::Assign);
      case '!':
        if (n == '=') return two(Tok::NotEqual, "!=");
        break;
      case '+': return one(Tok::Plus);
      case '-': return one(Tok::Minus);
      case '*': return one(Tok::Star);
      case '/': return one(Tok::Slash);
      case '^': return one(Tok::Caret);
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '{': return one(Tok::LBrace);
      case '}': return one(Tok::RBrace);
      case ',': return one(Tok::Comma);
      case ';': return one(Tok::Semicolon);
      default: break;
    }
    throw LayoutSyntaxError(
        {{t.loc, std::string("unexpected character '") + c + "'"}});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct FunctionSig {
  const char* name;
  int arity;
};

constexpr FunctionSig kFunctions[] = {
    {"sin", 1}, {"cos", 1}, {"tan", 1},  {"sqrt", 1},  {"abs", 1},
    {"min", 2}, {"max", 2}, {"floor", 1}, {"point", 2},
};

const FunctionSig* find_function(const std::string& name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

struct OpenBracket {
  char symbol;
  SourceLoc loc;
  std::string construct;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Stmt> program() {
    std::vector<Stmt> out;
    while (peek().type != Tok::End) {
      if (peek().type == Tok::Semicolon) {
        next();
        continue;
      }
      if (peek().type == Tok::RBrace) fail(peek(), "superfluous '}' with no matching '{'");
      out.push_back(statement());
    }
    return out;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] void fail(const Token& at, const std::string& message) {
    std::vector<Diagnostic> diags;
    if (at.type == Tok::End && !open_.empty()) {
      // Point at the outermost unterminated construct, then list the rest.
      const auto& outer = open_.front();
      diags.push_back({outer.loc, std::string("unterminated ") + outer.construct + ": '" +
                                      outer.symbol + "' is never closed (" + message + ")"});
      for (std::size_t i = 1; i < open_.size(); ++i)
        diags.push_back({open_[i].loc, std::string("note: '") + open_[i].symbol + "' of " +
                                           open_[i].construct + " opened here"});
      diags.push_back({at.loc, message});
    } else {
      diags.push_back({at.loc, message});
      if (!open_.empty()) {
        const auto& inner = open_.back();
        diags.push_back({inner.loc, std::string("note: inside ") + inner.construct +
                                        " opened with '" + inner.symbol + "' here"});
      }
    }
    throw LayoutSyntaxError(std::move(diags));
  }

  const Token& expect(Tok type, const char* what) {
    if (peek().type != type) fail(peek(), std::string("expected ") + what + ", found " + describe(peek()));
    return next();
  }

  void open(const Token& t, std::string construct) {
    open_.push_back({t.text[0], t.loc, std::move(construct)});
  }

  void close(Tok type, const char* what) {
    expect(type, what);
    open_.pop_back();
  }

  std::vector<Stmt> block(const std::string& construct) {
    const Token& lb = expect(Tok::LBrace, "'{'");
    open(lb, construct);
    std::vector<Stmt> body;
    while (peek().type != Tok::RBrace) {
      if (peek().type == Tok::End) fail(peek(), "expected '}'");
      if (peek().type == Tok::Semicolon) {
        next();
        continue;
      }
      body.push_back(statement());
    }
    close(Tok::RBrace, "'}'");
    return body;
  }

  Stmt statement() {
    const Token& t = peek();
    Stmt s;
    s.loc = t.loc;
    switch (t.type) {
      case Tok::Let: {
        next();
        s.kind = Stmt::Kind::Let;
        s.name = expect(Tok::Ident, "variable name after 'let'").text;
        expect(Tok::Assign, "'='");
        s.exprs.push_back(expression());
        return s;
      }
      case Tok::For: {
        next();
        s.kind = Stmt::Kind::For;
        s.name = expect(Tok::Ident, "loop variable after 'for'").text;
        expect(Tok::In, "'in'");
        s.exprs.push_back(expression());
        expect(Tok::Range, "'..'");
        s.exprs.push_back(expression());
        s.body = block("'for' loop body");
        return s;
      }
      case Tok::If: {
        next();
        s.kind = Stmt::Kind::If;
        s.exprs.push_back(expression());
        s.body = block("'if' body");
        if (peek().type == Tok::Else) {
          next();
          s.else_body = block("'else' body");
        }
        return s;
      }
      case Tok::Emit: {
        next();
        s.kind = Stmt::Kind::Emit;
        s.exprs.push_back(expression());
        return s;
      }
      default:
        fail(t, "expected a statement ('let', 'for', 'if' or 'emit'), found " + describe(t));
    }
  }

  Expr expression() {
    Expr lhs = sum();
    const Tok t = peek().type;
    if (t == Tok::Less || t == Tok::LessEq || t == Tok::Greater || t == Tok::GreaterEq ||
        t == Tok::Equal || t == Tok::NotEqual) {
      const Token& op = next();
      Expr e;
      e.kind = Expr::Kind::Compare;
      e.name = op.text;
      e.loc = op.loc;
      e.args.push_back(std::move(lhs));
      e.args.push_back(sum());
      return e;
    }
    return lhs;
  }

  Expr binary(const Token& op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.name = op.text;
    e.loc = op.loc;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr sum() {
    Expr lhs = term();
    while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
      const Token& op = next();
      lhs = binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (peek().type == Tok::Star || peek().type == Tok::Slash) {
      const Token& op = next();
      lhs = binary(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Expr unary() {
    if (peek().type == Tok::Minus) {
      const Token& op = next();
      Expr e;
      e.kind = Expr::Kind::Negate;
      e.name = "-";
      e.loc = op.loc;
      e.args.push_back(unary());
      return e;
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek().type == Tok::Caret) {
      const Token& op = next();
      return binary(op, std::move(base), unary());
    }
    return base;
  }

  Expr primary() {
    const Token& t = peek();
    Expr e;
    e.loc = t.loc;
    switch (t.type) {
      case Tok::Number: {
        next();
        if (t.integral) {
          std::int64_t v = 0;
          auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
          if (ec != std::errc()) fail(t, "integer literal out of range: " + t.text);
          e.kind = Expr::Kind::Integer;
          e.integer = v;
        } else {
          e.kind = Expr::Kind::Real;
          e.real = std::stod(t.text);
        }
        return e;
      }
      case Tok::Pi:
        next();
        e.kind = Expr::Kind::Variable;
        e.name = "pi";
        return e;
      case Tok::Ident: {
        next();
        if (peek().type != Tok::LParen) {
          e.kind = Expr::Kind::Variable;
          e.name = t.text;
          return e;
        }
        const FunctionSig* sig = find_function(t.text);
        if (sig == nullptr) fail(t, "unknown function '" + t.text + "'");
        const Token& lp = next();
        open(lp, "call to '" + t.text + "'");
        e.kind = Expr::Kind::Call;
        e.name = t.text;
        if (peek().type != Tok::RParen) {
          e.args.push_back(expression());
          while (peek().type == Tok::Comma) {
            next();
            e.args.push_back(expression());
          }
        }
        close(Tok::RParen, "')'");
        if (static_cast<int>(e.args.size()) != sig->arity)
          fail(t, "'" + t.text + "' takes " + std::to_string(sig->arity) + " argument(s), got " +
                      std::to_string(e.args.size()));
        return e;
      }
      case Tok::LParen: {
        const Token& lp = next();
        open(lp, "parenthesized expression");
        Expr inner = expression();
        close(Tok::RParen, "')'");
        return inner;
      }
      default:
        fail(t, "expected an expression, found " + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<OpenBracket> open_;
};

}  // namespace

LayoutScript parse_layout(std::string_view source) {
  Parser parser(Lexer(source).run());
  LayoutScript script;
  script.source = std::string(source);
  script.statements = parser.program();
  return script;
}

}  // namespace emsim::layout
