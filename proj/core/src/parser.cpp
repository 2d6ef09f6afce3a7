#include "sppl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "sppl/diagnostics.hpp"

namespace sppl {
namespace {

using namespace ast;

enum class Tok { lparen, rparen, lbracket, rbracket, number, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0.0;
  SourceSpan span;
};

bool atom_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '+' || c == '-' || c == '*' || c == '/' || c == '<' ||
         c == '>' || c == '=';
}

bool identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

bool reserved(const std::string& s) {
  return s == "let" || s == "if" || s == "sample" || s == "observe";
}

[[noreturn]] void fail(const SourceSpan& span, const std::string& msg) {
  throw SpplError("parse", msg, span);
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      Token t = scan();
      const bool end = t.kind == Tok::end;
      out.push_back(std::move(t));
      if (end) return out;
    }
  }

 private:
  void skip_blank() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') step();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        step();
      } else {
        return;
      }
    }
  }

  Token scan() {
    Token t;
    t.span = here();
    if (pos_ >= src_.size()) {
      t.kind = Tok::end;
      return t;
    }
    const char c = src_[pos_];
    if (c == '(' || c == ')' || c == '[' || c == ']') {
      step();
      t.span.end = pos_;
      t.kind = c == '(' ? Tok::lparen
             : c == ')' ? Tok::rparen
             : c == '[' ? Tok::lbracket
                        : Tok::rbracket;
      t.text = c;
      return t;
    }
    if (!atom_char(c)) fail(t.span, std::string("stray character '") + c + "'");
    const std::size_t start = pos_;
    while (pos_ < src_.size() && atom_char(src_[pos_])) step();
    t.span.end = pos_;
    t.text = src_.substr(start, pos_ - start);
    classify(t);
    return t;
  }

  // An atom that starts like a number must be a number; everything else is a
  // symbol.  Words that strtod would accept ("inf", "nan") stay symbols.
  void classify(Token& t) {
    const char first = t.text[0];
    const bool numberish = std::isdigit(static_cast<unsigned char>(first)) ||
                           ((first == '-' || first == '+' || first == '.') &&
                            t.text.size() > 1 &&
                            (std::isdigit(static_cast<unsigned char>(t.text[1])) ||
                             t.text[1] == '.'));
    if (!numberish) {
      t.kind = Tok::symbol;
      return;
    }
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    if (*b == '+') ++b;  // from_chars rejects an explicit plus
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec == std::errc::result_out_of_range) {
      fail(t.span, "numeric literal out of range: " + t.text);
    }
    if (ec != std::errc() || ptr != e) {
      fail(t.span, "malformed numeric literal: " + t.text);
    }
    if (!std::isfinite(v)) fail(t.span, "non-finite numeric literal: " + t.text);
    t.kind = Tok::number;
    t.value = v;
  }

  SourceSpan here() const { return {pos_, pos_, line_, col_}; }

  void step() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  ExprPtr program() {
    const ExprPtr e = expr();
    if (peek().kind != Tok::end) fail(peek().span, "unexpected text after program");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      fail(peek().span, std::string("expected ") + what);
    }
    return take();
  }

  static SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    return {a.begin, b.end, a.line, a.col};
  }

  ExprPtr expr() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: {
        Token n = take();
        return make_const(n.value, n.span);
      }
      case Tok::symbol: {
        Token s = take();
        if (reserved(s.text)) {
          fail(s.span, "reserved word '" + s.text + "' cannot be used as a variable");
        }
        if (!identifier(s.text)) {
          fail(s.span, "'" + s.text + "' is not a valid identifier");
        }
        return make_var(s.text, s.span);
      }
      case Tok::lparen:
        return form();
      case Tok::lbracket:
        fail(t.span, "'[' is only valid in a let binding");
      case Tok::rparen:
      case Tok::rbracket:
        fail(t.span, "unexpected '" + t.text + "'");
      case Tok::end:
        fail(t.span, "unexpected end of input");
    }
    fail(t.span, "unexpected token");
  }

  ExprPtr form() {
    const Token open = expect(Tok::lparen, "'('");
    if (peek().kind != Tok::symbol) {
      fail(peek().span, "expected an operator or form name after '('");
    }
    const Token head = take();
    if (head.text == "let") return let_form(open);
    if (head.text == "if") return if_form(open);
    if (head.text == "sample") return sample_form(open);
    if (head.text == "observe") return observe_form(open);
    // Anything else is a primitive application; the op whitelist and arity
    // are checked by validate, where unknown names get a proper diagnostic.
    std::vector<ExprPtr> args;
    while (peek().kind != Tok::rparen) {
      if (peek().kind == Tok::end) fail(open.span, "unclosed '('");
      args.push_back(expr());
    }
    const Token close = take();
    return make_prim(head.text, std::move(args), join(open.span, close.span));
  }

  ExprPtr let_form(const Token& open) {
    expect(Tok::lbracket, "'[' to open the let binding");
    const Token name = expect(Tok::symbol, "a binder name");
    if (reserved(name.text)) {
      fail(name.span, "reserved word '" + name.text + "' cannot be a binder");
    }
    if (!identifier(name.text)) {
      fail(name.span, "'" + name.text + "' is not a valid identifier");
    }
    const ExprPtr bound = expr();
    expect(Tok::rbracket, "']' to close the let binding");
    const ExprPtr body = expr();
    const Token close = expect(Tok::rparen, "')' to close let");
    return make_let(name.text, bound, body, join(open.span, close.span));
  }

  // (if (cmp e1 e2) then else) — desugared to the canonical guard-below-zero
  // shape.  Strict comparisons keep their branches; non-strict ones swap, so
  // a tie (guard exactly zero) always lands on the branch the surface
  // comparison selects with equality included, and < / > route ties to the
  // complement branch.
  ExprPtr if_form(const Token& open) {
    const Token gopen = expect(Tok::lparen, "'(' to open the if guard");
    if (peek().kind != Tok::symbol ||
        (peek().text != "<" && peek().text != ">" && peek().text != "<=" &&
         peek().text != ">=")) {
      fail(peek().span, "if guard must be a comparison (<, >, <=, >=)");
    }
    const Token cmp = take();
    const ExprPtr e1 = expr();
    const ExprPtr e2 = expr();
    const Token gclose = expect(Tok::rparen, "')' to close the if guard");
    const SourceSpan gspan = join(gopen.span, gclose.span);

    const auto* z = std::get_if<Const>(&e2->node);
    const bool rhs_zero = z && z->value == 0.0;

    ExprPtr guard;
    bool swap = false;
    if (cmp.text == "<") {
      guard = rhs_zero ? e1 : make_prim("-", {e1, e2}, gspan);
    } else if (cmp.text == ">") {
      guard = make_prim("-", {e2, e1}, gspan);
    } else if (cmp.text == "<=") {
      guard = make_prim("-", {e2, e1}, gspan);
      swap = true;
    } else {  // >=
      guard = rhs_zero ? e1 : make_prim("-", {e1, e2}, gspan);
      swap = true;
    }

    const ExprPtr then_branch = expr();
    const ExprPtr else_branch = expr();
    const Token close = expect(Tok::rparen, "')' to close if");
    const SourceSpan span = join(open.span, close.span);
    if (swap) return make_if(guard, else_branch, then_branch, span);
    return make_if(guard, then_branch, else_branch, span);
  }

  DistExpr dist_form() {
    const Token open = expect(Tok::lparen, "a distribution form");
    const Token kind = expect(Tok::symbol, "a distribution name");
    DistExpr d;
    d.kind = kind.text;
    while (peek().kind != Tok::rparen) {
      if (peek().kind == Tok::end) fail(open.span, "unclosed '('");
      d.params.push_back(expr());
    }
    const Token close = take();
    d.span = join(open.span, close.span);
    return d;
  }

  ExprPtr sample_form(const Token& open) {
    DistExpr d = dist_form();
    const Token close = expect(Tok::rparen, "')' to close sample");
    return make_sample(std::move(d), join(open.span, close.span));
  }

  ExprPtr observe_form(const Token& open) {
    DistExpr d = dist_form();
    if (peek().kind != Tok::number) {
      fail(peek().span, "observe expects a constant datum");
    }
    const Token datum = take();
    const Token close = expect(Tok::rparen, "')' to close observe");
    return make_observe(std::move(d), datum.value, join(open.span, close.span));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ast::ExprPtr parse(std::string_view source) { return Parser(source).program(); }

}  // namespace sppl
