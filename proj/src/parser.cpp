#include "fieldcalc/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fieldcalc {

namespace {

enum class Tok {
  End,
  Ident,    // identifiers and word keywords
  Number,
  Sensor,   // #name
  AtSig,
  AtStab,
  AtAnn,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Langle,
  Rangle,
  Comma,
  Colon,
  Question,
  Hole,     // @
  Plus,
  Minus,
  Equal,
  Bang,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
  SourceLocation loc;
};

struct ParseAbort {
  Diagnostic diagnostic;
};

class Lexer {
 public:
  Lexer(const std::string& text, std::string filename)
      : text_(text), filename_(std::move(filename)) {}

  std::vector<Token> run(Report& report) {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t;
      t.loc = location();
      if (pos_ >= text_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        break;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        t.text = read_word();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        t.number = read_number();
      } else if (c == '#') {
        advance();
        if (pos_ >= text_.size() ||
            !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          report.error(t.loc, "LEX", "expected sensor name after '#'");
          continue;
        }
        t.kind = Tok::Sensor;
        t.text = read_word();
      } else if (c == '@') {
        advance();
        if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
          std::string word = read_word();
          if (word == "sig") {
            t.kind = Tok::AtSig;
          } else if (word == "stab") {
            t.kind = Tok::AtStab;
          } else if (word == "ann") {
            t.kind = Tok::AtAnn;
          } else {
            report.error(t.loc, "LEX", "unknown annotation '@" + word + "'");
            continue;
          }
        } else {
          t.kind = Tok::Hole;
        }
      } else {
        advance();
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case '<': t.kind = Tok::Langle; break;
          case '>': t.kind = Tok::Rangle; break;
          case ',': t.kind = Tok::Comma; break;
          case ':': t.kind = Tok::Colon; break;
          case '?': t.kind = Tok::Question; break;
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '!': t.kind = Tok::Bang; break;
          case '=':
            if (pos_ < text_.size() && text_[pos_] == '=') advance();  // accept ==
            t.kind = Tok::Equal;
            break;
          default:
            report.error(t.loc, "LEX", std::string("unexpected character '") + c + "'");
            continue;
        }
      }
      out.push_back(t);
    }
    return out;
  }

 private:
  SourceLocation location() const { return {filename_, line_, column_}; }

  void advance() {
    if (pos_ < text_.size()) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_word() {
    std::string out;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      out += text_[pos_];
      advance();
    }
    return out;
  }

  double read_number() {
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    if (pos_ < text_.size() && text_[pos_] == '.' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t mark = pos_;
      advance();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          advance();
        }
      } else {
        pos_ = mark;  // not an exponent
      }
    }
    return std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr);
  }

  const std::string& text_;
  std::string filename_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, Report& report)
      : tokens_(std::move(tokens)), report_(report) {}

  void parse_into(Program& program) {
    while (!at(Tok::End)) {
      try {
        parse_def(program);
      } catch (const ParseAbort& abort) {
        report_.diagnostics.push_back(abort.diagnostic);
        sync_to_next_def();
      }
    }
  }

  SortSignature parse_signature_only() {
    SortSignature sig = parse_sort_signature_tok();
    expect(Tok::End, "end of signature");
    return sig;
  }

  AnnotatedSignature parse_annotated_only() {
    AnnotatedSignature sig = parse_annotated_signature_tok();
    expect(Tok::End, "end of signature");
    return sig;
  }

  Sort parse_sort_only() {
    Sort s = parse_sort_tok();
    expect(Tok::End, "end of sort");
    return s;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_word(const char* word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  Token take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& message) {
    throw ParseAbort{{Severity::Error, peek().loc, "PARSE", message}};
  }

  Token expect(Tok kind, const char* what) {
    if (!at(kind)) fail(std::string("expected ") + what);
    return take();
  }

  std::string expect_ident(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what);
    return take().text;
  }

  void expect_word(const char* word) {
    if (!at_word(word)) fail(std::string("expected '") + word + "'");
    take();
  }

  void sync_to_next_def() {
    while (!at(Tok::End) && !at_word("def") && !at(Tok::AtSig) && !at(Tok::AtStab) &&
           !at(Tok::AtAnn)) {
      take();
    }
  }

  // ---- sorts & types ----

  Sort parse_sort_tok() {
    if (at(Tok::Langle)) {
      take();
      Sort a = parse_sort_tok();
      expect(Tok::Comma, "','");
      Sort b = parse_sort_tok();
      expect(Tok::Rangle, "'>'");
      return Sort::pair(std::move(a), std::move(b));
    }
    Token t = peek();
    std::string name = expect_ident("sort name");
    auto g = ground_sort_from_name(name);
    if (!g) {
      throw ParseAbort{{Severity::Error, t.loc, "PARSE", "unknown sort '" + name + "'"}};
    }
    return Sort::ground(*g);
  }

  TypeExpr parse_type_tok() {
    if (at(Tok::Langle)) {
      take();
      TypeExpr a = parse_type_tok();
      expect(Tok::Comma, "','");
      TypeExpr b = parse_type_tok();
      expect(Tok::Rangle, "'>'");
      return TypeExpr::pair(std::move(a), std::move(b));
    }
    Token t = peek();
    std::string name = expect_ident("type name");
    if (name == "real") return TypeExpr::real();
    if (name == "bool") return TypeExpr::boolean();
    throw ParseAbort{{Severity::Error, t.loc, "PARSE", "unknown type '" + name + "'"}};
  }

  SortSignature parse_sort_signature_tok() {
    SortSignature sig;
    sig.result = parse_sort_tok();
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      sig.args.push_back(parse_sort_tok());
      while (at(Tok::Comma)) {
        take();
        sig.args.push_back(parse_sort_tok());
      }
    }
    expect(Tok::RParen, "')'");
    return sig;
  }

  AnnotatedSignature parse_annotated_signature_tok() {
    AnnotatedSignature sig;
    sig.support = parse_sort_signature_tok();
    expect(Tok::LBracket, "'['");
    if (at(Tok::Bang)) {
      take();
      sig.annotation = Annotation::Bang;
    } else if (at(Tok::Question)) {
      take();
      sig.annotation = Annotation::Quest;
    } else {
      fail("expected '!' or '?'");
    }
    expect(Tok::RBracket, "']'");
    return sig;
  }

  // ---- expressions ----

  ExprPtr parse_expr() { return parse_cond(); }

  ExprPtr parse_cond() {
    SourceLocation loc = peek().loc;
    ExprPtr e = parse_disj();
    if (at(Tok::Question)) {
      take();
      ExprPtr then_branch = parse_expr();
      expect(Tok::Colon, "':'");
      ExprPtr else_branch = parse_expr();
      return make_expr(Expression::Conditional{e, then_branch, else_branch}, loc);
    }
    return e;
  }

  ExprPtr parse_disj() {
    ExprPtr e = parse_cmp();
    while (at_word("or")) {
      SourceLocation loc = take().loc;
      ExprPtr rhs = parse_cmp();
      e = make_expr(Expression::Apply{"or", {e, rhs}}, loc);
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_sum();
    while (at(Tok::Langle) || at(Tok::Equal)) {
      // '<' only continues a comparison when an operand follows; a
      // closing context like '<a, b>' never reaches here.
      std::string op = at(Tok::Langle) ? "<" : "=";
      SourceLocation loc = take().loc;
      ExprPtr rhs = parse_sum();
      e = make_expr(Expression::Apply{op, {e, rhs}}, loc);
    }
    return e;
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_unary();
    while (at(Tok::Plus)) {
      SourceLocation loc = take().loc;
      ExprPtr rhs = parse_unary();
      e = make_expr(Expression::Apply{"+", {e, rhs}}, loc);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (at(Tok::Minus)) {
      SourceLocation loc = take().loc;
      ExprPtr arg = parse_unary();
      return make_expr(Expression::Apply{"-", {arg}}, loc);
    }
    if (at_word("not") && peek(1).kind != Tok::LParen) {
      SourceLocation loc = take().loc;
      ExprPtr arg = parse_unary();
      return make_expr(Expression::Apply{"not", {arg}}, loc);
    }
    return parse_proj();
  }

  ExprPtr parse_proj() {
    if (at_word("fst")) {
      SourceLocation loc = take().loc;
      return make_expr(Expression::First{parse_proj()}, loc);
    }
    if (at_word("snd")) {
      SourceLocation loc = take().loc;
      return make_expr(Expression::Second{parse_proj()}, loc);
    }
    return parse_atom();
  }

  ExprPtr parse_atom() {
    Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        take();
        return make_expr(Expression::Literal{Value::number(t.number)}, t.loc);
      case Tok::Sensor:
        take();
        return make_expr(Expression::Sensor{t.text}, t.loc);
      case Tok::LParen: {
        take();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Langle: {
        take();
        ExprPtr a = parse_expr();
        expect(Tok::Comma, "','");
        ExprPtr b = parse_expr();
        expect(Tok::Rangle, "'>'");
        return make_pair_expr(std::move(a), std::move(b), t.loc);
      }
      case Tok::LBrace:
        return parse_spread();
      case Tok::Ident: {
        if (t.text == "TRUE" || t.text == "FALSE") {
          take();
          return make_expr(Expression::Literal{Value::boolean(t.text == "TRUE")}, t.loc);
        }
        if (t.text == "POSINF" || t.text == "NEGINF") {
          take();
          return make_expr(
              Expression::Literal{Value::number(t.text == "POSINF" ? kPosInf : kNegInf)}, t.loc);
        }
        take();
        if (at(Tok::LParen)) {
          take();
          std::vector<ExprPtr> args;
          if (!at(Tok::RParen)) {
            args.push_back(parse_expr());
            while (at(Tok::Comma)) {
              take();
              args.push_back(parse_expr());
            }
          }
          expect(Tok::RParen, "')'");
          return make_expr(Expression::Apply{t.text, std::move(args)}, t.loc);
        }
        return make_expr(Expression::Variable{t.text}, t.loc);
      }
      default:
        fail("expected an expression");
    }
  }

  ExprPtr parse_spread() {
    Token open = expect(Tok::LBrace, "'{'");
    ExprPtr source = parse_expr();
    expect(Tok::Colon, "':'");
    std::string diffusion;
    std::vector<ExprPtr> extra;
    if (at(Tok::Hole)) {
      // infix form: @ OP e
      take();
      if (at(Tok::Plus)) {
        diffusion = "+";
      } else if (at_word("or")) {
        diffusion = "or";
      } else if (at(Tok::Langle)) {
        diffusion = "<";
      } else if (at(Tok::Equal)) {
        diffusion = "=";
      } else {
        fail("expected '+', 'or', '<' or '=' after '@'");
      }
      take();
      extra.push_back(parse_expr());
    } else if (at(Tok::Ident)) {
      diffusion = take().text;
      expect(Tok::LParen, "'('");
      if (!at(Tok::Hole)) fail("spreading body must apply the diffusion to '@' first");
      take();
      while (at(Tok::Comma)) {
        take();
        extra.push_back(parse_expr());
      }
      expect(Tok::RParen, "')'");
    } else {
      fail("spreading body must be f(@, ...) or '@' followed by an operator");
    }
    expect(Tok::RBrace, "'}'");
    return make_expr(Expression::Spread{source, diffusion, std::move(extra)}, open.loc);
  }

  // ---- definitions ----

  struct PendingAnnotations {
    std::vector<std::pair<SortSignature, SourceLocation>> sorts;
    std::vector<std::pair<SortSignature, SourceLocation>> stab;
    std::vector<std::pair<AnnotatedSignature, SourceLocation>> ann;
  };

  void parse_def(Program& program) {
    PendingAnnotations pending;
    while (at(Tok::AtSig) || at(Tok::AtStab) || at(Tok::AtAnn)) {
      Tok kind = peek().kind;
      take();
      do {
        SourceLocation loc = peek().loc;
        if (kind == Tok::AtAnn) {
          pending.ann.emplace_back(parse_annotated_signature_tok(), loc);
        } else if (kind == Tok::AtStab) {
          pending.stab.emplace_back(parse_sort_signature_tok(), loc);
        } else {
          pending.sorts.emplace_back(parse_sort_signature_tok(), loc);
        }
      } while (at(Tok::Comma) && (take(), true));
    }
    if (at(Tok::End)) {
      if (!pending.sorts.empty() || !pending.stab.empty() || !pending.ann.empty()) {
        fail("annotations must precede a definition");
      }
      return;
    }
    expect_word("def");
    FunctionDef def;
    def.return_type = parse_type_tok();
    Token name_tok = peek();
    def.name = expect_ident("function name");
    def.location = name_tok.loc;
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      do {
        TypeExpr type = parse_type_tok();
        std::string pname = expect_ident("parameter name");
        def.params.push_back({pname, type});
      } while (at(Tok::Comma) && (take(), true));
    }
    expect(Tok::RParen, "')'");
    expect_word("is");
    def.body = parse_expr();

    attach_annotations(def, pending);

    if (program.defs.count(def.name)) {
      report_.error(def.location, "PARSE", "duplicate definition of '" + def.name + "'");
      return;
    }
    program.defs.emplace(def.name, std::move(def));
  }

  void attach_annotations(FunctionDef& def, const PendingAnnotations& pending) {
    TypeSignature type_sig = def.type_signature();
    auto check = [&](const SortSignature& sig, SourceLocation loc, const char* kind) {
      if (sig.args.size() != type_sig.args.size()) {
        report_.error(loc, "PARSE",
                      std::string(kind) + " signature " + sig.to_string() + " has arity " +
                          std::to_string(sig.args.size()) + ", but '" + def.name + "' takes " +
                          std::to_string(type_sig.args.size()) + " arguments");
        return false;
      }
      if (!signature_refines(sig, type_sig)) {
        report_.error(loc, "PARSE",
                      std::string(kind) + " signature " + sig.to_string() +
                          " does not refine the type signature " + type_sig.to_string());
        return false;
      }
      return true;
    };
    for (const auto& [sig, loc] : pending.sorts) {
      if (check(sig, loc, "sort")) def.declared_sorts.push_back(sig);
    }
    for (const auto& [sig, loc] : pending.stab) {
      if (check(sig, loc, "stabilising")) def.declared_stab.push_back(sig);
    }
    for (const auto& [sig, loc] : pending.ann) {
      if (check(sig.support, loc, "annotated")) def.declared_ann.push_back(sig);
    }
  }

  std::vector<Token> tokens_;
  Report& report_;
  size_t pos_ = 0;
};

}  // namespace

ParseResult parse_program(const std::string& text, const std::string& filename) {
  ParseResult result;
  Lexer lexer(text, filename);
  std::vector<Token> tokens = lexer.run(result.report);
  Parser parser(std::move(tokens), result.report);
  parser.parse_into(result.program);
  return result;
}

ParseResult parse_files(const std::vector<std::string>& paths) {
  ParseResult result;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      result.report.error({path, 0, 0}, "IO", "cannot open '" + path + "'");
      continue;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    ParseResult one = parse_program(buffer.str(), path);
    result.report.append(one.report);
    for (auto& [name, def] : one.program.defs) {
      if (result.program.defs.count(name)) {
        result.report.error(def.location, "PARSE",
                            "duplicate definition of '" + name + "' across files");
        continue;
      }
      result.program.defs.emplace(name, std::move(def));
    }
  }
  return result;
}

namespace {

template <typename Fn>
auto parse_fragment(const std::string& text, Fn&& fn) {
  Report report;
  Lexer lexer(text, "<signature>");
  std::vector<Token> tokens = lexer.run(report);
  Parser parser(std::move(tokens), report);
  try {
    return fn(parser);
  } catch (const ParseAbort& abort) {
    throw InternalError("bad signature literal '" + text + "': " + abort.diagnostic.message);
  }
}

}  // namespace

SortSignature parse_sort_signature(const std::string& text) {
  return parse_fragment(text, [](Parser& p) { return p.parse_signature_only(); });
}

AnnotatedSignature parse_annotated_signature(const std::string& text) {
  return parse_fragment(text, [](Parser& p) { return p.parse_annotated_only(); });
}

Sort parse_sort(const std::string& text) {
  return parse_fragment(text, [](Parser& p) { return p.parse_sort_only(); });
}

}  // namespace fieldcalc
