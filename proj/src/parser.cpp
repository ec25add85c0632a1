#include "qiropt/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <unordered_set>
#include <map>
#include <optional>
#include <unordered_map>

namespace qiropt {

namespace {

enum class Tok {
  End,
  Word,      // bare identifier / keyword / number-like words
  LocalId,   // %name
  GlobalId,  // @name
  Number,    // integer literal (possibly negative)
  String,    // "..."
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Equals,
  Star,
  Colon,
  Hash,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
  int col = 0;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         c == '.';
}
bool ident_char(char c) {
  return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {
    advance();
    buf_[0] = cur_;
    advance();
    buf_[1] = cur_;
  }

  const Token &peek() const { return buf_[0]; }
  const Token &peek2() const { return buf_[1]; }
  Token take() {
    Token t = buf_[0];
    buf_[0] = buf_[1];
    advance();
    buf_[1] = cur_;
    return t;
  }

 private:
  Token buf_[2];  // two-token window: current and lookahead

  void advance() {
    skip_trivia();
    cur_ = Token{Tok::End, "", line_, col_};
    if (pos_ >= text_.size()) return;
    char c = text_[pos_];
    int line = line_, col = col_;
    auto single = [&](Tok k) {
      bump();
      cur_ = Token{k, std::string(1, c), line, col};
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case ',': return single(Tok::Comma);
      case '=': return single(Tok::Equals);
      case '*': return single(Tok::Star);
      case ':': return single(Tok::Colon);
      case '#': return single(Tok::Hash);
      default: break;
    }
    if (c == '"') {
      bump();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        s += text_[pos_];
        bump();
      }
      if (pos_ >= text_.size()) throw ParseError(line, col, "unterminated string");
      bump();
      cur_ = Token{Tok::String, std::move(s), line, col};
      return;
    }
    if (c == '%' || c == '@') {
      bump();
      std::string s;
      if (pos_ < text_.size() && text_[pos_] == '"') {
        throw UnsupportedConstruct(line, col, "quoted identifier");
      }
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        s += text_[pos_];
        bump();
      }
      if (s.empty()) throw ParseError(line, col, "empty symbol name");
      cur_ = Token{c == '%' ? Tok::LocalId : Tok::GlobalId, std::move(s), line,
                   col};
      return;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      if (c == '-') {
        s += c;
        bump();
      }
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        s += text_[pos_];
        bump();
      }
      if (s == "-") throw ParseError(line, col, "stray '-'");
      cur_ = Token{Tok::Number, std::move(s), line, col};
      return;
    }
    if (ident_start(c)) {
      std::string s;
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        s += text_[pos_];
        bump();
      }
      cur_ = Token{Tok::Word, std::move(s), line, col};
      return;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

constexpr std::string_view kKnownOpaques[] = {"Qubit",  "Array", "Callable",
                                              "Result", "String", "Tuple"};

bool known_opaque(std::string_view n) {
  for (auto k : kKnownOpaques)
    if (k == n) return true;
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  std::unique_ptr<Module> run() {
    mod_ = std::make_unique<Module>();
    while (lex_.peek().kind != Tok::End) parse_top_level();
    finish_module();
    return std::move(mod_);
  }

 private:
  [[noreturn]] void fail(const Token &t, const std::string &msg) {
    throw ParseError(t.line, t.col, msg);
  }
  [[noreturn]] void unsupported(const Token &t, const std::string &what) {
    throw UnsupportedConstruct(t.line, t.col, what);
  }

  Token expect(Tok k, const char *what) {
    Token t = lex_.take();
    if (t.kind != k) fail(t, std::string("expected ") + what);
    return t;
  }
  Token expect_word(std::string_view w) {
    Token t = lex_.take();
    if (t.kind != Tok::Word || t.text != w)
      fail(t, "expected '" + std::string(w) + "'");
    return t;
  }
  bool accept_word(std::string_view w) {
    if (lex_.peek().kind == Tok::Word && lex_.peek().text == w) {
      lex_.take();
      return true;
    }
    return false;
  }

  std::int64_t to_int(const Token &t) {
    return std::strtoll(t.text.c_str(), nullptr, 10);
  }

  // --- types -------------------------------------------------------------

  // first-class type, with optional trailing function-signature and stars
  TypeRef parse_type() {
    Token t = lex_.take();
    TypeRef base = nullptr;
    if (t.kind == Tok::Word) {
      if (t.text == "void")
        base = Type::void_ty();
      else if (t.text == "i1")
        base = Type::int_ty(1);
      else if (t.text == "i8")
        base = Type::int_ty(8);
      else if (t.text == "i64")
        base = Type::int_ty(64);
      else
        unsupported(t, "type '" + t.text + "'");
    } else if (t.kind == Tok::LocalId) {
      if (t.text == "Range")
        base = Type::range_ty();
      else if (known_opaque(t.text))
        base = Type::opaque_ty(t.text);
      else
        unsupported(t, "named type %" + t.text);
    } else if (t.kind == Tok::LBracket) {
      Token n = expect(Tok::Number, "array length");
      expect_word("x");
      TypeRef elem = parse_type();
      expect(Tok::RBracket, "']'");
      base = Type::const_array_ty(elem, static_cast<std::size_t>(to_int(n)));
    } else {
      fail(t, "expected type");
    }
    // function signature suffix: e.g. void (%Tuple*, %Tuple*, %Tuple*)
    if (lex_.peek().kind == Tok::LParen) {
      lex_.take();
      std::vector<TypeRef> params;
      if (lex_.peek().kind != Tok::RParen) {
        params.push_back(parse_type());
        while (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          params.push_back(parse_type());
        }
      }
      expect(Tok::RParen, "')'");
      base = Type::func_sig_ty(base, std::move(params));
    }
    while (lex_.peek().kind == Tok::Star) {
      lex_.take();
      base = Type::ref_ty(base);
    }
    return base;
  }

  // --- top level -----------------------------------------------------------

  void parse_top_level() {
    const Token &t = lex_.peek();
    if (t.kind == Tok::Word) {
      if (t.text == "declare") return parse_declare();
      if (t.text == "define") return parse_define();
      if (t.text == "source_filename") {
        lex_.take();
        expect(Tok::Equals, "'='");
        expect(Tok::String, "string");
        return;
      }
      if (t.text == "target") {
        lex_.take();
        lex_.take();  // datalayout | triple
        expect(Tok::Equals, "'='");
        expect(Tok::String, "string");
        return;
      }
      if (t.text == "attributes") {
        lex_.take();
        expect(Tok::Hash, "'#'");
        expect(Tok::Number, "attribute group id");
        expect(Tok::Equals, "'='");
        expect(Tok::LBrace, "'{'");
        int depth = 1;
        while (depth > 0) {
          Token x = lex_.take();
          if (x.kind == Tok::End) fail(x, "unterminated attribute group");
          if (x.kind == Tok::LBrace) ++depth;
          if (x.kind == Tok::RBrace) --depth;
        }
        return;
      }
      unsupported(t, "top-level '" + t.text + "'");
    }
    if (t.kind == Tok::LocalId) return parse_type_decl();
    if (t.kind == Tok::GlobalId) return parse_global();
    fail(t, "expected top-level entity");
  }

  // %Name = type opaque   |   %Range = type { i64, i64, i64 }
  void parse_type_decl() {
    Token name = lex_.take();
    expect(Tok::Equals, "'='");
    expect_word("type");
    if (accept_word("opaque")) {
      if (!known_opaque(name.text) && name.text != "Range")
        unsupported(name, "opaque type %" + name.text);
      return;
    }
    if (lex_.peek().kind == Tok::LBrace) {
      if (name.text != "Range") unsupported(name, "struct type %" + name.text);
      lex_.take();
      for (int i = 0; i < 3; ++i) {
        expect_word("i64");
        if (i < 2) expect(Tok::Comma, "','");
      }
      expect(Tok::RBrace, "'}'");
      return;
    }
    fail(lex_.peek(), "expected 'opaque' or struct body");
  }

  void parse_declare() {
    lex_.take();
    TypeRef ret = parse_type();
    Token name = expect(Tok::GlobalId, "function name");
    expect(Tok::LParen, "'('");
    std::vector<TypeRef> params;
    if (lex_.peek().kind != Tok::RParen) {
      params.push_back(parse_type());
      // declarations may carry parameter names; ignore them
      if (lex_.peek().kind == Tok::LocalId) lex_.take();
      while (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        params.push_back(parse_type());
        if (lex_.peek().kind == Tok::LocalId) lex_.take();
      }
    }
    expect(Tok::RParen, "')'");
    skip_fn_attrs();
    Function *f = bind_function(name, ret, params, /*definition=*/false);
    statement_order_.push_back(f);
  }

  void parse_define() {
    Token def = lex_.take();
    bool internal = accept_word("internal");
    (void)accept_word("external");
    TypeRef ret = parse_type();
    Token name = expect(Tok::GlobalId, "function name");
    expect(Tok::LParen, "'('");
    std::vector<TypeRef> params;
    std::vector<std::string> param_names;
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        params.push_back(parse_type());
        if (lex_.peek().kind == Tok::LocalId)
          param_names.push_back(lex_.take().text);
        else
          param_names.push_back(std::to_string(params.size() - 1));
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
    }
    expect(Tok::RParen, "')'");
    bool always_inline = false;
    for (;;) {
      if (accept_word("alwaysinline")) {
        always_inline = true;
      } else if (lex_.peek().kind == Tok::Hash) {
        lex_.take();
        expect(Tok::Number, "attribute group id");
      } else {
        break;
      }
    }
    Function *f = bind_function(name, ret, params, /*definition=*/true);
    if (f == nullptr) fail(def, "internal error binding function");
    statement_order_.push_back(f);
    f->set_internal(internal);
    f->set_always_inline(always_inline);
    for (std::size_t i = 0; i < param_names.size(); ++i)
      f->set_param_name(i, param_names[i]);

    expect(Tok::LBrace, "'{'");
    parse_body(f);
    expect(Tok::RBrace, "'}'");
  }

  void skip_fn_attrs() {
    for (;;) {
      if (lex_.peek().kind == Tok::Hash) {
        lex_.take();
        expect(Tok::Number, "attribute group id");
      } else if (accept_word("alwaysinline")) {
      } else {
        break;
      }
    }
  }

  Function *bind_function(const Token &name, TypeRef ret,
                          const std::vector<TypeRef> &params, bool definition) {
    Function *f = mod_->find_function(name.text);
    if (f == nullptr) {
      f = mod_->create_function(name.text, ret, params, !definition);
    } else {
      bool sig_matches = f->return_type() == ret &&
                         f->params().size() == params.size();
      if (sig_matches)
        for (std::size_t i = 0; i < params.size(); ++i)
          if (f->params()[i]->type() != params[i]) sig_matches = false;
      if (!sig_matches && !f->auto_declared())
        fail(name, "conflicting signature for @" + name.text);
      if (!f->is_declaration() && definition)
        fail(name, "redefinition of @" + name.text);
      if (f->is_declaration()) f->set_signature(ret, params);
    }
    if (definition) f->promote_to_definition();
    return f;
  }

  // --- function bodies -----------------------------------------------------

  struct FnCtx {
    Function *fn = nullptr;
    std::unordered_map<std::string, Value *> locals;  // defined or pending
    std::unordered_map<std::string, Token> pending;   // first use site
    std::unordered_map<std::string, BasicBlock *> blocks;
    std::unordered_map<std::string, Token> pending_blocks;
  };

  Value *local_ref(FnCtx &ctx, const Token &tok, TypeRef type_hint) {
    auto it = ctx.locals.find(tok.text);
    if (it != ctx.locals.end()) {
      if (type_hint && it->second->type() != type_hint)
        fail(tok, "type mismatch for %" + tok.text + ": expected " +
                      it->second->type()->str() + ", got " + type_hint->str());
      return it->second;
    }
    // forward reference: create a pending instruction-result shell
    Value *v = mod_->make_result(type_hint, tok.text);
    ctx.locals.emplace(tok.text, v);
    ctx.pending.emplace(tok.text, tok);
    return v;
  }

  Value *define_local(FnCtx &ctx, const Token &tok, TypeRef type) {
    auto it = ctx.locals.find(tok.text);
    if (it != ctx.locals.end()) {
      if (ctx.pending.erase(tok.text) == 0)
        fail(tok, "redefinition of %" + tok.text);
      // adopt the pending shell
      if (it->second->type() != type)
        fail(tok, "type mismatch for %" + tok.text);
      return it->second;
    }
    Value *v = mod_->make_result(type, tok.text);
    ctx.locals.emplace(tok.text, v);
    ctx.fn->register_name(tok.text);
    return v;
  }

  BasicBlock *block_ref(FnCtx &ctx, const Token &tok) {
    auto it = ctx.blocks.find(tok.text);
    if (it != ctx.blocks.end()) return it->second;
    if (ctx.fn->name_in_use(tok.text))
      fail(tok, "label %" + tok.text + " collides with a value name");
    BasicBlock *bb = ctx.fn->add_block(tok.text);
    ctx.blocks.emplace(tok.text, bb);
    ctx.pending_blocks.emplace(tok.text, tok);
    return bb;
  }

  void parse_body(Function *f) {
    FnCtx ctx;
    ctx.fn = f;
    for (Value *p : f->params()) ctx.locals.emplace(p->name(), p);

    std::vector<BasicBlock *> source_order;
    BasicBlock *cur = nullptr;
    while (lex_.peek().kind != Tok::RBrace) {
      Token t = lex_.peek();
      if ((t.kind == Tok::Word || t.kind == Tok::Number) && is_label()) {
        Token label = lex_.take();
        expect(Tok::Colon, "':' after label");
        auto it = ctx.blocks.find(label.text);
        if (it != ctx.blocks.end()) {
          if (ctx.pending_blocks.erase(label.text) == 0)
            fail(label, "duplicate block label " + label.text);
          cur = it->second;
        } else {
          if (f->name_in_use(label.text))
            fail(label, "label %" + label.text + " collides with a value name");
          cur = f->add_block(label.text);
          ctx.blocks.emplace(label.text, cur);
        }
        source_order.push_back(cur);
        continue;
      }
      if (cur == nullptr) fail(t, "instruction before first block label");
      parse_instruction(ctx, cur);
    }
    if (!ctx.pending.empty()) {
      const auto &[name, tok] = *ctx.pending.begin();
      fail(tok, "use of undefined value %" + name);
    }
    if (!ctx.pending_blocks.empty()) {
      const auto &[name, tok] = *ctx.pending_blocks.begin();
      fail(tok, "branch to undefined label %" + name);
    }
    f->reorder_blocks(source_order);
    for (const auto &bb : f->blocks()) bb->renumber();
  }

  bool is_label() { return lex_.peek2().kind == Tok::Colon; }

  // operand := %local | @global | number | null | true | false | {range}
  Value *parse_operand(FnCtx &ctx, TypeRef type) {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::LocalId:
        return local_ref(ctx, t, type);
      case Tok::GlobalId: {
        GlobalTable *g = mod_->find_global(t.text);
        if (!g) {
          // Forward reference to a table: create an empty shell now; slots
          // are filled when the definition is parsed.
          g = mod_->create_table(t.text, {});
          pending_tables_.emplace(t.text, t);
        }
        return mod_->global_ref(g);
      }
      case Tok::Number:
        return mod_->int_const(type, to_int(t));
      case Tok::Word:
        if (t.text == "null") return mod_->null_const(type);
        if (t.text == "true") return mod_->bool_const(true);
        if (t.text == "false") return mod_->bool_const(false);
        if (t.text == "undef") unsupported(t, "undef");
        fail(t, "expected operand, got '" + t.text + "'");
      case Tok::LBrace:
        return parse_range_literal(t);
      default:
        fail(t, "expected operand");
    }
  }

  Value *parse_range_literal(const Token &open) {
    // '{' already consumed: { i64 a, i64 b, i64 c }
    RangeTriple r;
    std::int64_t *slots[3] = {&r.start, &r.step, &r.end};
    for (int i = 0; i < 3; ++i) {
      expect_word("i64");
      Token n = expect(Tok::Number, "integer");
      *slots[i] = to_int(n);
      if (i < 2) expect(Tok::Comma, "','");
    }
    expect(Tok::RBrace, "'}'");
    (void)open;
    return mod_->range_const(r);
  }

  // typed operand := type operand, with "{...}" accepted as a bare %Range
  Value *parse_typed_operand(FnCtx &ctx) {
    if (lex_.peek().kind == Tok::LBrace) {
      Token t = lex_.take();
      return parse_range_literal(t);
    }
    TypeRef ty = parse_type();
    if (ty->is_range() && lex_.peek().kind == Tok::LBrace) {
      Token t = lex_.take();
      return parse_range_literal(t);
    }
    return parse_operand(ctx, ty);
  }

  void parse_instruction(FnCtx &ctx, BasicBlock *bb) {
    Token first = lex_.peek();
    std::optional<Token> result_name;
    if (first.kind == Tok::LocalId) {
      result_name = lex_.take();
      expect(Tok::Equals, "'='");
    }
    Token op = lex_.take();
    if (op.kind != Tok::Word) fail(op, "expected opcode");
    const std::string &w = op.text;

    auto finish = [&](std::unique_ptr<Instruction> in) {
      if (result_name) {
        if (!in->result())
          fail(*result_name, "instruction produces no result");
        adopt_result(ctx, *result_name, in.get());
      } else if (in->result()) {
        fail(op, "instruction result must be named");
      }
      bb->append(std::move(in));
    };

    if (w == "musttail" || w == "notail") unsupported(op, w);
    if (w == "tail") {
      expect_word("call");
      return finish(parse_call(ctx, /*tail=*/true));
    }
    if (w == "call") return finish(parse_call(ctx, false));
    if (w == "load") {
      TypeRef ty = parse_type();
      expect(Tok::Comma, "','");
      TypeRef pty = parse_type();
      Token ptr = expect(Tok::LocalId, "pointer operand");
      Value *p = local_ref(ctx, ptr, pty);
      accept_align();
      return finish(mod_->make_load(ty, p, "tmp"));
    }
    if (w == "store") {
      Value *val = parse_typed_operand(ctx);
      expect(Tok::Comma, "','");
      Value *ptr = parse_typed_operand(ctx);
      accept_align();
      return finish(mod_->make_store(val, ptr));
    }
    if (w == "bitcast") {
      Value *v = parse_typed_operand(ctx);
      expect_word("to");
      TypeRef to = parse_type();
      return finish(mod_->make_bitcast(v, to, "tmp"));
    }
    if (w == "br") {
      if (accept_word("label")) {
        Token dest = expect(Tok::LocalId, "label");
        return finish(mod_->make_br(block_ref(ctx, dest)));
      }
      TypeRef ty = parse_type();
      if (!ty->is_int(1)) fail(op, "br condition must be i1");
      Value *cond = parse_operand(ctx, ty);
      expect(Tok::Comma, "','");
      expect_word("label");
      Token t1 = expect(Tok::LocalId, "label");
      expect(Tok::Comma, "','");
      expect_word("label");
      Token t2 = expect(Tok::LocalId, "label");
      return finish(
          mod_->make_cond_br(cond, block_ref(ctx, t1), block_ref(ctx, t2)));
    }
    if (w == "icmp") {
      Token p = lex_.take();
      ICmpPred pred;
      if (p.text == "eq") pred = ICmpPred::EQ;
      else if (p.text == "ne") pred = ICmpPred::NE;
      else if (p.text == "slt") pred = ICmpPred::SLT;
      else if (p.text == "sle") pred = ICmpPred::SLE;
      else if (p.text == "sgt") pred = ICmpPred::SGT;
      else if (p.text == "sge") pred = ICmpPred::SGE;
      else unsupported(p, "icmp predicate '" + p.text + "'");
      TypeRef ty = parse_type();
      Value *a = parse_operand(ctx, ty);
      expect(Tok::Comma, "','");
      Value *b = parse_operand(ctx, ty);
      return finish(mod_->make_icmp(pred, a, b, "tmp"));
    }
    if (w == "add" || w == "sub" || w == "mul") {
      BinOpKind k = w == "add"   ? BinOpKind::Add
                    : w == "sub" ? BinOpKind::Sub
                                 : BinOpKind::Mul;
      while (accept_word("nsw") || accept_word("nuw")) {
      }
      TypeRef ty = parse_type();
      Value *a = parse_operand(ctx, ty);
      expect(Tok::Comma, "','");
      Value *b = parse_operand(ctx, ty);
      return finish(mod_->make_binop(k, a, b, "tmp"));
    }
    if (w == "phi") {
      TypeRef ty = parse_type();
      std::vector<Value *> vals;
      std::vector<BasicBlock *> blocks;
      for (;;) {
        expect(Tok::LBracket, "'['");
        vals.push_back(parse_operand(ctx, ty));
        expect(Tok::Comma, "','");
        Token b = expect(Tok::LocalId, "incoming block");
        blocks.push_back(block_ref(ctx, b));
        expect(Tok::RBracket, "']'");
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
      return finish(mod_->make_phi(ty, std::move(vals), std::move(blocks), "tmp"));
    }
    if (w == "ret") {
      if (accept_word("void")) return finish(mod_->make_ret());
      Value *v = parse_typed_operand(ctx);
      return finish(mod_->make_ret(v));
    }
    if (w == "getelementptr") {
      (void)accept_word("inbounds");
      TypeRef pointee = parse_type();
      expect(Tok::Comma, "','");
      TypeRef pty = parse_type();
      (void)pty;
      Token g = expect(Tok::GlobalId, "global");
      GlobalTable *table = mod_->find_global(g.text);
      if (!table) {
        table = mod_->create_table(g.text, {});
        pending_tables_.emplace(g.text, g);
      }
      std::vector<Value *> idx;
      while (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        TypeRef ity = parse_type();
        Token n = expect(Tok::Number, "constant index");
        idx.push_back(mod_->int_const(ity, to_int(n)));
      }
      TypeRef result_ty = Type::ref_ty(pointee->is_const_array()
                                           ? pointee->element_type()
                                           : pointee);
      return finish(mod_->make_gep_const(mod_->global_ref(table), idx,
                                         result_ty, "tmp"));
    }
    unsupported(op, "instruction '" + w + "'");
  }

  void accept_align() {
    if (lex_.peek().kind == Tok::Comma) {
      lex_.take();
      expect_word("align");
      expect(Tok::Number, "alignment");
    }
  }

  std::unique_ptr<Instruction> parse_call(FnCtx &ctx, bool tail) {
    TypeRef ret = parse_type();
    Token callee = expect(Tok::GlobalId, "callee");
    expect(Tok::LParen, "'('");
    std::vector<Value *> args;
    std::vector<TypeRef> arg_types;
    if (lex_.peek().kind != Tok::RParen) {
      for (;;) {
        Value *v = parse_typed_operand(ctx);
        args.push_back(v);
        arg_types.push_back(v->type());
        if (lex_.peek().kind != Tok::Comma) break;
        lex_.take();
      }
    }
    expect(Tok::RParen, "')'");
    Function *f = mod_->get_or_declare(callee.text, ret, arg_types);
    auto in = mod_->make_call(f, std::move(args), "tmp", tail);
    return in;
  }

  void adopt_result(FnCtx &ctx, const Token &name, Instruction *in) {
    auto it = ctx.locals.find(name.text);
    if (it != ctx.locals.end()) {
      if (ctx.pending.erase(name.text) == 0)
        fail(name, "redefinition of %" + name.text);
      Value *shell = it->second;
      if (shell->type() != in->result()->type())
        fail(name, "type mismatch for %" + name.text + ": defined as " +
                       in->result()->type()->str() + ", used as " +
                       shell->type()->str());
      in->replace_result(shell);
      ctx.fn->register_name(name.text);
      return;
    }
    if (ctx.fn->name_in_use(name.text))
      fail(name, "redefinition of %" + name.text);
    in->result()->set_name(name.text);
    ctx.fn->register_name(name.text);
    ctx.locals.emplace(name.text, in->result());
  }

  // %Global table definition:
  // @T = internal constant [4 x <fnptr>] [<fnptr> @a, <fnptr> null, ...]
  void parse_global() {
    Token name = lex_.take();
    expect(Tok::Equals, "'='");
    (void)accept_word("internal");
    (void)accept_word("private");
    if (!accept_word("constant")) unsupported(name, "non-constant global");
    TypeRef ty = parse_type();
    if (!ty->is_const_array() || ty->array_len() != 4)
      unsupported(name, "global of type " + ty->str() +
                            " (only 4-slot callable tables)");
    expect(Tok::LBracket, "'['");
    std::vector<Function *> slots;
    for (int i = 0; i < 4; ++i) {
      TypeRef ety = parse_type();
      Token v = lex_.take();
      if (v.kind == Tok::GlobalId) {
        TypeRef sig = ety->is_ref() ? ety->pointee() : ety;
        std::vector<TypeRef> params = sig->is_func_sig()
                                          ? sig->param_types()
                                          : std::vector<TypeRef>{};
        TypeRef ret = sig->is_func_sig() ? sig->return_type() : Type::void_ty();
        slots.push_back(mod_->get_or_declare(v.text, ret, params));
      } else if (v.kind == Tok::Word && v.text == "null") {
        slots.push_back(nullptr);
      } else {
        fail(v, "expected function symbol or null");
      }
      if (i < 3) expect(Tok::Comma, "','");
    }
    expect(Tok::RBracket, "']'");
    GlobalTable *g = mod_->find_global(name.text);
    if (g && pending_tables_.erase(name.text) == 0)
      fail(name, "redefinition of @" + name.text);
    if (g) {
      g->slots = std::move(slots);
      g->slots.resize(4, nullptr);
    } else {
      mod_->create_table(name.text, std::move(slots));
    }
  }

  void finish_module() {
    // pending tables (referenced but never defined) stay as all-null shells;
    // validation flags them.
    pending_tables_.clear();
    // restore source statement order: forward references may have created
    // function shells early
    std::vector<Function *> order;
    std::unordered_set<Function *> seen;
    for (Function *f : statement_order_)
      if (seen.insert(f).second) order.push_back(f);
    for (const auto &f : mod_->functions())
      if (seen.insert(f.get()).second) order.push_back(f.get());
    mod_->reorder_functions(order);
  }

  Lexer lex_;
  std::unique_ptr<Module> mod_;
  std::unordered_map<std::string, Token> pending_tables_;
  std::vector<Function *> statement_order_;
};

}  // namespace

std::unique_ptr<Module> parse_module(std::string_view text) {
  Parser p(text);
  return p.run();
}

}  // namespace qiropt
