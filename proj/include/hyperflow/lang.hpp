// Abstract syntax, concrete syntax (parser + printer), and the
// modified-variables analysis for the while-language.
#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hyperflow {

enum class ArithOp { Add, Sub, Mul, Div, Mod };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* to_string(ArithOp op) {
    switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    case ArithOp::Mod: return "%";
    }
    return "?";
}

inline const char* to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

// Negation of a comparison stays within the comparison language.
inline CmpOp negate(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
    }
    return CmpOp::Eq;
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit {
    long long value = 0;
};
struct VarRef {
    std::string name;
};
struct BinArith {
    ArithOp op;
    ExprPtr lhs, rhs;
};
// Comparisons appear only as guards or as a whole assignment right-hand
// side; they never nest inside BinArith or Compare.
struct Compare {
    CmpOp op;
    ExprPtr lhs, rhs;
};

struct Expr {
    std::variant<IntLit, VarRef, BinArith, Compare> node;
    int line = 0, col = 0;
};

inline ExprPtr make_int(long long v, int line = 0, int col = 0) {
    return std::make_shared<Expr>(Expr{IntLit{v}, line, col});
}
inline ExprPtr make_var(std::string name, int line = 0, int col = 0) {
    return std::make_shared<Expr>(Expr{VarRef{std::move(name)}, line, col});
}
inline ExprPtr make_arith(ArithOp op, ExprPtr l, ExprPtr r, int line = 0, int col = 0) {
    return std::make_shared<Expr>(Expr{BinArith{op, std::move(l), std::move(r)}, line, col});
}
inline ExprPtr make_compare(CmpOp op, ExprPtr l, ExprPtr r, int line = 0, int col = 0) {
    return std::make_shared<Expr>(Expr{Compare{op, std::move(l), std::move(r)}, line, col});
}

inline bool is_compare(const Expr& e) { return std::holds_alternative<Compare>(e.node); }

inline ExprPtr negate_guard(const Expr& b) {
    const auto& cmp = std::get<Compare>(b.node);
    return make_compare(negate(cmp.op), cmp.lhs, cmp.rhs, b.line, b.col);
}
inline ExprPtr negate_guard(const ExprPtr& b) { return negate_guard(*b); }

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

struct Skip {};
struct Assign {
    std::string target;
    ExprPtr rhs;
};
struct Seq {
    CommandPtr first, second;
};
struct If {
    ExprPtr guard;  // Compare
    CommandPtr then_branch, else_branch;
};
struct While {
    ExprPtr guard;  // Compare
    CommandPtr body;
};

struct Command {
    std::variant<Skip, Assign, Seq, If, While> node;
    int line = 0, col = 0;
};

inline CommandPtr make_skip(int line = 0, int col = 0) {
    return std::make_shared<Command>(Command{Skip{}, line, col});
}
inline CommandPtr make_assign(std::string x, ExprPtr e, int line = 0, int col = 0) {
    return std::make_shared<Command>(Command{Assign{std::move(x), std::move(e)}, line, col});
}
inline CommandPtr make_seq(CommandPtr a, CommandPtr b, int line = 0, int col = 0) {
    return std::make_shared<Command>(Command{Seq{std::move(a), std::move(b)}, line, col});
}
inline CommandPtr make_if(ExprPtr b, CommandPtr t, CommandPtr e, int line = 0, int col = 0) {
    return std::make_shared<Command>(Command{If{std::move(b), std::move(t), std::move(e)}, line, col});
}
inline CommandPtr make_while(ExprPtr b, CommandPtr body, int line = 0, int col = 0) {
    return std::make_shared<Command>(Command{While{std::move(b), std::move(body)}, line, col});
}

// A whole program: its variables (in order of first occurrence) and body.
struct Program {
    std::vector<std::string> vars;
    CommandPtr body;
};

// Variable lists are shared between the many states and abstract values of
// one analysis run.
inline std::shared_ptr<const std::vector<std::string>> share_vars(std::vector<std::string> vars) {
    return std::make_shared<const std::vector<std::string>>(std::move(vars));
}

// ---------------------------------------------------------------------------
// Modified variables: the set of assignment targets syntactically occurring
// in c. Over-approximates the variables a command may modify.

inline void mod_vars_into(const Command& c, std::set<std::string>& out) {
    if (std::holds_alternative<Assign>(c.node)) {
        out.insert(std::get<Assign>(c.node).target);
    } else if (const auto* s = std::get_if<Seq>(&c.node)) {
        mod_vars_into(*s->first, out);
        mod_vars_into(*s->second, out);
    } else if (const auto* i = std::get_if<If>(&c.node)) {
        mod_vars_into(*i->then_branch, out);
        mod_vars_into(*i->else_branch, out);
    } else if (const auto* w = std::get_if<While>(&c.node)) {
        mod_vars_into(*w->body, out);
    }
}

inline std::set<std::string> mod_vars(const Command& c) {
    std::set<std::string> out;
    mod_vars_into(c, out);
    return out;
}

// ---------------------------------------------------------------------------
// Variable collection in order of first occurrence (assignment targets count
// at the point they appear, before their right-hand side).

inline void collect_vars_expr(const Expr& e, std::vector<std::string>& order, std::set<std::string>& seen) {
    if (const auto* v = std::get_if<VarRef>(&e.node)) {
        if (seen.insert(v->name).second) order.push_back(v->name);
    } else if (const auto* b = std::get_if<BinArith>(&e.node)) {
        collect_vars_expr(*b->lhs, order, seen);
        collect_vars_expr(*b->rhs, order, seen);
    } else if (const auto* c = std::get_if<Compare>(&e.node)) {
        collect_vars_expr(*c->lhs, order, seen);
        collect_vars_expr(*c->rhs, order, seen);
    }
}

inline void collect_vars_cmd(const Command& c, std::vector<std::string>& order, std::set<std::string>& seen) {
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        if (seen.insert(a->target).second) order.push_back(a->target);
        collect_vars_expr(*a->rhs, order, seen);
    } else if (const auto* s = std::get_if<Seq>(&c.node)) {
        collect_vars_cmd(*s->first, order, seen);
        collect_vars_cmd(*s->second, order, seen);
    } else if (const auto* i = std::get_if<If>(&c.node)) {
        collect_vars_expr(*i->guard, order, seen);
        collect_vars_cmd(*i->then_branch, order, seen);
        collect_vars_cmd(*i->else_branch, order, seen);
    } else if (const auto* w = std::get_if<While>(&c.node)) {
        collect_vars_expr(*w->guard, order, seen);
        collect_vars_cmd(*w->body, order, seen);
    }
}

inline Program make_program(CommandPtr body) {
    Program p;
    p.body = std::move(body);
    std::set<std::string> seen;
    collect_vars_cmd(*p.body, p.vars, seen);
    return p;
}

// ---------------------------------------------------------------------------
// Parser. Grammar:
//   program := stmt (";" stmt)*
//   stmt    := "skip" | ident ":=" expr
//            | "if" "(" cmpexpr ")" "then" "{" program "}" "else" "{" program "}"
//            | "while" "(" cmpexpr ")" "do" "{" program "}"
//   expr    := arith | cmpexpr
//   arith   := term (("+"|"-") term)*
//   term    := factor (("*"|"/"|"%") factor)*
//   factor  := int | ident | "(" arith ")"
//   cmpexpr := arith cmp arith
// "//" starts a line comment. Comparisons are rejected inside arithmetic.

class parse_error : public std::runtime_error {
public:
    int line, col;
    parse_error(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_), col(col_) {}
};

namespace detail {

struct Token {
    enum Kind { Ident, Int, Symbol, End } kind = End;
    std::string text;
    long long value = 0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                id += src_[pos_];
                bump();
            }
            tok_.kind = Token::Ident;
            tok_.text = std::move(id);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                num += src_[pos_];
                bump();
            }
            tok_.kind = Token::Int;
            tok_.text = num;
            try {
                tok_.value = std::stoll(num);
            } catch (const std::out_of_range&) {
                throw parse_error("integer literal out of 64-bit range", tok_.line, tok_.col);
            }
            return;
        }
        // Multi-character symbols first.
        static const char* two[] = {":=", "==", "!=", "<=", ">="};
        for (const char* s : two) {
            if (src_.compare(pos_, 2, s) == 0) {
                tok_.kind = Token::Symbol;
                tok_.text = s;
                bump();
                bump();
                return;
            }
        }
        static const std::string singles = "+-*/%<>(){};";
        if (singles.find(c) != std::string::npos) {
            tok_.kind = Token::Symbol;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw parse_error(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    CommandPtr parse_program_body() {
        CommandPtr c = parse_stmt();
        while (is_symbol(";")) {
            Token semi = lex_.next();
            CommandPtr rhs = parse_stmt();
            c = make_seq(std::move(c), std::move(rhs), semi.line, semi.col);
        }
        return c;
    }

    void expect_end() {
        if (lex_.peek().kind != detail::Token::End)
            throw parse_error("expected ';' or end of input, got '" + describe(lex_.peek()) + "'",
                              lex_.peek().line, lex_.peek().col);
    }

private:
    static std::string describe(const Token& t) {
        return t.kind == Token::End ? "end of input" : t.text;
    }

    bool is_symbol(const char* s) const {
        return lex_.peek().kind == Token::Symbol && lex_.peek().text == s;
    }
    bool is_keyword(const char* s) const {
        return lex_.peek().kind == Token::Ident && lex_.peek().text == s;
    }

    Token expect_symbol(const char* s) {
        if (!is_symbol(s))
            throw parse_error(std::string("expected '") + s + "', got '" + describe(lex_.peek()) + "'",
                              lex_.peek().line, lex_.peek().col);
        return lex_.next();
    }
    Token expect_keyword(const char* s) {
        if (!is_keyword(s))
            throw parse_error(std::string("expected '") + s + "', got '" + describe(lex_.peek()) + "'",
                              lex_.peek().line, lex_.peek().col);
        return lex_.next();
    }

    CommandPtr parse_stmt() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Ident) {
            if (t.text == "skip") {
                Token kw = lex_.next();
                return make_skip(kw.line, kw.col);
            }
            if (t.text == "if") {
                Token kw = lex_.next();
                expect_symbol("(");
                ExprPtr guard = parse_cmpexpr();
                expect_symbol(")");
                expect_keyword("then");
                expect_symbol("{");
                CommandPtr then_b = parse_program_body();
                expect_symbol("}");
                expect_keyword("else");
                expect_symbol("{");
                CommandPtr else_b = parse_program_body();
                expect_symbol("}");
                return make_if(std::move(guard), std::move(then_b), std::move(else_b), kw.line, kw.col);
            }
            if (t.text == "while") {
                Token kw = lex_.next();
                expect_symbol("(");
                ExprPtr guard = parse_cmpexpr();
                expect_symbol(")");
                expect_keyword("do");
                expect_symbol("{");
                CommandPtr body = parse_program_body();
                expect_symbol("}");
                return make_while(std::move(guard), std::move(body), kw.line, kw.col);
            }
            if (t.text == "then" || t.text == "else" || t.text == "do")
                throw parse_error("unexpected keyword '" + t.text + "'", t.line, t.col);
            Token id = lex_.next();
            expect_symbol(":=");
            ExprPtr rhs = parse_expr();
            return make_assign(id.text, std::move(rhs), id.line, id.col);
        }
        throw parse_error("expected statement, got '" + describe(t) + "'", t.line, t.col);
    }

    // expr := arith, optionally extended to a single top-level comparison.
    ExprPtr parse_expr() {
        ExprPtr lhs = parse_arith();
        if (auto op = peek_cmp_op()) {
            Token opt = lex_.next();
            ExprPtr rhs = parse_arith();
            check_no_nested_compare(*lhs);
            check_no_nested_compare(*rhs);
            return make_compare(*op, std::move(lhs), std::move(rhs), opt.line, opt.col);
        }
        return lhs;
    }

    ExprPtr parse_cmpexpr() {
        ExprPtr lhs = parse_arith();
        auto op = peek_cmp_op();
        if (!op)
            throw parse_error("expected comparison operator, got '" + describe(lex_.peek()) + "'",
                              lex_.peek().line, lex_.peek().col);
        Token opt = lex_.next();
        ExprPtr rhs = parse_arith();
        return make_compare(*op, std::move(lhs), std::move(rhs), opt.line, opt.col);
    }

    std::optional<CmpOp> peek_cmp_op() const {
        if (lex_.peek().kind != Token::Symbol) return std::nullopt;
        const std::string& s = lex_.peek().text;
        if (s == "==") return CmpOp::Eq;
        if (s == "!=") return CmpOp::Ne;
        if (s == "<") return CmpOp::Lt;
        if (s == "<=") return CmpOp::Le;
        if (s == ">") return CmpOp::Gt;
        if (s == ">=") return CmpOp::Ge;
        return std::nullopt;
    }

    void check_no_nested_compare(const Expr& e) const {
        if (is_compare(e))
            throw parse_error("comparison cannot be nested inside another expression", e.line, e.col);
    }

    ExprPtr parse_arith() {
        ExprPtr lhs = parse_term();
        while (is_symbol("+") || is_symbol("-")) {
            Token op = lex_.next();
            ExprPtr rhs = parse_term();
            lhs = make_arith(op.text == "+" ? ArithOp::Add : ArithOp::Sub, std::move(lhs), std::move(rhs),
                             op.line, op.col);
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (is_symbol("*") || is_symbol("/") || is_symbol("%")) {
            Token op = lex_.next();
            ExprPtr rhs = parse_factor();
            ArithOp a = op.text == "*" ? ArithOp::Mul : op.text == "/" ? ArithOp::Div : ArithOp::Mod;
            lhs = make_arith(a, std::move(lhs), std::move(rhs), op.line, op.col);
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Int) {
            Token lit = lex_.next();
            return make_int(lit.value, lit.line, lit.col);
        }
        if (t.kind == Token::Ident) {
            if (t.text == "skip" || t.text == "if" || t.text == "while" || t.text == "then" ||
                t.text == "else" || t.text == "do")
                throw parse_error("unexpected keyword '" + t.text + "' in expression", t.line, t.col);
            Token id = lex_.next();
            return make_var(id.text, id.line, id.col);
        }
        if (is_symbol("(")) {
            lex_.next();
            ExprPtr inner = parse_arith();
            expect_symbol(")");
            return inner;
        }
        if (is_symbol("-")) {
            // No unary minus in the grammar; give a targeted message.
            throw parse_error("negative literals are not supported; write 0 - n", t.line, t.col);
        }
        throw parse_error("expected integer, identifier or '(', got '" + describe(t) + "'", t.line, t.col);
    }

    Lexer lex_;
};

}  // namespace detail

inline Program parse_program(const std::string& source) {
    detail::Parser p(source);
    CommandPtr body = p.parse_program_body();
    p.expect_end();
    return make_program(std::move(body));
}

// ---------------------------------------------------------------------------
// Pretty-printer. parse_program(pretty_print(p)) reproduces p's AST.

inline void print_expr(std::ostream& os, const Expr& e, bool parenthesize_nested = false) {
    if (const auto* i = std::get_if<IntLit>(&e.node)) {
        os << i->value;
    } else if (const auto* v = std::get_if<VarRef>(&e.node)) {
        os << v->name;
    } else if (const auto* b = std::get_if<BinArith>(&e.node)) {
        if (parenthesize_nested) os << "(";
        print_expr(os, *b->lhs, true);
        os << " " << to_string(b->op) << " ";
        print_expr(os, *b->rhs, true);
        if (parenthesize_nested) os << ")";
    } else if (const auto* c = std::get_if<Compare>(&e.node)) {
        print_expr(os, *c->lhs, true);
        os << " " << to_string(c->op) << " ";
        print_expr(os, *c->rhs, true);
    }
}

inline std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e);
    return os.str();
}

inline void print_command(std::ostream& os, const Command& c, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (std::holds_alternative<Skip>(c.node)) {
        os << pad << "skip";
    } else if (const auto* a = std::get_if<Assign>(&c.node)) {
        os << pad << a->target << " := ";
        print_expr(os, *a->rhs);
    } else if (const auto* s = std::get_if<Seq>(&c.node)) {
        print_command(os, *s->first, indent);
        os << ";\n";
        print_command(os, *s->second, indent);
    } else if (const auto* i = std::get_if<If>(&c.node)) {
        os << pad << "if (";
        print_expr(os, *i->guard);
        os << ") then {\n";
        print_command(os, *i->then_branch, indent + 1);
        os << "\n" << pad << "} else {\n";
        print_command(os, *i->else_branch, indent + 1);
        os << "\n" << pad << "}";
    } else if (const auto* w = std::get_if<While>(&c.node)) {
        os << pad << "while (";
        print_expr(os, *w->guard);
        os << ") do {\n";
        print_command(os, *w->body, indent + 1);
        os << "\n" << pad << "}";
    }
}

inline std::string pretty_print(const Program& p) {
    std::ostringstream os;
    print_command(os, *p.body, 0);
    os << "\n";
    return os.str();
}

// Structural equality of ASTs (used by the round-trip property).
inline bool equal_expr(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* i = std::get_if<IntLit>(&a.node)) return i->value == std::get<IntLit>(b.node).value;
    if (const auto* v = std::get_if<VarRef>(&a.node)) return v->name == std::get<VarRef>(b.node).name;
    if (const auto* x = std::get_if<BinArith>(&a.node)) {
        const auto& y = std::get<BinArith>(b.node);
        return x->op == y.op && equal_expr(*x->lhs, *y.lhs) && equal_expr(*x->rhs, *y.rhs);
    }
    const auto& x = std::get<Compare>(a.node);
    const auto& y = std::get<Compare>(b.node);
    return x.op == y.op && equal_expr(*x.lhs, *y.lhs) && equal_expr(*x.rhs, *y.rhs);
}

inline bool equal_command(const Command& a, const Command& b) {
    if (a.node.index() != b.node.index()) return false;
    if (std::holds_alternative<Skip>(a.node)) return true;
    if (const auto* x = std::get_if<Assign>(&a.node)) {
        const auto& y = std::get<Assign>(b.node);
        return x->target == y.target && equal_expr(*x->rhs, *y.rhs);
    }
    if (const auto* x = std::get_if<Seq>(&a.node)) {
        const auto& y = std::get<Seq>(b.node);
        return equal_command(*x->first, *y.first) && equal_command(*x->second, *y.second);
    }
    if (const auto* x = std::get_if<If>(&a.node)) {
        const auto& y = std::get<If>(b.node);
        return equal_expr(*x->guard, *y.guard) && equal_command(*x->then_branch, *y.then_branch) &&
               equal_command(*x->else_branch, *y.else_branch);
    }
    const auto& x = std::get<While>(a.node);
    const auto& y = std::get<While>(b.node);
    return equal_expr(*x.guard, *y.guard) && equal_command(*x.body, *y.body);
}

}  // namespace hyperflow
