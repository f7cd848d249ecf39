#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "lazycep/pattern.hpp"

namespace lazycep {

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

Expr Expr::num(double v) {
    Expr e;
    e.kind = Kind::Number;
    e.number = v;
    return e;
}

Expr Expr::str(std::string s) {
    Expr e;
    e.kind = Kind::String;
    e.text = std::move(s);
    return e;
}

Expr Expr::ref(std::string role, std::string attr, Index idx) {
    Expr e;
    e.kind = Kind::Ref;
    e.role = std::move(role);
    e.attr = std::move(attr);
    e.index = idx;
    return e;
}

Expr Expr::aggregate(AggFn fn, Expr r) {
    Expr e;
    e.kind = Kind::Aggregate;
    e.agg = fn;
    e.args.push_back(std::move(r));
    return e;
}

Expr Expr::corr(Expr a, Expr b) {
    Expr e;
    e.kind = Kind::Corr;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
}

Expr Expr::unary(Kind k, Expr a) {
    Expr e;
    e.kind = k;
    e.args.push_back(std::move(a));
    return e;
}

Expr Expr::binary(Op op, Expr a, Expr b) {
    Expr e;
    e.kind = Kind::Binary;
    e.op = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
}

namespace {

void collect_roles(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Ref) out.insert(e.role);
    for (const auto& a : e.args) collect_roles(a, out);
}

}  // namespace

std::vector<std::string> roles_of(const Expr& e) {
    std::set<std::string> s;
    collect_roles(e, s);
    return {s.begin(), s.end()};
}

bool has_aggregate(const Expr& e) {
    if (e.kind == Expr::Kind::Aggregate) return true;
    return std::any_of(e.args.begin(), e.args.end(), [](const Expr& a) { return has_aggregate(a); });
}

bool has_index(const Expr& e, Expr::Index idx) {
    if (e.kind == Expr::Kind::Aggregate) return false;  // indices inside aggregates are bound by it
    if (e.kind == Expr::Kind::Ref) return e.index == idx;
    return std::any_of(e.args.begin(), e.args.end(), [idx](const Expr& a) { return has_index(a, idx); });
}

std::vector<Atom> split_conjuncts(const Expr& where) {
    std::vector<Atom> out;
    std::vector<const Expr*> stack{&where};
    std::vector<const Expr*> ordered;
    // Left-to-right flattening of nested ANDs.
    auto flatten = [&](auto&& self, const Expr& e) -> void {
        if (e.kind == Expr::Kind::Binary && e.op == Expr::Op::And) {
            self(self, e.args[0]);
            self(self, e.args[1]);
        } else {
            ordered.push_back(&e);
        }
    };
    flatten(flatten, where);
    for (const Expr* e : ordered) out.push_back(Atom{*e, roles_of(*e)});
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0;
    int line = 1;
    int col = 1;
};

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
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
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.' && j + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            t.kind = Tok::Number;
            t.text = src.substr(i, j - i);
            std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            advance(j - i);
        } else if (c == '"' || c == '\'') {
            size_t j = i + 1;
            while (j < src.size() && src[j] != c && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != c) throw ParseError("unterminated string literal", line, col);
            t.kind = Tok::String;
            t.text = src.substr(i + 1, j - i - 1);
            advance(j - i + 1);
        } else {
            static const char* two[] = {"<=", ">=", "!=", "<>", "==", "[]"};
            t.kind = Tok::Punct;
            bool matched = false;
            for (const char* op : two) {
                if (src.compare(i, 2, op) == 0) {
                    t.text = op;
                    advance(2);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (std::string("(),+-*/<>=[]{}.").find(c) == std::string::npos)
                    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
                t.text = std::string(1, c);
                advance(1);
            }
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(const std::string& text, const ParseOptions& opts) : toks_(lex(text)), opts_(opts) {}

    PatternAst parse() {
        PatternAst ast;
        expect_keyword("PATTERN");
        ast.root = parse_expr(true);
        if (is_keyword("WHERE")) {
            next();
            const Token& s = peek();
            if (s.kind != Tok::Ident || s.text != "skip_till_any_match")
                fail("expected selection strategy 'skip_till_any_match'", s);
            next();
            expect_punct("{");
            ast.where = parse_or();
            expect_punct("}");
        }
        expect_keyword("WITHIN");
        ast.window = parse_duration();
        if (peek().kind == Tok::Punct && peek().text == ".") next();
        if (is_keyword("GROUPBY")) {
            next();
            GroupBy g;
            g.role = expect_ident("role name");
            expect_punct(".");
            g.attr = expect_ident("attribute name");
            ast.group_by = std::move(g);
        }
        if (peek().kind != Tok::End) fail("unexpected trailing input '" + peek().text + "'", peek());
        return ast;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    const ParseOptions& opts_;

    const Token& peek(size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& msg, const Token& at) const {
        throw ParseError(msg, at.line, at.col);
    }

    bool is_keyword(const char* kw, size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Ident && upper(t.text) == kw;
    }
    bool is_punct(const char* p, size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == Tok::Punct && t.text == p;
    }
    void expect_keyword(const char* kw) {
        if (!is_keyword(kw)) fail(std::string("expected ") + kw, peek());
        next();
    }
    void expect_punct(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'", peek());
        next();
    }
    std::string expect_ident(const char* what) {
        if (peek().kind != Tok::Ident) fail(std::string("expected ") + what, peek());
        return next().text;
    }
    int expect_int() {
        const Token& t = peek();
        if (t.kind != Tok::Number || t.number != std::floor(t.number)) fail("expected integer", t);
        next();
        return static_cast<int>(t.number);
    }

    PatternNode parse_expr(bool top) {
        (void)top;
        if ((is_keyword("SEQ") || is_keyword("AND") || is_keyword("OR")) && is_punct("(", 1)) {
            PatternNode n;
            std::string kw = upper(next().text);
            n.op = kw == "SEQ" ? PatternNode::Op::Seq : kw == "AND" ? PatternNode::Op::And : PatternNode::Op::Or;
            expect_punct("(");
            n.children.push_back(parse_expr(false));
            while (is_punct(",")) {
                next();
                n.children.push_back(parse_expr(false));
            }
            expect_punct(")");
            return n;
        }
        PatternNode n;
        n.op = PatternNode::Op::Leaf;
        if (is_keyword("NOT") && is_punct("(", 1)) {
            next();
            next();
            n.leaf = parse_leaf();
            if (n.leaf.kind != Leaf::Kind::Plain)
                fail("a negated event cannot carry an iteration", peek());
            n.leaf.kind = Leaf::Kind::Negated;
            expect_punct(")");
            return n;
        }
        n.leaf = parse_leaf();
        return n;
    }

    Leaf parse_leaf() {
        Leaf l;
        l.type = expect_ident("event type");
        if (is_punct("+")) {
            next();
            l.kind = Leaf::Kind::Kleene;
            l.lo = 1;
            l.hi = kUnbounded;
            l.role = expect_ident("role name");
            expect_punct("[]");
        } else if (is_punct("{")) {
            next();
            const Token& at = peek();
            l.lo = expect_int();
            expect_punct(",");
            l.hi = expect_int();
            expect_punct("}");
            if (l.lo < 1 || l.lo > l.hi)
                throw PatternError("repetition bounds must satisfy 1 <= l <= m (got " + std::to_string(l.lo) +
                                   "," + std::to_string(l.hi) + ") at " + std::to_string(at.line) + ":" +
                                   std::to_string(at.col));
            l.kind = Leaf::Kind::Repeat;
            l.role = expect_ident("role name");
            expect_punct("[]");
        } else {
            l.role = expect_ident("role name");
        }
        return l;
    }

    Window parse_duration() {
        const Token& t = peek();
        if (t.kind != Tok::Number) fail("expected window duration", t);
        double amount = t.number;
        next();
        const Token& u = peek();
        if (u.kind != Tok::Ident) fail("expected time unit (msec|sec|min|hour)", u);
        std::string unit = u.text;
        std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char c) { return std::tolower(c); });
        double scale = 0;
        if (unit == "msec" || unit == "msecs" || unit == "ms") scale = 1;
        else if (unit == "sec" || unit == "secs" || unit == "second" || unit == "seconds") scale = 1000;
        else if (unit == "min" || unit == "mins" || unit == "minute" || unit == "minutes") scale = 60'000;
        else if (unit == "hour" || unit == "hours") scale = 3'600'000;
        else fail("unknown time unit '" + u.text + "'", u);
        next();
        double ms = amount * scale;
        if (ms != std::floor(ms) || ms <= 0) fail("window must be a positive whole number of milliseconds", t);
        return Window(static_cast<Timestamp>(ms));
    }

    // WHERE grammar: or > and > not > comparison > additive > multiplicative > unary
    Expr parse_or() {
        Expr e = parse_and();
        while (is_keyword("OR")) {
            next();
            e = Expr::binary(Expr::Op::Or, std::move(e), parse_and());
        }
        return e;
    }
    Expr parse_and() {
        Expr e = parse_not();
        while (is_keyword("AND")) {
            next();
            e = Expr::binary(Expr::Op::And, std::move(e), parse_not());
        }
        return e;
    }
    Expr parse_not() {
        if (is_keyword("NOT")) {
            next();
            return Expr::unary(Expr::Kind::Not, parse_not());
        }
        return parse_cmp();
    }
    Expr parse_cmp() {
        Expr lhs = parse_add();
        static const std::pair<const char*, Expr::Op> ops[] = {
            {"<=", Expr::Op::Le}, {">=", Expr::Op::Ge}, {"!=", Expr::Op::Ne}, {"<>", Expr::Op::Ne},
            {"==", Expr::Op::Eq}, {"<", Expr::Op::Lt},  {">", Expr::Op::Gt},  {"=", Expr::Op::Eq}};
        for (const auto& [txt, op] : ops) {
            if (is_punct(txt)) {
                next();
                return Expr::binary(op, std::move(lhs), parse_add());
            }
        }
        return lhs;
    }
    Expr parse_add() {
        Expr e = parse_mul();
        while (is_punct("+") || is_punct("-")) {
            auto op = next().text == "+" ? Expr::Op::Add : Expr::Op::Sub;
            e = Expr::binary(op, std::move(e), parse_mul());
        }
        return e;
    }
    Expr parse_mul() {
        Expr e = parse_unary();
        while (is_punct("*") || is_punct("/")) {
            auto op = next().text == "*" ? Expr::Op::Mul : Expr::Op::Div;
            e = Expr::binary(op, std::move(e), parse_unary());
        }
        return e;
    }
    Expr parse_unary() {
        if (is_punct("-")) {
            next();
            if (peek().kind == Tok::Number) return Expr::num(-next().number);
            return Expr::unary(Expr::Kind::Negate, parse_unary());
        }
        return parse_primary();
    }

    Expr parse_ref() {
        const Token& at = peek();
        std::string role = expect_ident("role name");
        auto idx = Expr::Index::None;
        if (is_punct("[")) {
            next();
            const Token& i = peek();
            if (i.kind != Tok::Ident || i.text != "i") fail("expected index 'i' or 'i-1'", i);
            next();
            idx = Expr::Index::Current;
            if (is_punct("-")) {
                next();
                const Token& one = peek();
                if (one.kind != Tok::Number || one.number != 1) fail("only 'i-1' is supported", one);
                next();
                idx = Expr::Index::Previous;
            }
            expect_punct("]");
        }
        if (!is_punct(".")) fail("expected '.' after role '" + role + "'", at);
        next();
        std::string attr = expect_ident("attribute name");
        return Expr::ref(std::move(role), std::move(attr), idx);
    }

    Expr parse_primary() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            next();
            return Expr::num(t.number);
        }
        if (t.kind == Tok::String) {
            next();
            return Expr::str(t.text);
        }
        if (is_punct("(")) {
            next();
            Expr e = parse_or();
            expect_punct(")");
            return e;
        }
        if (t.kind != Tok::Ident) fail("unexpected '" + t.text + "' in predicate", t);
        std::string kw = upper(t.text);
        static const std::map<std::string, Expr::AggFn> aggs = {{"AVG", Expr::AggFn::Avg},
                                                                {"SUM", Expr::AggFn::Sum},
                                                                {"MIN", Expr::AggFn::Min},
                                                                {"MAX", Expr::AggFn::Max},
                                                                {"COUNT", Expr::AggFn::Count}};
        if (is_punct("(", 1)) {
            if (auto it = aggs.find(kw); it != aggs.end()) {
                next();
                next();
                Expr r = parse_ref();
                expect_punct(")");
                return Expr::aggregate(it->second, std::move(r));
            }
            if (kw == "CORR") {
                next();
                next();
                Expr a = parse_ref();
                expect_punct(",");
                Expr b = parse_ref();
                expect_punct(")");
                return Expr::corr(std::move(a), std::move(b));
            }
            fail("unknown function '" + t.text + "'", t);
        }
        if (is_punct(".", 1) || is_punct("[", 1)) return parse_ref();
        // Bare identifier: a named parameter.
        if (auto it = opts_.params.find(t.text); it != opts_.params.end()) {
            next();
            return Expr::num(it->second);
        }
        throw PatternError("unknown identifier '" + t.text + "' at " + std::to_string(t.line) + ":" +
                           std::to_string(t.col) + " (pass it as a parameter)");
    }
};

// ---------------------------------------------------------------------------
// Validation

struct LeafInfo {
    const Leaf* leaf;
    std::vector<const PatternNode*> path;  // ancestors, root first
};

void collect_leaves(const PatternNode& n, std::vector<const PatternNode*>& path, std::vector<LeafInfo>& out) {
    if (n.op == PatternNode::Op::Leaf) {
        out.push_back({&n.leaf, path});
        return;
    }
    path.push_back(&n);
    for (const auto& c : n.children) collect_leaves(c, path, out);
    path.pop_back();
}

void check_negation_placement(const PatternNode& n, const PatternNode* parent) {
    if (n.op == PatternNode::Op::Leaf) {
        if (n.leaf.kind == Leaf::Kind::Negated &&
            (parent == nullptr || parent->op == PatternNode::Op::Or))
            throw PatternError("NOT(" + n.leaf.type + " " + n.leaf.role +
                               ") must be a direct child of SEQ or AND");
        return;
    }
    for (const auto& c : n.children) check_negation_placement(c, &n);
}

// True when the two leaves sit in different branches of some OR node.
bool alternatives(const LeafInfo& a, const LeafInfo& b, const PatternNode& root) {
    (void)root;
    size_t k = 0;
    while (k < a.path.size() && k < b.path.size() && a.path[k] == b.path[k]) ++k;
    // Lowest common ancestor is a.path[k-1].
    return k > 0 && a.path[k - 1]->op == PatternNode::Op::Or;
}

void check_expr(const Expr& e, const std::map<std::string, const Leaf*>& roles, bool inside_agg) {
    switch (e.kind) {
        case Expr::Kind::Ref: {
            auto it = roles.find(e.role);
            if (it == roles.end()) throw PatternError("unknown role '" + e.role + "' in WHERE");
            bool iter = it->second->iterated();
            if (e.index != Expr::Index::None && !iter)
                throw PatternError("indexed reference '" + e.role + "[i]' on a non-iterated role");
            if (e.index == Expr::Index::None && iter && !inside_agg)
                throw PatternError("iterated role '" + e.role + "' must be referenced as " + e.role + "[i]." +
                                   e.attr);
            return;
        }
        case Expr::Kind::Aggregate: {
            const Expr& r = e.args[0];
            auto it = roles.find(r.role);
            if (it == roles.end()) throw PatternError("unknown role '" + r.role + "' in WHERE");
            if (!it->second->iterated())
                throw PatternError("aggregate over non-iterated role '" + r.role + "'");
            if (r.index == Expr::Index::Previous)
                throw PatternError("aggregates take role[i].attr, not role[i-1].attr");
            return;
        }
        case Expr::Kind::Corr:
            for (const auto& a : e.args) {
                if (a.index != Expr::Index::None)
                    throw PatternError("corr() takes plain role.attr arguments");
                check_expr(a, roles, inside_agg);
            }
            return;
        default:
            for (const auto& a : e.args) check_expr(a, roles, inside_agg);
    }
}

void validate(const PatternAst& ast) {
    check_negation_placement(ast.root, nullptr);
    std::vector<LeafInfo> leaves;
    std::vector<const PatternNode*> path;
    collect_leaves(ast.root, path, leaves);
    std::map<std::string, const Leaf*> roles;
    for (size_t i = 0; i < leaves.size(); ++i) {
        const Leaf& li = *leaves[i].leaf;
        for (size_t j = 0; j < i; ++j) {
            const Leaf& lj = *leaves[j].leaf;
            if (lj.role != li.role) continue;
            bool ok = alternatives(leaves[i], leaves[j], ast.root) && lj.type == li.type && lj.kind == li.kind &&
                      lj.lo == li.lo && lj.hi == li.hi;
            if (!ok) throw PatternError("duplicate role '" + li.role + "'");
        }
        roles.emplace(li.role, &li);
    }
    if (ast.where) check_expr(*ast.where, roles, false);
    if (ast.where) {
        for (const auto& atom : split_conjuncts(*ast.where)) {
            int negated = 0;
            for (const auto& r : atom.roles)
                if (roles.at(r)->kind == Leaf::Kind::Negated) ++negated;
            if (negated > 1)
                throw PatternError("a WHERE conjunct may mention at most one negated role: " + render(atom.expr));
        }
    }
    if (ast.group_by) {
        auto it = roles.find(ast.group_by->role);
        if (it == roles.end()) throw PatternError("unknown GROUPBY role '" + ast.group_by->role + "'");
        if (!it->second->iterated())
            throw PatternError("GROUPBY role '" + ast.group_by->role + "' is not iterated");
    }
}

}  // namespace

PatternAst parse_pattern(const std::string& text, const ParseOptions& opts) {
    PatternAst ast = Parser(text, opts).parse();
    validate(ast);
    return ast;
}

}  // namespace lazycep
