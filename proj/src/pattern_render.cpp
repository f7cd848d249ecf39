#include <charconv>

#include "lazycep/pattern.hpp"

namespace lazycep {

namespace {

std::string number_text(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// Binding strength, higher binds tighter.
int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Not:
            return 3;
        case Expr::Kind::Negate:
            return 7;
        case Expr::Kind::Binary:
            switch (e.op) {
                case Expr::Op::Or:
                    return 1;
                case Expr::Op::And:
                    return 2;
                case Expr::Op::Add:
                case Expr::Op::Sub:
                    return 5;
                case Expr::Op::Mul:
                case Expr::Op::Div:
                    return 6;
                default:
                    return 4;
            }
        default:
            return 8;
    }
}

const char* op_text(Expr::Op op) {
    switch (op) {
        case Expr::Op::Add: return "+";
        case Expr::Op::Sub: return "-";
        case Expr::Op::Mul: return "*";
        case Expr::Op::Div: return "/";
        case Expr::Op::Lt: return "<";
        case Expr::Op::Le: return "<=";
        case Expr::Op::Gt: return ">";
        case Expr::Op::Ge: return ">=";
        case Expr::Op::Eq: return "=";
        case Expr::Op::Ne: return "!=";
        case Expr::Op::And: return "AND";
        case Expr::Op::Or: return "OR";
    }
    return "?";
}

const char* agg_text(Expr::AggFn fn) {
    switch (fn) {
        case Expr::AggFn::Avg: return "AVG";
        case Expr::AggFn::Sum: return "SUM";
        case Expr::AggFn::Min: return "MIN";
        case Expr::AggFn::Max: return "MAX";
        case Expr::AggFn::Count: return "COUNT";
    }
    return "?";
}

std::string wrap(const Expr& child, bool paren) {
    std::string s = render(child);
    return paren ? "(" + s + ")" : s;
}

std::string render_leaf(const Leaf& l) {
    switch (l.kind) {
        case Leaf::Kind::Plain:
            return l.type + " " + l.role;
        case Leaf::Kind::Negated:
            return "NOT(" + l.type + " " + l.role + ")";
        case Leaf::Kind::Kleene:
            return l.type + "+ " + l.role + "[]";
        case Leaf::Kind::Repeat:
            return l.type + "{" + std::to_string(l.lo) + "," + std::to_string(l.hi) + "} " + l.role + "[]";
    }
    return {};
}

std::string render_node(const PatternNode& n) {
    if (n.op == PatternNode::Op::Leaf) return render_leaf(n.leaf);
    std::string out = n.op == PatternNode::Op::Seq ? "SEQ(" : n.op == PatternNode::Op::And ? "AND(" : "OR(";
    for (size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        out += render_node(n.children[i]);
    }
    return out + ")";
}

}  // namespace

std::string render(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Number:
            return number_text(e.number);
        case Expr::Kind::String:
            return e.text.find('"') == std::string::npos ? "\"" + e.text + "\"" : "'" + e.text + "'";
        case Expr::Kind::Ref: {
            std::string idx = e.index == Expr::Index::Current    ? "[i]"
                              : e.index == Expr::Index::Previous ? "[i-1]"
                                                                 : "";
            return e.role + idx + "." + e.attr;
        }
        case Expr::Kind::Aggregate:
            return std::string(agg_text(e.agg)) + "(" + render(e.args[0]) + ")";
        case Expr::Kind::Corr:
            return "corr(" + render(e.args[0]) + ", " + render(e.args[1]) + ")";
        case Expr::Kind::Negate: {
            // "-5" would read back as a literal, so keep the operand apart.
            const Expr& a = e.args[0];
            bool paren = precedence(a) < 7 || a.kind == Expr::Kind::Number;
            return "-" + wrap(a, paren);
        }
        case Expr::Kind::Not:
            return "NOT " + wrap(e.args[0], precedence(e.args[0]) < 3);
        case Expr::Kind::Binary: {
            int p = precedence(e);
            bool cmp = p == 4;
            const Expr& l = e.args[0];
            const Expr& r = e.args[1];
            bool lp = precedence(l) < p || (cmp && precedence(l) == 4);
            bool rp = precedence(r) <= p;
            return wrap(l, lp) + " " + op_text(e.op) + " " + wrap(r, rp);
        }
    }
    return {};
}

std::string render_window(Window w) {
    Timestamp ms = w.duration;
    if (ms % 3'600'000 == 0) return std::to_string(ms / 3'600'000) + " hour";
    if (ms % 60'000 == 0) return std::to_string(ms / 60'000) + " min";
    if (ms % 1000 == 0) return std::to_string(ms / 1000) + " sec";
    return std::to_string(ms) + " msec";
}

std::string render(const PatternAst& ast) {
    std::string out = "PATTERN " + render_node(ast.root);
    if (ast.where) out += "\nWHERE skip_till_any_match { " + render(*ast.where) + " }";
    out += "\nWITHIN " + render_window(ast.window);
    if (ast.group_by) out += "\nGROUPBY " + ast.group_by->role + "." + ast.group_by->attr;
    return out + "\n";
}

}  // namespace lazycep
