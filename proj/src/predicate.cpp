#include "lazycep/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace lazycep {

int RoleTable::add(const std::string& name, EventType type, bool iterated) {
    if (int s = slot(name); s >= 0) {
        if (!(types_[static_cast<size_t>(s)] == type) || iterated_[static_cast<size_t>(s)] != iterated)
            throw std::logic_error("role '" + name + "' declared twice with different shapes");
        return s;
    }
    names_.push_back(name);
    types_.push_back(type);
    iterated_.push_back(iterated);
    return size() - 1;
}

int RoleTable::slot(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return kNaN;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least two points");
    double r = pearson_or_nan(x, y);
    if (std::isnan(r)) throw std::domain_error("pearson: zero variance");
    return r;
}

struct CompiledAtom::Val {
    enum class T { Num, Str, List } t = T::Num;
    double d = 0;
    const std::string* s = nullptr;
    const std::vector<double>* l = nullptr;

    static Val num(double v) { return Val{T::Num, v, nullptr, nullptr}; }
    static Val of(const Value& v) {
        if (const auto* d = std::get_if<double>(&v)) return num(*d);
        if (const auto* s = std::get_if<std::string>(&v)) return Val{T::Str, 0, s, nullptr};
        return Val{T::List, 0, nullptr, &std::get<std::vector<double>>(v)};
    }
};

CompiledAtom::CompiledAtom(const Atom& atom, const RoleTable& roles) : text_(render(atom.expr)) {
    root_ = compile(atom.expr, roles);
    std::set<int> s;
    for (const auto& n : nodes_)
        if (n.slot >= 0) s.insert(n.slot);
    slots_.assign(s.begin(), s.end());
}

int CompiledAtom::compile(const Expr& e, const RoleTable& roles) {
    Node n;
    n.kind = e.kind;
    n.op = e.op;
    n.index = e.index;
    n.agg = e.agg;
    n.number = e.number;
    n.str = e.text;
    switch (e.kind) {
        case Expr::Kind::Ref:
            n.slot = roles.slot(e.role);
            if (n.slot < 0) throw PatternError("unknown role '" + e.role + "'");
            n.attr = AttrId(e.attr);
            if (e.index == Expr::Index::Current) current_ = true;
            if (e.index == Expr::Index::Previous) previous_ = true;
            break;
        case Expr::Kind::Aggregate: {
            const Expr& r = e.args[0];
            n.slot = roles.slot(r.role);
            if (n.slot < 0) throw PatternError("unknown role '" + r.role + "'");
            n.attr = AttrId(r.attr);
            aggregate_ = true;
            break;
        }
        default:
            if (!e.args.empty()) n.a = compile(e.args[0], roles);
            if (e.args.size() > 1) n.b = compile(e.args[1], roles);
            break;
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

namespace {

double as_number(const Value& v, const std::string& what) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw DataError("attribute '" + what + "' is not numeric");
}

}  // namespace

CompiledAtom::Val CompiledAtom::eval(int idx, const Bindings& b, size_t i) const {
    const Node& n = nodes_[static_cast<size_t>(idx)];
    switch (n.kind) {
        case Expr::Kind::Number:
            return Val::num(n.number);
        case Expr::Kind::String:
            return Val{Val::T::Str, 0, &n.str, nullptr};
        case Expr::Kind::Ref: {
            const Event* ev = nullptr;
            if (n.index == Expr::Index::None) ev = b.single[static_cast<size_t>(n.slot)].get();
            else if (n.index == Expr::Index::Current) ev = b.members[i].get();
            else ev = b.members[i - 1].get();
            if (!ev) throw std::logic_error("predicate over unbound role in '" + text_ + "'");
            return Val::of(ev->attr(n.attr));
        }
        case Expr::Kind::Aggregate: {
            if (n.agg == Expr::AggFn::Count) return Val::num(static_cast<double>(b.members.size()));
            if (b.members.empty()) return Val::num(kNaN);
            double acc = n.agg == Expr::AggFn::Min   ? std::numeric_limits<double>::infinity()
                         : n.agg == Expr::AggFn::Max ? -std::numeric_limits<double>::infinity()
                                                     : 0.0;
            for (const auto& m : b.members) {
                double v = as_number(m->attr(n.attr), n.attr.name());
                switch (n.agg) {
                    case Expr::AggFn::Min: acc = std::min(acc, v); break;
                    case Expr::AggFn::Max: acc = std::max(acc, v); break;
                    default: acc += v;
                }
            }
            if (n.agg == Expr::AggFn::Avg) acc /= static_cast<double>(b.members.size());
            return Val::num(acc);
        }
        case Expr::Kind::Corr: {
            Val x = eval(n.a, b, i);
            Val y = eval(n.b, b, i);
            if (x.t != Val::T::List || y.t != Val::T::List) throw DataError("corr() needs numeric list attributes");
            if (x.l->size() != y.l->size()) throw DataError("corr() over lists of different length");
            if (x.l->size() < 2) return Val::num(kNaN);
            return Val::num(pearson_or_nan(*x.l, *y.l));
        }
        case Expr::Kind::Negate: {
            Val x = eval(n.a, b, i);
            if (x.t != Val::T::Num) throw DataError("unary minus on a non-number in '" + text_ + "'");
            return Val::num(-x.d);
        }
        case Expr::Kind::Not: {
            Val x = eval(n.a, b, i);
            bool t = x.t == Val::T::Num && x.d != 0 && !std::isnan(x.d);
            return Val::num(t ? 0.0 : 1.0);
        }
        case Expr::Kind::Binary:
            break;
    }
    auto truth = [](const Val& v) { return v.t == Val::T::Num && v.d != 0 && !std::isnan(v.d); };
    if (n.op == Expr::Op::And) return Val::num(truth(eval(n.a, b, i)) && truth(eval(n.b, b, i)) ? 1.0 : 0.0);
    if (n.op == Expr::Op::Or) return Val::num(truth(eval(n.a, b, i)) || truth(eval(n.b, b, i)) ? 1.0 : 0.0);
    Val x = eval(n.a, b, i);
    Val y = eval(n.b, b, i);
    switch (n.op) {
        case Expr::Op::Add:
        case Expr::Op::Sub:
        case Expr::Op::Mul:
        case Expr::Op::Div: {
            if (x.t != Val::T::Num || y.t != Val::T::Num)
                throw DataError("arithmetic on a non-number in '" + text_ + "'");
            double r = n.op == Expr::Op::Add   ? x.d + y.d
                       : n.op == Expr::Op::Sub ? x.d - y.d
                       : n.op == Expr::Op::Mul ? x.d * y.d
                                               : x.d / y.d;
            return Val::num(r);
        }
        default:
            break;
    }
    int c = 0;
    if (x.t == Val::T::Num && y.t == Val::T::Num) {
        if (std::isnan(x.d) || std::isnan(y.d)) return Val::num(0.0);
        c = x.d < y.d ? -1 : x.d > y.d ? 1 : 0;
    } else if (x.t == Val::T::Str && y.t == Val::T::Str) {
        int r = x.s->compare(*y.s);
        c = r < 0 ? -1 : r > 0 ? 1 : 0;
    } else {
        throw DataError("cannot compare values of different kinds in '" + text_ + "'");
    }
    bool r = false;
    switch (n.op) {
        case Expr::Op::Lt: r = c < 0; break;
        case Expr::Op::Le: r = c <= 0; break;
        case Expr::Op::Gt: r = c > 0; break;
        case Expr::Op::Ge: r = c >= 0; break;
        case Expr::Op::Eq: r = c == 0; break;
        case Expr::Op::Ne: r = c != 0; break;
        default: break;
    }
    return Val::num(r ? 1.0 : 0.0);
}

bool CompiledAtom::test(const Bindings& b, bool last_only, std::uint64_t* evaluations) const {
    if (evaluations) ++*evaluations;
    auto truth = [](const Val& v) { return v.t == Val::T::Num && v.d != 0 && !std::isnan(v.d); };
    if (!indexed()) return truth(eval(root_, b, 0));
    const size_t n = b.members.size();
    if (n == 0) return true;
    size_t first = last_only ? n - 1 : 0;
    if (previous_) first = std::max<size_t>(first, 1);
    for (size_t i = first; i < n; ++i)
        if (!truth(eval(root_, b, i))) return false;
    return true;
}

}  // namespace lazycep
