#include <algorithm>
#include <map>
#include <set>

#include "lazycep/pattern.hpp"

namespace lazycep {

std::vector<std::string> ChainPattern::positive_roles() const {
    std::vector<std::string> out;
    for (const auto& p : positives) out.push_back(p.name);
    if (iterated) out.push_back(iterated->name);
    return out;
}

std::vector<std::string> ChainPattern::all_roles() const {
    auto out = positive_roles();
    for (const auto& n : negations) out.push_back(n.name);
    return out;
}

std::optional<EventType> ChainPattern::type_of(const std::string& role) const {
    for (const auto& p : positives)
        if (p.name == role) return p.type;
    if (iterated && iterated->name == role) return iterated->type;
    for (const auto& n : negations)
        if (n.name == role) return n.type;
    return std::nullopt;
}

bool ChainPattern::precedes(const std::string& u, const std::string& v) const {
    return std::find(order.begin(), order.end(), std::make_pair(u, v)) != order.end();
}

std::vector<std::string> ChainPattern::predecessors(const std::string& role) const {
    std::vector<std::string> out;
    for (const auto& r : all_roles())
        if (precedes(r, role)) out.push_back(r);
    return out;
}

std::vector<std::string> ChainPattern::successors(const std::string& role) const {
    std::vector<std::string> out;
    for (const auto& r : all_roles())
        if (precedes(role, r)) out.push_back(r);
    return out;
}

bool ChainPattern::is_full_sequence() const {
    auto roles = positive_roles();
    for (size_t i = 0; i < roles.size(); ++i)
        for (size_t j = i + 1; j < roles.size(); ++j)
            if (!precedes(roles[i], roles[j]) && !precedes(roles[j], roles[i])) return false;
    return true;
}

bool ChainPattern::is_conjunction() const {
    auto roles = positive_roles();
    for (const auto& u : roles)
        for (const auto& v : roles)
            if (precedes(u, v)) return false;
    return true;
}

namespace {

struct Term {
    std::vector<Leaf> leaves;
    std::set<std::pair<std::string, std::string>> order;
};

std::vector<Term> expand(const PatternNode& n) {
    if (n.op == PatternNode::Op::Leaf) return {Term{{n.leaf}, {}}};
    if (n.op == PatternNode::Op::Or) {
        std::vector<Term> out;
        for (const auto& c : n.children) {
            auto sub = expand(c);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    std::vector<Term> acc{Term{}};
    for (const auto& c : n.children) {
        auto sub = expand(c);
        std::vector<Term> next;
        for (const auto& a : acc) {
            for (const auto& b : sub) {
                Term t = a;
                if (n.op == PatternNode::Op::Seq)
                    for (const auto& u : a.leaves)
                        for (const auto& v : b.leaves) t.order.emplace(u.role, v.role);
                t.leaves.insert(t.leaves.end(), b.leaves.begin(), b.leaves.end());
                t.order.insert(b.order.begin(), b.order.end());
                next.push_back(std::move(t));
            }
        }
        acc = std::move(next);
    }
    return acc;
}

bool by_text(const Atom& a, const Atom& b) { return render(a.expr) < render(b.expr); }

void sort_unique(std::vector<Atom>& atoms) {
    std::stable_sort(atoms.begin(), atoms.end(), by_text);
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
}

ChainPattern make_chain(const Term& t, const PatternAst& ast, const std::vector<Atom>& atoms) {
    ChainPattern c;
    c.window = ast.window;
    std::set<std::string> roles, negated;
    std::set<std::string> types;
    for (const auto& l : t.leaves) {
        roles.insert(l.role);
        if (!types.insert(l.type).second)
            throw UnsupportedPattern("event type '" + l.type +
                                     "' is used by more than one role in the same branch");
        switch (l.kind) {
            case Leaf::Kind::Plain:
                c.positives.push_back({l.role, EventType(l.type)});
                break;
            case Leaf::Kind::Negated:
                negated.insert(l.role);
                c.negations.push_back({l.role, EventType(l.type), {}});
                break;
            case Leaf::Kind::Kleene:
            case Leaf::Kind::Repeat:
                if (c.iterated)
                    throw UnsupportedPattern("more than one iterated role in one branch ('" + c.iterated->name +
                                             "', '" + l.role + "')");
                c.iterated = IteratedRole{l.role, EventType(l.type), l.lo, l.hi, std::nullopt};
                if (ast.group_by && ast.group_by->role == l.role) c.iterated->group_attr = ast.group_by->attr;
                break;
        }
    }
    if (c.positives.empty() && !c.iterated) throw UnsupportedPattern("a branch has no positive event");
    c.order.assign(t.order.begin(), t.order.end());

    for (const auto& atom : atoms) {
        bool present = std::all_of(atom.roles.begin(), atom.roles.end(),
                                   [&](const std::string& r) { return roles.count(r) > 0; });
        if (!present) continue;
        auto neg = std::find_if(atom.roles.begin(), atom.roles.end(),
                                [&](const std::string& r) { return negated.count(r) > 0; });
        if (neg == atom.roles.end()) {
            c.predicates.push_back(atom);
        } else {
            for (auto& n : c.negations)
                if (n.name == *neg) n.atoms.push_back(atom);
        }
    }
    sort_unique(c.predicates);
    for (auto& n : c.negations) sort_unique(n.atoms);
    return c;
}

std::vector<std::string> sorted_roles(const ChainPattern& c) {
    auto r = c.all_roles();
    std::sort(r.begin(), r.end());
    return r;
}

// Series-parallel rendering of the chain's order over all its roles.
std::string render_poset(const ChainPattern& c, std::vector<std::string> roles) {
    if (roles.size() == 1) {
        const std::string& r = roles[0];
        for (const auto& p : c.positives)
            if (p.name == r) return p.type.name() + " " + r;
        if (c.iterated && c.iterated->name == r) {
            const auto& it = *c.iterated;
            if (it.lo == 1 && it.hi == kUnbounded) return it.type.name() + "+ " + r + "[]";
            return it.type.name() + "{" + std::to_string(it.lo) + "," + std::to_string(it.hi) + "} " + r + "[]";
        }
        for (const auto& n : c.negations)
            if (n.name == r) return "NOT(" + n.type.name() + " " + r + ")";
        return r;
    }
    auto comparable = [&](const std::string& u, const std::string& v) {
        return c.precedes(u, v) || c.precedes(v, u);
    };
    // Connected components of a graph given by an edge predicate.
    auto components = [&](auto edge) {
        std::vector<std::vector<std::string>> comps;
        std::vector<bool> seen(roles.size(), false);
        for (size_t i = 0; i < roles.size(); ++i) {
            if (seen[i]) continue;
            std::vector<std::string> comp;
            std::vector<size_t> stack{i};
            seen[i] = true;
            while (!stack.empty()) {
                size_t k = stack.back();
                stack.pop_back();
                comp.push_back(roles[k]);
                for (size_t j = 0; j < roles.size(); ++j) {
                    if (!seen[j] && edge(roles[k], roles[j])) {
                        seen[j] = true;
                        stack.push_back(j);
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
        return comps;
    };
    auto parts = components(comparable);
    std::string op = "AND(";
    if (parts.size() == 1) {
        parts = components([&](const std::string& u, const std::string& v) { return u != v && !comparable(u, v); });
        std::sort(parts.begin(), parts.end(), [&](const auto& a, const auto& b) { return c.precedes(a[0], b[0]); });
        op = "SEQ(";
    } else {
        std::sort(parts.begin(), parts.end());
    }
    std::string out = op;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += render_poset(c, parts[i]);
    }
    return out + ")";
}

}  // namespace

std::vector<ChainPattern> to_dnf(const PatternAst& ast) {
    std::vector<Atom> atoms;
    if (ast.where) atoms = split_conjuncts(*ast.where);
    std::vector<ChainPattern> out;
    for (const auto& t : expand(ast.root)) out.push_back(make_chain(t, ast, atoms));
    std::stable_sort(out.begin(), out.end(),
                     [](const ChainPattern& a, const ChainPattern& b) { return sorted_roles(a) < sorted_roles(b); });
    return out;
}

std::string render(const std::vector<ChainPattern>& chains) {
    if (chains.empty()) throw std::invalid_argument("render: empty chain list");
    std::vector<std::string> bodies;
    std::vector<Atom> atoms;
    std::optional<GroupBy> group;
    for (const auto& c : chains) {
        std::string body = render_poset(c, c.all_roles());
        if (c.all_roles().size() == 1) body = "SEQ(" + body + ")";
        bodies.push_back(body);
        for (const auto& a : c.predicates) atoms.push_back(a);
        for (const auto& n : c.negations)
            for (const auto& a : n.atoms) atoms.push_back(a);
        if (c.iterated && c.iterated->group_attr) group = GroupBy{c.iterated->name, *c.iterated->group_attr};
    }
    sort_unique(atoms);
    std::string out = "PATTERN ";
    if (bodies.size() == 1) {
        out += bodies[0];
    } else {
        out += "OR(";
        for (size_t i = 0; i < bodies.size(); ++i) out += (i ? ", " : "") + bodies[i];
        out += ")";
    }
    if (!atoms.empty()) {
        out += "\nWHERE skip_till_any_match { ";
        for (size_t i = 0; i < atoms.size(); ++i) {
            if (i) out += " AND ";
            const Expr& e = atoms[i].expr;
            bool paren = e.kind == Expr::Kind::Binary && e.op == Expr::Op::Or;
            out += paren ? "(" + render(e) + ")" : render(e);
        }
        out += " }";
    }
    out += "\nWITHIN " + render_window(chains[0].window);
    if (group) out += "\nGROUPBY " + group->role + "." + group->attr;
    return out + "\n";
}

}  // namespace lazycep
