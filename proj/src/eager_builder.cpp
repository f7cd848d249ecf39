#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "builder_util.hpp"
#include "lazycep/builders.hpp"

namespace lazycep {

namespace {

using Mask = std::uint32_t;

std::string mask_name(const std::vector<std::string>& roles, Mask m) {
    std::string s = "{";
    bool first = true;
    for (size_t i = 0; i < roles.size(); ++i) {
        if (!(m >> i & 1u)) continue;
        s += (first ? "" : ",") + roles[i];
        first = false;
    }
    return s + "}";
}

}  // namespace

Nfa build_eager(const ChainPattern& p) {
    Nfa nfa;
    detail::declare_roles(nfa, p);
    const auto roles = p.positive_roles();
    const size_t n = roles.size();
    if (n > 20) throw UnsupportedPattern("too many roles for the eager automaton");
    const Mask full = (Mask{1} << n) - 1;
    const int b = p.iterated ? static_cast<int>(n) - 1 : -1;  // iterated role is last in positive_roles()

    std::vector<Mask> preds(n, 0), succs(n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (p.precedes(roles[i], roles[j])) {
                preds[j] |= Mask{1} << i;
                succs[i] |= Mask{1} << j;
            }
        }
    auto in = [](Mask m, int r) { return r >= 0 && (m >> r & 1u); };

    // Downward-closed sets, breadth first from the empty set.
    std::vector<Mask> order{0};
    std::set<Mask> seen{0};
    for (size_t k = 0; k < order.size(); ++k) {
        for (size_t r = 0; r < n; ++r) {
            Mask m = order[k];
            if (in(m, static_cast<int>(r)) || (preds[r] & ~m)) continue;
            Mask next = m | Mask{1} << r;
            if (seen.insert(next).second) order.push_back(next);
        }
    }

    const bool b_maximal = b >= 0 && succs[static_cast<size_t>(b)] == 0;
    const bool has_neg = !p.negations.empty();
    std::map<Mask, int> sid;
    for (Mask m : order) {
        if (m == full) continue;
        sid[m] = nfa.add_state(m == 0 ? "q1" : mask_name(roles, m), m == 0 ? State::Kind::Initial : State::Kind::Chain);
    }
    int cont = -1;
    if (b_maximal && p.iterated->hi > 1) cont = nfa.add_state(mask_name(roles, full) + "+", State::Kind::Continuation);
    int neg_state = -1;
    if (has_neg) neg_state = nfa.add_state("neg", State::Kind::Negative);
    const int F = nfa.add_state("F", State::Kind::Accept);
    const int R = nfa.add_state("R", State::Kind::Reject);
    const int done = has_neg ? neg_state : F;
    auto state_of = [&](Mask m) { return m == full ? done : sid.at(m); };

    std::vector<EventType> neg_types;
    for (const auto& x : p.negations) neg_types.push_back(x.type);

    auto roles_mask = [&](const Atom& a) {
        Mask m = 0;
        for (const auto& r : a.roles) {
            auto it = std::find(roles.begin(), roles.end(), r);
            if (it == roles.end()) throw std::logic_error("atom over unknown role " + r);
            m |= Mask{1} << (it - roles.begin());
        }
        return m;
    };
    auto is_aggregate = [](const Atom& a) { return has_aggregate(a.expr); };

    // Conditions for binding r when moving from m to m | r.
    auto conditions = [&](Edge& e, Mask m, int r, bool into_full) {
        const Mask after = m | Mask{1} << r;
        for (const auto& a : p.predicates) {
            const Mask rm = roles_mask(a);
            bool put = false;
            if (is_aggregate(a)) put = into_full;
            else if (rm == 0) put = m == 0;
            else put = (rm & ~after) == 0 && in(rm, r);
            if (!put) continue;
            int idx = nfa.add_atom(a);
            if (r == b && !is_aggregate(a)) e.condition_last.push_back(idx);
            else e.condition.push_back(idx);
        }
    };
    auto make_take = [&](Mask m, int r, int dst) {
        Edge e;
        e.src = sid.at(m);
        e.dst = dst;
        e.action = Action::Take;
        e.stream_only = true;
        e.types = {*p.type_of(roles[static_cast<size_t>(r)])};
        e.slot = nfa.roles.slot(roles[static_cast<size_t>(r)]);
        for (size_t k = 0; k < n; ++k)
            if (in(m, static_cast<int>(k)) && in(preds[static_cast<size_t>(r)], static_cast<int>(k)))
                e.prec.push_back(nfa.roles.slot(roles[k]));
        return e;
    };

    for (Mask m : order) {
        if (m == full) continue;
        const int src = sid.at(m);
        std::vector<EventType> takeable;
        for (size_t r = 0; r < n; ++r) {
            const int ri = static_cast<int>(r);
            const bool self = ri == b && in(m, b) && (succs[r] & m) == 0;
            if (in(m, ri) && !self) continue;
            if (!self && (preds[r] & ~m)) continue;
            const Mask after = m | Mask{1} << r;
            const bool into_full = after == full;
            Edge e = make_take(m, ri, self ? src : state_of(after));
            conditions(e, m, ri, into_full);
            if (ri == b) {
                e.lo = into_full ? p.iterated->lo : 1;
                e.hi = p.iterated->hi;
                if (p.iterated->group_attr) e.group_by = AttrId(*p.iterated->group_attr);
            } else if (in(m, b) && (in(succs[static_cast<size_t>(b)], ri) || into_full)) {
                e.need_members = p.iterated->lo;
            }
            if (self) {
                // Growing b without completing: never aggregates.
                e.lo = 1;
                e.hi = p.iterated->hi;
            }
            takeable.push_back(e.types.front());
            if (into_full && cont >= 0) {
                Edge c = make_take(m, ri, cont);
                conditions(c, m, ri, false);
                if (ri == b) {
                    c.lo = 1;
                    c.hi = p.iterated->hi - 1;
                    c.group_by = e.group_by;
                }
                nfa.add_edge(c);
            }
            nfa.add_edge(std::move(e));
        }
        Edge ig;
        ig.src = ig.dst = src;
        ig.action = Action::Ignore;
        for (size_t r = 0; r < n; ++r) {
            EventType t = *p.type_of(roles[r]);
            if (std::find(takeable.begin(), takeable.end(), t) == takeable.end() &&
                std::find(neg_types.begin(), neg_types.end(), t) == neg_types.end())
                ig.types.push_back(t);
        }
        if (!ig.types.empty()) nfa.add_edge(ig);
        if (!neg_types.empty()) {
            Edge st;
            st.src = st.dst = src;
            st.action = Action::Store;
            st.types = neg_types;
            nfa.add_edge(st);
        }
        if (m != 0) {
            Edge to;
            to.src = src;
            to.dst = R;
            to.trigger = Trigger::Timeout;
            nfa.add_edge(to);
        }
    }

    if (cont >= 0) {
        const Mask before = full;
        Edge grow;
        grow.src = grow.dst = cont;
        grow.action = Action::Take;
        grow.stream_only = true;
        grow.types = {p.iterated->type};
        grow.slot = nfa.roles.slot(p.iterated->name);
        grow.lo = 1;
        grow.hi = p.iterated->hi - 1;
        if (p.iterated->group_attr) grow.group_by = AttrId(*p.iterated->group_attr);
        for (size_t k = 0; k < n; ++k)
            if (in(preds[static_cast<size_t>(b)], static_cast<int>(k))) grow.prec.push_back(nfa.roles.slot(roles[k]));
        Edge fin = grow;
        fin.dst = done;
        fin.lo = p.iterated->lo;
        fin.hi = p.iterated->hi;
        conditions(grow, before, b, false);
        conditions(fin, before, b, true);
        nfa.add_edge(grow);
        nfa.add_edge(fin);
        if (!neg_types.empty()) {
            Edge st;
            st.src = st.dst = cont;
            st.action = Action::Store;
            st.types = neg_types;
            nfa.add_edge(st);
        }
        Edge to;
        to.src = cont;
        to.dst = R;
        to.trigger = Trigger::Timeout;
        nfa.add_edge(to);
    }

    if (has_neg) {
        std::set<std::string> bound(roles.begin(), roles.end());
        bool all_bounded = true;
        for (const auto& x : p.negations) {
            Edge rej = detail::reject_edge(nfa, p, x, neg_state, bound);
            if (rej.succ.empty()) all_bounded = false;
            nfa.add_edge(rej);
        }
        Edge pass;
        pass.src = neg_state;
        pass.dst = F;
        pass.trigger = all_bounded ? Trigger::SearchFailed : Trigger::Timeout;
        nfa.add_edge(pass);
    }

    nfa.finalize();
    return nfa;
}

}  // namespace lazycep
