#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "builder_util.hpp"
#include "lazycep/builders.hpp"

namespace lazycep {

int FreqOrder::rank(EventType t) const {
    auto it = std::find(types.begin(), types.end(), t);
    if (it == types.end()) throw std::invalid_argument("no rate for event type '" + t.name() + "'");
    return static_cast<int>(it - types.begin());
}

double FreqOrder::rate(EventType t) const {
    auto it = rates.find(t);
    if (it == rates.end()) throw std::invalid_argument("no rate for event type '" + t.name() + "'");
    return it->second;
}

FreqOrder ascending_freq_order(const std::map<std::string, double>& rates, const std::vector<std::string>& required) {
    for (const auto& r : required)
        if (!rates.count(r)) throw std::invalid_argument("no rate for event type '" + r + "'");
    std::vector<std::pair<double, std::string>> v;
    for (const auto& [name, rate] : rates) {
        if (!(rate > 0) || !std::isfinite(rate))
            throw std::invalid_argument("rate for '" + name + "' must be a positive number");
        v.emplace_back(rate, name);
    }
    std::sort(v.begin(), v.end());
    FreqOrder f;
    for (const auto& [rate, name] : v) {
        f.types.emplace_back(name);
        f.rates[EventType(name)] = rate;
    }
    return f;
}

std::vector<std::string> pattern_types(const std::vector<ChainPattern>& chains) {
    std::set<std::string> s;
    for (const auto& c : chains)
        for (const auto& r : c.all_roles()) s.insert(c.type_of(r)->name());
    return {s.begin(), s.end()};
}

Filters sequence_filters(const std::string& e, const std::vector<std::string>& freq,
                         const std::vector<std::string>& seq) {
    auto fpos = std::find(freq.begin(), freq.end(), e);
    auto spos = std::find(seq.begin(), seq.end(), e);
    if (fpos == freq.end() || spos == seq.end()) throw std::invalid_argument("sequence_filters: unknown '" + e + "'");
    std::set<std::string> before_freq(freq.begin(), fpos);
    Filters f;
    for (auto it = spos; it != seq.begin();) {
        --it;
        if (before_freq.count(*it)) {
            f.first.push_back(*it);
            break;
        }
    }
    for (auto it = spos + 1; it != seq.end(); ++it) {
        if (before_freq.count(*it)) {
            f.second.push_back(*it);
            break;
        }
    }
    return f;
}

Filters partial_filters(const std::string& e, const std::vector<std::string>& freq,
                        const std::vector<std::pair<std::string, std::string>>& order) {
    auto fpos = std::find(freq.begin(), freq.end(), e);
    if (fpos == freq.end()) throw std::invalid_argument("partial_filters: unknown '" + e + "'");
    auto has = [&](const std::string& u, const std::string& v) {
        return std::find(order.begin(), order.end(), std::make_pair(u, v)) != order.end();
    };
    Filters f;
    for (auto it = freq.begin(); it != fpos; ++it) {
        if (has(*it, e)) f.first.push_back(*it);
        if (has(e, *it)) f.second.push_back(*it);
    }
    return f;
}

std::vector<std::string> chain_order(const ChainPattern& p, const FreqOrder& freq) {
    std::vector<std::string> out;
    for (const auto& r : p.positives) out.push_back(r.name);
    std::stable_sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
        return freq.rank(*p.type_of(a)) < freq.rank(*p.type_of(b));
    });
    if (p.iterated) out.push_back(p.iterated->name);
    return out;
}

namespace {

std::vector<std::string> positive_successors(const ChainPattern& p, const std::string& role) {
    std::vector<std::string> out;
    for (const auto& r : p.positive_roles())
        if (p.precedes(role, r)) out.push_back(r);
    return out;
}

std::vector<std::string> positive_predecessors(const ChainPattern& p, const std::string& role) {
    std::vector<std::string> out;
    for (const auto& r : p.positive_roles())
        if (p.precedes(r, role)) out.push_back(r);
    return out;
}

}  // namespace

std::vector<DepInfo> first_chance_deps(const ChainPattern& p, const FreqOrder& freq) {
    auto chain = chain_order(p, freq);
    auto pos = [&](const std::string& r) {
        return static_cast<int>(std::find(chain.begin(), chain.end(), r) - chain.begin()) + 1;
    };
    std::vector<DepInfo> out;
    for (const auto& neg : p.negations) {
        DepInfo d;
        d.role = neg.name;
        auto before = positive_predecessors(p, neg.name);
        auto after = positive_successors(p, neg.name);
        for (const auto& u : before) {
            bool maximal = std::none_of(before.begin(), before.end(),
                                        [&](const std::string& v) { return v != u && p.precedes(u, v); });
            if (maximal) d.imm_prec.push_back(u);
        }
        for (const auto& u : after) {
            bool minimal = std::none_of(after.begin(), after.end(),
                                        [&](const std::string& v) { return v != u && p.precedes(v, u); });
            if (minimal) d.imm_succ.push_back(u);
        }
        std::set<std::string> cond;
        for (const auto& a : neg.atoms)
            for (const auto& r : a.roles)
                if (r != neg.name) cond.insert(r);
        d.cond.assign(cond.begin(), cond.end());
        std::set<std::string> dep(cond.begin(), cond.end());
        if (d.imm_prec.empty()) {
            // Lower side is the window edge, which depends on every positive.
            for (const auto& r : chain) dep.insert(r);
        } else {
            dep.insert(d.imm_prec.begin(), d.imm_prec.end());
        }
        dep.insert(d.imm_succ.begin(), d.imm_succ.end());
        d.dep.assign(dep.begin(), dep.end());
        int m = 0;
        for (const auto& r : d.dep) m = std::max(m, pos(r));
        d.dep_state = m + 1;
        out.push_back(std::move(d));
    }
    return out;
}

namespace detail {

void declare_roles(Nfa& nfa, const ChainPattern& p) {
    nfa.window = p.window;
    for (const auto& r : p.positives) nfa.roles.add(r.name, r.type, false);
    int iter = -1;
    if (p.iterated) iter = nfa.roles.add(p.iterated->name, p.iterated->type, true);
    for (const auto& n : p.negations) nfa.roles.add(n.name, n.type, false);
    nfa.chain_iter_slot = {iter};
}

std::vector<int> slots(const Nfa& nfa, const std::vector<std::string>& roles) {
    std::vector<int> out;
    for (const auto& r : roles) out.push_back(nfa.roles.slot(r));
    return out;
}

Edge reject_edge(Nfa& nfa, const ChainPattern& p, const Negation& neg, int src, const std::set<std::string>& bound) {
    Edge e;
    e.src = src;
    e.dst = nfa.reject;
    e.action = Action::Take;
    e.types = {neg.type};
    e.slot = nfa.roles.slot(neg.name);
    for (const auto& u : positive_predecessors(p, neg.name))
        if (bound.count(u)) e.prec.push_back(nfa.roles.slot(u));
    for (const auto& u : positive_successors(p, neg.name))
        if (bound.count(u)) e.succ.push_back(nfa.roles.slot(u));
    for (const auto& a : neg.atoms) e.condition.push_back(nfa.add_atom(a));
    return e;
}

}  // namespace detail

namespace {

using detail::declare_roles;
using detail::reject_edge;

Nfa build_core(const ChainPattern& p, const FreqOrder& freq, std::optional<NegationMode> neg) {
    Nfa nfa;
    declare_roles(nfa, p);
    const auto chain = chain_order(p, freq);
    const int n = static_cast<int>(chain.size());
    const bool total = p.is_full_sequence();
    std::vector<std::string> seq = p.positive_roles();
    if (total)
        std::sort(seq.begin(), seq.end(), [&](const std::string& a, const std::string& b) { return p.precedes(a, b); });

    // Negated roles in descending rate order, ties by type name.
    std::vector<const Negation*> negs;
    for (const auto& x : p.negations) negs.push_back(&x);
    std::stable_sort(negs.begin(), negs.end(), [&](const Negation* a, const Negation* b) {
        double ra = freq.rate(a->type), rb = freq.rate(b->type);
        if (ra != rb) return ra > rb;
        return a->type < b->type;
    });
    std::vector<EventType> neg_types;
    for (const auto* x : negs) neg_types.push_back(x->type);

    std::vector<DepInfo> deps;
    bool need_check = false;
    if (neg == NegationMode::FirstChance) {
        deps = first_chance_deps(p, freq);
        for (const auto& d : deps) {
            if (d.imm_succ.empty())
                throw UnsupportedPattern("negated role '" + d.role +
                                         "' has no positive successor; first-chance negation cannot check it "
                                         "early, use the post-processing mode (lazy-pp)");
            if (d.dep_state > n) need_check = true;
        }
    }

    std::vector<int> q(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        q[static_cast<size_t>(i)] =
            nfa.add_state("q" + std::to_string(i + 1), i == 0 ? State::Kind::Initial : State::Kind::Chain);
    int check = -1;
    if (need_check) check = nfa.add_state("q" + std::to_string(n + 1) + "'", State::Kind::Check);
    std::vector<int> negative;
    if (neg == NegationMode::PostProcessing)
        for (const auto* x : negs) negative.push_back(nfa.add_state("n(" + x->name + ")", State::Kind::Negative));
    const int F = nfa.add_state("F", State::Kind::Accept);
    const int R = nfa.add_state("R", State::Kind::Reject);
    const int after_chain = check >= 0 ? check : !negative.empty() ? negative.front() : F;

    std::set<std::string> bound;
    std::vector<bool> used(p.predicates.size(), false);
    for (int i = 0; i < n; ++i) {
        const std::string& role = chain[static_cast<size_t>(i)];
        const EventType type = *p.type_of(role);
        const int src = q[static_cast<size_t>(i)];
        if (i > 0) {
            Edge ig;
            ig.src = ig.dst = src;
            ig.action = Action::Ignore;
            for (int k = 0; k < i; ++k) ig.types.push_back(*p.type_of(chain[static_cast<size_t>(k)]));
            nfa.add_edge(ig);
        }
        Edge st;
        st.src = st.dst = src;
        st.action = Action::Store;
        for (int k = i + 1; k < n; ++k) st.types.push_back(*p.type_of(chain[static_cast<size_t>(k)]));
        st.types.insert(st.types.end(), neg_types.begin(), neg_types.end());
        if (!st.types.empty()) nfa.add_edge(st);
        if (i > 0) {
            Edge to;
            to.src = src;
            to.dst = R;
            to.trigger = Trigger::Timeout;
            nfa.add_edge(to);
        }

        // First-chance checks whose dependencies were all bound by the previous states.
        for (size_t k = 0; k < deps.size(); ++k) {
            if (deps[k].dep_state != i + 1) continue;
            const auto& x = *std::find_if(p.negations.begin(), p.negations.end(),
                                          [&](const Negation& m) { return m.name == deps[k].role; });
            nfa.add_edge(reject_edge(nfa, p, x, src, bound));
        }

        Edge take;
        take.src = src;
        take.dst = i + 1 < n ? q[static_cast<size_t>(i + 1)] : after_chain;
        take.types = {type};
        take.slot = nfa.roles.slot(role);
        const bool iterate = p.iterated && p.iterated->name == role;
        take.action = iterate ? Action::Iterate : Action::Take;
        if (iterate) {
            take.lo = p.iterated->lo;
            take.hi = p.iterated->hi;
            if (p.iterated->group_attr) take.group_by = AttrId(*p.iterated->group_attr);
        }
        std::vector<std::string> before(chain.begin(), chain.begin() + i);
        Filters f = total ? sequence_filters(role, chain, seq) : partial_filters(role, chain, p.order);
        take.prec = detail::slots(nfa, f.first);
        take.succ = detail::slots(nfa, f.second);
        bound.insert(role);
        for (size_t k = 0; k < p.predicates.size(); ++k) {
            if (used[k]) continue;
            const auto& roles = p.predicates[k].roles;
            bool complete = std::all_of(roles.begin(), roles.end(), [&](const std::string& r) { return bound.count(r); });
            if (!complete) continue;
            used[k] = true;
            take.condition.push_back(nfa.add_atom(p.predicates[k]));
        }
        nfa.add_edge(take);
    }

    if (check >= 0) {
        for (const auto& d : deps) {
            if (d.dep_state <= n) continue;
            const auto& x = *std::find_if(p.negations.begin(), p.negations.end(),
                                          [&](const Negation& m) { return m.name == d.role; });
            nfa.add_edge(reject_edge(nfa, p, x, check, bound));
        }
        Edge pass;
        pass.src = check;
        pass.dst = F;
        pass.trigger = Trigger::SearchFailed;
        nfa.add_edge(pass);
    }

    for (size_t j = 0; j < negative.size(); ++j) {
        const int src = negative[j];
        const Negation& x = *negs[j];
        Edge ig;
        ig.src = ig.dst = src;
        ig.action = Action::Ignore;
        for (const auto& r : chain) ig.types.push_back(*p.type_of(r));
        for (size_t k = 0; k < j; ++k) ig.types.push_back(neg_types[k]);
        nfa.add_edge(ig);
        if (j + 1 < negative.size()) {
            Edge st;
            st.src = st.dst = src;
            st.action = Action::Store;
            st.types.assign(neg_types.begin() + static_cast<long>(j) + 1, neg_types.end());
            nfa.add_edge(st);
        }
        Edge rej = reject_edge(nfa, p, x, src, bound);
        const bool bounded_above = !rej.succ.empty();
        nfa.add_edge(rej);
        Edge pass;
        pass.src = src;
        pass.dst = j + 1 < negative.size() ? negative[j + 1] : F;
        pass.trigger = bounded_above ? Trigger::SearchFailed : Trigger::Timeout;
        nfa.add_edge(pass);
    }

    nfa.finalize();
    return nfa;
}

}  // namespace

Nfa build_lazy_chain(const ChainPattern& p, const FreqOrder& freq) {
    if (!p.negations.empty() || p.iterated)
        throw std::invalid_argument("build_lazy_chain: pattern has negations or an iterated role");
    return build_core(p, freq, std::nullopt);
}

Nfa build_iteration(const ChainPattern& p, const FreqOrder& freq) {
    if (!p.iterated) throw std::invalid_argument("build_iteration: pattern has no iterated role");
    if (!p.negations.empty()) return build_core(p, freq, NegationMode::PostProcessing);
    return build_core(p, freq, std::nullopt);
}

Nfa build_pp_negation(const ChainPattern& p, const FreqOrder& freq) {
    return build_core(p, freq, p.negations.empty() ? std::nullopt : std::optional(NegationMode::PostProcessing));
}

Nfa build_fc_negation(const ChainPattern& p, const FreqOrder& freq) {
    return build_core(p, freq, p.negations.empty() ? std::nullopt : std::optional(NegationMode::FirstChance));
}

Nfa build_lazy(const ChainPattern& p, const FreqOrder& freq, NegationMode neg) {
    if (p.negations.empty()) return build_core(p, freq, std::nullopt);
    return build_core(p, freq, neg);
}

Nfa build_multi_chain(const std::vector<Nfa>& chains) {
    if (chains.empty()) throw std::invalid_argument("build_multi_chain: no chains");
    if (chains.size() == 1) return chains.front();
    Nfa out;
    out.window = chains.front().window;
    const int q1 = out.add_state("q1", State::Kind::Initial);
    std::vector<std::vector<int>> smap(chains.size());
    for (size_t k = 0; k < chains.size(); ++k) {
        const Nfa& c = chains[k];
        if (!(c.window == out.window)) throw std::invalid_argument("build_multi_chain: windows differ");
        smap[k].assign(c.states.size(), -1);
        for (int s = 0; s < c.state_count(); ++s) {
            if (s == c.initial) smap[k][static_cast<size_t>(s)] = q1;
            else if (s != c.accept && s != c.reject)
                smap[k][static_cast<size_t>(s)] =
                    out.add_state(std::to_string(k + 1) + "." + c.states[static_cast<size_t>(s)].name,
                                  c.states[static_cast<size_t>(s)].kind);
        }
    }
    const int F = out.add_state("F", State::Kind::Accept);
    const int R = out.add_state("R", State::Kind::Reject);
    std::vector<std::vector<int>> rmap(chains.size());
    for (size_t k = 0; k < chains.size(); ++k) {
        const Nfa& c = chains[k];
        for (int s = 0; s < c.roles.size(); ++s)
            rmap[k].push_back(out.roles.add(c.roles.name(s), c.roles.type(s), c.roles.iterated(s)));
        smap[k][static_cast<size_t>(c.accept)] = F;
        smap[k][static_cast<size_t>(c.reject)] = R;
        int it = c.chain_iter_slot.empty() ? -1 : c.chain_iter_slot.front();
        out.chain_iter_slot.push_back(it < 0 ? -1 : rmap[k][static_cast<size_t>(it)]);
    }
    for (size_t k = 0; k < chains.size(); ++k) {
        const Nfa& c = chains[k];
        auto remap = [&](std::vector<int>& v) {
            for (int& s : v) s = rmap[k][static_cast<size_t>(s)];
        };
        for (Edge e : c.edges) {
            e.src = smap[k][static_cast<size_t>(e.src)];
            e.dst = smap[k][static_cast<size_t>(e.dst)];
            if (e.slot >= 0) e.slot = rmap[k][static_cast<size_t>(e.slot)];
            remap(e.prec);
            remap(e.succ);
            for (int& a : e.condition) a = out.add_atom(c.atom_src[static_cast<size_t>(a)]);
            for (int& a : e.condition_last) a = out.add_atom(c.atom_src[static_cast<size_t>(a)]);
            e.chain = static_cast<int>(k);
            out.add_edge(std::move(e));
        }
    }
    out.finalize();
    return out;
}

}  // namespace lazycep
