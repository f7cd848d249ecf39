#include "lazycep/nfa.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace lazycep {

int Nfa::add_state(std::string name, State::Kind kind) {
    states.push_back({std::move(name), kind});
    int id = state_count() - 1;
    if (kind == State::Kind::Accept) accept = id;
    if (kind == State::Kind::Reject) reject = id;
    if (kind == State::Kind::Initial) initial = id;
    return id;
}

int Nfa::add_edge(Edge e) {
    edges.push_back(std::move(e));
    return static_cast<int>(edges.size()) - 1;
}

int Nfa::add_atom(const Atom& atom) {
    for (size_t i = 0; i < atom_src.size(); ++i)
        if (atom_src[i] == atom) return static_cast<int>(i);
    atoms.emplace_back(atom, roles);
    atom_src.push_back(atom);
    return static_cast<int>(atoms.size()) - 1;
}

namespace {

void add_type(std::vector<EventType>& v, EventType t) {
    if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(t);
}

}  // namespace

void Nfa::finalize() {
    int n_accept = 0, n_reject = 0;
    for (const auto& s : states) {
        n_accept += s.kind == State::Kind::Accept;
        n_reject += s.kind == State::Kind::Reject;
    }
    if (n_accept != 1 || n_reject != 1) throw std::logic_error("automaton needs exactly one F and one R");

    info.assign(states.size(), {});
    stored_types.clear();
    group_index.clear();
    for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
        const Edge& e = edges[static_cast<size_t>(i)];
        if (e.src < 0 || e.src >= state_count() || e.dst < 0 || e.dst >= state_count())
            throw std::logic_error("edge endpoint out of range");
        auto& si = info[static_cast<size_t>(e.src)];
        si.out.push_back(i);
        if (e.trigger == Trigger::Timeout) {
            si.timeout = i;
            if (e.dst != reject) si.waits = true;
            continue;
        }
        if (e.trigger == Trigger::SearchFailed) {
            si.search_failed = i;
            continue;
        }
        switch (e.action) {
            case Action::Take:
            case Action::Iterate:
                if (e.dst == reject) {
                    si.rejects.push_back(i);
                } else {
                    si.advances.push_back(i);
                    if (e.from_stream()) si.waits = true;
                }
                if (e.action == Action::Iterate) {
                    for (auto t : e.types) {
                        add_type(si.stored, t);
                        add_type(stored_types, t);
                    }
                    if (e.group_by) {
                        for (auto t : e.types) {
                            auto it = std::find_if(group_index.begin(), group_index.end(),
                                                   [t](const auto& p) { return p.first == t; });
                            if (it == group_index.end()) group_index.emplace_back(t, *e.group_by);
                            else if (!(it->second == *e.group_by))
                                throw std::logic_error("conflicting group-by attributes for " + t.name());
                        }
                    }
                }
                break;
            case Action::Store:
                si.stores.push_back(i);
                for (auto t : e.types) {
                    add_type(si.stored, t);
                    add_type(stored_types, t);
                }
                break;
            case Action::Ignore:
                break;
        }
    }
    std::sort(stored_types.begin(), stored_types.end());

    // Every state other than R must reach F.
    std::vector<bool> reach(states.size(), false);
    reach[static_cast<size_t>(accept)] = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& e : edges) {
            if (reach[static_cast<size_t>(e.dst)] && !reach[static_cast<size_t>(e.src)] && e.src != e.dst) {
                reach[static_cast<size_t>(e.src)] = true;
                changed = true;
            }
        }
    }
    for (int s = 0; s < state_count(); ++s)
        if (s != reject && !reach[static_cast<size_t>(s)])
            throw std::logic_error("state " + states[static_cast<size_t>(s)].name + " cannot reach F");
}

int Nfa::count_edges(Action a, Trigger t) const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const Edge& e) {
        return e.trigger == t && (t != Trigger::Event || e.action == a);
    }));
}

std::vector<EventType> Nfa::types_of(const std::vector<int>& slots) const {
    std::vector<EventType> out;
    for (int s : slots) out.push_back(roles.type(s));
    return out;
}

std::string Nfa::describe() const {
    std::ostringstream os;
    auto slot_list = [&](const std::vector<int>& v) {
        std::string s;
        for (int x : v) s += (s.empty() ? "" : ",") + roles.name(x);
        return s;
    };
    os << "states " << states.size() << "\n";
    for (size_t i = 0; i < states.size(); ++i) os << "  " << i << " " << states[i].name << "\n";
    for (const auto& e : edges) {
        os << "  " << states[static_cast<size_t>(e.src)].name << " -> " << states[static_cast<size_t>(e.dst)].name
           << " ";
        if (e.trigger == Trigger::Timeout) {
            os << "timeout";
        } else if (e.trigger == Trigger::SearchFailed) {
            os << "search_failed";
        } else {
            static const char* names[] = {"take", "ignore", "store", "iterate"};
            os << names[static_cast<int>(e.action)] << " {";
            for (size_t k = 0; k < e.types.size(); ++k) os << (k ? "," : "") << e.types[k].name();
            os << "}";
            if (e.slot >= 0) os << " as " << roles.name(e.slot);
            if (!e.prec.empty()) os << " prec=" << slot_list(e.prec);
            if (!e.succ.empty()) os << " succ=" << slot_list(e.succ);
            if (e.action == Action::Iterate || (e.slot >= 0 && roles.iterated(e.slot) && e.action == Action::Take))
                os << " bounds=" << e.lo << ".." << (e.hi == kUnbounded ? std::string("inf") : std::to_string(e.hi));
            if (e.group_by) os << " group=" << e.group_by->name();
            for (int a : e.condition) os << " [" << atoms[static_cast<size_t>(a)].text() << "]";
            for (int a : e.condition_last) os << " [last: " << atoms[static_cast<size_t>(a)].text() << "]";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace lazycep
