#pragma once

// Automaton data model shared by the eager and lazy builders.

#include <optional>
#include <string>
#include <vector>

#include "lazycep/event.hpp"
#include "lazycep/predicate.hpp"

namespace lazycep {

enum class Action { Take, Ignore, Store, Iterate };
// What fires an edge: a stream/buffer event, or one of the synthetic
// TIMEOUT / SEARCH_FAILED signals.
enum class Trigger { Event, Timeout, SearchFailed };

struct State {
    enum class Kind { Initial, Chain, Negative, Check, Continuation, Accept, Reject };
    std::string name;
    Kind kind = Kind::Chain;
};

struct Edge {
    int src = 0;
    int dst = 0;
    Action action = Action::Take;
    Trigger trigger = Trigger::Event;
    std::vector<EventType> types;
    // Role bound (take/iterate) or tested (take into R) by this edge.
    int slot = -1;
    // Indices into Nfa::atoms, checked over every iterated member.
    std::vector<int> condition;
    // Element conjuncts checked for the newest iterated member only.
    std::vector<int> condition_last;
    // Ordering filters as role slots. Bounds are exclusive: a candidate
    // must follow every bound prec role and precede every bound succ role.
    std::vector<int> prec;
    std::vector<int> succ;
    // iterate: subset size bounds. take on an iterated role: bounds on the
    // member count after appending.
    int lo = 1;
    int hi = 1;
    // Minimum number of iterated members required before traversal.
    int need_members = 0;
    std::optional<AttrId> group_by;
    int chain = 0;
    // Never searches the input buffer; only live arrivals are taken.
    bool stream_only = false;

    bool rejects(int reject_state) const { return action == Action::Take && dst == reject_state; }
    bool from_stream() const { return succ.empty(); }
};

struct Nfa {
    std::vector<State> states;
    std::vector<Edge> edges;
    int initial = 0;
    int accept = -1;
    int reject = -1;
    RoleTable roles;
    std::vector<CompiledAtom> atoms;
    // Source form of each compiled atom, kept so automata can be merged.
    std::vector<Atom> atom_src;
    // Iterated role slot per chain, -1 when the chain has none.
    std::vector<int> chain_iter_slot;
    Window window;

    int add_state(std::string name, State::Kind kind);
    int add_edge(Edge e);

    // Builds the lookup tables below and checks structural invariants
    // (single F and R, every state can reach F). Throws std::logic_error.
    void finalize();

    // Derived by finalize().
    struct StateInfo {
        std::vector<int> out;
        std::vector<int> rejects;      // take edges into R
        std::vector<int> advances;     // take/iterate edges elsewhere
        std::vector<int> stores;       // store edges
        int timeout = -1;
        int search_failed = -1;
        bool waits = false;  // has a stream-acceptable advance or a timeout pass
        std::vector<EventType> stored;  // types this state keeps (store + iterate)
    };
    std::vector<StateInfo> info;
    // Union of types any state stores; the shared buffer keeps exactly these.
    std::vector<EventType> stored_types;
    // Group-by attribute per iterated type, for the buffer's secondary index.
    std::vector<std::pair<EventType, AttrId>> group_index;

    // Compiles atom against this automaton's role table; returns its index.
    int add_atom(const Atom& atom);

    int state_count() const { return static_cast<int>(states.size()); }
    int count_edges(Action a, Trigger t = Trigger::Event) const;
    // Human-readable listing of states and edges.
    std::string describe() const;
    std::vector<EventType> types_of(const std::vector<int>& slots) const;
};

}  // namespace lazycep
