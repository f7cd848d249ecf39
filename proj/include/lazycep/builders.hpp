#pragma once

// Eager and lazy automaton construction, including merged multi-chain automata.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lazycep/nfa.hpp"
#include "lazycep/pattern.hpp"

namespace lazycep {

// ---------------------------------------------------------------------------
// Eager

// Subset-lattice automaton: one state per downward-closed set of bound
// positive roles; negations checked in a post-processing state.
Nfa build_eager(const ChainPattern& p);

// ---------------------------------------------------------------------------
// Lazy

struct FreqOrder {
    // Ascending by rate, ties by name.
    std::vector<EventType> types;
    std::map<EventType, double> rates;

    // Position in `types`; throws std::invalid_argument when absent.
    int rank(EventType t) const;
    double rate(EventType t) const;
};

// Sorts every type in `rates` ascending by rate (ties by name). Throws
// std::invalid_argument for a non-positive or non-finite rate, or when a
// type in `required` has no rate.
FreqOrder ascending_freq_order(const std::map<std::string, double>& rates,
                               const std::vector<std::string>& required = {});
// Every type a chain list mentions, positive and negated.
std::vector<std::string> pattern_types(const std::vector<ChainPattern>& chains);

using Filters = std::pair<std::vector<std::string>, std::vector<std::string>>;

// Singleton filters over a total order: prec is the latest element of
// seq that both precedes e and comes before e in freq, succ the earliest
// element that follows e in seq and comes before it in freq.
Filters sequence_filters(const std::string& e, const std::vector<std::string>& freq,
                         const std::vector<std::string>& seq);
// Set-valued filters over a partial order given as (before, after) pairs.
Filters partial_filters(const std::string& e, const std::vector<std::string>& freq,
                        const std::vector<std::pair<std::string, std::string>>& order);

// First-chance dependency data for one negated role.
struct DepInfo {
    std::string role;
    std::vector<std::string> imm_prec;
    std::vector<std::string> imm_succ;
    std::vector<std::string> cond;
    std::vector<std::string> dep;
    // 1-based chain state index where the check runs; n + 1 means a check
    // state inserted right before F.
    int dep_state = 0;
};

// Positive roles in chain order (ascending rate, iterated role last).
std::vector<std::string> chain_order(const ChainPattern& p, const FreqOrder& freq);
std::vector<DepInfo> first_chance_deps(const ChainPattern& p, const FreqOrder& freq);

// Lazy automaton for one chain. p must have no negations and no iterated role.
Nfa build_lazy_chain(const ChainPattern& p, const FreqOrder& freq);
// Chain with the iterated type moved to the end and taken by an iterate edge.
Nfa build_iteration(const ChainPattern& p, const FreqOrder& freq);
// Positive chain followed by one negative state per negated role.
Nfa build_pp_negation(const ChainPattern& p, const FreqOrder& freq);
// Negated roles checked at the earliest chain state where their
// dependencies are bound. Throws UnsupportedPattern when a negated role
// has no positive successor.
Nfa build_fc_negation(const ChainPattern& p, const FreqOrder& freq);

enum class NegationMode { PostProcessing, FirstChance };
// Dispatches on the chain's shape.
Nfa build_lazy(const ChainPattern& p, const FreqOrder& freq, NegationMode neg = NegationMode::PostProcessing);

// Merges automata by sharing q1, F and R. Throws std::invalid_argument
// on an empty list; a single automaton is returned unchanged.
Nfa build_multi_chain(const std::vector<Nfa>& chains);

}  // namespace lazycep
