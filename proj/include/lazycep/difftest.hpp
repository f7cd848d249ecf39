#pragma once

// Randomized comparison of the oracle against every engine mode.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lazycep/engine.hpp"

namespace lazycep {

struct DiffCase {
    std::string pattern;
    std::vector<EventPtr> stream;
    std::map<std::string, double> rates;
};

// A pattern over at most 4 positive types per chain (SEQ, AND, partial
// orders, negation, Kleene, repetition, OR, group-by) and a stream of at
// most max_events events.
DiffCase random_case(std::mt19937_64& rng, std::size_t max_events);

struct Divergence {
    DiffCase c;
    std::string mode;
    std::vector<MatchKey> expected;
    std::vector<MatchKey> actual;
    std::string error;  // exception text when the mode threw
};

// Runs the oracle and every applicable mode; the first disagreement.
std::optional<Divergence> check_case(const DiffCase& c, std::size_t* modes_run = nullptr);
// Drops events while the case still diverges.
Divergence shrink(Divergence d);
std::string describe(const Divergence& d);

struct DiffReport {
    std::size_t cases = 0;
    std::size_t mode_runs = 0;
    std::size_t total_matches = 0;
    std::optional<Divergence> first;
};

DiffReport run_difftest(std::size_t cases, std::uint64_t seed, std::size_t max_events = 25);

}  // namespace lazycep
