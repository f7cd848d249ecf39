#pragma once

// Brute-force reference matcher.

#include <vector>

#include "lazycep/pattern.hpp"
#include "lazycep/runtime.hpp"

namespace lazycep {

inline constexpr size_t kOracleCap = 30;

// Every match of one chain over the stream, canonical order, no repeats.
// Throws std::invalid_argument when the stream is longer than cap.
std::vector<MatchKey> enumerate_matches(const ChainPattern& p, const std::vector<EventPtr>& stream,
                                        size_t cap = kOracleCap);
// Concatenation over chains (a match found by two chains appears twice
// unless dedup), canonical order.
std::vector<MatchKey> enumerate_matches(const std::vector<ChainPattern>& chains, const std::vector<EventPtr>& stream,
                                        bool dedup = false, size_t cap = kOracleCap);

}  // namespace lazycep
