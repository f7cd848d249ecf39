#pragma once

// Pattern text -> chains -> automaton, and a whole-stream driver.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lazycep/builders.hpp"
#include "lazycep/runtime.hpp"

namespace lazycep {

enum class Mode { Eager, Lazy, LazyPP, LazyFC, Multi };

// Throws std::invalid_argument for an unknown name.
Mode parse_mode(const std::string& name);
std::string to_string(Mode m);
inline constexpr Mode kAllModes[] = {Mode::Eager, Mode::Lazy, Mode::LazyPP, Mode::LazyFC, Mode::Multi};
bool is_lazy(Mode m);

// Builds one automaton for the chain list (merged when there are several).
// freq is required by the lazy modes. Throws UnsupportedPattern when the
// mode cannot express the pattern.
std::shared_ptr<const Nfa> compile(const std::vector<ChainPattern>& chains, Mode mode,
                                   const std::optional<FreqOrder>& freq = std::nullopt);
// Whether compile() would succeed for this mode.
bool applicable(const std::vector<ChainPattern>& chains, Mode mode);

// Replaces every chain's window.
void set_window(std::vector<ChainPattern>& chains, Window w);

struct RunResult {
    std::vector<MatchKey> matches;  // canonical order
    Counters counters;
};

// Feeds the stream then flushes.
RunResult run_stream(std::shared_ptr<const Nfa> nfa, const std::vector<EventPtr>& stream, bool dedup = false,
                     RuntimeOptions opts = {});

}  // namespace lazycep
