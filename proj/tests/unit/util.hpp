#pragma once

#include <random>
#include <string>
#include <vector>

#include "lazycep/engine.hpp"
#include "lazycep/oracle.hpp"

namespace testutil {

using namespace lazycep;

// Builds a stream from "A:1 B:2 ..." (type:ts); seq counts from 1.
inline std::vector<EventPtr> stream(const std::string& spec) {
    std::vector<EventPtr> out;
    size_t pos = 0;
    SeqNo seq = 1;
    while (pos < spec.size()) {
        while (pos < spec.size() && spec[pos] == ' ') ++pos;
        if (pos >= spec.size()) break;
        size_t end = spec.find(' ', pos);
        if (end == std::string::npos) end = spec.size();
        std::string tok = spec.substr(pos, end - pos);
        auto colon = tok.find(':');
        out.push_back(make_event(tok.substr(0, colon), std::stoll(tok.substr(colon + 1)), seq++));
        pos = end;
    }
    return out;
}

inline EventPtr ev(const std::string& type, Timestamp ts, SeqNo seq,
                   std::vector<std::pair<std::string, Value>> attrs = {}) {
    return make_event(type, ts, seq, std::move(attrs));
}

inline std::vector<std::string> lines(const std::vector<MatchKey>& keys) {
    std::vector<std::string> out;
    for (const auto& k : keys) out.push_back(key_line(k));
    return out;
}

inline FreqOrder equal_rates(const std::vector<ChainPattern>& chains) {
    std::map<std::string, double> r;
    for (const auto& t : pattern_types(chains)) r[t] = 1;
    return ascending_freq_order(r);
}

inline FreqOrder rates(std::map<std::string, double> r) { return ascending_freq_order(r); }

inline std::vector<MatchKey> run(const std::string& pattern, const std::vector<EventPtr>& s, Mode mode,
                                 const std::optional<FreqOrder>& freq = std::nullopt) {
    auto chains = to_dnf(parse_pattern(pattern));
    auto f = freq ? *freq : equal_rates(chains);
    return run_stream(compile(chains, mode, f), s).matches;
}

inline std::vector<MatchKey> oracle(const std::string& pattern, const std::vector<EventPtr>& s) {
    return enumerate_matches(to_dnf(parse_pattern(pattern)), s);
}

}  // namespace testutil
