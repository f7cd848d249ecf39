#include "lazycep/engine.hpp"

#include <stdexcept>

namespace lazycep {

Mode parse_mode(const std::string& name) {
    if (name == "eager") return Mode::Eager;
    if (name == "lazy") return Mode::Lazy;
    if (name == "lazy-pp") return Mode::LazyPP;
    if (name == "lazy-fc") return Mode::LazyFC;
    if (name == "multi") return Mode::Multi;
    throw std::invalid_argument("unknown mode '" + name + "' (eager, lazy, lazy-pp, lazy-fc, multi)");
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Eager: return "eager";
        case Mode::Lazy: return "lazy";
        case Mode::LazyPP: return "lazy-pp";
        case Mode::LazyFC: return "lazy-fc";
        case Mode::Multi: return "multi";
    }
    return "?";
}

bool is_lazy(Mode m) { return m != Mode::Eager; }

std::shared_ptr<const Nfa> compile(const std::vector<ChainPattern>& chains, Mode mode,
                                   const std::optional<FreqOrder>& freq) {
    if (chains.empty()) throw std::invalid_argument("no chains to compile");
    if (is_lazy(mode) && !freq) throw std::invalid_argument("lazy modes need event rates");
    std::vector<Nfa> parts;
    for (const auto& c : chains) {
        switch (mode) {
            case Mode::Eager: parts.push_back(build_eager(c)); break;
            case Mode::LazyFC: parts.push_back(build_lazy(c, *freq, NegationMode::FirstChance)); break;
            default: parts.push_back(build_lazy(c, *freq, NegationMode::PostProcessing)); break;
        }
    }
    return std::make_shared<const Nfa>(build_multi_chain(parts));
}

bool applicable(const std::vector<ChainPattern>& chains, Mode mode) {
    if (mode != Mode::LazyFC) return true;
    for (const auto& c : chains)
        for (const auto& n : c.negations) {
            bool after = false;
            for (const auto& r : c.positive_roles()) after = after || c.precedes(n.name, r);
            if (!after) return false;
        }
    return true;
}

void set_window(std::vector<ChainPattern>& chains, Window w) {
    for (auto& c : chains) c.window = w;
}

RunResult run_stream(std::shared_ptr<const Nfa> nfa, const std::vector<EventPtr>& stream, bool dedup,
                     RuntimeOptions opts) {
    Runtime rt(std::move(nfa), opts);
    RunResult r;
    for (const auto& e : stream)
        for (const auto& m : rt.step(e)) r.matches.push_back(m.key());
    for (const auto& m : rt.flush()) r.matches.push_back(m.key());
    canonical_sort(r.matches, dedup);
    r.counters = rt.counters();
    return r;
}

}  // namespace lazycep
