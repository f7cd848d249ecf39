#include "lazycep/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace lazycep {

long peak_rss_kb() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream ss(line.substr(6));
            long kb = 0;
            ss >> kb;
            return kb;
        }
    }
    return 0;
}

BenchResult run_benchmark(std::shared_ptr<const Nfa> nfa, const std::string& mode_name,
                          const std::vector<EventPtr>& stream, const BenchOptions& opts) {
    using Clock = std::chrono::steady_clock;
    auto once = [&](BenchResult& out) {
        Runtime rt(nfa);
        std::vector<MatchKey> keys;
        auto t0 = Clock::now();
        for (const auto& e : stream)
            for (const auto& m : rt.step(e)) keys.push_back(m.key());
        for (const auto& m : rt.flush()) keys.push_back(m.key());
        auto t1 = Clock::now();
        canonical_sort(keys, opts.dedup);
        out.matches = std::move(keys);
        out.report.counters = rt.counters();
        return std::chrono::duration<double>(t1 - t0).count();
    };
    BenchResult res;
    if (opts.warmup) once(res);
    std::vector<double> times;
    for (int i = 0; i < std::max(1, opts.runs); ++i) times.push_back(once(res));
    std::sort(times.begin(), times.end());
    MetricsReport& r = res.report;
    r.mode = mode_name;
    r.events_processed = r.counters.events;
    r.wall_time = times[times.size() / 2];
    r.throughput = r.wall_time > 0 ? static_cast<double>(r.events_processed) / r.wall_time : 0;
    r.peak_rss_kb = peak_rss_kb();
    return res;
}

namespace {

nlohmann::ordered_json rates_of(std::uint64_t total, const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["per_event"] = r.events_processed ? static_cast<double>(total) / static_cast<double>(r.events_processed) : 0.0;
    if (r.counters.matches)
        j["per_match"] = static_cast<double>(total) / static_cast<double>(r.counters.matches);
    else
        j["per_match"] = nullptr;
    return j;
}

std::vector<std::pair<std::string, double>> flat(const MetricsReport& r) {
    const auto& c = r.counters;
    return {{"events_processed", static_cast<double>(r.events_processed)},
            {"wall_time", r.wall_time},
            {"throughput", r.throughput},
            {"matches", static_cast<double>(c.matches)},
            {"peak_live_instances", static_cast<double>(c.peak_live_instances)},
            {"predicate_evaluations", static_cast<double>(c.predicate_evaluations)},
            {"instance_create", static_cast<double>(c.instance_create)},
            {"instance_retire", static_cast<double>(c.instance_retire)},
            {"buffer_insert", static_cast<double>(c.buffer_insert)},
            {"buffer_search", static_cast<double>(c.buffer_search)},
            {"buffer_remove", static_cast<double>(c.buffer_remove)},
            {"subsets_enumerated", static_cast<double>(c.subsets_enumerated)},
            {"peak_rss_kb", static_cast<double>(r.peak_rss_kb)}};
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string metrics_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    const auto& c = r.counters;
    j["mode"] = r.mode;
    j["events_processed"] = r.events_processed;
    j["wall_time"] = r.wall_time;
    j["throughput"] = r.throughput;
    j["matches"] = c.matches;
    j["peak_live_instances"] = c.peak_live_instances;
    j["predicate_evaluations"] = rates_of(c.predicate_evaluations, r);
    nlohmann::ordered_json mem;
    mem["instance_create"] = rates_of(c.instance_create, r);
    mem["instance_retire"] = rates_of(c.instance_retire, r);
    mem["buffer_insert"] = rates_of(c.buffer_insert, r);
    mem["buffer_search"] = rates_of(c.buffer_search, r);
    mem["buffer_remove"] = rates_of(c.buffer_remove, r);
    j["memory_ops"] = mem;
    j["subsets_enumerated"] = c.subsets_enumerated;
    j["peak_rss_kb"] = r.peak_rss_kb;
    return j.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricsReport>& reports, const std::string& x, bool header) {
    std::string out = header ? "mode,metric,x,value\n" : "";
    for (const auto& r : reports)
        for (const auto& [name, v] : flat(r)) out += r.mode + "," + name + "," + x + "," + num(v) + "\n";
    return out;
}

void write_matches(std::ostream& os, const std::vector<MatchKey>& matches) {
    for (const auto& m : matches) os << key_line(m) << '\n';
}

}  // namespace lazycep
