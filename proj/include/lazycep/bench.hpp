#pragma once

// Timed runs and metrics reporting.

#include <iosfwd>
#include <string>
#include <vector>

#include "lazycep/engine.hpp"

namespace lazycep {

struct MetricsReport {
    std::string mode;
    std::uint64_t events_processed = 0;
    double wall_time = 0;   // seconds, median over timed runs
    double throughput = 0;  // events per second
    Counters counters;
    long peak_rss_kb = 0;
};

struct BenchOptions {
    int runs = 1;
    // One discarded run before the timed ones.
    bool warmup = false;
    bool dedup = false;
};

struct BenchResult {
    MetricsReport report;
    std::vector<MatchKey> matches;
};

// Runs the stream through nfa `runs` times, timing only the step/flush
// loop. Counters and matches come from the last run.
BenchResult run_benchmark(std::shared_ptr<const Nfa> nfa, const std::string& mode_name,
                          const std::vector<EventPtr>& stream, const BenchOptions& opts = {});

// Pretty JSON, fixed key order.
std::string metrics_json(const MetricsReport& r);
// Long-format rows `mode,metric,x,value` (header included when asked).
std::string metrics_csv(const std::vector<MetricsReport>& reports, const std::string& x, bool header = true);
// One key_line per match, LF terminated.
void write_matches(std::ostream& os, const std::vector<MatchKey>& matches);

// VmHWM of this process in kB, 0 when unavailable.
long peak_rss_kb();

}  // namespace lazycep
