// One PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "lazycep/bench.hpp"
#include "lazycep/builders.hpp"
#include "lazycep/difftest.hpp"
#include "lazycep/engine.hpp"
#include "lazycep/oracle.hpp"
#include "lazycep/stream.hpp"
#include "lazycep/subsets.hpp"

using namespace lazycep;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::vector<EventPtr> typed(const std::string& types) {
    std::vector<EventPtr> out;
    SeqNo seq = 1;
    for (char t : types) out.push_back(make_event(std::string(1, t), static_cast<Timestamp>(seq), seq)), ++seq;
    return out;
}

std::vector<std::string> lines(std::vector<MatchKey> keys) {
    canonical_sort(keys);
    std::vector<std::string> out;
    for (const auto& k : keys) out.push_back(key_line(k));
    return out;
}

// ---------------------------------------------------------------------------

void golden() {
    auto t0 = Clock::now();
    struct Case {
        const char* pattern;
        const char* stream;
        std::vector<std::string> want;
    };
    // a1 a2 b1 b2 c  and  a b1 b2 b3 c
    const Case cases[] = {
        {"PATTERN SEQ(A a, B b, C c) WITHIN 1 hour", "AABBC",
         {"a=1 b=3 c=5", "a=1 b=4 c=5", "a=2 b=3 c=5", "a=2 b=4 c=5"}},
        {"PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour", "ABBBC",
         {"a=1 b=2 c=5", "a=1 b=2+3 c=5", "a=1 b=2+3+4 c=5", "a=1 b=2+4 c=5", "a=1 b=3 c=5", "a=1 b=3+4 c=5",
          "a=1 b=4 c=5"}},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        auto chains = to_dnf(parse_pattern(c.pattern));
        auto s = typed(c.stream);
        auto check = [&](const std::vector<std::string>& got, const std::string& who) {
            if (got != c.want) {
                ok = false;
                detail += who + " gave " + std::to_string(got.size()) + " matches; ";
            }
        };
        check(lines(enumerate_matches(chains, s)), "oracle");
        check(lines(run_stream(compile(chains, Mode::Eager), s).matches), "eager");
        std::vector<double> r = {1, 2, 3};
        do {
            auto f = ascending_freq_order({{"A", r[0]}, {"B", r[1]}, {"C", r[2]}});
            for (Mode m : {Mode::Lazy, Mode::LazyPP, Mode::Multi})
                check(lines(run_stream(compile(chains, m, f), s).matches), to_string(m));
        } while (std::next_permutation(r.begin(), r.end()));
    }
    double t = seconds_since(t0);
    ok = ok && t < 1.0;
    report(1, ok, detail + "4 and 7 matches in every mode and rate order, " + fmt(t, 3) + " s");
}

// ---------------------------------------------------------------------------

void differential() {
    auto t0 = Clock::now();
    auto rep = run_difftest(600, 20240601);
    double t = seconds_since(t0);
    bool ok = !rep.first && rep.cases >= 500 && t < 300;
    std::string detail = std::to_string(rep.cases) + " cases, " + std::to_string(rep.mode_runs) + " mode runs, " +
                         std::to_string(rep.total_matches) + " oracle matches, " + fmt(t, 1) + " s";
    if (rep.first) detail += "\n" + describe(*rep.first);
    report(2, ok, detail);
}

// ---------------------------------------------------------------------------

size_t positives(const ChainPattern& c) { return c.positive_roles().size(); }

void structure() {
    const char* chains[] = {
        "PATTERN SEQ(A a) WITHIN 1 hour",
        "PATTERN SEQ(A a, B b, C c) WITHIN 1 hour",
        "PATTERN SEQ(A a, B b, C c, D d, E e, F f) WITHIN 1 hour",
        "PATTERN AND(A a, B b) WITHIN 1 hour",
        "PATTERN AND(A a, B b, C c, D d) WITHIN 1 hour",
        "PATTERN AND(SEQ(A a, B b), C c) WITHIN 1 hour",
        "PATTERN SEQ(A a, AND(B b, C c), D d) WITHIN 1 hour",
        "PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour",
        "PATTERN AND(A a, B{2,4} b[]) WITHIN 1 hour",
    };
    bool ok = true;
    std::string detail;
    for (const char* text : chains) {
        auto c = to_dnf(parse_pattern(text)).at(0);
        std::map<std::string, double> r;
        double k = 1;
        for (const auto& t : pattern_types({c})) r[t] = k++;
        auto nfa = build_lazy(c, ascending_freq_order(r));
        if (nfa.states.size() != positives(c) + 2) {
            ok = false;
            detail += std::string(text) + " has " + std::to_string(nfa.states.size()) + " states; ";
        }
    }
    auto and3 = to_dnf(parse_pattern("PATTERN AND(A a, B b, C c) WITHIN 1 hour")).at(0);
    size_t eager = build_eager(and3).states.size();
    size_t lazy = build_lazy(and3, ascending_freq_order({{"A", 1}, {"B", 2}, {"C", 3}})).states.size();
    ok = ok && eager == 9 && lazy == 5;
    report(3, ok,
           detail + "lazy chains n+2; AND of three: eager " + std::to_string(eager) + ", lazy " +
               std::to_string(lazy) + " states");
}

// ---------------------------------------------------------------------------

const char* kCorrSeq =
    "PATTERN SEQ(A a, B b, C c)\n"
    "WHERE skip_till_any_match { corr(a.history, c.history) > T AND corr(b.history, c.history) > T }\n"
    "WITHIN 1 sec";

struct Pair {
    MetricsReport eager, lazy;
    bool same = false;
    double advantage() const { return lazy.throughput / eager.throughput; }
};

// Rarest type C last; A and B at `ratio` times its rate; window holds about 200 events.
Pair corr_workload(double ratio, std::size_t count, std::uint64_t seed) {
    StreamSpec spec;
    spec.count = count;
    spec.seed = seed;
    spec.stocks_per_type = 20;
    spec.rates = {{"A", ratio}, {"B", ratio}, {"C", 1}};
    auto stream = generate_stream(spec);
    ParseOptions po;
    po.params["T"] = 0.8;
    auto chains = to_dnf(parse_pattern(kCorrSeq, po));
    set_window(chains, Window(static_cast<Timestamp>(std::llround(200.0 / (2 * ratio + 1) * 1000))));
    BenchOptions bo;
    bo.runs = 3;
    bo.warmup = true;
    auto e = run_benchmark(compile(chains, Mode::Eager), "eager", stream, bo);
    auto l = run_benchmark(compile(chains, Mode::Lazy, ascending_freq_order(spec.rates)), "lazy", stream, bo);
    return {e.report, l.report, lines(e.matches) == lines(l.matches)};
}

void throughput() {
    auto t0 = Clock::now();
    auto p = corr_workload(100, 100000, 7);
    double t = seconds_since(t0);
    double inst = static_cast<double>(p.lazy.counters.peak_live_instances) /
                  static_cast<double>(std::max<std::uint64_t>(1, p.eager.counters.peak_live_instances));
    bool ok = p.same && p.advantage() >= 5 && inst <= 0.2 && t < 120;
    report(4, ok,
           "throughput lazy/eager " + fmt(p.advantage(), 1) + "x (" + fmt(p.lazy.throughput, 0) + " vs " +
               fmt(p.eager.throughput, 0) + " ev/s), peak instances " +
               std::to_string(p.lazy.counters.peak_live_instances) + " vs " +
               std::to_string(p.eager.counters.peak_live_instances) + ", " +
               std::to_string(p.lazy.counters.matches) + " matches, " + fmt(t, 1) + " s");
}

void sweep() {
    std::vector<double> ratios = {100, 10, 1};
    std::vector<double> adv;
    bool same = true;
    for (double r : ratios) {
        auto p = corr_workload(r, 30000, 11);
        adv.push_back(p.advantage());
        same = same && p.same;
    }
    bool ok = same && adv[0] >= adv[1] && adv[1] >= adv[2] && adv[2] >= 0.5;
    report(5, ok,
           "lazy/eager throughput at 1:100 " + fmt(adv[0], 1) + "x, 1:10 " + fmt(adv[1], 1) + "x, 1:1 " +
               fmt(adv[2], 2) + "x");
}

// ---------------------------------------------------------------------------

void first_chance() {
    const char* text =
        "PATTERN SEQ(A a, NOT(B b), C c, D d, E e)\n"
        "WHERE skip_till_any_match { a.price < b.price AND c.price > a.price - 50 }\n"
        "WITHIN 3 sec";
    StreamSpec spec;
    spec.count = 30000;
    spec.seed = 3;
    spec.stocks_per_type = 5;
    spec.rates = {{"A", 5}, {"B", 50}, {"C", 5}, {"D", 5}, {"E", 1}};
    auto stream = generate_stream(spec);
    auto chains = to_dnf(parse_pattern(text));
    auto f = ascending_freq_order(spec.rates);
    auto pp = run_stream(compile(chains, Mode::LazyPP, f), stream);
    auto fc = run_stream(compile(chains, Mode::LazyFC, f), stream);
    bool same = lines(pp.matches) == lines(fc.matches);
    bool ok = same && fc.counters.predicate_evaluations <= pp.counters.predicate_evaluations;
    report(6, ok,
           "predicate evaluations fc " + std::to_string(fc.counters.predicate_evaluations) + " vs pp " +
               std::to_string(pp.counters.predicate_evaluations) + ", " + std::to_string(fc.matches.size()) +
               " matches, " + (same ? "identical" : "different"));
}

// ---------------------------------------------------------------------------

void group_by() {
    // a, then b events over ten stocks with uneven bucket sizes, then c.
    std::vector<EventPtr> s;
    SeqNo seq = 1;
    s.push_back(make_event("A", 0, seq++));
    std::map<std::string, int> sizes;
    std::map<SeqNo, std::string> stock_of;
    for (int i = 0; i < 25; ++i) {
        std::string stock = "S" + std::to_string((i * 7) % 10 < 5 ? i % 10 : (i * 3) % 10);
        ++sizes[stock];
        stock_of[seq] = stock;
        s.push_back(make_event("B", static_cast<Timestamp>(seq), seq, {{"stock", stock}})), ++seq;
    }
    s.push_back(make_event("C", static_cast<Timestamp>(seq), seq));
    std::uint64_t want = 0;
    for (const auto& [g, m] : sizes) want += (std::uint64_t{1} << m) - 1;

    auto chains = to_dnf(parse_pattern("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour GROUPBY b.stock"));
    bool ok = true;
    std::string detail;
    for (Mode m : {Mode::Eager, Mode::Lazy}) {
        auto res = run_stream(compile(chains, m, ascending_freq_order({{"A", 1}, {"B", 5}, {"C", 1}})), s);
        bool homogeneous = true;
        for (const auto& key : res.matches)
            for (const auto& [role, seqs] : key)
                for (SeqNo q : seqs)
                    if (role == "b" && stock_of.at(q) != stock_of.at(seqs.front())) homogeneous = false;
        if (!homogeneous || res.matches.size() != want) {
            ok = false;
            detail += to_string(m) + " gave " + std::to_string(res.matches.size()) + " matches; ";
        }
    }

    // Ten equal buckets of two: grouped fetch versus ungrouped fetch.
    InputBuffer grouped, plain;
    grouped.enable_group(EventType("B"), AttrId("stock"));
    for (SeqNo i = 1; i <= 20; ++i) {
        auto e = make_event("B", static_cast<Timestamp>(i), i, {{"stock", "S" + std::to_string(i % 10)}});
        grouped.store(e);
        plain.store(e);
    }
    std::uint64_t n_grouped = 0, n_plain = 0;
    auto none = [](std::span<const EventPtr>) { return false; };
    iterate_fetch(grouped, EventType("B"), std::nullopt, std::nullopt, 1, 20, AttrId("stock"), nullptr, none,
                  &n_grouped);
    iterate_fetch(plain, EventType("B"), std::nullopt, std::nullopt, 1, 20, std::nullopt, nullptr, none, &n_plain);
    ok = ok && n_grouped == 10 * 3 && n_grouped < n_plain;
    report(7, ok,
           detail + "homogeneous subsets, " + std::to_string(want) + " expected per bucket sum; ten buckets: " +
               std::to_string(n_grouped) + " subsets grouped vs " + std::to_string(n_plain) + " ungrouped");
}

// ---------------------------------------------------------------------------

bool pure_sequence(const std::string& p) {
    return p.rfind("PATTERN SEQ(", 0) == 0 && p.find("AND(") == std::string::npos &&
           p.find("OR(") == std::string::npos && p.find("SEQ(", 1) == p.find("SEQ(");
}

void shared_buffer() {
    std::mt19937_64 rng(99);
    int cases = 0;
    std::uint64_t checks = 0, mismatches = 0;
    bool same = true;
    while (cases < 100) {
        DiffCase c = random_case(rng, 40);
        if (!pure_sequence(c.pattern)) continue;
        ++cases;
        auto chains = to_dnf(parse_pattern(c.pattern));
        auto f = ascending_freq_order(c.rates);
        for (Mode m : {Mode::Lazy, Mode::LazyFC}) {
            if (!applicable(chains, m)) continue;
            auto nfa = compile(chains, m, f);
            RuntimeOptions opts;
            opts.reference_buffers = true;
            auto ref = run_stream(nfa, c.stream, false, opts);
            auto plain = run_stream(nfa, c.stream);
            checks += ref.counters.reference_checks;
            mismatches += ref.counters.reference_mismatches;
            same = same && lines(ref.matches) == lines(plain.matches);
        }
    }
    bool ok = same && checks > 0 && mismatches == 0;
    report(8, ok,
           std::to_string(cases) + " sequence cases, " + std::to_string(checks) + " buffer searches compared, " +
               std::to_string(mismatches) + " mismatches");
}

// ---------------------------------------------------------------------------

void determinism() {
    StreamSpec spec;
    spec.count = 20000;
    spec.seed = 42;
    spec.stocks_per_type = 4;
    spec.rates = {{"A", 20}, {"B", 5}, {"C", 1}, {"N", 10}};
    const char* text =
        "PATTERN SEQ(A a, NOT(N n), B b, C c)\n"
        "WHERE skip_till_any_match { a.price < b.price AND n.price > a.price }\n"
        "WITHIN 2 sec";
    bool ok = true;
    std::string detail;
    for (Mode m : kAllModes) {
        std::string text_out[2];
        Counters counters[2];
        for (int k = 0; k < 2; ++k) {
            auto stream = generate_stream(spec);
            auto chains = to_dnf(parse_pattern(text));
            auto res = run_stream(compile(chains, m, ascending_freq_order(spec.rates)), stream);
            std::ostringstream out;
            write_matches(out, res.matches);
            text_out[k] = out.str();
            counters[k] = res.counters;
        }
        if (text_out[0] != text_out[1] || !(counters[0] == counters[1])) {
            ok = false;
            detail += to_string(m) + " differs; ";
        }
    }
    report(9, ok, detail + "match text and counters identical across two runs in every mode");
}

}  // namespace

int main() {
    const std::pair<int, std::function<void()>> all[] = {
        {1, golden},      {2, differential}, {3, structure},     {4, throughput},  {5, sweep},
        {6, first_chance}, {7, group_by},    {8, shared_buffer}, {9, determinism},
    };
    for (const auto& [n, f] : all) {
        try {
            f();
        } catch (const std::exception& e) {
            report(n, false, std::string("exception: ") + e.what());
        }
    }
    return failures ? 1 : 0;
}
