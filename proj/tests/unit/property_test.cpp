#include <doctest.h>

#include "lazycep/difftest.hpp"
#include "util.hpp"

using namespace lazycep;
using namespace testutil;

TEST_CASE("random patterns agree with the oracle in every mode") {
    auto rep = run_difftest(150, 2024);
    if (rep.first) FAIL_CHECK(describe(*rep.first));
    CHECK(rep.cases == 150);
    CHECK(rep.mode_runs >= 150 * 4);
    CHECK(rep.total_matches > 0);
}

TEST_CASE("random cases are reproducible from the seed") {
    std::mt19937_64 r1(8), r2(8);
    for (int i = 0; i < 20; ++i) {
        DiffCase a = random_case(r1, 20), b = random_case(r2, 20);
        CHECK(a.pattern == b.pattern);
        CHECK(a.stream.size() == b.stream.size());
        CHECK(!check_case(a));
    }
}

TEST_CASE("adding a negated-type event never adds matches") {
    const char* p = "PATTERN SEQ(A a, NOT(N n), B b, C c) WHERE skip_till_any_match { n.x < b.x } WITHIN 8 msec";
    std::mt19937_64 rng(12);
    const char* types[] = {"A", "B", "C"};
    for (int round = 0; round < 30; ++round) {
        std::vector<EventPtr> base;
        Timestamp ts = 0;
        for (SeqNo i = 1; i <= 14; ++i) {
            ts += static_cast<Timestamp>(rng() % 2);
            base.push_back(ev(types[rng() % 3], ts, i * 2, {{"x", static_cast<double>(rng() % 3)}}));
        }
        size_t k = rng() % base.size();
        auto with = base;
        with.insert(with.begin() + static_cast<long>(k) + 1,
                    ev("N", base[k]->ts, base[k]->seq + 1, {{"x", static_cast<double>(rng() % 3)}}));
        for (Mode m : {Mode::Eager, Mode::LazyPP, Mode::LazyFC}) {
            auto a = run(p, base, m);
            auto b = run(p, with, m);
            CHECK(b.size() <= a.size());
            for (const auto& key : b) CHECK(std::find(a.begin(), a.end(), key) != a.end());
        }
    }
}

TEST_CASE("counters and matches are deterministic") {
    const char* p = "PATTERN AND(SEQ(A a, B b), C c) WHERE skip_till_any_match { a.x <= c.x } WITHIN 10 msec";
    std::mt19937_64 rng(4);
    const char* types[] = {"A", "B", "C"};
    std::vector<EventPtr> s;
    Timestamp ts = 0;
    for (SeqNo i = 1; i <= 200; ++i) {
        ts += static_cast<Timestamp>(rng() % 3);
        s.push_back(ev(types[rng() % 3], ts, i, {{"x", static_cast<double>(rng() % 5)}}));
    }
    auto chains = to_dnf(parse_pattern(p));
    for (Mode m : kAllModes) {
        auto f = rates({{"A", 2}, {"B", 3}, {"C", 1}});
        auto one = run_stream(compile(chains, m, f), s);
        auto two = run_stream(compile(chains, m, f), s);
        CHECK(one.matches == two.matches);
        CHECK(one.counters == two.counters);
    }
}
