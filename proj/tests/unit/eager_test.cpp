#include <doctest.h>

#include <algorithm>

#include "util.hpp"

using namespace lazycep;
using namespace testutil;

namespace {

Nfa eager(const std::string& text) { return build_eager(to_dnf(parse_pattern(text)).at(0)); }

int count_kind(const Nfa& n, State::Kind k) {
    return static_cast<int>(std::count_if(n.states.begin(), n.states.end(), [&](const State& s) { return s.kind == k; }));
}

}  // namespace

TEST_CASE("sequence lattice is a chain") {
    auto n = eager("PATTERN SEQ(A a, B b, C c) WITHIN 1 hour");
    CHECK(n.state_count() == 5);
    CHECK(n.count_edges(Action::Take) == 3);
    CHECK(n.count_edges(Action::Take, Trigger::Timeout) == 2);
    CHECK(n.stored_types.empty());
}

TEST_CASE("conjunction needs every subset") {
    for (int k = 1; k <= 5; ++k) {
        std::string text = "PATTERN AND(";
        for (int i = 0; i < k; ++i) text += std::string(i ? ", " : "") + char('A' + i) + " " + char('a' + i);
        text += ") WITHIN 1 hour";
        auto n = eager(text);
        CAPTURE(text);
        CHECK(n.state_count() == (1 << k) + 1);
        CHECK(n.count_edges(Action::Take) == k * (1 << (k - 1)));
    }
}

TEST_CASE("partial order keeps only downward-closed sets") {
    // a<b and c<d, e free: 3 * 3 * 2 ideals
    auto n = eager("PATTERN AND(SEQ(A a, B b), SEQ(C c, D d), E e) WITHIN 1 hour");
    CHECK(n.state_count() == 3 * 3 * 2 + 1);
}

TEST_CASE("iteration in the middle loops on its state") {
    auto n = eager("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour");
    CHECK(n.state_count() == 5);
    CHECK(count_kind(n, State::Kind::Continuation) == 0);
    int loops = 0;
    for (const auto& e : n.edges)
        if (e.src == e.dst && e.action == Action::Take) ++loops;
    CHECK(loops == 1);
}

TEST_CASE("trailing iteration gets a continuation state") {
    auto n = eager("PATTERN SEQ(A a, B+ b[]) WITHIN 1 hour");
    CHECK(count_kind(n, State::Kind::Continuation) == 1);
    auto one = eager("PATTERN SEQ(A a, B{1,1} b[]) WITHIN 1 hour");
    CHECK(count_kind(one, State::Kind::Continuation) == 0);
    auto s = stream("A:1 B:2 B:3 B:4");
    auto keys = run("PATTERN SEQ(A a, B{2,3} b[]) WITHIN 1 hour", s, Mode::Eager);
    CHECK(lines(keys) == std::vector<std::string>{"a=1 b=2+3", "a=1 b=2+3+4", "a=1 b=2+4", "a=1 b=3+4"});
}

TEST_CASE("negation adds a checking state") {
    auto n = eager("PATTERN SEQ(A a, NOT(B b), C c, D d) WHERE skip_till_any_match { b.x < c.y } WITHIN 1 hour");
    CHECK(count_kind(n, State::Kind::Negative) == 1);
    CHECK(n.state_count() == 6);
    CHECK(n.stored_types == std::vector<EventType>{EventType("B")});
    const auto& si = n.info[static_cast<size_t>(n.state_count() - 3)];
    CHECK(si.search_failed >= 0);
    CHECK(si.rejects.size() == 1);
}

TEST_CASE("eager group-by keeps members homogeneous") {
    const char* p = "PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour GROUPBY b.g";
    std::vector<EventPtr> s = {ev("A", 1, 1), ev("B", 2, 2, {{"g", 1.0}}), ev("B", 3, 3, {{"g", 2.0}}),
                               ev("B", 4, 4, {{"g", 1.0}}), ev("C", 5, 5)};
    CHECK(lines(run(p, s, Mode::Eager)) ==
          std::vector<std::string>{"a=1 b=2 c=5", "a=1 b=2+4 c=5", "a=1 b=3 c=5", "a=1 b=4 c=5"});
    CHECK(run(p, s, Mode::Lazy) == run(p, s, Mode::Eager));
}
