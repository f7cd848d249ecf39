#include <doctest.h>

#include <algorithm>

#include "util.hpp"

using namespace lazycep;
using namespace testutil;

namespace {

ChainPattern chain(const std::string& text) { return to_dnf(parse_pattern(text)).at(0); }

const Edge* take_of(const Nfa& n, const std::string& role) {
    for (const auto& e : n.edges)
        if ((e.action == Action::Take || e.action == Action::Iterate) && e.dst != n.reject && e.slot >= 0 &&
            n.roles.name(e.slot) == role && e.trigger == Trigger::Event)
            return &e;
    return nullptr;
}

std::vector<std::string> names(const Nfa& n, const std::vector<int>& slots) {
    std::vector<std::string> out;
    for (int s : slots) out.push_back(n.roles.name(s));
    return out;
}

}  // namespace

TEST_CASE("frequency order") {
    auto f = ascending_freq_order({{"A", 5}, {"B", 1}, {"C", 5}, {"D", 2}});
    CHECK(f.types == std::vector<EventType>{EventType("B"), EventType("D"), EventType("A"), EventType("C")});
    CHECK(f.rank(EventType("A")) == 2);
    CHECK(f.rate(EventType("D")) == 2);
    CHECK_THROWS_AS(f.rank(EventType("Q")), std::invalid_argument);
    CHECK_THROWS_AS(ascending_freq_order({{"A", 0}}), std::invalid_argument);
    CHECK_THROWS_AS(ascending_freq_order({{"A", 1}}, {"A", "B"}), std::invalid_argument);
}

TEST_CASE("plain chains have n+2 states") {
    const char* texts[] = {
        "PATTERN SEQ(A a) WITHIN 1 hour",
        "PATTERN SEQ(A a, B b, C c) WITHIN 1 hour",
        "PATTERN AND(A a, B b, C c) WITHIN 1 hour",
        "PATTERN AND(SEQ(A a, B b), SEQ(C c, D d), E e) WITHIN 1 hour",
        "PATTERN SEQ(A a, AND(B b, C c), D d) WITHIN 1 hour",
        "PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour",
    };
    std::mt19937_64 rng(5);
    for (const char* t : texts) {
        auto c = chain(t);
        for (int trial = 0; trial < 5; ++trial) {
            std::map<std::string, double> r;
            for (const auto& ty : pattern_types({c})) r[ty] = static_cast<double>(rng() % 4 + 1);
            auto n = build_lazy(c, ascending_freq_order(r));
            CAPTURE(t);
            CHECK(n.state_count() == static_cast<int>(c.positive_roles().size()) + 2);
        }
    }
}

TEST_CASE("chain edges follow the frequency order") {
    auto c = chain("PATTERN SEQ(A a, B b, C c) WITHIN 1 hour");
    auto n = build_lazy_chain(c, rates({{"A", 3}, {"B", 2}, {"C", 1}}));
    CHECK(chain_order(c, rates({{"A", 3}, {"B", 2}, {"C", 1}})) == std::vector<std::string>{"c", "b", "a"});
    // q1 stores B and A, ignores nothing; q2 stores A and ignores C
    const auto& q1 = n.info[0];
    REQUIRE(q1.stores.size() == 1);
    CHECK(n.edges[static_cast<size_t>(q1.stores[0])].types == std::vector<EventType>{EventType("B"), EventType("A")});
    CHECK(q1.timeout < 0);
    CHECK(n.info[1].timeout >= 0);
    const Edge* ta = take_of(n, "a");
    REQUIRE(ta);
    CHECK(names(n, ta->prec).empty());
    CHECK(names(n, ta->succ) == std::vector<std::string>{"b"});
    const Edge* tb = take_of(n, "b");
    CHECK(names(n, tb->succ) == std::vector<std::string>{"c"});
    CHECK(!tb->from_stream());
    CHECK(take_of(n, "c")->from_stream());
}

TEST_CASE("sequence filters pick the nearest already-bound neighbour") {
    std::vector<std::string> seq = {"a", "b", "c", "d"};
    auto f = sequence_filters("c", {"d", "a", "c", "b"}, seq);
    CHECK(f.first == std::vector<std::string>{"a"});
    CHECK(f.second == std::vector<std::string>{"d"});
    auto g = sequence_filters("a", {"c", "b", "a"}, {"a", "b", "c"});
    CHECK(g.first.empty());
    CHECK(g.second == std::vector<std::string>{"b"});
    auto h = sequence_filters("d", {"d", "a", "b", "c"}, seq);
    CHECK(h.first.empty());
    CHECK(h.second.empty());
}

TEST_CASE("partial filters") {
    auto c = chain("PATTERN AND(SEQ(A a, B b), SEQ(C c, D d), E e) WITHIN 1 hour");
    std::vector<std::string> freq = {"a", "b", "c", "d", "e"};
    CHECK(partial_filters("d", freq, c.order).first == std::vector<std::string>{"c"});
    CHECK(partial_filters("d", freq, c.order).second.empty());
    CHECK(partial_filters("e", freq, c.order).first.empty());
    CHECK(partial_filters("c", {"d", "c"}, c.order).second == std::vector<std::string>{"d"});
    // with several sub-sequences every bound neighbour is kept
    auto c2 = chain("PATTERN SEQ(AND(A a, B b), C c) WITHIN 1 hour");
    CHECK(partial_filters("c", {"a", "b", "c"}, c2.order).first == std::vector<std::string>{"a", "b"});
}

TEST_CASE("conjunction takes have no ordering filters") {
    auto n = build_lazy(chain("PATTERN AND(A a, B b, C c) WITHIN 1 hour"), rates({{"A", 1}, {"B", 2}, {"C", 3}}));
    CHECK(n.state_count() == 5);
    for (const auto& e : n.edges) {
        CHECK(e.prec.empty());
        CHECK(e.succ.empty());
    }
}

TEST_CASE("post-processing negation") {
    auto c = chain(
        "PATTERN SEQ(A a, NOT(N n), B b, NOT(M m), C c) WHERE skip_till_any_match { n.x < b.x } WITHIN 1 hour");
    auto n = build_pp_negation(c, rates({{"A", 1}, {"B", 2}, {"C", 3}, {"N", 10}, {"M", 50}}));
    CHECK(n.state_count() == 3 + 2 + 2);
    std::vector<std::string> neg;
    for (const auto& s : n.states)
        if (s.kind == State::Kind::Negative) neg.push_back(s.name);
    CHECK(neg == std::vector<std::string>{"n(m)", "n(n)"});
    // both negations sit between positives, so only buffer scans are needed
    int sf = n.count_edges(Action::Take, Trigger::SearchFailed);
    CHECK(sf == 2);
    auto end = chain("PATTERN SEQ(A a, B b, NOT(C c)) WITHIN 1 hour");
    auto n2 = build_pp_negation(end, rates({{"A", 1}, {"B", 2}, {"C", 3}}));
    CHECK(n2.count_edges(Action::Take, Trigger::SearchFailed) == 0);
    CHECK(n2.info[2].timeout >= 0);
}

TEST_CASE("first-chance negation checks as early as possible") {
    auto c = chain("PATTERN SEQ(A a, NOT(B b), C c, D d) WHERE skip_till_any_match { b.x < c.y } WITHIN 1 hour");
    auto f = rates({{"C", 1}, {"A", 2}, {"D", 3}, {"B", 9}});
    auto deps = first_chance_deps(c, f);
    REQUIRE(deps.size() == 1);
    CHECK(deps[0].imm_prec == std::vector<std::string>{"a"});
    CHECK(deps[0].imm_succ == std::vector<std::string>{"c"});
    CHECK(deps[0].cond == std::vector<std::string>{"c"});
    CHECK(deps[0].dep_state == 3);
    auto n = build_fc_negation(c, f);
    CHECK(n.state_count() == 5);
    REQUIRE(n.info[2].rejects.size() == 1);
    CHECK(n.info[0].rejects.empty());
    CHECK(n.info[1].rejects.empty());

    auto rare_d = rates({{"D", 1}, {"C", 2}, {"A", 3}, {"B", 9}});
    CHECK(first_chance_deps(c, rare_d)[0].dep_state == 4);
    auto n2 = build_fc_negation(c, rare_d);
    CHECK(n2.state_count() == 6);  // check state before F
}

TEST_CASE("first-chance needs a positive successor") {
    auto c = chain("PATTERN SEQ(A a, B b, NOT(C c)) WITHIN 1 hour");
    CHECK_THROWS_AS(build_fc_negation(c, rates({{"A", 1}, {"B", 2}, {"C", 3}})), UnsupportedPattern);
    CHECK(!applicable({c}, Mode::LazyFC));
    CHECK(applicable({c}, Mode::LazyPP));
}

TEST_CASE("iterated role is taken last") {
    auto c = chain("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour");
    auto f = rates({{"A", 5}, {"B", 1}, {"C", 3}});
    CHECK(chain_order(c, f) == std::vector<std::string>{"c", "a", "b"});
    auto n = build_iteration(c, f);
    CHECK(n.state_count() == 5);
    CHECK(n.count_edges(Action::Iterate) == 1);
    const Edge* it = take_of(n, "b");
    CHECK(names(n, it->prec) == std::vector<std::string>{"a"});
    CHECK(names(n, it->succ) == std::vector<std::string>{"c"});
}

TEST_CASE("disjunction shares initial, accepting and rejecting states") {
    auto chains = to_dnf(parse_pattern("PATTERN OR(SEQ(A a, B b, C c), SEQ(C c, D d, E e)) WITHIN 1 hour"));
    auto f = rates({{"C", 1}, {"B", 2}, {"A", 3}, {"D", 4}, {"E", 5}});
    std::vector<Nfa> parts;
    for (const auto& c : chains) parts.push_back(build_lazy(c, f));
    auto merged = build_multi_chain(parts);
    CHECK(merged.state_count() == 7);
    CHECK(merged.roles.size() == 5);
    CHECK(merged.chain_iter_slot.size() == 2);
    auto s = stream("A:1 B:2 C:3 D:4 E:5");
    CHECK(lines(run_stream(std::make_shared<const Nfa>(merged), s).matches) ==
          std::vector<std::string>{"a=1 b=2 c=3", "c=3 d=4 e=5"});
    CHECK_THROWS_AS(build_multi_chain({}), std::invalid_argument);
    CHECK(build_multi_chain({parts[0]}).state_count() == parts[0].state_count());
}

TEST_CASE("every frequency permutation gives the same matches") {
    const char* p = "PATTERN SEQ(A a, B b, C c) WITHIN 1 hour";
    auto s = stream("A:1 A:2 B:3 B:4 C:5");
    std::vector<std::string> types = {"A", "B", "C"};
    std::vector<double> r = {1, 2, 3};
    do {
        std::map<std::string, double> m;
        for (size_t i = 0; i < 3; ++i) m[types[i]] = r[i];
        CHECK(run(p, s, Mode::Lazy, ascending_freq_order(m)).size() == 4);
    } while (std::next_permutation(r.begin(), r.end()));
}
