#include <doctest.h>

#include "util.hpp"

using namespace lazycep;
using namespace testutil;

namespace {

const char* kNeg = "PATTERN SEQ(A a, NOT(B b), C c, D d) WHERE skip_till_any_match { b.x < c.y } WITHIN 1 hour";

std::vector<EventPtr> neg_stream(double bx, double cy) {
    return {ev("A", 1, 1), ev("B", 2, 2, {{"x", bx}}), ev("C", 3, 3, {{"y", cy}}), ev("D", 4, 4)};
}

}  // namespace

TEST_CASE("oracle: sequence") {
    CHECK(lines(oracle("PATTERN SEQ(A a, B b, C c) WITHIN 1 hour", stream("A:1 A:2 B:3 B:4 C:5"))) ==
          std::vector<std::string>{"a=1 b=3 c=5", "a=1 b=4 c=5", "a=2 b=3 c=5", "a=2 b=4 c=5"});
}

TEST_CASE("oracle: kleene gives every nonempty subset") {
    CHECK(oracle("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour", stream("A:1 B:2 B:3 B:4 C:5")).size() == 7);
    CHECK(oracle("PATTERN SEQ(A a, B{2,2} b[], C c) WITHIN 1 hour", stream("A:1 B:2 B:3 B:4 C:5")).size() == 3);
}

TEST_CASE("oracle: negation with a condition") {
    CHECK(oracle(kNeg, neg_stream(1, 5)).empty());
    CHECK(oracle(kNeg, neg_stream(5, 1)).size() == 1);
    CHECK(oracle(kNeg, neg_stream(5, 5)).size() == 1);
    // a B after C does not block
    std::vector<EventPtr> late = {ev("A", 1, 1), ev("C", 3, 2, {{"y", 5.0}}), ev("B", 4, 3, {{"x", 1.0}}),
                                  ev("D", 5, 4)};
    CHECK(oracle(kNeg, late).size() == 1);
}

TEST_CASE("oracle: conjunction ignores order") {
    CHECK(oracle("PATTERN AND(A a, B b) WITHIN 1 hour", stream("B:1 A:2 B:3")).size() == 2);
}

TEST_CASE("oracle: disjunction concatenates chains") {
    const char* p = "PATTERN OR(SEQ(A a, B b), SEQ(A a, C c)) WITHIN 1 hour";
    auto s = stream("A:1 B:2 C:3");
    CHECK(lines(oracle(p, s)) == std::vector<std::string>{"a=1 b=2", "a=1 c=3"});
    const char* dup = "PATTERN OR(SEQ(A a, B b), AND(A a, B b)) WITHIN 1 hour";
    auto chains = to_dnf(parse_pattern(dup));
    CHECK(enumerate_matches(chains, s).size() == 2);
    CHECK(enumerate_matches(chains, s, true).size() == 1);
}

TEST_CASE("oracle: cap") {
    auto chains = to_dnf(parse_pattern("PATTERN SEQ(A a) WITHIN 1 hour"));
    std::vector<EventPtr> s;
    for (SeqNo i = 1; i <= 31; ++i) s.push_back(make_event("A", static_cast<Timestamp>(i), i));
    CHECK_THROWS_AS(enumerate_matches(chains[0], s), std::invalid_argument);
    CHECK(enumerate_matches(chains[0], s, 31).size() == 31);
}

TEST_CASE("oracle: window monotonicity") {
    auto s = stream("A:0 B:2 A:3 C:5 B:7 C:9 A:10 C:12");
    size_t prev = 0;
    for (int w = 1; w <= 14; ++w) {
        auto text = "PATTERN AND(SEQ(A a, B b), C c) WITHIN " + std::to_string(w) + " msec";
        size_t n = oracle(text, s).size();
        CHECK(n >= prev);
        prev = n;
    }
    CHECK(prev > 0);
}
