#include <doctest.h>

#include "lazycep/event.hpp"

using namespace lazycep;

TEST_CASE("symbols intern by name and order by name") {
    Symbol z("Zeta"), a("Alpha"), z2("Zeta");
    CHECK(z == z2);
    CHECK(z.id() == z2.id());
    CHECK(!(z == a));
    CHECK(a < z);
    CHECK(z.name() == "Zeta");
    CHECK(!Symbol().valid());
}

TEST_CASE("event attributes") {
    auto e = make_event("A", 5, 1, {{"price", 10.5}, {"stock", std::string("X")}, {"h", std::vector<double>{1, 2}}});
    CHECK(std::get<double>(e->attr(AttrId("price"))) == 10.5);
    CHECK(std::get<std::string>(e->attr(AttrId("stock"))) == "X");
    CHECK(e->find(AttrId("nope")) == nullptr);
    CHECK_THROWS_AS(e->attr(AttrId("nope")), DataError);
    CHECK(to_string(e->attr(AttrId("h"))) == "1;2");
}

TEST_CASE("event order is (ts, seq)") {
    auto a = make_event("A", 5, 2);
    auto b = make_event("B", 5, 3);
    auto c = make_event("C", 4, 9);
    CHECK(event_order(*a, *b) < 0);
    CHECK(event_order(*c, *a) < 0);
    CHECK(event_order(*a, *a) == 0);
}

TEST_CASE("window is inclusive and positive") {
    Window w(10);
    CHECK(within_window(0, 10, w));
    CHECK(!within_window(0, 11, w));
    CHECK(within_window(3, 3, w));
    CHECK_THROWS_AS(within_window(5, 4, w), std::invalid_argument);
    CHECK_THROWS(Window(0));
    CHECK_THROWS(Window(-3));
}

TEST_CASE("value formatting round-trips doubles") {
    CHECK(to_string(Value(0.1)) == "0.1");
    CHECK(to_string(Value(100.0)) == "100");
    CHECK(to_string(Value(std::string("abc"))) == "abc");
}
