#include <doctest.h>

#include "lazycep/input_buffer.hpp"

using namespace lazycep;

namespace {

std::vector<SeqNo> seqs(const std::vector<EventPtr>& v) {
    std::vector<SeqNo> out;
    for (const auto& e : v) out.push_back(e->seq);
    return out;
}

}  // namespace

TEST_CASE("range bounds are exclusive on both sides") {
    InputBuffer buf;
    EventType a("A");
    for (SeqNo s = 1; s <= 5; ++s) buf.store(make_event("A", static_cast<Timestamp>(s * 10), s));
    buf.store(make_event("B", 15, 6));
    CHECK(buf.size() == 6);
    CHECK(buf.size(a) == 5);
    CHECK(seqs(buf.query(a, std::nullopt, std::nullopt)) == std::vector<SeqNo>{1, 2, 3, 4, 5});
    CHECK(seqs(buf.query(a, EventKey{20, 2}, EventKey{40, 4})) == std::vector<SeqNo>{3});
    CHECK(seqs(buf.query(a, EventKey{20, 1}, std::nullopt)) == std::vector<SeqNo>{2, 3, 4, 5});
    CHECK(seqs(buf.query(a, std::nullopt, EventKey{30, 99})) == std::vector<SeqNo>{1, 2, 3});
    CHECK(buf.query(EventType("Q"), std::nullopt, std::nullopt).empty());
    CHECK_THROWS(buf.query(a, EventKey{40, 0}, EventKey{30, 0}));
}

TEST_CASE("equal timestamps split by seq") {
    InputBuffer buf;
    EventType a("A");
    buf.store(make_event("A", 7, 1));
    buf.store(make_event("A", 7, 2));
    buf.store(make_event("A", 7, 3));
    CHECK(seqs(buf.query(a, EventKey{7, 1}, EventKey{7, 3})) == std::vector<SeqNo>{2});
}

TEST_CASE("expiry drops everything older than the watermark") {
    InputBuffer buf;
    for (SeqNo s = 1; s <= 5; ++s) buf.store(make_event(s % 2 ? "A" : "B", static_cast<Timestamp>(s), s));
    CHECK(buf.expire(3) == 2);
    CHECK(buf.size() == 3);
    CHECK(seqs(buf.query(EventType("A"), std::nullopt, std::nullopt)) == std::vector<SeqNo>{3, 5});
    CHECK(buf.expire(3) == 0);
    buf.clear();
    CHECK(buf.size() == 0);
}

TEST_CASE("out-of-order store is a logic error") {
    InputBuffer buf;
    buf.store(make_event("A", 5, 2));
    CHECK_THROWS_AS(buf.store(make_event("A", 4, 3)), std::logic_error);
    CHECK_NOTHROW(buf.store(make_event("B", 4, 3)));
}

TEST_CASE("group buckets") {
    InputBuffer buf;
    EventType b("B");
    buf.enable_group(b, AttrId("stock"));
    CHECK(buf.group_attr(b) == std::optional<AttrId>(AttrId("stock")));
    const char* stocks[] = {"X", "Y", "X", "Y", "X"};
    for (SeqNo s = 1; s <= 5; ++s)
        buf.store(make_event("B", static_cast<Timestamp>(s), s, {{"stock", std::string(stocks[s - 1])}}));
    Value x = std::string("X");
    CHECK(seqs(buf.query(b, std::nullopt, std::nullopt, &x)) == std::vector<SeqNo>{1, 3, 5});
    CHECK(seqs(buf.query(b, EventKey{1, 1}, std::nullopt, &x)) == std::vector<SeqNo>{3, 5});
    buf.expire(2);
    CHECK(seqs(buf.query(b, std::nullopt, std::nullopt, &x)) == std::vector<SeqNo>{3, 5});
    CHECK(group_key(Value(1.0)) != group_key(Value(std::string("1"))));
}
