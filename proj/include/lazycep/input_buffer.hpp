#pragma once

// Time-ordered, type-indexed store of deferred events.

#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lazycep/event.hpp"

namespace lazycep {

class InputBuffer {
public:
    using Seq = std::deque<EventPtr>;
    using Iter = Seq::const_iterator;

    struct Range {
        Iter first;
        Iter last;
        Iter begin() const { return first; }
        Iter end() const { return last; }
        bool empty() const { return first == last; }
        size_t size() const { return static_cast<size_t>(last - first); }
    };

    // Hash events of type t by the value of attr in a secondary index.
    void enable_group(EventType t, AttrId attr);
    std::optional<AttrId> group_attr(EventType t) const;

    // Appends e. Throws std::logic_error when e precedes the last stored
    // event of its type.
    void store(const EventPtr& e);

    // Events of type t with lower < key < upper (either side open when
    // absent), restricted to the group bucket when group is given.
    // Valid until the next store/expire.
    Range range(EventType t, std::optional<EventKey> lower, std::optional<EventKey> upper,
                const Value* group = nullptr) const;
    std::vector<EventPtr> query(EventType t, std::optional<EventKey> lower, std::optional<EventKey> upper,
                                const Value* group = nullptr) const;

    // Drops every event with ts < watermark. Returns how many were removed.
    size_t expire(Timestamp watermark);

    size_t size() const { return size_; }
    size_t size(EventType t) const;
    void clear();

private:
    struct PerType {
        Seq events;
        std::optional<AttrId> group;
        std::map<std::string, Seq> buckets;
    };
    std::unordered_map<std::uint32_t, PerType> types_;
    size_t size_ = 0;
    static const Seq kEmpty;
};

std::string group_key(const Value& v);

}  // namespace lazycep
