#pragma once

// Lazy enumeration of the event subsets an iterate edge fetches.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lazycep/event.hpp"
#include "lazycep/input_buffer.hpp"

namespace lazycep {

// Yields subsets of `pool` (sorted by event order) with lo <= size <= hi,
// smallest first and lexicographic by member (ts, seq) within a size.
// With `required`, which must follow every pool member, only subsets
// containing it are produced. With a group attribute, only subsets whose
// members share its value.
class SubsetEnumerator {
public:
    SubsetEnumerator(std::vector<EventPtr> pool, int lo, int hi, std::optional<AttrId> group = std::nullopt,
                     EventPtr required = nullptr);

    // Writes the next subset into out; false when exhausted.
    bool next(std::vector<EventPtr>& out);
    std::uint64_t produced() const { return produced_; }

private:
    struct Bucket {
        std::vector<EventPtr> events;
        std::vector<size_t> idx;  // current combination
        bool live = false;
    };

    bool start_size();
    static bool advance(Bucket& b, size_t k);
    bool less(const Bucket& a, const Bucket& b) const;

    std::vector<Bucket> buckets_;
    EventPtr required_;
    size_t k_ = 0;      // combination size drawn from the pool
    size_t k_max_ = 0;
    bool started_ = false;
    bool done_ = false;
    std::uint64_t produced_ = 0;
};

// All qualifying subsets of buffered events of type t strictly inside
// (lower, upper), plus new_event when given, filtered by accept.
std::vector<std::vector<EventPtr>> iterate_fetch(const InputBuffer& buf, EventType t, std::optional<EventKey> lower,
                                                 std::optional<EventKey> upper, int lo, int hi,
                                                 std::optional<AttrId> group, EventPtr new_event,
                                                 const std::function<bool(std::span<const EventPtr>)>& accept,
                                                 std::uint64_t* enumerated = nullptr);

}  // namespace lazycep
