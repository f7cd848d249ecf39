#include "lazycep/subsets.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lazycep {

SubsetEnumerator::SubsetEnumerator(std::vector<EventPtr> pool, int lo, int hi, std::optional<AttrId> group,
                                   EventPtr required)
    : required_(std::move(required)) {
    if (lo < 1 || hi < lo) throw std::invalid_argument("subset bounds must satisfy 1 <= lo <= hi");
    if (required_)
        for (const auto& e : pool)
            if (!(e->key() < required_->key()))
                throw std::invalid_argument("required event must follow every pool member");
    if (group) {
        std::map<std::string, size_t> index;
        std::optional<std::string> only;
        if (required_) only = group_key(required_->attr(*group));
        if (only) {
            buckets_.emplace_back();
            index[*only] = 0;
        }
        for (auto& e : pool) {
            std::string key = group_key(e->attr(*group));
            if (only && key != *only) continue;
            auto [it, inserted] = index.try_emplace(key, buckets_.size());
            if (inserted) buckets_.emplace_back();
            buckets_[it->second].events.push_back(std::move(e));
        }
    } else {
        buckets_.emplace_back();
        buckets_[0].events = std::move(pool);
    }
    size_t largest = 0;
    for (const auto& b : buckets_) largest = std::max(largest, b.events.size());
    size_t extra = required_ ? 1 : 0;
    size_t k_min = static_cast<size_t>(lo) - extra;
    size_t cap = static_cast<size_t>(hi) - extra;
    k_ = k_min;
    k_max_ = std::min(cap, largest);
    if (k_ > k_max_) done_ = true;
}

bool SubsetEnumerator::start_size() {
    bool any = false;
    for (auto& b : buckets_) {
        b.live = b.events.size() >= k_;
        if (!b.live) continue;
        b.idx.resize(k_);
        for (size_t i = 0; i < k_; ++i) b.idx[i] = i;
        any = true;
    }
    return any;
}

bool SubsetEnumerator::advance(Bucket& b, size_t k) {
    const size_t n = b.events.size();
    for (size_t i = k; i-- > 0;) {
        if (b.idx[i] < n - k + i) {
            ++b.idx[i];
            for (size_t j = i + 1; j < k; ++j) b.idx[j] = b.idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

bool SubsetEnumerator::less(const Bucket& a, const Bucket& b) const {
    for (size_t i = 0; i < k_; ++i) {
        auto ka = a.events[a.idx[i]]->key();
        auto kb = b.events[b.idx[i]]->key();
        if (ka != kb) return ka < kb;
    }
    return false;
}

bool SubsetEnumerator::next(std::vector<EventPtr>& out) {
    if (done_) return false;
    if (!started_) {
        started_ = true;
        if (!start_size()) {
            done_ = true;
            return false;
        }
    }
    for (;;) {
        Bucket* best = nullptr;
        for (auto& b : buckets_)
            if (b.live && (!best || less(b, *best))) best = &b;
        if (best) {
            out.clear();
            for (size_t i : best->idx) out.push_back(best->events[i]);
            if (required_) out.push_back(required_);
            if (!advance(*best, k_)) best->live = false;
            ++produced_;
            return true;
        }
        if (++k_ > k_max_ || !start_size()) {
            done_ = true;
            return false;
        }
    }
}

std::vector<std::vector<EventPtr>> iterate_fetch(const InputBuffer& buf, EventType t, std::optional<EventKey> lower,
                                                 std::optional<EventKey> upper, int lo, int hi,
                                                 std::optional<AttrId> group, EventPtr new_event,
                                                 const std::function<bool(std::span<const EventPtr>)>& accept,
                                                 std::uint64_t* enumerated) {
    auto pool = buf.query(t, lower, upper);
    SubsetEnumerator en(std::move(pool), lo, hi, group, std::move(new_event));
    std::vector<std::vector<EventPtr>> out;
    std::vector<EventPtr> s;
    while (en.next(s))
        if (!accept || accept(s)) out.push_back(s);
    if (enumerated) *enumerated += en.produced();
    return out;
}

}  // namespace lazycep
