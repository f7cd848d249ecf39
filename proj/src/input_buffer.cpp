#include "lazycep/input_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace lazycep {

const InputBuffer::Seq InputBuffer::kEmpty;

std::string group_key(const Value& v) {
    // Tag the kind so that the number 7 and the string "7" land in different buckets.
    if (std::holds_alternative<std::string>(v)) return "s:" + std::get<std::string>(v);
    if (std::holds_alternative<double>(v)) return "n:" + to_string(v);
    return "l:" + to_string(v);
}

void InputBuffer::enable_group(EventType t, AttrId attr) {
    auto& pt = types_[t.id()];
    if (!pt.events.empty()) throw std::logic_error("enable_group on a non-empty buffer");
    pt.group = attr;
}

std::optional<AttrId> InputBuffer::group_attr(EventType t) const {
    auto it = types_.find(t.id());
    return it == types_.end() ? std::nullopt : it->second.group;
}

void InputBuffer::store(const EventPtr& e) {
    auto& pt = types_[e->type.id()];
    if (!pt.events.empty() && e->key() < pt.events.back()->key())
        throw std::logic_error("out-of-order insert into input buffer");
    pt.events.push_back(e);
    if (pt.group) pt.buckets[group_key(e->attr(*pt.group))].push_back(e);
    ++size_;
}

namespace {

InputBuffer::Range cut(const InputBuffer::Seq& s, std::optional<EventKey> lower, std::optional<EventKey> upper) {
    auto first = s.begin();
    auto last = s.end();
    if (lower)
        first = std::upper_bound(first, last, *lower,
                                 [](const EventKey& k, const EventPtr& e) { return k < e->key(); });
    if (upper)
        last = std::lower_bound(first, last, *upper,
                                [](const EventPtr& e, const EventKey& k) { return e->key() < k; });
    if (last < first) last = first;
    return {first, last};
}

}  // namespace

InputBuffer::Range InputBuffer::range(EventType t, std::optional<EventKey> lower, std::optional<EventKey> upper,
                                      const Value* group) const {
    auto it = types_.find(t.id());
    if (it == types_.end()) return {kEmpty.begin(), kEmpty.end()};
    const PerType& pt = it->second;
    if (group) {
        if (!pt.group) throw std::logic_error("group query on a type without a group index");
        auto b = pt.buckets.find(group_key(*group));
        if (b == pt.buckets.end()) return {kEmpty.begin(), kEmpty.end()};
        return cut(b->second, lower, upper);
    }
    return cut(pt.events, lower, upper);
}

std::vector<EventPtr> InputBuffer::query(EventType t, std::optional<EventKey> lower, std::optional<EventKey> upper,
                                         const Value* group) const {
    if (lower && upper && *upper < *lower) throw std::invalid_argument("buffer query with lower > upper");
    Range r = range(t, lower, upper, group);
    return {r.begin(), r.end()};
}

size_t InputBuffer::expire(Timestamp watermark) {
    size_t removed = 0;
    for (auto& [id, pt] : types_) {
        while (!pt.events.empty() && pt.events.front()->ts < watermark) {
            pt.events.pop_front();
            ++removed;
        }
        for (auto it = pt.buckets.begin(); it != pt.buckets.end();) {
            while (!it->second.empty() && it->second.front()->ts < watermark) it->second.pop_front();
            it = it->second.empty() ? pt.buckets.erase(it) : std::next(it);
        }
    }
    size_ -= removed;
    return removed;
}

size_t InputBuffer::size(EventType t) const {
    auto it = types_.find(t.id());
    return it == types_.end() ? 0 : it->second.events.size();
}

void InputBuffer::clear() {
    for (auto& [id, pt] : types_) {
        pt.events.clear();
        pt.buckets.clear();
    }
    size_ = 0;
}

}  // namespace lazycep
