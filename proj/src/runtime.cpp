#include "lazycep/runtime.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "lazycep/subsets.hpp"

namespace lazycep {

namespace {

constexpr Timestamp kTsMax = std::numeric_limits<Timestamp>::max();
constexpr Timestamp kTsMin = std::numeric_limits<Timestamp>::min();
constexpr SeqNo kSeqMax = std::numeric_limits<SeqNo>::max();

}  // namespace

MatchKey Match::key() const {
    MatchKey k;
    for (const auto& [role, evs] : roles) {
        std::vector<SeqNo> seqs;
        for (const auto& e : evs) seqs.push_back(e->seq);
        k.emplace_back(role, std::move(seqs));
    }
    return k;
}

std::string key_line(const MatchKey& k) {
    std::string out;
    for (const auto& [role, seqs] : k) {
        if (!out.empty()) out += ' ';
        out += role + "=";
        for (size_t i = 0; i < seqs.size(); ++i) {
            if (i) out += '+';
            out += std::to_string(seqs[i]);
        }
    }
    return out;
}

std::string Match::line() const { return key_line(key()); }

void canonical_sort(std::vector<MatchKey>& keys, bool dedup) {
    std::sort(keys.begin(), keys.end());
    if (dedup) keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
}

struct Runtime::Instance {
    int state = -1;
    int chain = -1;
    Bindings b;
    Timestamp min_ts = kTsMax;
    Timestamp max_ts = kTsMin;
    std::uint32_t gen = 0;
    std::uint64_t born = 0;
    bool alive = false;
    std::unique_ptr<InputBuffer> ref;

    bool empty() const { return min_ts == kTsMax; }
};

Runtime::Runtime(std::shared_ptr<const Nfa> nfa, RuntimeOptions opts) : nfa_(std::move(nfa)), opts_(opts) {
    if (!nfa_ || nfa_->info.size() != nfa_->states.size())
        throw std::invalid_argument("Runtime needs a finalized automaton");
    for (const auto& [t, attr] : nfa_->group_index) buffer_.enable_group(t, attr);
    by_state_.resize(nfa_->states.size());
    for (int s = 0; s < nfa_->state_count(); ++s) {
        const auto& si = nfa_->info[static_cast<size_t>(s)];
        std::vector<int> edges = si.rejects;
        edges.insert(edges.end(), si.advances.begin(), si.advances.end());
        for (int ei : edges) {
            const Edge& e = nfa_->edges[static_cast<size_t>(ei)];
            if (!e.from_stream()) continue;
            for (auto t : e.types) {
                if (dispatch_.size() <= t.id()) dispatch_.resize(t.id() + 1);
                auto& v = dispatch_[t.id()];
                if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
            }
        }
    }
    seed_ = allocate();
    Instance& seed = pool_[seed_];
    seed.state = nfa_->initial;
    if (opts_.reference_buffers) {
        seed.ref = std::make_unique<InputBuffer>();
        for (const auto& [t, attr] : nfa_->group_index) seed.ref->enable_group(t, attr);
    }
    by_state_[static_cast<size_t>(nfa_->initial)].emplace_back(seed_, seed.gen);
    counters_.peak_live_instances = live_;
}

Runtime::~Runtime() = default;

std::uint32_t Runtime::allocate() {
    std::uint32_t id;
    if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
    } else {
        id = static_cast<std::uint32_t>(pool_.size());
        pool_.emplace_back();
    }
    Instance& in = pool_[id];
    in.alive = true;
    in.born = counters_.events;
    in.b = Bindings(nfa_->roles.size());
    in.min_ts = kTsMax;
    in.max_ts = kTsMin;
    in.state = -1;
    in.chain = -1;
    in.ref.reset();
    ++live_;
    ++counters_.instance_create;
    return id;
}

void Runtime::release(std::uint32_t id) {
    Instance& in = pool_[id];
    in.alive = false;
    ++in.gen;
    in.b = Bindings();
    in.ref.reset();
    free_.push_back(id);
    --live_;
}

std::uint32_t Runtime::clone(std::uint32_t src) {
    std::uint32_t id = allocate();
    Instance& to = pool_[id];
    const Instance& from = pool_[src];
    to.state = from.state;
    to.chain = from.chain;
    to.b = from.b;
    to.min_ts = from.min_ts;
    to.max_ts = from.max_ts;
    if (from.ref) to.ref = std::make_unique<InputBuffer>(*from.ref);
    return id;
}

void Runtime::retire(std::uint32_t id) {
    if (id == seed_) return;
    ++counters_.instance_retire;
    release(id);
}

void Runtime::emit(std::uint32_t id) {
    const Instance& in = pool_[id];
    Match m;
    m.detected = now_;
    m.chain = in.chain;
    const auto& roles = nfa_->roles;
    for (int s = 0; s < roles.size(); ++s) {
        if (s == in.b.iter_slot) {
            if (!in.b.members.empty()) m.roles.emplace_back(roles.name(s), in.b.members);
        } else if (in.b.single[static_cast<size_t>(s)]) {
            m.roles.emplace_back(roles.name(s), std::vector<EventPtr>{in.b.single[static_cast<size_t>(s)]});
        }
    }
    std::sort(m.roles.begin(), m.roles.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    pending_matches_.push_back(std::move(m));
    ++counters_.matches;
    retire(id);
}

void Runtime::bind(Instance& in, int slot, const EventPtr& e) {
    if (slot == in.b.iter_slot) in.b.members.push_back(e);
    else in.b.single[static_cast<size_t>(slot)] = e;
    in.min_ts = std::min(in.min_ts, e->ts);
    in.max_ts = std::max(in.max_ts, e->ts);
}

bool Runtime::window_ok(const Instance& in, const Event& c) const {
    if (in.empty()) return true;
    Timestamp lo = std::min(in.min_ts, c.ts);
    Timestamp hi = std::max(in.max_ts, c.ts);
    return hi - lo <= nfa_->window.duration;
}

std::optional<EventKey> Runtime::lower_bound_of(const Instance& in, const Edge& edge) const {
    std::optional<EventKey> lo;
    auto take = [&](const EventKey& k) {
        if (!lo || *lo < k) lo = k;
    };
    for (int s : edge.prec) {
        if (s == in.b.iter_slot) {
            if (!in.b.members.empty()) take(in.b.members.back()->key());
        } else if (const auto& e = in.b.single[static_cast<size_t>(s)]) {
            take(e->key());
        }
    }
    if (!in.empty()) take(EventKey{in.max_ts - nfa_->window.duration - 1, kSeqMax});
    return lo;
}

std::optional<EventKey> Runtime::upper_bound_of(const Instance& in, const Edge& edge) const {
    std::optional<EventKey> hi;
    auto take = [&](const EventKey& k) {
        if (!hi || k < *hi) hi = k;
    };
    for (int s : edge.succ) {
        if (s == in.b.iter_slot) {
            if (!in.b.members.empty()) take(in.b.members.front()->key());
        } else if (const auto& e = in.b.single[static_cast<size_t>(s)]) {
            take(e->key());
        }
    }
    if (!in.empty()) take(EventKey{in.min_ts + nfa_->window.duration + 1, 0});
    return hi;
}

std::vector<EventPtr> Runtime::candidates(const Instance& in, const Edge& edge, const Value* group) {
    ++counters_.buffer_search;
    auto lo = lower_bound_of(in, edge);
    auto hi = upper_bound_of(in, edge);
    EventType t = edge.types.front();
    std::vector<EventPtr> out;
    if (!(lo && hi && !(*lo < *hi))) {
        auto r = buffer_.range(t, lo, hi, group);
        out.assign(r.begin(), r.end());
    }
    if (in.ref) {
        ++counters_.reference_checks;
        std::vector<EventPtr> mine;
        if (!(lo && hi && !(*lo < *hi))) {
            auto r = in.ref->range(t, lo, hi, group);
            mine.assign(r.begin(), r.end());
        }
        if (mine != out) {
            ++counters_.reference_mismatches;
            std::string msg = "state " + nfa_->states[static_cast<size_t>(in.state)].name + " type " + t.name() +
                              ": shared=" + std::to_string(out.size()) + " own=" + std::to_string(mine.size());
            ref_log_.push_back(msg);
        }
    }
    return out;
}

bool Runtime::check(Instance& in, const Edge& edge, bool newest_only) {
    const auto& atoms = nfa_->atoms;
    for (int a : edge.condition_last)
        if (!atoms[static_cast<size_t>(a)].test(in.b, newest_only, &counters_.predicate_evaluations)) return false;
    for (int a : edge.condition)
        if (!atoms[static_cast<size_t>(a)].test(in.b, false, &counters_.predicate_evaluations)) return false;
    return true;
}

namespace {

// Binds a candidate into an instance for the duration of a check.
template <typename Instance>
struct Trial {
    Instance& in;
    int slot;
    bool member;
    Timestamp min_ts, max_ts;

    Trial(Instance& i, int s, const EventPtr& e) : in(i), slot(s), member(s == i.b.iter_slot) {
        min_ts = in.min_ts;
        max_ts = in.max_ts;
        if (member) in.b.members.push_back(e);
        else in.b.single[static_cast<size_t>(slot)] = e;
        in.min_ts = std::min(in.min_ts, e->ts);
        in.max_ts = std::max(in.max_ts, e->ts);
    }
    ~Trial() {
        if (member) in.b.members.pop_back();
        else in.b.single[static_cast<size_t>(slot)].reset();
        in.min_ts = min_ts;
        in.max_ts = max_ts;
    }
};

}  // namespace

bool Runtime::reject_scan(std::uint32_t id, const Edge& edge) {
    Instance& in = pool_[id];
    EventType t = edge.types.front();
    if (!std::binary_search(nfa_->stored_types.begin(), nfa_->stored_types.end(), t)) return false;
    for (const auto& h : candidates(in, edge, nullptr)) {
        if (!window_ok(in, *h)) continue;
        Trial<Instance> trial(in, edge.slot, h);
        if (check(in, edge, false)) return true;
    }
    return false;
}

void Runtime::advance_from_buffer(std::uint32_t id, const Edge& edge) {
    EventType t = edge.types.front();
    if (!std::binary_search(nfa_->stored_types.begin(), nfa_->stored_types.end(), t)) return;
    Instance& in = pool_[id];
    auto cands = candidates(in, edge, nullptr);
    if (cands.empty()) return;
    if (edge.action == Action::Take) {
        for (const auto& c : cands) {
            if (!window_ok(in, *c)) continue;
            bool ok;
            {
                Trial<Instance> trial(in, edge.slot, c);
                ok = check(in, edge, false);
            }
            if (!ok) continue;
            std::uint32_t cid = clone(id);
            bind(pool_[cid], edge.slot, c);
            enter(cid, edge.dst);
        }
        return;
    }
    // iterate over buffered events only
    SubsetEnumerator en(std::move(cands), edge.lo, edge.hi, edge.group_by);
    std::vector<EventPtr> subset;
    const Timestamp w = nfa_->window.duration;
    while (en.next(subset)) {
        Timestamp lo = std::min(in.min_ts, subset.front()->ts);
        Timestamp hi = std::max(in.max_ts, subset.back()->ts);
        if (hi - lo > w) continue;
        std::swap(in.b.members, subset);
        bool ok = check(in, edge, false);
        std::swap(in.b.members, subset);
        if (!ok) continue;
        std::uint32_t cid = clone(id);
        Instance& c = pool_[cid];
        c.b.members = subset;
        c.min_ts = lo;
        c.max_ts = hi;
        enter(cid, edge.dst);
    }
    counters_.subsets_enumerated += en.produced();
}

void Runtime::enter(std::uint32_t id, int state) {
    if (state == nfa_->accept) {
        emit(id);
        return;
    }
    if (state == nfa_->reject) {
        retire(id);
        return;
    }
    pool_[id].state = state;
    const auto& si = nfa_->info[static_cast<size_t>(state)];
    for (int ei : si.rejects) {
        if (reject_scan(id, nfa_->edges[static_cast<size_t>(ei)])) {
            retire(id);
            return;
        }
    }
    for (int ei : si.advances) {
        const Edge& edge = nfa_->edges[static_cast<size_t>(ei)];
        if (!edge.stream_only) advance_from_buffer(id, edge);
    }
    if (si.search_failed >= 0) {
        enter(id, nfa_->edges[static_cast<size_t>(si.search_failed)].dst);
        return;
    }
    settle(id, state);
}

void Runtime::settle(std::uint32_t id, int state) {
    const auto& si = nfa_->info[static_cast<size_t>(state)];
    if (!si.waits) {
        // Nothing can ever move this instance forward.
        retire(id);
        return;
    }
    Instance& in = pool_[id];
    by_state_[static_cast<size_t>(state)].emplace_back(id, in.gen);
    if (!in.empty()) {
        Timestamp deadline = in.min_ts > kTsMax - nfa_->window.duration ? kTsMax : in.min_ts + nfa_->window.duration;
        timeouts_.push({deadline, id, in.gen});
    }
}

void Runtime::on_timeout(std::uint32_t id) {
    Instance& in = pool_[id];
    int te = nfa_->info[static_cast<size_t>(in.state)].timeout;
    if (te < 0 || nfa_->edges[static_cast<size_t>(te)].dst == nfa_->reject) {
        retire(id);
        return;
    }
    ++in.gen;
    enter(id, nfa_->edges[static_cast<size_t>(te)].dst);
}

void Runtime::process(std::uint32_t id, const EventPtr& e) {
    const auto& si = nfa_->info[static_cast<size_t>(pool_[id].state)];
    for (int ei : si.rejects) {
        const Edge& edge = nfa_->edges[static_cast<size_t>(ei)];
        if (!edge.from_stream() || edge.types.front() != e->type) continue;
        Instance& in = pool_[id];
        if (!window_ok(in, *e)) continue;
        bool hit;
        {
            Trial<Instance> trial(in, edge.slot, e);
            hit = check(in, edge, false);
        }
        if (hit) {
            retire(id);
            return;
        }
    }
    for (int ei : si.advances) {
        const Edge& edge = nfa_->edges[static_cast<size_t>(ei)];
        if (!edge.from_stream() || edge.types.front() != e->type) continue;
        Instance& in = pool_[id];
        if (!window_ok(in, *e)) continue;
        const int iter_slot = edge.chain < static_cast<int>(nfa_->chain_iter_slot.size())
                                  ? nfa_->chain_iter_slot[static_cast<size_t>(edge.chain)]
                                  : -1;
        if (edge.action == Action::Take) {
            if (in.chain < 0) in.b.iter_slot = iter_slot;
            bool ok = true;
            if (edge.slot == in.b.iter_slot) {
                int count = static_cast<int>(in.b.members.size()) + 1;
                ok = count >= edge.lo && count <= edge.hi;
            }
            if (ok && static_cast<int>(in.b.members.size()) + (edge.slot == in.b.iter_slot) < edge.need_members)
                ok = false;
            if (ok && edge.group_by && edge.slot == in.b.iter_slot && !in.b.members.empty())
                ok = in.b.members.front()->attr(*edge.group_by) == e->attr(*edge.group_by);
            if (ok) {
                Trial<Instance> trial(in, edge.slot, e);
                ok = check(in, edge, true);
            }
            if (in.chain < 0) in.b.iter_slot = -1;
            if (!ok) continue;
            std::uint32_t cid = clone(id);
            Instance& c = pool_[cid];
            c.chain = edge.chain;
            c.b.iter_slot = iter_slot;
            bind(c, edge.slot, e);
            enter(cid, edge.dst);
            continue;
        }
        // iterate: subsets of buffered candidates that include e
        const Value* group = edge.group_by ? &e->attr(*edge.group_by) : nullptr;
        if (in.chain < 0) in.b.iter_slot = iter_slot;
        std::vector<EventPtr> pool;
        if (std::binary_search(nfa_->stored_types.begin(), nfa_->stored_types.end(), e->type))
            pool = candidates(in, edge, group);
        SubsetEnumerator en(std::move(pool), edge.lo, edge.hi, edge.group_by, e);
        std::vector<EventPtr> subset;
        const Timestamp w = nfa_->window.duration;
        std::vector<std::pair<std::vector<EventPtr>, std::pair<Timestamp, Timestamp>>> accepted;
        while (en.next(subset)) {
            Timestamp lo = std::min(in.min_ts, subset.front()->ts);
            Timestamp hi = std::max(in.max_ts, subset.back()->ts);
            if (hi - lo > w) continue;
            std::swap(in.b.members, subset);
            bool ok = check(in, edge, false);
            std::swap(in.b.members, subset);
            if (ok) accepted.push_back({subset, {lo, hi}});
        }
        counters_.subsets_enumerated += en.produced();
        if (in.chain < 0) in.b.iter_slot = -1;
        for (auto& [members, span] : accepted) {
            std::uint32_t cid = clone(id);
            Instance& c = pool_[cid];
            c.chain = edge.chain;
            c.b.iter_slot = iter_slot;
            c.b.members = std::move(members);
            c.min_ts = span.first;
            c.max_ts = span.second;
            enter(cid, edge.dst);
        }
    }
}

void Runtime::expire(Timestamp now) {
    Timestamp cut = now - nfa_->window.duration;
    // Instances waiting for a timeout may still search the buffer later,
    // relative to their own bound events.
    for (int s = 0; s < nfa_->state_count(); ++s) {
        const auto& si = nfa_->info[static_cast<size_t>(s)];
        if (si.timeout < 0 || nfa_->edges[static_cast<size_t>(si.timeout)].dst == nfa_->reject) continue;
        for (const auto& [id, gen] : by_state_[static_cast<size_t>(s)]) {
            const Instance& in = pool_[id];
            if (!in.alive || in.gen != gen || in.empty()) continue;
            cut = std::min(cut, in.max_ts - nfa_->window.duration);
        }
    }
    counters_.buffer_remove += buffer_.expire(cut);
    if (opts_.reference_buffers)
        for (auto& in : pool_)
            if (in.alive && in.ref) in.ref->expire(cut);
}

void Runtime::finish_step(std::vector<Match>& out) {
    std::sort(pending_matches_.begin(), pending_matches_.end(),
              [](const Match& a, const Match& b) { return a.key() < b.key(); });
    out = std::move(pending_matches_);
    pending_matches_.clear();
    counters_.peak_live_instances = std::max<std::uint64_t>(counters_.peak_live_instances, live_);
    // Drop stale entries from the per-state lists now and then.
    for (auto& list : by_state_) {
        if (list.size() < 64) continue;
        auto alive = [&](const std::pair<std::uint32_t, std::uint32_t>& p) {
            const Instance& in = pool_[p.first];
            return in.alive && in.gen == p.second;
        };
        size_t live = static_cast<size_t>(std::count_if(list.begin(), list.end(), alive));
        if (live * 2 < list.size()) list.erase(std::remove_if(list.begin(), list.end(), [&](const auto& p) {
                                                   return !alive(p);
                                               }),
                                               list.end());
    }
}

std::vector<Match> Runtime::step(const EventPtr& e) {
    if (!e) throw std::invalid_argument("null event");
    if (seen_any_ && (e->ts < now_ || e->seq <= last_key_.seq))
        throw DataError("event seq " + std::to_string(e->seq) + " arrives out of order");
    seen_any_ = true;
    last_key_ = e->key();
    now_ = e->ts;
    ++counters_.events;

    while (!timeouts_.empty() && timeouts_.top().deadline < now_) {
        Pending p = timeouts_.top();
        timeouts_.pop();
        const Instance& in = pool_[p.id];
        if (!in.alive || in.gen != p.gen) continue;
        on_timeout(p.id);
    }
    expire(now_);

    if (e->type.id() < dispatch_.size()) {
        for (int s : dispatch_[e->type.id()]) {
            auto& list = by_state_[static_cast<size_t>(s)];
            size_t n = list.size();
            for (size_t k = 0; k < n; ++k) {
                auto [id, gen] = by_state_[static_cast<size_t>(s)][k];
                const Instance& in = pool_[id];
                if (!in.alive || in.gen != gen || in.state != s || in.born == counters_.events) continue;
                process(id, e);
            }
        }
    }

    if (opts_.reference_buffers) {
        for (auto& in : pool_) {
            if (!in.alive || in.born == counters_.events || !in.ref) continue;
            const auto& stored = nfa_->info[static_cast<size_t>(in.state)].stored;
            if (std::find(stored.begin(), stored.end(), e->type) != stored.end()) in.ref->store(e);
        }
    }
    if (std::binary_search(nfa_->stored_types.begin(), nfa_->stored_types.end(), e->type)) {
        buffer_.store(e);
        ++counters_.buffer_insert;
    }

    std::vector<Match> out;
    finish_step(out);
    return out;
}

std::vector<Match> Runtime::flush() {
    while (!timeouts_.empty()) {
        Pending p = timeouts_.top();
        timeouts_.pop();
        const Instance& in = pool_[p.id];
        if (!in.alive || in.gen != p.gen) continue;
        on_timeout(p.id);
    }
    std::vector<Match> out;
    finish_step(out);
    return out;
}

}  // namespace lazycep
