#pragma once

// Non-deterministic executor for an Nfa over an in-order event stream.

#include <cstdint>
#include <deque>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "lazycep/input_buffer.hpp"
#include "lazycep/nfa.hpp"

namespace lazycep {

// Role name -> sequence numbers, roles sorted by name.
using MatchKey = std::vector<std::pair<std::string, std::vector<SeqNo>>>;

struct Match {
    Timestamp detected = 0;
    int chain = 0;
    // Sorted by role name; iterated roles carry several events.
    std::vector<std::pair<std::string, std::vector<EventPtr>>> roles;

    MatchKey key() const;
    // "a=1 b=3+4 c=5" with sequence numbers.
    std::string line() const;
};

std::string key_line(const MatchKey& k);
// Sorts by binding key and optionally drops exact duplicates.
void canonical_sort(std::vector<MatchKey>& keys, bool dedup = false);

struct Counters {
    std::uint64_t events = 0;
    std::uint64_t matches = 0;
    std::uint64_t predicate_evaluations = 0;
    std::uint64_t instance_create = 0;
    std::uint64_t instance_retire = 0;
    std::uint64_t buffer_insert = 0;
    std::uint64_t buffer_search = 0;
    std::uint64_t buffer_remove = 0;
    std::uint64_t subsets_enumerated = 0;
    std::uint64_t peak_live_instances = 0;
    // Reference-buffer mode only.
    std::uint64_t reference_checks = 0;
    std::uint64_t reference_mismatches = 0;

    bool operator==(const Counters&) const = default;
};

struct RuntimeOptions {
    // Give every instance its own input buffer, maintained exactly as its
    // states' store edges dictate, and compare each buffer search against
    // the shared buffer. Slow; for testing.
    bool reference_buffers = false;
};

class Runtime {
public:
    explicit Runtime(std::shared_ptr<const Nfa> nfa, RuntimeOptions opts = {});
    ~Runtime();
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    // Applies one event. Throws DataError on out-of-order input or a
    // predicate over a missing attribute.
    std::vector<Match> step(const EventPtr& e);
    // Ends the stream: every pending instance receives TIMEOUT.
    std::vector<Match> flush();

    const Counters& counters() const { return counters_; }
    size_t live_instances() const { return live_; }
    const InputBuffer& buffer() const { return buffer_; }
    const Nfa& nfa() const { return *nfa_; }

    // Candidate-set mismatches seen in reference mode, one line each.
    const std::vector<std::string>& reference_log() const { return ref_log_; }

private:
    struct Instance;
    struct Pending {
        Timestamp deadline;
        std::uint32_t id;
        std::uint32_t gen;
        bool operator>(const Pending& o) const {
            return deadline != o.deadline ? deadline > o.deadline : id > o.id;
        }
    };

    std::uint32_t allocate();
    void release(std::uint32_t id);
    std::uint32_t clone(std::uint32_t id);
    void enter(std::uint32_t id, int state);
    void settle(std::uint32_t id, int state);
    void retire(std::uint32_t id);
    void emit(std::uint32_t id);
    void on_timeout(std::uint32_t id);
    void process(std::uint32_t id, const EventPtr& e);

    bool window_ok(const Instance& in, const Event& c) const;
    std::optional<EventKey> lower_bound_of(const Instance& in, const Edge& edge) const;
    std::optional<EventKey> upper_bound_of(const Instance& in, const Edge& edge) const;
    std::vector<EventPtr> candidates(const Instance& in, const Edge& edge, const Value* group);
    bool check(Instance& in, const Edge& edge, bool newest_only);
    void bind(Instance& in, int slot, const EventPtr& e);
    bool reject_scan(std::uint32_t id, const Edge& edge);
    void advance_from_buffer(std::uint32_t id, const Edge& edge);
    void expire(Timestamp now);
    void finish_step(std::vector<Match>& out);

    std::shared_ptr<const Nfa> nfa_;
    RuntimeOptions opts_;
    InputBuffer buffer_;
    std::deque<Instance> pool_;
    std::vector<std::uint32_t> free_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_state_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> timeouts_;
    // state ids with event edges, by type id
    std::vector<std::vector<int>> dispatch_;
    std::vector<Match> pending_matches_;
    Counters counters_;
    size_t live_ = 0;
    Timestamp now_ = 0;
    bool seen_any_ = false;
    EventKey last_key_{};
    std::uint32_t seed_ = 0;
    std::vector<std::string> ref_log_;
};

}  // namespace lazycep
