#pragma once

// Event, timestamp, and window primitives shared by the whole engine.

#include <compare>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lazycep {

// Milliseconds of stream time.
using Timestamp = std::int64_t;
// Arrival sequence number, strictly increasing over a stream.
using SeqNo = std::uint64_t;

// Raised when stream data violates what a pattern expects (missing
// attribute, wrong attribute kind, out-of-order input).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Interned symbol (event-type name or attribute name). Ids are process-wide
// and stable; interning is thread-safe.
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(std::string_view name);

    std::uint32_t id() const { return id_; }
    const std::string& name() const;
    bool valid() const { return id_ != kInvalid; }

    friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
    // Orders by name, not by id, so that containers keyed by symbols
    // iterate deterministically regardless of interning order.
    friend std::strong_ordering operator<=>(Symbol a, Symbol b);

private:
    static constexpr std::uint32_t kInvalid = 0xffffffffu;
    std::uint32_t id_ = kInvalid;
};

using EventType = Symbol;
using AttrId = Symbol;

// Attribute payload: number, UTF-8 string, or numeric list (price history).
using Value = std::variant<double, std::string, std::vector<double>>;

// Total order key of an event: (ts, seq) lexicographic.
struct EventKey {
    Timestamp ts = 0;
    SeqNo seq = 0;
    friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

struct Event {
    EventType type;
    Timestamp ts = 0;
    SeqNo seq = 0;
    std::vector<std::pair<AttrId, Value>> attrs;

    EventKey key() const { return {ts, seq}; }
    const Value* find(AttrId id) const;
    // Throws DataError when the attribute is missing.
    const Value& attr(AttrId id) const;
    void set(std::string_view name, Value v);
};

using EventPtr = std::shared_ptr<const Event>;

EventPtr make_event(std::string_view type, Timestamp ts, SeqNo seq,
                    std::vector<std::pair<std::string, Value>> attrs = {});

// Lexicographic on (ts, seq).
std::strong_ordering event_order(const Event& a, const Event& b);

struct Window {
    Timestamp duration = 0;

    Window() = default;
    // duration must be > 0.
    explicit Window(Timestamp ms);
    bool operator==(const Window&) const = default;
};

// Inclusive: latest - earliest <= w.duration. Throws std::invalid_argument
// when earliest > latest.
bool within_window(Timestamp earliest, Timestamp latest, Window w);

std::string to_string(const Value& v);

}  // namespace lazycep
