#include "lazycep/event.hpp"

#include <charconv>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace lazycep {

namespace {

class SymbolTable {
public:
    std::uint32_t intern(std::string_view name) {
        {
            std::shared_lock lock(mu_);
            if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mu_);
        auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<std::uint32_t>(names_.size()));
        if (inserted) names_.emplace_back(name);
        return it->second;
    }

    const std::string& name(std::uint32_t id) {
        std::shared_lock lock(mu_);
        return names_.at(id);
    }

private:
    std::shared_mutex mu_;
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::deque<std::string> names_;
};

SymbolTable& table() {
    static SymbolTable t;
    return t;
}

const std::string kInvalidName = "<invalid>";

}  // namespace

Symbol::Symbol(std::string_view name) : id_(table().intern(name)) {}

const std::string& Symbol::name() const {
    if (!valid()) return kInvalidName;
    return table().name(id_);
}

std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.id_ == b.id_) return std::strong_ordering::equal;
    int c = a.name().compare(b.name());
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return a.id_ <=> b.id_;
}

const Value* Event::find(AttrId id) const {
    for (const auto& [k, v] : attrs)
        if (k == id) return &v;
    return nullptr;
}

const Value& Event::attr(AttrId id) const {
    if (const Value* v = find(id)) return *v;
    throw DataError("event " + type.name() + "#" + std::to_string(seq) + " has no attribute '" +
                    id.name() + "'");
}

void Event::set(std::string_view name, Value v) {
    AttrId id(name);
    for (auto& [k, old] : attrs) {
        if (k == id) {
            old = std::move(v);
            return;
        }
    }
    attrs.emplace_back(id, std::move(v));
}

EventPtr make_event(std::string_view type, Timestamp ts, SeqNo seq,
                    std::vector<std::pair<std::string, Value>> attrs) {
    auto e = std::make_shared<Event>();
    e->type = EventType(type);
    e->ts = ts;
    e->seq = seq;
    for (auto& [k, v] : attrs) e->set(k, std::move(v));
    return e;
}

std::strong_ordering event_order(const Event& a, const Event& b) { return a.key() <=> b.key(); }

Window::Window(Timestamp ms) : duration(ms) {
    if (ms <= 0) throw std::invalid_argument("window duration must be positive");
}

bool within_window(Timestamp earliest, Timestamp latest, Window w) {
    if (earliest > latest) throw std::invalid_argument("within_window: earliest_ts > latest_ts");
    return latest - earliest <= w.duration;
}

std::string to_string(const Value& v) {
    auto num = [](double d) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
        return std::string(buf, p);
    };
    if (const auto* d = std::get_if<double>(&v)) return num(*d);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    std::string out;
    for (double d : std::get<std::vector<double>>(v)) {
        if (!out.empty()) out += ';';
        out += num(d);
    }
    return out;
}

}  // namespace lazycep
