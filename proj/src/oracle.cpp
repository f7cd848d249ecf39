#include "lazycep/oracle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "lazycep/predicate.hpp"

namespace lazycep {

namespace {

class Search {
public:
    Search(const ChainPattern& p, const std::vector<EventPtr>& stream) : p_(p), stream_(stream) {
        for (const auto& r : p.positives) table_.add(r.name, r.type, false);
        if (p.iterated) iter_ = table_.add(p.iterated->name, p.iterated->type, true);
        for (const auto& n : p.negations) table_.add(n.name, n.type, false);
        for (const auto& a : p.predicates) preds_.emplace_back(a, table_);
        for (const auto& n : p.negations) {
            std::vector<CompiledAtom> v;
            for (const auto& a : n.atoms) v.emplace_back(a, table_);
            neg_atoms_.push_back(std::move(v));
        }
        b_ = Bindings(table_.size());
        b_.iter_slot = iter_;
    }

    std::vector<MatchKey> run() {
        place(0);
        std::sort(out_.begin(), out_.end());
        out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
        return out_;
    }

private:
    const ChainPattern& p_;
    const std::vector<EventPtr>& stream_;
    RoleTable table_;
    int iter_ = -1;
    std::vector<CompiledAtom> preds_;
    std::vector<std::vector<CompiledAtom>> neg_atoms_;
    Bindings b_;
    std::vector<MatchKey> out_;

    // Bound events other than iterated members, as (role, event).
    std::vector<std::pair<std::string, EventPtr>> bound_;

    bool before(const Event& x, const Event& y) const { return event_order(x, y) < 0; }

    // Order pairs between role r (event e) and every bound positive.
    bool ordered(const std::string& r, const Event& e) const {
        for (const auto& [u, ev] : bound_) {
            if (p_.precedes(u, r) && !before(*ev, e)) return false;
            if (p_.precedes(r, u) && !before(e, *ev)) return false;
        }
        if (p_.iterated && r != p_.iterated->name) {
            for (const auto& m : b_.members) {
                if (p_.precedes(p_.iterated->name, r) && !before(*m, e)) return false;
                if (p_.precedes(r, p_.iterated->name) && !before(e, *m)) return false;
            }
        }
        return true;
    }

    bool fits(const Event& e) const {
        Timestamp lo = e.ts, hi = e.ts;
        for (const auto& [u, ev] : bound_) {
            lo = std::min(lo, ev->ts);
            hi = std::max(hi, ev->ts);
        }
        for (const auto& m : b_.members) {
            lo = std::min(lo, m->ts);
            hi = std::max(hi, m->ts);
        }
        return hi - lo <= p_.window.duration;
    }

    void place(size_t i) {
        if (i == p_.positives.size()) {
            if (p_.iterated) choose_members();
            else accept();
            return;
        }
        const auto& role = p_.positives[i];
        const int slot = table_.slot(role.name);
        for (const auto& e : stream_) {
            if (!(e->type == role.type) || !ordered(role.name, *e) || !fits(*e)) continue;
            b_.single[static_cast<size_t>(slot)] = e;
            bound_.emplace_back(role.name, e);
            place(i + 1);
            bound_.pop_back();
            b_.single[static_cast<size_t>(slot)].reset();
        }
    }

    void choose_members() {
        const auto& it = *p_.iterated;
        std::vector<EventPtr> pool;
        for (const auto& e : stream_)
            if (e->type == it.type && ordered(it.name, *e) && fits(*e)) pool.push_back(e);
        std::map<std::string, std::vector<EventPtr>> groups;
        for (const auto& e : pool) groups[it.group_attr ? group_key(e->attr(AttrId(*it.group_attr))) : ""].push_back(e);
        for (const auto& [key, events] : groups) subsets(events, 0);
    }

    void subsets(const std::vector<EventPtr>& events, size_t from) {
        const auto& it = *p_.iterated;
        const int size = static_cast<int>(b_.members.size());
        if (size >= it.lo && size <= it.hi) accept();
        if (size >= it.hi) return;
        for (size_t k = from; k < events.size(); ++k) {
            if (!fits(*events[k])) continue;
            b_.members.push_back(events[k]);
            subsets(events, k + 1);
            b_.members.pop_back();
        }
    }

    void accept() {
        for (const auto& a : preds_)
            if (!a.test(b_, false, nullptr)) return;
        for (size_t k = 0; k < p_.negations.size(); ++k)
            if (negated_present(k)) return;
        MatchKey key;
        for (const auto& [role, e] : bound_) key.emplace_back(role, std::vector<SeqNo>{e->seq});
        if (p_.iterated) {
            std::vector<SeqNo> seqs;
            for (const auto& m : b_.members) seqs.push_back(m->seq);
            key.emplace_back(p_.iterated->name, std::move(seqs));
        }
        std::sort(key.begin(), key.end());
        out_.push_back(std::move(key));
    }

    bool negated_present(size_t k) {
        const auto& n = p_.negations[k];
        const int slot = table_.slot(n.name);
        for (const auto& h : stream_) {
            if (!(h->type == n.type) || !ordered(n.name, *h) || !fits(*h)) continue;
            b_.single[static_cast<size_t>(slot)] = h;
            bool all = true;
            for (const auto& a : neg_atoms_[k]) all = all && a.test(b_, false, nullptr);
            b_.single[static_cast<size_t>(slot)].reset();
            if (all) return true;
        }
        return false;
    }
};

}  // namespace

std::vector<MatchKey> enumerate_matches(const ChainPattern& p, const std::vector<EventPtr>& stream, size_t cap) {
    if (stream.size() > cap)
        throw std::invalid_argument("oracle: stream of " + std::to_string(stream.size()) + " events exceeds cap " +
                                    std::to_string(cap));
    return Search(p, stream).run();
}

std::vector<MatchKey> enumerate_matches(const std::vector<ChainPattern>& chains, const std::vector<EventPtr>& stream,
                                        bool dedup, size_t cap) {
    std::vector<MatchKey> out;
    for (const auto& c : chains) {
        auto part = enumerate_matches(c, stream, cap);
        out.insert(out.end(), part.begin(), part.end());
    }
    canonical_sort(out, dedup);
    return out;
}

}  // namespace lazycep
