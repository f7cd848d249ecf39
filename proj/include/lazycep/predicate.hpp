#pragma once

// Compiled WHERE conjuncts evaluated against a partial match.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lazycep/event.hpp"
#include "lazycep/pattern.hpp"

namespace lazycep {

// Role name -> slot index. Shared by every chain of one automaton; a role
// name that appears in several OR branches maps to one slot.
class RoleTable {
public:
    int add(const std::string& name, EventType type, bool iterated);
    int slot(const std::string& name) const;  // -1 when absent
    const std::string& name(int slot) const { return names_[slot]; }
    EventType type(int slot) const { return types_[slot]; }
    bool iterated(int slot) const { return iterated_[slot]; }
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::vector<EventType> types_;
    std::vector<bool> iterated_;
};

// Events bound so far. Plain roles live in `single`; the (at most one)
// iterated role of the instance's chain keeps its members in event order.
struct Bindings {
    std::vector<EventPtr> single;
    std::vector<EventPtr> members;
    int iter_slot = -1;

    explicit Bindings(int slots = 0) : single(static_cast<size_t>(slots)) {}
    bool bound(int slot) const {
        return slot == iter_slot ? !members.empty() : single[static_cast<size_t>(slot)] != nullptr;
    }
};

class CompiledAtom {
public:
    CompiledAtom(const Atom& atom, const RoleTable& roles);

    // Evaluates the conjunct. Element references (`r[i]`, `r[i-1]`) must
    // hold for every member; with last_only only the newest member (and
    // its predecessor) is checked. Increments *evaluations once.
    bool test(const Bindings& b, bool last_only, std::uint64_t* evaluations) const;

    const std::vector<int>& slots() const { return slots_; }
    bool aggregate() const { return aggregate_; }
    bool indexed() const { return current_ || previous_; }
    const std::string& text() const { return text_; }

private:
    struct Node {
        Expr::Kind kind = Expr::Kind::Number;
        Expr::Op op = Expr::Op::Add;
        Expr::Index index = Expr::Index::None;
        Expr::AggFn agg = Expr::AggFn::Avg;
        double number = 0;
        std::string str;
        int slot = -1;
        AttrId attr;
        int a = -1;
        int b = -1;
    };
    struct Val;

    int compile(const Expr& e, const RoleTable& roles);
    Val eval(int node, const Bindings& b, size_t i) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<int> slots_;
    bool aggregate_ = false;
    bool current_ = false;
    bool previous_ = false;
    std::string text_;
};

// Sample Pearson correlation. Throws std::invalid_argument on length
// mismatch or fewer than two points, std::domain_error on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace lazycep
