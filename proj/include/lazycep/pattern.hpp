#pragma once

// Pattern language: AST, parser, renderer, and DNF normalization into
// per-chain form.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lazycep/event.hpp"

namespace lazycep {

// Syntax error with a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Well-formed text that violates a semantic rule (duplicate role, unknown
// role in WHERE, aggregate over a plain role, REPEAT with l > m, ...).
class PatternError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pattern the engine cannot evaluate (NOT under OR, several iterated roles
// in one chain, first-chance negation with nothing after the negated event).
class UnsupportedPattern : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kUnbounded = std::numeric_limits<int>::max();

// ---------------------------------------------------------------------------
// WHERE expressions

struct Expr {
    enum class Kind { Number, String, Ref, Aggregate, Corr, Negate, Not, Binary };
    enum class Op { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
    // role.attr, role[i].attr, role[i-1].attr
    enum class Index { None, Current, Previous };
    enum class AggFn { Avg, Sum, Min, Max, Count };

    Kind kind = Kind::Number;
    double number = 0;
    std::string text;  // string literal
    std::string role;
    std::string attr;
    Index index = Index::None;
    AggFn agg = AggFn::Avg;
    Op op = Op::Add;
    std::vector<Expr> args;

    static Expr num(double v);
    static Expr str(std::string s);
    static Expr ref(std::string role, std::string attr, Index idx = Index::None);
    static Expr aggregate(AggFn fn, Expr ref);
    static Expr corr(Expr a, Expr b);
    static Expr unary(Kind k, Expr a);
    static Expr binary(Op op, Expr a, Expr b);

    bool operator==(const Expr&) const = default;
};

// One conjunct of the WHERE clause together with the roles it mentions.
struct Atom {
    Expr expr;
    std::vector<std::string> roles;  // sorted, unique

    bool operator==(const Atom&) const = default;
};

// Splits a WHERE expression at its top-level ANDs.
std::vector<Atom> split_conjuncts(const Expr& where);
std::vector<std::string> roles_of(const Expr& e);
bool has_aggregate(const Expr& e);
bool has_index(const Expr& e, Expr::Index idx);

// ---------------------------------------------------------------------------
// PATTERN tree

struct Leaf {
    enum class Kind { Plain, Negated, Kleene, Repeat };
    std::string type;
    std::string role;
    Kind kind = Kind::Plain;
    int lo = 1;
    int hi = 1;

    bool iterated() const { return kind == Kind::Kleene || kind == Kind::Repeat; }
    bool operator==(const Leaf&) const = default;
};

struct PatternNode {
    enum class Op { Seq, And, Or, Leaf };
    Op op = Op::Leaf;
    std::vector<PatternNode> children;
    Leaf leaf;

    bool operator==(const PatternNode&) const = default;
};

struct GroupBy {
    std::string role;
    std::string attr;
    bool operator==(const GroupBy&) const = default;
};

struct PatternAst {
    PatternNode root;
    std::optional<Expr> where;
    Window window;
    std::optional<GroupBy> group_by;

    bool operator==(const PatternAst&) const = default;
};

struct ParseOptions {
    // Values for bare identifiers in WHERE (e.g. a threshold T).
    std::map<std::string, double> params;
};

// Parses and validates. Throws ParseError or PatternError.
PatternAst parse_pattern(const std::string& text, const ParseOptions& opts = {});

// Canonical text form; parse_pattern(render(ast)) == ast.
std::string render(const PatternAst& ast);
std::string render(const Expr& e);
std::string render_window(Window w);

// ---------------------------------------------------------------------------
// DNF chain form

struct RoleDecl {
    std::string name;
    EventType type;
    bool operator==(const RoleDecl&) const = default;
};

struct IteratedRole {
    std::string name;
    EventType type;
    int lo = 1;
    int hi = kUnbounded;
    std::optional<std::string> group_attr;
    bool operator==(const IteratedRole&) const = default;
};

struct Negation {
    std::string name;
    EventType type;
    // Conjuncts that mention this negated role.
    std::vector<Atom> atoms;
    bool operator==(const Negation&) const = default;
};

// One conjunctive branch of a pattern: positives under a partial order,
// optional single iterated role, negations, and predicate conjuncts.
struct ChainPattern {
    std::vector<RoleDecl> positives;
    std::optional<IteratedRole> iterated;
    std::vector<Negation> negations;
    // (u, v): u must precede v under event_order. Over every role in the
    // chain (negated ones included), transitively closed.
    std::vector<std::pair<std::string, std::string>> order;
    // Conjuncts over positive and iterated roles only.
    std::vector<Atom> predicates;
    Window window;

    bool operator==(const ChainPattern&) const = default;

    // Positive roles followed by the iterated role, if any.
    std::vector<std::string> positive_roles() const;
    std::vector<std::string> all_roles() const;
    std::optional<EventType> type_of(const std::string& role) const;
    bool precedes(const std::string& u, const std::string& v) const;
    std::vector<std::string> predecessors(const std::string& role) const;
    std::vector<std::string> successors(const std::string& role) const;
    // Total order over positive_roles().
    bool is_full_sequence() const;
    bool is_conjunction() const;
};

// Normalizes to a deterministic list of chains (sorted by role list).
// Throws UnsupportedPattern for shapes the engine rejects.
std::vector<ChainPattern> to_dnf(const PatternAst& ast);

// Renders a chain list back to pattern text (as an OR when several).
std::string render(const std::vector<ChainPattern>& chains);

}  // namespace lazycep
