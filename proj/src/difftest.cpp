#include "lazycep/difftest.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lazycep/oracle.hpp"

namespace lazycep {

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

struct Branch {
    std::string text;
    std::vector<std::string> plain;  // plain positive roles
    std::string iterated;            // role of the iterated leaf, if any
    std::vector<std::string> types;
    std::vector<std::string> atoms;
};

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

Branch random_branch(Rng& rng, int k) {
    Branch b;
    std::vector<std::string> pool = {"A", "B", "C", "D"};
    std::shuffle(pool.begin(), pool.end(), rng);
    const int n = pick(rng, 1, 4);
    const int iter = chance(rng, 0.35) ? pick(rng, 0, n - 1) : -1;
    std::vector<std::string> leaves;
    for (int i = 0; i < n; ++i) {
        const std::string& t = pool[static_cast<size_t>(i)];
        std::string role = std::string(1, static_cast<char>(std::tolower(t[0]))) + std::to_string(k);
        b.types.push_back(t);
        if (i == iter) {
            b.iterated = role;
            if (chance(rng, 0.5)) {
                leaves.push_back(t + "+ " + role + "[]");
            } else {
                int lo = pick(rng, 1, 2);
                leaves.push_back(t + "{" + std::to_string(lo) + "," + std::to_string(pick(rng, lo, 3)) + "} " + role +
                                 "[]");
            }
        } else {
            b.plain.push_back(role);
            leaves.push_back(t + " " + role);
        }
    }

    // Ordering skeleton.
    std::vector<std::string> seq_children;  // the SEQ node a negation may join
    int shape = n >= 3 ? pick(rng, 0, 2) : pick(rng, 0, 1);
    std::string neg;
    std::string neg_role;
    if (chance(rng, 0.4)) {
        std::string t = chance(rng, 0.5) ? "N" : "M";
        neg_role = std::string(1, static_cast<char>(std::tolower(t[0]))) + std::to_string(k);
        neg = "NOT(" + t + " " + neg_role + ")";
        b.types.push_back(t);
    }
    auto insert_neg = [&](std::vector<std::string>& children) {
        if (neg.empty()) return;
        children.insert(children.begin() + pick(rng, 0, static_cast<int>(children.size())), neg);
        neg.clear();
    };
    if (shape == 0) {
        insert_neg(leaves);
        b.text = "SEQ(" + join(leaves, ", ") + ")";
    } else if (shape == 1) {
        insert_neg(leaves);
        b.text = "AND(" + join(leaves, ", ") + ")";
    } else {
        int cut = pick(rng, 1, n - 1);
        std::vector<std::string> head(leaves.begin(), leaves.begin() + cut);
        std::vector<std::string> tail(leaves.begin() + cut, leaves.end());
        auto group = [](const std::string& op, const std::vector<std::string>& v) {
            return v.size() == 1 ? v.front() : op + "(" + join(v, ", ") + ")";
        };
        if (chance(rng, 0.5)) {
            std::vector<std::string> top = {group("AND", head), group("AND", tail)};
            insert_neg(top);
            b.text = "SEQ(" + join(top, ", ") + ")";
        } else {
            insert_neg(head);
            std::vector<std::string> top = {group("SEQ", head)};
            top.insert(top.end(), tail.begin(), tail.end());
            b.text = "AND(" + join(top, ", ") + ")";
        }
    }

    // Predicates over attribute x (small integers, so ties happen).
    static const char* cmps[] = {"<", "<=", ">", ">=", "=", "!="};
    auto cmp = [&] { return std::string(cmps[pick(rng, 0, 5)]); };
    int atoms = pick(rng, 0, 2);
    for (int i = 0; i < atoms; ++i) {
        int kind = pick(rng, 0, 3);
        if (kind == 0 && b.plain.size() >= 2) {
            auto u = b.plain[static_cast<size_t>(pick(rng, 0, static_cast<int>(b.plain.size()) - 1))];
            auto v = b.plain[static_cast<size_t>(pick(rng, 0, static_cast<int>(b.plain.size()) - 1))];
            if (u != v) b.atoms.push_back(u + ".x " + cmp() + " " + v + ".x");
        } else if (kind == 1 && !b.plain.empty()) {
            auto u = b.plain[static_cast<size_t>(pick(rng, 0, static_cast<int>(b.plain.size()) - 1))];
            b.atoms.push_back(u + ".x " + cmp() + " " + std::to_string(pick(rng, 0, 3)));
        } else if (kind == 2 && !b.iterated.empty()) {
            const std::string& r = b.iterated;
            switch (pick(rng, 0, 3)) {
                case 0: b.atoms.push_back(r + "[i].x " + cmp() + " " + std::to_string(pick(rng, 0, 3))); break;
                case 1: b.atoms.push_back(r + "[i].x >= " + r + "[i-1].x"); break;
                case 2: b.atoms.push_back("SUM(" + r + "[i].x) <= " + std::to_string(pick(rng, 1, 6))); break;
                default:
                    if (!b.plain.empty())
                        b.atoms.push_back(r + "[i].x " + cmp() + " " + b.plain.front() + ".x");
                    break;
            }
        } else if (kind == 3 && !neg_role.empty() && !b.plain.empty()) {
            auto u = b.plain[static_cast<size_t>(pick(rng, 0, static_cast<int>(b.plain.size()) - 1))];
            b.atoms.push_back(neg_role + ".x " + cmp() + " " + u + ".x");
        }
    }
    return b;
}

}  // namespace

DiffCase random_case(Rng& rng, std::size_t max_events) {
    DiffCase c;
    std::vector<Branch> branches{random_branch(rng, 1)};
    if (chance(rng, 0.2)) branches.push_back(random_branch(rng, 2));
    std::vector<std::string> texts, atoms, iterated;
    std::set<std::string> types;
    for (const auto& b : branches) {
        texts.push_back(b.text);
        atoms.insert(atoms.end(), b.atoms.begin(), b.atoms.end());
        types.insert(b.types.begin(), b.types.end());
        if (!b.iterated.empty()) iterated.push_back(b.iterated);
    }
    std::string text = "PATTERN " + (texts.size() == 1 ? texts.front() : "OR(" + join(texts, ", ") + ")") + "\n";
    if (!atoms.empty()) text += "WHERE skip_till_any_match { " + join(atoms, " AND ") + " }\n";
    text += "WITHIN " + std::to_string(pick(rng, 1, 12)) + " msec\n";
    if (iterated.size() == 1 && chance(rng, 0.3)) text += "GROUPBY " + iterated.front() + ".g\n";
    c.pattern = text;

    std::vector<std::string> tv(types.begin(), types.end());
    static const double rate_choices[] = {1, 2, 5, 10, 50};
    for (const auto& t : tv) c.rates[t] = rate_choices[pick(rng, 0, 4)];
    const int n = pick(rng, 0, static_cast<int>(max_events));
    Timestamp ts = 0;
    for (int i = 0; i < n; ++i) {
        ts += pick(rng, 0, 2);
        const auto& t = tv[static_cast<size_t>(pick(rng, 0, static_cast<int>(tv.size()) - 1))];
        c.stream.push_back(make_event(t, ts, static_cast<SeqNo>(i + 1),
                                      {{"x", static_cast<double>(pick(rng, 0, 3))},
                                       {"g", static_cast<double>(pick(rng, 0, 1))}}));
    }
    return c;
}

std::optional<Divergence> check_case(const DiffCase& c, std::size_t* modes_run) {
    auto chains = to_dnf(parse_pattern(c.pattern));
    auto expected = enumerate_matches(chains, c.stream, false, 64);
    FreqOrder freq = ascending_freq_order(c.rates, pattern_types(chains));
    for (Mode m : kAllModes) {
        if (!applicable(chains, m)) continue;
        if (modes_run) ++*modes_run;
        Divergence d{c, to_string(m), expected, {}, {}};
        try {
            auto res = run_stream(compile(chains, m, freq), c.stream);
            if (res.matches == expected) continue;
            d.actual = std::move(res.matches);
        } catch (const std::exception& e) {
            d.error = e.what();
        }
        return d;
    }
    return std::nullopt;
}

Divergence shrink(Divergence d) {
    // The mode must still disagree for the smaller stream.
    auto still = [&](const DiffCase& c) -> std::optional<Divergence> {
        auto r = check_case(c);
        if (r && r->mode == d.mode) return r;
        return std::nullopt;
    };
    for (bool progress = true; progress;) {
        progress = false;
        for (size_t i = 0; i < d.c.stream.size(); ++i) {
            DiffCase smaller = d.c;
            smaller.stream.erase(smaller.stream.begin() + static_cast<long>(i));
            if (auto r = still(smaller)) {
                d = std::move(*r);
                progress = true;
                break;
            }
        }
    }
    return d;
}

std::string describe(const Divergence& d) {
    std::ostringstream os;
    os << "mode " << d.mode << " disagrees with the oracle\n";
    os << d.c.pattern;
    os << "rates:";
    for (const auto& [t, r] : d.c.rates) os << " " << t << "=" << r;
    os << "\nstream (seq ts type x g):\n";
    for (const auto& e : d.c.stream)
        os << "  " << e->seq << " " << e->ts << " " << e->type.name() << " " << to_string(e->attr(AttrId("x")))
           << " " << to_string(e->attr(AttrId("g"))) << "\n";
    os << "expected " << d.expected.size() << ":\n";
    for (const auto& m : d.expected) os << "  " << key_line(m) << "\n";
    if (!d.error.empty()) {
        os << "error: " << d.error << "\n";
    } else {
        os << "actual " << d.actual.size() << ":\n";
        for (const auto& m : d.actual) os << "  " << key_line(m) << "\n";
    }
    return os.str();
}

DiffReport run_difftest(std::size_t cases, std::uint64_t seed, std::size_t max_events) {
    Rng rng(seed);
    DiffReport rep;
    for (size_t i = 0; i < cases; ++i) {
        DiffCase c = random_case(rng, max_events);
        ++rep.cases;
        auto d = check_case(c, &rep.mode_runs);
        if (d) {
            rep.first = shrink(std::move(*d));
            return rep;
        }
        rep.total_matches += enumerate_matches(to_dnf(parse_pattern(c.pattern)), c.stream, false, 64).size();
    }
    return rep;
}

}  // namespace lazycep
