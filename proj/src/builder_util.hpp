#pragma once

#include <set>
#include <string>
#include <vector>

#include "lazycep/nfa.hpp"
#include "lazycep/pattern.hpp"

namespace lazycep::detail {

void declare_roles(Nfa& nfa, const ChainPattern& p);
std::vector<int> slots(const Nfa& nfa, const std::vector<std::string>& roles);
// take-into-R edge for one negated role; ordering filters limited to roles in `bound`
Edge reject_edge(Nfa& nfa, const ChainPattern& p, const Negation& neg, int src, const std::set<std::string>& bound);

}  // namespace lazycep::detail
