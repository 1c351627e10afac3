#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

/// Callback enumerating the successors of a node: visit(node, emit).
using SuccessorFn = std::function<void(StateId, const std::function<void(StateId)>&)>;

/// Iterative Tarjan over the nodes with active[node] set. Components are returned in
/// reverse topological order (every edge leaving a component points to an earlier one);
/// node lists within a component are sorted ascending.
std::vector<std::vector<StateId>> strongly_connected_components(std::size_t num_nodes, const std::vector<char>& active,
                                                                const SuccessorFn& successors);

/// Nodes from which some node in `goal` is reachable (backward closure), restricted to active nodes.
std::vector<char> backward_reachable(std::size_t num_nodes, const std::vector<char>& goal,
                                     const std::vector<std::vector<StateId>>& predecessors);

/// States from which F is reachable under some strategy (graph analysis, no numerics).
/// Complement is the set of states with maximal reachability value 0.
std::vector<char> can_reach_target(const Mdp& mdp);

/// States from which some strategy reaches F with probability 1 (nested graph fixpoint).
std::vector<char> reach_almost_surely(const Mdp& mdp);

/// Locations of a chain from which F is reachable.
std::vector<char> can_reach_target(const MarkovChain& chain, const std::vector<char>& target);

/// Forward closure from `start`.
std::vector<char> forward_reachable(const MarkovChain& chain, StateId start);

}  // namespace mdpdistill
