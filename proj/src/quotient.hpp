#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mdpdistill/mdp.hpp"
#include "mdpdistill/mec.hpp"

namespace mdpdistill::detail {

/// MDP with every MEC collapsed into a single block and internal actions removed.
/// Apart from target and trap sinks the quotient has no end components, so Bellman
/// iteration has a unique fixpoint and every memoryless policy is absorbing.
struct Quotient {
    struct Action {
        std::size_t origin;  // global choice index in the original MDP
        std::vector<std::pair<std::uint32_t, double>> dist;
    };

    std::vector<std::uint32_t> block_of;
    std::size_t num_blocks = 0;
    std::vector<std::size_t> action_begin{0};
    std::vector<Action> actions;
    std::vector<char> target;
    std::vector<char> zero;  // no path to target
    std::uint32_t initial = 0;

    std::size_t num_actions(std::uint32_t b) const { return action_begin[b + 1] - action_begin[b]; }
};

Quotient build_quotient(const Mdp& mdp, const std::vector<Mec>& mecs);

}  // namespace mdpdistill::detail
