#pragma once

#include <vector>

#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

/// Maximal end component: a state set with, per member, the internal actions Act'(s)
/// (exactly those enabled actions whose support stays inside the set).
struct Mec {
    std::vector<StateId> states;                   // ascending
    std::vector<std::vector<ActionIndex>> internal;  // parallel to states, ascending

    bool is_internal(std::size_t member, ActionIndex a) const;
};

/// All maximal end components, ordered by their smallest state.
std::vector<Mec> mec_decompose(const Mdp& mdp);

/// MEC decomposition of the sub-MDP induced by the states with state_mask set and the
/// actions (global choice index) with choice_mask set. Used for on-the-fly deflation.
std::vector<Mec> mec_decompose(const Mdp& mdp, const std::vector<char>& state_mask,
                               const std::vector<char>& choice_mask);

/// mec_of[s] = index of the MEC containing s, or -1.
std::vector<int> mec_membership(const std::vector<Mec>& mecs, std::size_t num_states);

}  // namespace mdpdistill
