#pragma once

#include <cstddef>
#include <vector>

#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

struct ReachOptions {
    /// Components up to this many unknowns are solved directly (sparse LU); larger ones by
    /// Gauss-Seidel to a residual below `residual`.
    std::size_t direct_cutoff = 200000;
    double residual = 1e-12;
};

/// Play of the MDP under the uniform reading of a liberal strategy (don't-care states:
/// uniform over Act(s)); Dirac initial distribution at the MDP's initial state.
MarkovChain induce_chain(const Mdp& mdp, const LiberalStrategy& strategy);

/// Pr_l[reach target] for every location. Locations with no path to the target get exactly 0,
/// target locations exactly 1; the rest are solved component-by-component in topological order,
/// so the value at a location depends only on the part of the chain reachable from it.
std::vector<double> reach_exact(const MarkovChain& chain, const std::vector<char>& target,
                                const ReachOptions& options = {});

/// Maximal reachability value Val(s) for every state. Policy iteration with exact linear solves
/// on the MEC quotient, where every memoryless policy is absorbing.
std::vector<double> max_reach_exact(const Mdp& mdp, const ReachOptions& options = {});

/// Val(s,a) = sum_s' delta(s,a)(s') * val(s'), indexed by global choice.
std::vector<double> pair_values(const Mdp& mdp, const std::vector<double>& state_values);

}  // namespace mdpdistill
