#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpdistill/mdp.hpp"
#include "mdpdistill/mec.hpp"

namespace mdpdistill {

/// Per state-action lower bounds V(s,a) (and optional upper bounds), indexed by global choice.
/// Entries of unexplored states are 0 in `lower`, matching the implicit V(s,.) = 0 reading;
/// target states always carry 1.
struct ValueApprox {
    std::vector<double> lower;
    std::optional<std::vector<double>> upper;
    std::vector<char> explored;
    double epsilon = 0.0;
    bool converged = false;
    double gap = 1.0;  // U(init) - V(init) at termination
    std::size_t iterations = 0;

    double pair(const Mdp& mdp, StateId s, ActionIndex a) const { return lower[mdp.first_choice(s) + a]; }
    /// V(s) = max_a V(s,a).
    double state(const Mdp& mdp, StateId s) const;
    /// max_a U(s,a); 1 when no upper bounds are kept.
    double upper_state(const Mdp& mdp, StateId s) const;
    std::size_t explored_count() const;
};

struct ViOptions {
    /// Stops early (converged = false) after this many Gauss-Seidel sweeps.
    std::size_t max_sweeps = 50'000'000;
};

/// Interval iteration on the MEC quotient: lower bounds start from the target indicator,
/// upper bounds from 1 (0 on states that cannot reach the target); stops once the gap at the
/// initial state is below eps, so Val(init) - V(init) <= eps holds soundly.
ValueApprox value_iteration(const Mdp& mdp, double eps, const ViOptions& options = {});

struct BrtdpOptions {
    std::uint64_t seed = 0;
    /// Per-path step bound; 0 selects 10 * |explored| + 1000.
    std::size_t max_steps = 0;
    std::size_t max_paths = 2'000'000;
};

/// Simulation-guided partial exploration with lower/upper bounds. Paths follow upper-bound-greedy
/// actions and gap-weighted successors; bounds are backed up in reverse along each path; end
/// components found among explored states are deflated to their best exit. Only explored
/// states carry non-trivial entries.
ValueApprox brtdp(const Mdp& mdp, double eps, const BrtdpOptions& options = {});

struct ValidityReport {
    bool ok = true;
    int condition = 0;  // 1..4 of the first violated condition
    StateId state = 0;
    ActionIndex action = 0;
    std::string message;
};

/// Checks the four valid-underapproximation conditions against exact values Val(s).
/// Condition 4 is only enforced for explored, non-target MECs from which the target is reachable.
ValidityReport check_valid(const Mdp& mdp, const ValueApprox& va, const std::vector<double>& exact,
                           double tolerance = 1e-9);

}  // namespace mdpdistill
