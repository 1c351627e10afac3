#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdpdistill/mdp.hpp"
#include "mdpdistill/mec.hpp"
#include "mdpdistill/solver.hpp"

namespace mdpdistill {

/// A relevant MEC without an exit among explored states.
class NoExitError : public std::runtime_error {
   public:
    NoExitError(std::size_t mec_id, const std::string& what) : std::runtime_error(what), mec_id(mec_id) {}
    std::size_t mec_id;
};

struct ExtractOptions {
    double tie_tolerance = 1e-9;
    /// Exit states additionally keep their internal actions.
    bool exit_union = false;
};

/// Liberal strategy from a valid underapproximation: argmax outside MECs; inside a MEC,
/// maximal-external actions at exits and internal actions elsewhere. Unexplored states stay
/// undefined.
LiberalStrategy extract_liberal(const Mdp& mdp, const ValueApprox& va, const std::vector<Mec>& mecs,
                                const ExtractOptions& options = {});

/// Pr[reach target] from the initial state under the uniform reading of the strategy.
double evaluate(const Mdp& mdp, const LiberalStrategy& strategy);

enum class TruncateMode {
    KeepAll,    // truncated states become don't-care (undefined)
    KeepArgmax  // truncated states keep every enabled action explicitly
};

TruncateMode parse_truncate_mode(const std::string& text);

/// Replaces the choice at every state with importance <= delta. States absent from
/// `importance` count as importance 0.
LiberalStrategy truncate(const Mdp& mdp, const LiberalStrategy& strategy, std::span<const double> importance,
                         double delta, TruncateMode mode);

/// TSV dump: state_id, valuation, action, module, good|bad, importance. One line per enabled
/// action of every defined or important state; don't-care states list all actions as good.
void write_strategy_tsv(std::ostream& out, const Mdp& mdp, const LiberalStrategy& strategy,
                        std::span<const double> importance);

}  // namespace mdpdistill
