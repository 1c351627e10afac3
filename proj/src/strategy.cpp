#include "mdpdistill/strategy.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "mdpdistill/graph.hpp"
#include "mdpdistill/reach.hpp"

namespace mdpdistill {

LiberalStrategy extract_liberal(const Mdp& mdp, const ValueApprox& va, const std::vector<Mec>& mecs,
                                const ExtractOptions& options) {
    const std::size_t n = mdp.num_states();
    const double tol = options.tie_tolerance;
    LiberalStrategy strategy(n);
    const auto mec_of = mec_membership(mecs, n);

    for (StateId s = 0; s < n; ++s) {
        if (!va.explored[s] && !mdp.is_target(s)) continue;
        if (mec_of[s] >= 0) continue;
        const double best = va.state(mdp, s);
        std::vector<ActionIndex> good;
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            if (va.pair(mdp, s, a) >= best - tol) good.push_back(a);
        }
        strategy.set(s, std::move(good));
    }

    const auto reach = can_reach_target(mdp);
    for (std::size_t id = 0; id < mecs.size(); ++id) {
        const Mec& mec = mecs[id];
        double top = 0.0;
        bool relevant = false, touched = false;
        for (StateId s : mec.states) {
            top = std::max(top, va.state(mdp, s));
            relevant = relevant || (reach[s] && !mdp.is_target(s));
            touched = touched || va.explored[s] || mdp.is_target(s);
        }
        if (!touched) continue;

        bool any_exit = false;
        std::vector<std::vector<ActionIndex>> exits(mec.states.size());
        for (std::size_t i = 0; i < mec.states.size(); ++i) {
            StateId s = mec.states[i];
            for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
                if (!mec.is_internal(i, a) && va.pair(mdp, s, a) >= top - tol) exits[i].push_back(a);
            }
            any_exit = any_exit || !exits[i].empty();
        }
        if (!any_exit && relevant) {
            std::ostringstream msg;
            msg << "MEC " << id << " (containing state " << mec.states.front() << ") has no exit";
            throw NoExitError(id, msg.str());
        }

        for (std::size_t i = 0; i < mec.states.size(); ++i) {
            StateId s = mec.states[i];
            if (!exits[i].empty()) {
                auto good = exits[i];
                if (options.exit_union) good.insert(good.end(), mec.internal[i].begin(), mec.internal[i].end());
                strategy.set(s, std::move(good));
            } else {
                strategy.set(s, mec.internal[i]);
            }
        }
    }
    return strategy;
}

double evaluate(const Mdp& mdp, const LiberalStrategy& strategy) {
    const auto chain = induce_chain(mdp, strategy);
    return reach_exact(chain, mdp.target_mask())[mdp.initial()];
}

TruncateMode parse_truncate_mode(const std::string& text) {
    if (text == "keep-all") return TruncateMode::KeepAll;
    if (text == "keep-argmax") return TruncateMode::KeepArgmax;
    throw std::invalid_argument("unknown truncate mode '" + text + "' (expected keep-all or keep-argmax)");
}

LiberalStrategy truncate(const Mdp& mdp, const LiberalStrategy& strategy, std::span<const double> importance,
                         double delta, TruncateMode mode) {
    LiberalStrategy out = strategy;
    for (StateId s = 0; s < strategy.size(); ++s) {
        const double imp = s < importance.size() ? importance[s] : 0.0;
        if (imp > delta) continue;
        if (mode == TruncateMode::KeepAll) {
            out.clear(s);
        } else {
            std::vector<ActionIndex> all(mdp.num_actions(s));
            for (ActionIndex a = 0; a < all.size(); ++a) all[a] = a;
            out.set(s, std::move(all));
        }
    }
    return out;
}

void write_strategy_tsv(std::ostream& out, const Mdp& mdp, const LiberalStrategy& strategy,
                        std::span<const double> importance) {
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        const double imp = s < importance.size() ? importance[s] : 0.0;
        if (!strategy.defined(s) && imp <= 0.0) continue;
        const std::string valuation = mdp.describe_state(s);
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            const auto& attr = mdp.action(s, a).attr;
            const bool good = !strategy.defined(s) || strategy.is_good(s, a);
            out << s << '\t' << valuation << '\t' << mdp.action_name(attr) << '\t' << attr.module << '\t'
                << (good ? "good" : "bad") << '\t' << imp << '\n';
        }
    }
}

}  // namespace mdpdistill
