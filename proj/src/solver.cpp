#include "mdpdistill/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mdpdistill/graph.hpp"
#include "mdpdistill/reach.hpp"
#include "quotient.hpp"
#include "rng.hpp"

namespace mdpdistill {

double ValueApprox::state(const Mdp& mdp, StateId s) const {
    double best = 0.0;
    for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) best = std::max(best, pair(mdp, s, a));
    return best;
}

double ValueApprox::upper_state(const Mdp& mdp, StateId s) const {
    if (!upper) return 1.0;
    double best = 0.0;
    for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) best = std::max(best, (*upper)[mdp.first_choice(s) + a]);
    return best;
}

std::size_t ValueApprox::explored_count() const {
    return static_cast<std::size_t>(std::count(explored.begin(), explored.end(), 1));
}

ValueApprox value_iteration(const Mdp& mdp, double eps, const ViOptions& options) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const auto mecs = mec_decompose(mdp);
    const auto q = detail::build_quotient(mdp, mecs);
    const std::size_t nb = q.num_blocks;

    std::vector<double> lo(nb, 0.0), hi(nb, 1.0);
    for (std::size_t b = 0; b < nb; ++b) {
        if (q.target[b]) {
            lo[b] = 1.0;
        } else if (q.zero[b] || q.num_actions(static_cast<std::uint32_t>(b)) == 0) {
            hi[b] = 0.0;
        }
    }

    const auto sure = reach_almost_surely(mdp);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (sure[s]) lo[q.block_of[s]] = 1.0;
    }

    // Sweep order: breadth-first distance from the target, nearest first.
    std::vector<std::uint32_t> order;
    {
        std::vector<std::vector<std::uint32_t>> pred(nb);
        for (std::uint32_t b = 0; b < nb; ++b) {
            for (std::size_t k = q.action_begin[b]; k < q.action_begin[b + 1]; ++k) {
                for (const auto& e : q.actions[k].dist) pred[e.first].push_back(b);
            }
        }
        std::vector<char> seen(q.target.begin(), q.target.end());
        std::vector<std::uint32_t> queue;
        for (std::uint32_t b = 0; b < nb; ++b) {
            if (seen[b]) queue.push_back(b);
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (std::uint32_t p : pred[queue[head]]) {
                if (seen[p]) continue;
                seen[p] = 1;
                queue.push_back(p);
                order.push_back(p);
            }
        }
    }

    ValueApprox va;
    va.epsilon = eps;
    std::size_t sweeps = 0;
    while (hi[q.initial] - lo[q.initial] >= eps && sweeps < options.max_sweeps) {
        for (std::uint32_t b : order) {
            double best_lo = 0.0, best_hi = 0.0;
            for (std::size_t k = q.action_begin[b]; k < q.action_begin[b + 1]; ++k) {
                double l = 0.0, h = 0.0;
                for (const auto& [c, p] : q.actions[k].dist) {
                    l += p * lo[c];
                    h += p * hi[c];
                }
                best_lo = std::max(best_lo, l);
                best_hi = std::max(best_hi, h);
            }
            lo[b] = std::max(lo[b], std::min(best_lo, 1.0));
            hi[b] = std::min(hi[b], best_hi);
        }
        ++sweeps;
    }

    va.iterations = sweeps;
    va.gap = hi[q.initial] - lo[q.initial];
    va.converged = va.gap < eps;
    va.lower.assign(mdp.num_choices(), 0.0);
    va.upper.emplace(mdp.num_choices(), 0.0);
    for (std::size_t g = 0; g < mdp.num_choices(); ++g) {
        double l = 0.0, h = 0.0;
        for (const auto& t : mdp.choice(g).dist) {
            l += t.prob * lo[q.block_of[t.target]];
            h += t.prob * hi[q.block_of[t.target]];
        }
        va.lower[g] = std::min(l, 1.0);
        (*va.upper)[g] = std::min(h, 1.0);
    }
    va.explored.assign(mdp.num_states(), 1);
    return va;
}

namespace {

class Brtdp {
   public:
    Brtdp(const Mdp& mdp, double eps, const BrtdpOptions& options)
        : mdp_(mdp),
          eps_(eps),
          options_(options),
          zero_(mdp.num_states(), 0),
          explored_(mdp.num_states(), 0),
          lo_(mdp.num_choices(), 0.0),
          hi_(mdp.num_choices(), 1.0),
          state_lo_(mdp.num_states(), 0.0),
          state_hi_(mdp.num_states(), 1.0),
          stamp_(mdp.num_states(), 0),
          rng_(options.seed) {
        const auto reach = can_reach_target(mdp);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (mdp.is_target(s)) {
                state_lo_[s] = 1.0;
                lo_[mdp.first_choice(s)] = 1.0;
            } else if (!reach[s]) {
                zero_[s] = 1;
                state_hi_[s] = 0.0;
                for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) hi_[mdp.first_choice(s) + a] = 0.0;
            }
        }
    }

    ValueApprox run() {
        const StateId init = mdp_.initial();
        visit(init);
        std::size_t paths = 0;
        std::size_t next_periodic = 1;
        while (gap(init) >= eps_ && paths < options_.max_paths) {
            bool needs_deflation = sample_path(static_cast<std::uint32_t>(paths + 1));
            ++paths;
            if (paths == next_periodic) {
                needs_deflation = true;
                next_periodic *= 2;
            }
            if (needs_deflation) deflate();
        }

        ValueApprox va;
        va.epsilon = eps_;
        va.iterations = paths;
        va.gap = gap(init);
        va.converged = va.gap < eps_;
        va.lower = lo_;
        va.upper = hi_;
        va.explored = explored_;
        return va;
    }

   private:
    double gap(StateId s) const { return state_hi_[s] - state_lo_[s]; }
    bool terminal(StateId s) const { return mdp_.is_target(s) || zero_[s] || state_hi_[s] <= 0.0; }

    void visit(StateId s) {
        if (explored_[s]) return;
        explored_[s] = 1;
        ++explored_count_;
        if (!mdp_.is_target(s) && !zero_[s]) backup(s);
    }

    void backup(StateId s) {
        double best_lo = 0.0, best_hi = 0.0;
        for (std::size_t g = mdp_.first_choice(s); g < mdp_.first_choice(s) + mdp_.num_actions(s); ++g) {
            double l = 0.0, h = 0.0;
            for (const auto& t : mdp_.choice(g).dist) {
                l += t.prob * state_lo_[t.target];
                h += t.prob * state_hi_[t.target];
            }
            lo_[g] = std::max(lo_[g], std::min(l, 1.0));
            hi_[g] = std::min(hi_[g], h);
            best_lo = std::max(best_lo, lo_[g]);
            best_hi = std::max(best_hi, hi_[g]);
        }
        state_lo_[s] = std::max(state_lo_[s], best_lo);
        state_hi_[s] = best_hi;
    }

    // Returns true when the path revisited a state or hit the step bound.
    bool sample_path(std::uint32_t path_id) {
        std::size_t limit = options_.max_steps;
        if (limit == 0) limit = 10 * explored_count_ + 1000;
        path_.clear();
        StateId s = mdp_.initial();
        bool cycle = false;
        std::vector<ActionIndex> ties;
        while (true) {
            visit(s);
            if (terminal(s)) break;
            path_.push_back(s);
            if (stamp_[s] == path_id) cycle = true;
            stamp_[s] = path_id;
            if (path_.size() >= limit) {
                cycle = true;
                break;
            }

            const std::size_t first = mdp_.first_choice(s);
            double best = -1.0;
            for (ActionIndex a = 0; a < mdp_.num_actions(s); ++a) best = std::max(best, hi_[first + a]);
            ties.clear();
            for (ActionIndex a = 0; a < mdp_.num_actions(s); ++a) {
                if (hi_[first + a] >= best - 1e-12) ties.push_back(a);
            }
            const ActionIndex a = ties[detail::uniform_index(rng_, ties.size())];

            const auto& dist = mdp_.action(s, a).dist;
            double total = 0.0;
            for (const auto& t : dist) total += t.prob * gap(t.target);
            if (total <= 1e-15) break;
            double r = detail::uniform_real(rng_) * total;
            StateId next = dist.back().target;
            for (const auto& t : dist) {
                const double w = t.prob * gap(t.target);
                if (w <= 0.0) continue;
                if (r < w) {
                    next = t.target;
                    break;
                }
                r -= w;
                next = t.target;
            }
            s = next;
        }
        for (auto it = path_.rbegin(); it != path_.rend(); ++it) backup(*it);
        return cycle;
    }

    // Collapses end components of the explored fragment to their best exit upper bound.
    void deflate() {
        const std::size_t n = mdp_.num_states();
        std::vector<char> states(n, 0);
        for (StateId s = 0; s < n; ++s) states[s] = explored_[s] && !mdp_.is_target(s) && !zero_[s];
        std::vector<char> choices(mdp_.num_choices(), 0);
        for (StateId s = 0; s < n; ++s) {
            if (!states[s]) continue;
            for (std::size_t g = mdp_.first_choice(s); g < mdp_.first_choice(s) + mdp_.num_actions(s); ++g) {
                const auto& dist = mdp_.choice(g).dist;
                choices[g] = std::all_of(dist.begin(), dist.end(), [&](const Transition& t) { return states[t.target] != 0; });
            }
        }
        for (const auto& mec : mec_decompose(mdp_, states, choices)) {
            double exit = 0.0;
            for (std::size_t i = 0; i < mec.states.size(); ++i) {
                StateId s = mec.states[i];
                for (ActionIndex a = 0; a < mdp_.num_actions(s); ++a) {
                    if (!mec.is_internal(i, a)) exit = std::max(exit, hi_[mdp_.first_choice(s) + a]);
                }
            }
            for (std::size_t i = 0; i < mec.states.size(); ++i) {
                StateId s = mec.states[i];
                double best = 0.0;
                for (ActionIndex a = 0; a < mdp_.num_actions(s); ++a) {
                    auto& h = hi_[mdp_.first_choice(s) + a];
                    if (mec.is_internal(i, a)) h = std::min(h, exit);
                    best = std::max(best, h);
                }
                state_hi_[s] = best;
            }
        }
    }

    const Mdp& mdp_;
    double eps_;
    BrtdpOptions options_;
    std::vector<char> zero_;
    std::vector<char> explored_;
    std::size_t explored_count_ = 0;
    std::vector<double> lo_, hi_;
    std::vector<double> state_lo_, state_hi_;
    std::vector<std::uint32_t> stamp_;
    std::vector<StateId> path_;
    std::mt19937_64 rng_;
};

}  // namespace

ValueApprox brtdp(const Mdp& mdp, double eps, const BrtdpOptions& options) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    return Brtdp(mdp, eps, options).run();
}

ValidityReport check_valid(const Mdp& mdp, const ValueApprox& va, const std::vector<double>& exact, double tolerance) {
    ValidityReport report;
    auto fail = [&](int condition, StateId s, ActionIndex a, const std::string& what) {
        report.ok = false;
        report.condition = condition;
        report.state = s;
        report.action = a;
        std::ostringstream msg;
        msg << "condition " << condition << " violated at state " << s << " (" << mdp.describe_state(s) << ")";
        if (condition != 2 && condition != 4) msg << ", action " << mdp.action_name(mdp.action(s, a).attr);
        msg << ": " << what;
        report.message = msg.str();
        return report;
    };

    const auto val_pair = pair_values(mdp, exact);
    const std::size_t n = mdp.num_states();
    for (StateId s = 0; s < n; ++s) {
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            const std::size_t g = mdp.first_choice(s) + a;
            if (va.lower[g] > val_pair[g] + tolerance) {
                std::ostringstream what;
                what << "V=" << va.lower[g] << " > Val=" << val_pair[g];
                return fail(1, s, a, what.str());
            }
        }
    }

    const StateId init = mdp.initial();
    if (exact[init] - va.state(mdp, init) > va.epsilon + tolerance) {
        std::ostringstream what;
        what << "Val(init)-V(init)=" << exact[init] - va.state(mdp, init) << " > eps=" << va.epsilon;
        return fail(2, init, 0, what.str());
    }

    std::vector<double> vs(n);
    for (StateId s = 0; s < n; ++s) vs[s] = va.state(mdp, s);
    for (StateId s = 0; s < n; ++s) {
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            const std::size_t g = mdp.first_choice(s) + a;
            double rhs = 0.0;
            for (const auto& t : mdp.choice(g).dist) rhs += t.prob * vs[t.target];
            if (va.lower[g] > rhs + tolerance) {
                std::ostringstream what;
                what << "V=" << va.lower[g] << " > backup=" << rhs;
                return fail(3, s, a, what.str());
            }
        }
    }

    const auto reach = can_reach_target(mdp);
    const auto mecs = mec_decompose(mdp);
    for (const auto& mec : mecs) {
        bool relevant = false, touched = false;
        for (StateId s : mec.states) {
            relevant = relevant || (reach[s] && !mdp.is_target(s));
            touched = touched || va.explored[s];
        }
        if (!relevant || !touched) continue;
        double top = 0.0;
        for (StateId s : mec.states) top = std::max(top, vs[s]);
        bool has_exit = false;
        for (std::size_t i = 0; i < mec.states.size() && !has_exit; ++i) {
            StateId s = mec.states[i];
            for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
                if (!mec.is_internal(i, a) && va.pair(mdp, s, a) >= top - tolerance) {
                    has_exit = true;
                    break;
                }
            }
        }
        if (!has_exit) return fail(4, mec.states.front(), 0, "MEC has no maximal-external pair");
    }
    return report;
}

}  // namespace mdpdistill
