#include "mdpdistill/reach.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>

#include "mdpdistill/graph.hpp"
#include "mdpdistill/mec.hpp"
#include "quotient.hpp"

namespace mdpdistill {

namespace {

constexpr std::size_t kDenseCutoff = 48;

// Solves x = P_cc x + b on one strongly connected component.
void solve_component(const MarkovChain& chain, const std::vector<StateId>& comp, const std::vector<int>& local,
                     std::vector<double>& x, const ReachOptions& options) {
    const auto k = comp.size();
    std::vector<double> rhs(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        StateId l = comp[i];
        auto succ = chain.successors(l);
        auto prob = chain.probabilities(l);
        for (std::size_t j = 0; j < succ.size(); ++j) {
            if (local[succ[j]] < 0) rhs[i] += prob[j] * x[succ[j]];
        }
    }

    if (k == 1) {
        StateId l = comp[0];
        double self = 0.0;
        auto succ = chain.successors(l);
        auto prob = chain.probabilities(l);
        for (std::size_t j = 0; j < succ.size(); ++j) {
            if (succ[j] == l) self += prob[j];
        }
        x[l] = rhs[0] / (1.0 - self);
        return;
    }

    if (k <= kDenseCutoff) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        Eigen::VectorXd b(static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i) {
            b(static_cast<Eigen::Index>(i)) = rhs[i];
            auto succ = chain.successors(comp[i]);
            auto prob = chain.probabilities(comp[i]);
            for (std::size_t j = 0; j < succ.size(); ++j) {
                if (local[succ[j]] >= 0) a(static_cast<Eigen::Index>(i), local[succ[j]]) -= prob[j];
            }
        }
        Eigen::VectorXd sol = a.partialPivLu().solve(b);
        for (std::size_t i = 0; i < k; ++i) x[comp[i]] = sol(static_cast<Eigen::Index>(i));
        return;
    }

    if (k <= options.direct_cutoff) {
        std::vector<Eigen::Triplet<double>> entries;
        for (std::size_t i = 0; i < k; ++i) {
            const auto row = static_cast<int>(i);
            entries.emplace_back(row, row, 1.0);
            auto succ = chain.successors(comp[i]);
            auto prob = chain.probabilities(comp[i]);
            for (std::size_t j = 0; j < succ.size(); ++j) {
                if (local[succ[j]] >= 0) entries.emplace_back(row, local[succ[j]], -prob[j]);
            }
        }
        Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        a.setFromTriplets(entries.begin(), entries.end());
        a.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        assert(lu.info() == Eigen::Success && "singular reachability system after zero-set elimination");
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(k));
        Eigen::VectorXd sol = lu.solve(b);
        for (std::size_t i = 0; i < k; ++i) x[comp[i]] = sol(static_cast<Eigen::Index>(i));
        return;
    }

    // Gauss-Seidel from below; monotone for substochastic systems.
    for (std::size_t i = 0; i < k; ++i) x[comp[i]] = 0.0;
    for (std::size_t sweep = 0; sweep < 100000000; ++sweep) {
        double change = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            StateId l = comp[i];
            double acc = rhs[i];
            double self = 0.0;
            auto succ = chain.successors(l);
            auto prob = chain.probabilities(l);
            for (std::size_t j = 0; j < succ.size(); ++j) {
                if (succ[j] == l) {
                    self += prob[j];
                } else if (local[succ[j]] >= 0) {
                    acc += prob[j] * x[succ[j]];
                }
            }
            double v = acc / (1.0 - self);
            change = std::max(change, std::abs(v - x[l]));
            x[l] = v;
        }
        if (change < options.residual) break;
    }
}

}  // namespace

MarkovChain induce_chain(const Mdp& mdp, const LiberalStrategy& strategy) {
    MarkovChain chain;
    const std::size_t n = mdp.num_states();
    chain.initial = mdp.initial();
    chain.row_begin.reserve(n + 1);
    std::map<StateId, double> row;
    std::vector<ActionIndex> all;
    for (StateId s = 0; s < n; ++s) {
        row.clear();
        std::span<const ActionIndex> chosen = strategy.good(s);
        if (chosen.empty()) {
            all.resize(mdp.num_actions(s));
            for (ActionIndex a = 0; a < all.size(); ++a) all[a] = a;
            chosen = all;
        }
        const double w = 1.0 / static_cast<double>(chosen.size());
        for (ActionIndex a : chosen) {
            for (const auto& t : mdp.action(s, a).dist) row[t.target] += w * t.prob;
        }
        for (const auto& [target, p] : row) {
            chain.col.push_back(target);
            chain.prob.push_back(p);
        }
        chain.row_begin.push_back(chain.col.size());
    }
    return chain;
}

std::vector<double> reach_exact(const MarkovChain& chain, const std::vector<char>& target, const ReachOptions& options) {
    const std::size_t n = chain.size();
    std::vector<double> x(n, 0.0);
    auto reach = can_reach_target(chain, target);
    std::vector<char> stuck(n, 0);
    for (StateId l = 0; l < n; ++l) stuck[l] = !reach[l];
    const auto may_fail = can_reach_target(chain, stuck);
    std::vector<char> unknown(n, 0);
    for (StateId l = 0; l < n; ++l) {
        if (target[l] || (reach[l] && !may_fail[l])) {
            x[l] = 1.0;
        } else if (reach[l]) {
            unknown[l] = 1;
        }
    }
    auto comps = strongly_connected_components(n, unknown, [&](StateId l, const auto& emit) {
        for (StateId m : chain.successors(l)) emit(m);
    });
    std::vector<int> local(n, -1);
    for (const auto& comp : comps) {
        for (std::size_t i = 0; i < comp.size(); ++i) local[comp[i]] = static_cast<int>(i);
        solve_component(chain, comp, local, x, options);
        for (StateId l : comp) {
            local[l] = -1;
            x[l] = std::clamp(x[l], 0.0, 1.0);
        }
    }
    return x;
}

std::vector<double> pair_values(const Mdp& mdp, const std::vector<double>& state_values) {
    std::vector<double> out(mdp.num_choices(), 0.0);
    for (std::size_t g = 0; g < mdp.num_choices(); ++g) {
        double v = 0.0;
        for (const auto& t : mdp.choice(g).dist) v += t.prob * state_values[t.target];
        out[g] = v;
    }
    return out;
}

std::vector<double> max_reach_exact(const Mdp& mdp, const ReachOptions& options) {
    const auto mecs = mec_decompose(mdp);
    const auto q = detail::build_quotient(mdp, mecs);
    const std::size_t nb = q.num_blocks;

    // Attractor policy: pick an action that makes progress toward the target.
    std::vector<std::size_t> policy(nb, 0);
    {
        std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> pred(nb);
        for (std::uint32_t b = 0; b < nb; ++b) {
            for (std::size_t k = 0; k < q.num_actions(b); ++k) {
                for (const auto& e : q.actions[q.action_begin[b] + k].dist) pred[e.first].emplace_back(b, k);
            }
        }
        std::vector<char> seen(q.target.begin(), q.target.end());
        std::vector<std::uint32_t> queue;
        for (std::uint32_t b = 0; b < nb; ++b) {
            if (seen[b]) queue.push_back(b);
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (const auto& [b, k] : pred[queue[head]]) {
                if (seen[b]) continue;
                seen[b] = 1;
                policy[b] = k;
                queue.push_back(b);
            }
        }
    }

    std::vector<char> target(q.target.begin(), q.target.end());
    std::vector<double> x(nb, 0.0);
    auto evaluate_policy = [&]() {
        MarkovChain chain;
        chain.initial = q.initial;
        for (std::uint32_t b = 0; b < nb; ++b) {
            if (q.num_actions(b) == 0 || q.zero[b]) {
                chain.col.push_back(b);
                chain.prob.push_back(1.0);
            } else {
                for (const auto& [c, p] : q.actions[q.action_begin[b] + policy[b]].dist) {
                    chain.col.push_back(c);
                    chain.prob.push_back(p);
                }
            }
            chain.row_begin.push_back(chain.col.size());
        }
        x = reach_exact(chain, target, options);
    };

    constexpr double kImprove = 1e-13;
    for (std::size_t round = 0; round < 100000; ++round) {
        evaluate_policy();
        bool changed = false;
        for (std::uint32_t b = 0; b < nb; ++b) {
            if (q.num_actions(b) == 0 || q.zero[b]) continue;
            double current = 0.0;
            for (const auto& [c, p] : q.actions[q.action_begin[b] + policy[b]].dist) current += p * x[c];
            for (std::size_t k = 0; k < q.num_actions(b); ++k) {
                double v = 0.0;
                for (const auto& [c, p] : q.actions[q.action_begin[b] + k].dist) v += p * x[c];
                if (v > current + kImprove) {
                    current = v;
                    policy[b] = k;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    std::vector<double> val(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) val[s] = x[q.block_of[s]];
    return val;
}

}  // namespace mdpdistill
