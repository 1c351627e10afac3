#include "quotient.hpp"

#include <algorithm>
#include <limits>

#include "mdpdistill/graph.hpp"

namespace mdpdistill::detail {

Quotient build_quotient(const Mdp& mdp, const std::vector<Mec>& mecs) {
    const std::size_t n = mdp.num_states();
    constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
    Quotient q;
    q.block_of.assign(n, kNone);

    const auto mec_of = mec_membership(mecs, n);
    std::vector<std::vector<StateId>> members;
    for (StateId s = 0; s < n; ++s) {
        if (q.block_of[s] != kNone) continue;
        const auto b = static_cast<std::uint32_t>(members.size());
        if (mec_of[s] >= 0) {
            const auto& mec = mecs[static_cast<std::size_t>(mec_of[s])];
            for (StateId m : mec.states) q.block_of[m] = b;
            members.push_back(mec.states);
        } else {
            q.block_of[s] = b;
            members.push_back({s});
        }
    }
    q.num_blocks = members.size();
    q.target.assign(q.num_blocks, 0);
    q.initial = q.block_of[mdp.initial()];

    for (std::uint32_t b = 0; b < q.num_blocks; ++b) {
        const int mec = mec_of[members[b].front()];
        for (std::size_t i = 0; i < members[b].size(); ++i) {
            StateId s = members[b][i];
            if (mdp.is_target(s)) q.target[b] = 1;
            if (mdp.is_target(s)) continue;
            for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
                if (mec >= 0 && mecs[static_cast<std::size_t>(mec)].is_internal(i, a)) continue;
                Quotient::Action qa{mdp.first_choice(s) + a, {}};
                for (const auto& t : mdp.action(s, a).dist) qa.dist.emplace_back(q.block_of[t.target], t.prob);
                std::sort(qa.dist.begin(), qa.dist.end());
                std::vector<std::pair<std::uint32_t, double>> merged;
                for (const auto& e : qa.dist) {
                    if (!merged.empty() && merged.back().first == e.first) {
                        merged.back().second += e.second;
                    } else {
                        merged.push_back(e);
                    }
                }
                qa.dist = std::move(merged);
                q.actions.push_back(std::move(qa));
            }
        }
        q.action_begin.push_back(q.actions.size());
    }

    std::vector<std::vector<StateId>> pred(q.num_blocks);
    for (std::uint32_t b = 0; b < q.num_blocks; ++b) {
        for (std::size_t k = q.action_begin[b]; k < q.action_begin[b + 1]; ++k) {
            for (const auto& [c, p] : q.actions[k].dist) pred[c].push_back(b);
        }
    }
    auto reach = backward_reachable(q.num_blocks, q.target, pred);
    q.zero.resize(q.num_blocks);
    for (std::size_t b = 0; b < q.num_blocks; ++b) q.zero[b] = reach[b] ? 0 : 1;
    return q;
}

}  // namespace mdpdistill::detail
