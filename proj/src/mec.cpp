#include "mdpdistill/mec.hpp"

#include <algorithm>

#include "mdpdistill/graph.hpp"

namespace mdpdistill {

bool Mec::is_internal(std::size_t member, ActionIndex a) const {
    const auto& acts = internal[member];
    return std::binary_search(acts.begin(), acts.end(), a);
}

std::vector<Mec> mec_decompose(const Mdp& mdp) {
    return mec_decompose(mdp, std::vector<char>(mdp.num_states(), 1), std::vector<char>(mdp.num_choices(), 1));
}

std::vector<Mec> mec_decompose(const Mdp& mdp, const std::vector<char>& state_mask,
                               const std::vector<char>& choice_mask) {
    const std::size_t n = mdp.num_states();
    std::vector<char> active = state_mask;
    std::vector<char> allowed(mdp.num_choices(), 0);
    for (StateId s = 0; s < n; ++s) {
        if (!active[s]) continue;
        for (std::size_t g = mdp.first_choice(s); g < mdp.first_choice(s) + mdp.num_actions(s); ++g) {
            allowed[g] = choice_mask[g];
        }
    }

    std::vector<int> comp_of(n, -1);
    std::vector<std::vector<StateId>> components;
    bool changed = true;
    while (changed) {
        changed = false;
        components = strongly_connected_components(n, active, [&](StateId s, const auto& emit) {
            for (std::size_t g = mdp.first_choice(s); g < mdp.first_choice(s) + mdp.num_actions(s); ++g) {
                if (!allowed[g]) continue;
                for (const auto& t : mdp.choice(g).dist) emit(t.target);
            }
        });
        std::fill(comp_of.begin(), comp_of.end(), -1);
        for (std::size_t c = 0; c < components.size(); ++c) {
            for (StateId s : components[c]) comp_of[s] = static_cast<int>(c);
        }
        for (StateId s = 0; s < n; ++s) {
            if (!active[s]) continue;
            bool any = false;
            for (std::size_t g = mdp.first_choice(s); g < mdp.first_choice(s) + mdp.num_actions(s); ++g) {
                if (!allowed[g]) continue;
                for (const auto& t : mdp.choice(g).dist) {
                    if (!active[t.target] || comp_of[t.target] != comp_of[s]) {
                        allowed[g] = 0;
                        changed = true;
                        break;
                    }
                }
                any = any || allowed[g];
            }
            if (!any) {
                active[s] = 0;
                changed = true;
            }
        }
    }

    std::vector<Mec> mecs;
    for (const auto& comp : components) {
        Mec mec;
        for (StateId s : comp) {
            if (!active[s]) continue;
            std::vector<ActionIndex> internal;
            for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
                if (allowed[mdp.first_choice(s) + a]) internal.push_back(a);
            }
            mec.states.push_back(s);
            mec.internal.push_back(std::move(internal));
        }
        if (!mec.states.empty()) mecs.push_back(std::move(mec));
    }
    std::sort(mecs.begin(), mecs.end(), [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
    return mecs;
}

std::vector<int> mec_membership(const std::vector<Mec>& mecs, std::size_t num_states) {
    std::vector<int> of(num_states, -1);
    for (std::size_t i = 0; i < mecs.size(); ++i) {
        for (StateId s : mecs[i].states) of[s] = static_cast<int>(i);
    }
    return of;
}

}  // namespace mdpdistill
