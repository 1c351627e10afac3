#include "mdpdistill/graph.hpp"

#include <algorithm>
#include <limits>

namespace mdpdistill {

std::vector<std::vector<StateId>> strongly_connected_components(std::size_t num_nodes, const std::vector<char>& active,
                                                                const SuccessorFn& successors) {
    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(num_nodes, kUnvisited);
    std::vector<std::uint32_t> lowlink(num_nodes, 0);
    std::vector<char> on_stack(num_nodes, 0);
    std::vector<StateId> stack;
    std::vector<std::vector<StateId>> components;

    struct Frame {
        StateId node;
        std::vector<StateId> succ;
        std::size_t next = 0;
    };
    std::vector<Frame> call;
    std::uint32_t counter = 0;

    auto push = [&](StateId v) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
        Frame f{v, {}, 0};
        successors(v, [&](StateId w) {
            if (active[w]) f.succ.push_back(w);
        });
        call.push_back(std::move(f));
    };

    for (StateId root = 0; root < num_nodes; ++root) {
        if (!active[root] || index[root] != kUnvisited) continue;
        push(root);
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next < f.succ.size()) {
                StateId w = f.succ[f.next++];
                if (index[w] == kUnvisited) {
                    push(w);
                } else if (on_stack[w]) {
                    lowlink[f.node] = std::min(lowlink[f.node], index[w]);
                }
                continue;
            }
            StateId v = f.node;
            if (lowlink[v] == index[v]) {
                std::vector<StateId> comp;
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            call.pop_back();
            if (!call.empty()) {
                StateId parent = call.back().node;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }
    return components;
}

std::vector<char> backward_reachable(std::size_t num_nodes, const std::vector<char>& goal,
                                     const std::vector<std::vector<StateId>>& predecessors) {
    std::vector<char> reached(num_nodes, 0);
    std::vector<StateId> queue;
    for (StateId s = 0; s < num_nodes; ++s) {
        if (goal[s]) {
            reached[s] = 1;
            queue.push_back(s);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (StateId p : predecessors[queue[head]]) {
            if (!reached[p]) {
                reached[p] = 1;
                queue.push_back(p);
            }
        }
    }
    return reached;
}

std::vector<char> can_reach_target(const Mdp& mdp) {
    const std::size_t n = mdp.num_states();
    std::vector<std::vector<StateId>> pred(n);
    for (StateId s = 0; s < n; ++s) {
        for (const auto& c : mdp.actions(s)) {
            for (const auto& t : c.dist) pred[t.target].push_back(s);
        }
    }
    return backward_reachable(n, mdp.target_mask(), pred);
}

std::vector<char> reach_almost_surely(const Mdp& mdp) {
    const std::size_t n = mdp.num_states();
    std::vector<char> keep = can_reach_target(mdp);
    while (true) {
        std::vector<char> reach = mdp.target_mask();
        bool grew = true;
        while (grew) {
            grew = false;
            for (StateId s = 0; s < n; ++s) {
                if (reach[s] || !keep[s]) continue;
                for (const auto& c : mdp.actions(s)) {
                    bool inside = true, hits = false;
                    for (const auto& t : c.dist) {
                        inside = inside && keep[t.target];
                        hits = hits || reach[t.target];
                    }
                    if (inside && hits) {
                        reach[s] = 1;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (reach == keep) return keep;
        keep = std::move(reach);
    }
}

std::vector<char> can_reach_target(const MarkovChain& chain, const std::vector<char>& target) {
    const std::size_t n = chain.size();
    std::vector<std::vector<StateId>> pred(n);
    for (StateId l = 0; l < n; ++l) {
        for (StateId m : chain.successors(l)) pred[m].push_back(l);
    }
    return backward_reachable(n, target, pred);
}

std::vector<char> forward_reachable(const MarkovChain& chain, StateId start) {
    std::vector<char> seen(chain.size(), 0);
    std::vector<StateId> queue{start};
    seen[start] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (StateId m : chain.successors(queue[head])) {
            if (!seen[m]) {
                seen[m] = 1;
                queue.push_back(m);
            }
        }
    }
    return seen;
}

}  // namespace mdpdistill
