#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace oracle {

std::vector<long double> solve_dense(std::vector<std::vector<long double>> a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (std::fabs(a[pivot][col]) < 1e-30L) throw std::runtime_error("singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const long double f = a[r][col] / a[col][col];
            if (f == 0.0L) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

Policy uniform_policy(const Mdp& mdp, const LiberalStrategy& strategy) {
    Policy pol(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        const std::size_t k = mdp.num_actions(s);
        pol[s].assign(k, 0.0L);
        std::vector<std::uint32_t> chosen;
        for (std::uint32_t a = 0; a < k; ++a) {
            if (strategy.is_good(s, a)) chosen.push_back(a);
        }
        if (chosen.empty()) {
            for (std::uint32_t a = 0; a < k; ++a) chosen.push_back(a);
        }
        for (auto a : chosen) pol[s][a] = 1.0L / static_cast<long double>(chosen.size());
    }
    return pol;
}

std::vector<long double> reach(const Mdp& mdp, const Policy& policy, const std::vector<char>& goal) {
    const std::size_t n = mdp.num_states();
    std::vector<std::vector<std::pair<StateId, long double>>> row(n);
    for (StateId s = 0; s < n; ++s) {
        for (std::uint32_t a = 0; a < mdp.num_actions(s); ++a) {
            if (policy[s][a] == 0.0L) continue;
            for (const auto& t : mdp.action(s, a).dist) row[s].emplace_back(t.target, policy[s][a] * t.prob);
        }
    }
    // Backward closure of the goal in the induced graph.
    std::vector<char> live = goal;
    bool grew = true;
    while (grew) {
        grew = false;
        for (StateId s = 0; s < n; ++s) {
            if (live[s]) continue;
            for (const auto& [t, p] : row[s]) {
                if (live[t]) {
                    live[s] = 1;
                    grew = true;
                    break;
                }
            }
        }
    }
    std::vector<StateId> unknown;
    std::vector<long> index(n, -1);
    for (StateId s = 0; s < n; ++s) {
        if (live[s] && !goal[s]) {
            index[s] = static_cast<long>(unknown.size());
            unknown.push_back(s);
        }
    }
    const std::size_t m = unknown.size();
    std::vector<std::vector<long double>> a(m, std::vector<long double>(m, 0.0L));
    std::vector<long double> b(m, 0.0L);
    for (std::size_t i = 0; i < m; ++i) {
        a[i][i] += 1.0L;
        for (const auto& [t, p] : row[unknown[i]]) {
            if (goal[t]) {
                b[i] += p;
            } else if (index[t] >= 0) {
                a[i][static_cast<std::size_t>(index[t])] -= p;
            }
        }
    }
    const auto x = solve_dense(std::move(a), std::move(b));
    std::vector<long double> out(n, 0.0L);
    for (StateId s = 0; s < n; ++s) {
        if (goal[s]) out[s] = 1.0L;
    }
    for (std::size_t i = 0; i < m; ++i) out[unknown[i]] = x[i];
    return out;
}

std::vector<long double> brute_val(const Mdp& mdp, std::uint64_t max_strategies) {
    const std::size_t n = mdp.num_states();
    long double count = 1.0L;
    for (StateId s = 0; s < n; ++s) count *= static_cast<long double>(mdp.num_actions(s));
    if (count > static_cast<long double>(max_strategies)) throw std::runtime_error("too many strategies");

    std::vector<std::uint32_t> pick(n, 0);
    std::vector<long double> best(n, 0.0L);
    while (true) {
        Policy pol(n);
        for (StateId s = 0; s < n; ++s) {
            pol[s].assign(mdp.num_actions(s), 0.0L);
            pol[s][pick[s]] = 1.0L;
        }
        const auto v = reach(mdp, pol, mdp.target_mask());
        for (StateId s = 0; s < n; ++s) best[s] = std::max(best[s], v[s]);
        std::size_t i = 0;
        while (i < n && ++pick[i] == mdp.num_actions(i)) pick[i++] = 0;
        if (i == n) break;
    }
    return best;
}

std::vector<EndComponent> brute_mec(const Mdp& mdp) {
    const std::size_t n = mdp.num_states();
    if (n > 16) throw std::runtime_error("brute_mec needs at most 16 states");
    std::vector<EndComponent> ecs;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        auto in = [&](StateId s) { return (mask >> s) & 1u; };
        EndComponent ec;
        bool ok = true;
        std::vector<std::vector<StateId>> succ(n);
        for (StateId s = 0; s < n && ok; ++s) {
            if (!in(s)) continue;
            ec.states.insert(s);
            std::set<std::uint32_t> acts;
            for (std::uint32_t a = 0; a < mdp.num_actions(s); ++a) {
                const auto& dist = mdp.action(s, a).dist;
                if (std::all_of(dist.begin(), dist.end(), [&](const auto& t) { return in(t.target) != 0; })) {
                    acts.insert(a);
                    for (const auto& t : dist) succ[s].push_back(t.target);
                }
            }
            if (acts.empty()) ok = false;
            ec.actions.push_back(std::move(acts));
        }
        if (!ok) continue;
        // Strong connectivity: every member reaches every other member.
        for (StateId s : ec.states) {
            std::vector<char> seen(n, 0);
            std::vector<StateId> stack{s};
            seen[s] = 1;
            while (!stack.empty()) {
                StateId u = stack.back();
                stack.pop_back();
                for (StateId v : succ[u]) {
                    if (!seen[v]) {
                        seen[v] = 1;
                        stack.push_back(v);
                    }
                }
            }
            for (StateId t : ec.states) ok = ok && seen[t];
            if (!ok) break;
        }
        if (ok) ecs.push_back(std::move(ec));
    }
    std::vector<EndComponent> maximal;
    for (const auto& e : ecs) {
        bool dominated = false;
        for (const auto& f : ecs) {
            if (f.states.size() > e.states.size() &&
                std::includes(f.states.begin(), f.states.end(), e.states.begin(), e.states.end())) {
                dominated = true;
                break;
            }
        }
        if (!dominated) maximal.push_back(e);
    }
    std::sort(maximal.begin(), maximal.end(),
              [](const EndComponent& a, const EndComponent& b) { return *a.states.begin() < *b.states.begin(); });
    return maximal;
}

std::vector<long double> exact_importance(const Mdp& mdp, const LiberalStrategy& strategy) {
    const std::size_t n = mdp.num_states();
    const Policy pol = uniform_policy(mdp, strategy);
    const auto to_target = reach(mdp, pol, mdp.target_mask());
    const long double total = to_target[mdp.initial()];
    std::vector<long double> imp(n, 0.0L);
    if (total == 0.0L) return imp;
    for (StateId s = 0; s < n; ++s) {
        std::vector<char> goal(n, 0);
        goal[s] = 1;
        const long double hit = reach(mdp, pol, goal)[mdp.initial()];
        imp[s] = hit * to_target[s] / total;
    }
    return imp;
}

Mdp random_mdp(std::uint64_t seed, std::size_t n, std::size_t max_actions) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    mdpdistill::VarDecl x{"x", 0, static_cast<int>(n) - 1, 0};
    mdpdistill::MdpBuilder b({x}, 1);
    for (std::size_t i = 0; i < n; ++i) b.add_state({static_cast<int>(i)});
    const std::size_t targets = n > 2 ? uniform(1, 2) : 1;
    std::vector<char> is_target(n, 0);
    for (std::size_t k = 0; k < targets; ++k) is_target[uniform(1, n - 1)] = 1;
    for (StateId s = 0; s < n; ++s) {
        if (is_target[s]) {
            b.add_target(s);
            continue;
        }
        const std::size_t k = uniform(1, max_actions);
        for (std::size_t a = 0; a < k; ++a) {
            std::vector<mdpdistill::Transition> dist;
            const std::size_t succ = uniform(1, 3);
            std::vector<int> w;
            int sum = 0;
            for (std::size_t j = 0; j < succ; ++j) {
                // Self-loops and nearby states make end components likely.
                StateId t = uniform(0, 4) == 0 ? s : static_cast<StateId>(uniform(0, n - 1));
                const int wt = static_cast<int>(uniform(1, 9));
                dist.push_back({t, 0.0});
                w.push_back(wt);
                sum += wt;
            }
            for (std::size_t j = 0; j < succ; ++j) dist[j].prob = static_cast<double>(w[j]) / sum;
            b.add_choice(s, {b.intern_action("a" + std::to_string(a)), 1}, std::move(dist));
        }
    }
    b.set_initial(0);
    return std::move(b).finish();
}

}  // namespace oracle
