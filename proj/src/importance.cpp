#include "mdpdistill/importance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "mdpdistill/graph.hpp"
#include "mdpdistill/reach.hpp"
#include "rng.hpp"

namespace mdpdistill {

namespace {

struct Batch {
    std::size_t target_runs = 0;
    std::size_t truncated_runs = 0;
    std::vector<std::uint64_t> count_cond, count_all, visits_cond, visits_all;

    explicit Batch(std::size_t n) : count_cond(n, 0), count_all(n, 0), visits_cond(n, 0), visits_all(n, 0) {}
};

void run_batch(const Mdp& mdp, const MarkovChain& chain, const std::vector<char>& live, std::size_t begin,
               std::size_t end, const SimulateOptions& options, Batch& out) {
    const std::size_t n = mdp.num_states();
    std::vector<std::uint32_t> multiplicity(n, 0);
    std::vector<StateId> touched;
    for (std::size_t run = begin; run < end; ++run) {
        auto rng = detail::stream(options.seed, run);
        touched.clear();
        StateId s = mdp.initial();
        bool reached = false;
        std::size_t steps = 0;
        while (true) {
            if (multiplicity[s]++ == 0) touched.push_back(s);
            if (mdp.is_target(s)) {
                reached = true;
                break;
            }
            if (!live[s]) break;
            if (steps++ >= options.max_steps) {
                ++out.truncated_runs;
                break;
            }
            double r = detail::uniform_real(rng);
            auto succ = chain.successors(s);
            auto prob = chain.probabilities(s);
            StateId next = succ.back();
            for (std::size_t j = 0; j < succ.size(); ++j) {
                if (r < prob[j]) {
                    next = succ[j];
                    break;
                }
                r -= prob[j];
            }
            s = next;
        }
        if (reached) ++out.target_runs;
        for (StateId t : touched) {
            out.count_all[t] += 1;
            out.visits_all[t] += multiplicity[t];
            if (reached) {
                out.count_cond[t] += 1;
                out.visits_cond[t] += multiplicity[t];
            }
            multiplicity[t] = 0;
        }
    }
}

}  // namespace

RunStats simulate(const Mdp& mdp, const LiberalStrategy& strategy, std::size_t runs, const SimulateOptions& options) {
    if (runs == 0) throw std::invalid_argument("number of runs must be at least 1");
    validate_strategy(mdp, strategy);
    const std::size_t n = mdp.num_states();
    // Sampling the uniform mixture over good actions is the same as sampling the induced chain.
    const auto chain = induce_chain(mdp, strategy);
    const auto live = can_reach_target(chain, mdp.target_mask());

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(runs)));
    std::vector<Batch> batches(threads, Batch(n));
    std::vector<std::thread> workers;
    const std::size_t per = (runs + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(runs, t * per), end = std::min(runs, begin + per);
        if (threads == 1) {
            run_batch(mdp, chain, live, begin, end, options, batches[t]);
        } else {
            workers.emplace_back(run_batch, std::cref(mdp), std::cref(chain), std::cref(live), begin, end,
                                 std::cref(options), std::ref(batches[t]));
        }
    }
    for (auto& w : workers) w.join();

    RunStats stats;
    stats.runs = runs;
    stats.seed = options.seed;
    stats.visit_count_cond.assign(n, 0);
    stats.visit_count_all.assign(n, 0);
    stats.expected_visits_cond.assign(n, 0);
    stats.expected_visits_all.assign(n, 0);
    for (const auto& b : batches) {
        stats.target_runs += b.target_runs;
        stats.truncated_runs += b.truncated_runs;
        for (StateId s = 0; s < n; ++s) {
            stats.visit_count_cond[s] += b.count_cond[s];
            stats.visit_count_all[s] += b.count_all[s];
            stats.expected_visits_cond[s] += b.visits_cond[s];
            stats.expected_visits_all[s] += b.visits_all[s];
        }
    }
    return stats;
}

LearningVariant LearningVariant::parse(const std::string& code) {
    if (code == "IDP") return {Weighting::Importance, Conditioning::Target, Measure::Probability};
    if (code == "IAP") return {Weighting::Importance, Conditioning::All, Measure::Probability};
    if (code == "IDE") return {Weighting::Importance, Conditioning::Target, Measure::ExpectedVisits};
    if (code == "IAE") return {Weighting::Importance, Conditioning::All, Measure::ExpectedVisits};
    if (code == "OD") return {Weighting::Once, Conditioning::Target, Measure::Probability};
    if (code == "OA") return {Weighting::Once, Conditioning::All, Measure::Probability};
    throw std::invalid_argument("unknown learning variant '" + code + "' (expected IDP, IAP, IDE, IAE, OD or OA)");
}

std::string LearningVariant::code() const {
    std::string out = weighting == Weighting::Importance ? "I" : "O";
    out += conditioning == Conditioning::Target ? "D" : "A";
    if (weighting == Weighting::Importance) out += measure == Measure::Probability ? "P" : "E";
    return out;
}

Importance importance_of(const RunStats& stats, Conditioning conditioning, Measure measure) {
    const bool cond = conditioning == Conditioning::Target;
    const std::size_t denom = cond ? stats.target_runs : stats.runs;
    if (denom == 0) {
        throw NoTargetRunsError("no simulated run reached the target; conditioned importance is undefined");
    }
    const auto& counts = measure == Measure::Probability ? (cond ? stats.visit_count_cond : stats.visit_count_all)
                                                         : (cond ? stats.expected_visits_cond : stats.expected_visits_all);
    Importance imp;
    imp.weight.resize(counts.size());
    for (std::size_t s = 0; s < counts.size(); ++s) {
        double w = static_cast<double>(counts[s]) / static_cast<double>(denom);
        if (w > 1.0) {
            w = 1.0;
            ++imp.clipped;
        }
        imp.weight[s] = w;
    }
    return imp;
}

double TrainingSet::total_weight() const {
    double w = 0.0;
    for (const auto& r : rows) w += static_cast<double>(r.repeat);
    return w;
}

double TrainingSet::good_weight() const {
    double w = 0.0;
    for (const auto& r : rows) {
        if (r.good) w += static_cast<double>(r.repeat);
    }
    return w;
}

double TrainingSet::minority_weight() const {
    const double good = good_weight();
    return std::min(good, total_weight() - good);
}

TrainingSet build_training_set(const Mdp& mdp, const LiberalStrategy& strategy, std::span<const double> weights,
                               std::size_t c, Weighting weighting) {
    TrainingSet ts;
    ts.schema = FeatureSchema::from(mdp);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        const double w = s < weights.size() ? weights[s] : 0.0;
        if (!(w > 0.0)) continue;
        std::uint64_t repeat = 1;
        if (weighting == Weighting::Importance) {
            repeat = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(c) * w)));
        }
        std::map<ActionAttr, bool> labels;
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            const bool good = !strategy.defined(s) || strategy.is_good(s, a);
            labels[mdp.action(s, a).attr] |= good;
        }
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            const auto& attr = mdp.action(s, a).attr;
            auto it = labels.find(attr);
            if (it == labels.end()) continue;
            ts.rows.push_back(TrainingRow{pair_features(mdp, s, a), it->second, repeat, s});
            labels.erase(it);
        }
    }
    if (ts.rows.empty()) throw std::invalid_argument("empty training set: no state has positive weight");
    return ts;
}

}  // namespace mdpdistill
