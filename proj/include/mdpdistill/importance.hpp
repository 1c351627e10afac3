#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdpdistill/features.hpp"
#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

/// No simulated run reached the target, so conditioned importance is undefined.
class NoTargetRunsError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Aggregated visit statistics of `runs` simulated runs. `*_cond` fields only count runs that
/// reached the target; visit counts count each run at most once per state, expected-visit
/// fields count multiplicities.
struct RunStats {
    std::size_t runs = 0;
    std::size_t target_runs = 0;
    std::size_t truncated_runs = 0;  // stopped by the step bound
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> visit_count_cond;
    std::vector<std::uint64_t> visit_count_all;
    std::vector<std::uint64_t> expected_visits_cond;
    std::vector<std::uint64_t> expected_visits_all;

    friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct SimulateOptions {
    std::uint64_t seed = 0;
    std::size_t max_steps = 1'000'000;
    unsigned threads = 1;
};

/// Independent runs from the initial state under the uniform reading of the strategy. A run
/// stops at the target, at a state with no path to the target in the induced chain, or after
/// max_steps (counted as not reaching). Run i draws from a stream derived from (seed, i), so
/// the result does not depend on the thread count.
RunStats simulate(const Mdp& mdp, const LiberalStrategy& strategy, std::size_t runs, const SimulateOptions& options);

enum class Conditioning { Target, All };
enum class Measure { Probability, ExpectedVisits };
enum class Weighting { Importance, Once };

/// One of the six training-data variants: IDP IAP IDE IAE OD OA.
struct LearningVariant {
    Weighting weighting = Weighting::Importance;
    Conditioning conditioning = Conditioning::Target;
    Measure measure = Measure::Probability;

    static LearningVariant parse(const std::string& code);
    std::string code() const;
};

struct Importance {
    std::vector<double> weight;
    std::size_t clipped = 0;  // expected-visit estimates clipped to 1
};

/// Per-state weight in [0,1]: visit frequency (Probability) or mean visit count clipped to 1
/// (ExpectedVisits), over target-reaching runs (Target) or all runs (All).
Importance importance_of(const RunStats& stats, Conditioning conditioning, Measure measure);

struct TrainingRow {
    std::vector<int> features;
    bool good = false;
    std::uint64_t repeat = 1;
    StateId state = 0;
};

struct TrainingSet {
    FeatureSchema schema;
    std::vector<TrainingRow> rows;

    double total_weight() const;
    double good_weight() const;
    /// Smaller of the good and bad weighted masses.
    double minority_weight() const;
};

/// Rows for every enabled action of every state with positive weight. Actions sharing one
/// attribute in a state collapse into a single row, good if any of them is good; don't-care
/// states contribute all-good rows. repeat = max(1, round(c * weight)) or 1 for Weighting::Once.
TrainingSet build_training_set(const Mdp& mdp, const LiberalStrategy& strategy, std::span<const double> weights,
                               std::size_t c, Weighting weighting);

}  // namespace mdpdistill
