#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace mdpdistill;

TEST(Simulate, ConvergesToExactImportance) {
    for (const char* name : {"detour.pm", "mutex.pm", "sync.pm", "allgood.pm"}) {
        const Mdp mdp = load_model_file(fixture(name));
        const SolveReport r = run_solve(mdp, SolveConfig{});
        const auto exact = oracle::exact_importance(mdp, r.strategy);
        SimulateOptions o;
        o.seed = 11;
        const RunStats stats = simulate(mdp, r.strategy, 100000, o);
        const auto est = importance_of(stats, Conditioning::Target, Measure::Probability);
        const double n = static_cast<double>(stats.target_runs);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            const double p = static_cast<double>(exact[s]);
            const double se = std::sqrt(p * (1 - p) / n);
            EXPECT_LE(std::fabs(est.weight[s] - p), 3 * se + 1e-12) << name << " state " << mdp.describe_state(s);
        }
    }
}

TEST(Simulate, ThreadCountDoesNotMatter) {
    const Mdp mdp = load_model_file(fixture("sync.pm"));
    const SolveReport r = run_solve(mdp, SolveConfig{});
    SimulateOptions one, many;
    one.seed = many.seed = 5;
    many.threads = 4;
    EXPECT_EQ(simulate(mdp, r.strategy, 5000, one), simulate(mdp, r.strategy, 5000, many));
}

TEST(Simulate, CountsAndTruncation) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const SolveReport r = run_solve(mdp, SolveConfig{});
    SimulateOptions o;
    const RunStats stats = simulate(mdp, r.strategy, 1000, o);
    EXPECT_EQ(stats.runs, 1000u);
    EXPECT_EQ(stats.visit_count_all[mdp.initial()], 1000u);
    EXPECT_EQ(stats.visit_count_cond[mdp.initial()], stats.target_runs);
    EXPECT_EQ(stats.truncated_runs, 0u);

    const Mdp grid = load_model_file(fixture("grid.pm"));
    o.max_steps = 5;
    const RunStats cut = simulate(grid, LiberalStrategy(grid.num_states()), 20, o);
    EXPECT_EQ(cut.truncated_runs, 20u);
    EXPECT_EQ(cut.target_runs, 0u);
}

TEST(Importance, Variants) {
    EXPECT_EQ(LearningVariant::parse("IDP").code(), "IDP");
    for (const char* c : {"IDP", "IAP", "IDE", "IAE", "OD", "OA"}) EXPECT_EQ(LearningVariant::parse(c).code(), c);
    EXPECT_THROW(LearningVariant::parse("XYZ"), std::invalid_argument);
    const LearningVariant oa = LearningVariant::parse("OA");
    EXPECT_EQ(oa.weighting, Weighting::Once);
    EXPECT_EQ(oa.conditioning, Conditioning::All);

    RunStats st;
    st.runs = 4;
    st.target_runs = 2;
    st.visit_count_cond = {2, 1, 0};
    st.visit_count_all = {4, 3, 2};
    st.expected_visits_cond = {2, 5, 0};
    st.expected_visits_all = {4, 9, 2};
    EXPECT_EQ(importance_of(st, Conditioning::Target, Measure::Probability).weight, (std::vector<double>{1, 0.5, 0}));
    EXPECT_EQ(importance_of(st, Conditioning::All, Measure::Probability).weight, (std::vector<double>{1, 0.75, 0.5}));
    const Importance e = importance_of(st, Conditioning::Target, Measure::ExpectedVisits);
    EXPECT_EQ(e.weight, (std::vector<double>{1, 1, 0}));
    EXPECT_EQ(e.clipped, 1u);
    st.target_runs = 0;
    EXPECT_THROW(importance_of(st, Conditioning::Target, Measure::Probability), NoTargetRunsError);
    EXPECT_NO_THROW(importance_of(st, Conditioning::All, Measure::Probability));
}

TEST(TrainingSet, RowsAndRepeats) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const SolveReport r = run_solve(mdp, SolveConfig{});
    std::vector<double> w(mdp.num_states(), 0.0);
    const StateId s = mdp.initial(), q = state_at(mdp, {2, 0});
    w[s] = 1.0;
    w[q] = 0.005;
    const TrainingSet ts = build_training_set(mdp, r.strategy, w, 10000, Weighting::Importance);
    ASSERT_EQ(ts.rows.size(), 4u);
    EXPECT_EQ(ts.rows[0].features, (std::vector<int>{0, 0, 0, 0}));
    EXPECT_FALSE(ts.rows[0].good);
    EXPECT_EQ(ts.rows[0].repeat, 10000u);
    EXPECT_TRUE(ts.rows[1].good);
    EXPECT_EQ(ts.rows[3].repeat, 50u);
    EXPECT_DOUBLE_EQ(ts.total_weight(), 20100.0);
    EXPECT_DOUBLE_EQ(ts.good_weight(), 10050.0);
    EXPECT_DOUBLE_EQ(ts.minority_weight(), 10050.0);

    const TrainingSet once = build_training_set(mdp, r.strategy, w, 10000, Weighting::Once);
    for (const auto& row : once.rows) EXPECT_EQ(row.repeat, 1u);

    // Don't-care states contribute all-good rows; tiny weights still count once.
    std::vector<double> tiny(mdp.num_states(), 1e-9);
    const TrainingSet dc = build_training_set(mdp, LiberalStrategy(mdp.num_states()), tiny, 100, Weighting::Importance);
    EXPECT_EQ(dc.rows.size(), mdp.num_choices());
    for (const auto& row : dc.rows) {
        EXPECT_TRUE(row.good);
        EXPECT_EQ(row.repeat, 1u);
    }
    EXPECT_THROW(build_training_set(mdp, r.strategy, std::vector<double>(mdp.num_states(), 0.0), 10, Weighting::Once),
                 std::invalid_argument);
}

TEST(TrainingSet, SharedAttributesCollapse) {
    // Two unlabelled commands of one module become distinct names; two alternatives of one
    // synchronising label in a product share the attribute.
    const Mdp mdp = model(R"(
        module a
          x : [0..2];
          [go] x=0 -> (x'=1);
          [go] x=0 -> (x'=2);
          [] x>0 -> true;
        endmodule
        target x=1
    )");
    ASSERT_EQ(mdp.num_actions(mdp.initial()), 2u);
    LiberalStrategy st(mdp.num_states());
    st.set(mdp.initial(), {0});
    std::vector<double> w(mdp.num_states(), 0.0);
    w[mdp.initial()] = 1.0;
    const TrainingSet ts = build_training_set(mdp, st, w, 10, Weighting::Importance);
    ASSERT_EQ(ts.rows.size(), 1u);
    EXPECT_TRUE(ts.rows[0].good);
}
