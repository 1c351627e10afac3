#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace mdpdistill;

TEST(Oracle, DenseSolve) {
    const auto x = oracle::solve_dense({{2, 1}, {1, 3}}, {3, 5});
    EXPECT_NEAR(static_cast<double>(x[0]), 0.8, 1e-15);
    EXPECT_NEAR(static_cast<double>(x[1]), 1.4, 1e-15);
    EXPECT_THROW(oracle::solve_dense({{1, 1}, {1, 1}}, {1, 1}), std::runtime_error);
}

TEST(Oracle, DetourValues) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const auto val = oracle::brute_val(mdp);
    EXPECT_NEAR(static_cast<double>(val[mdp.initial()]), 0.995, 1e-15);
    EXPECT_NEAR(static_cast<double>(val[state_at(mdp, {2, 0})]), 0.5, 1e-15);
    EXPECT_EQ(val[state_at(mdp, {1, 0})], 0.0L);
}

TEST(Oracle, TrivialValues) {
    const Mdp all = model("module m x:[0..1]; [] true -> true; endmodule target x=0");
    EXPECT_EQ(oracle::brute_val(all)[0], 1.0L);
    const Mdp none = model("module m x:[0..1]; [] true -> true; endmodule target x=1");
    EXPECT_EQ(oracle::brute_val(none)[0], 0.0L);
}

TEST(Oracle, DetourImportance) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const SolveReport r = run_solve(mdp, SolveConfig{});
    const auto imp = oracle::exact_importance(mdp, r.strategy);
    EXPECT_NEAR(static_cast<double>(imp[state_at(mdp, {2, 0})]), 5.0 / 995.0, 1e-15);
    EXPECT_EQ(imp[mdp.initial()], 1.0L);
    EXPECT_EQ(imp[state_at(mdp, {3, 0})], 1.0L);
    EXPECT_EQ(imp[state_at(mdp, {1, 0})], 0.0L);
}

TEST(Oracle, EndComponents) {
    const Mdp loop =
        model("module m x:[0..2]; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=2); [] x=1 -> true; endmodule target x=2");
    const auto mecs = oracle::brute_mec(loop);
    ASSERT_EQ(mecs.size(), 2u);
    const bool has_loop = mecs[0].states == std::set<StateId>{state_at(loop, {1})} ||
                          mecs[1].states == std::set<StateId>{state_at(loop, {1})};
    EXPECT_TRUE(has_loop);

    // A straight line into an absorbing target has no end component in its interior.
    const Mdp line = model("module m x:[0..3]; [] x<3 -> (x'=x+1); endmodule target x=3");
    const auto only = oracle::brute_mec(line);
    ASSERT_EQ(only.size(), 1u);
    EXPECT_TRUE(line.is_target(*only[0].states.begin()));
}

TEST(Oracle, RandomModelsAreWellFormed) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Mdp mdp = oracle::random_mdp(seed, 2 + seed % 49, 1 + seed % 3);
        EXPECT_EQ(mdp.num_states(), 2 + seed % 49);
        EXPECT_FALSE(mdp.is_target(mdp.initial()));
        for (StateId s = 0; s < mdp.num_states(); ++s) EXPECT_LE(mdp.num_actions(s), 3u);
    }
}
