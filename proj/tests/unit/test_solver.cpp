#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "mdpdistill/reach.hpp"
#include "oracles.hpp"

using namespace mdpdistill;

TEST(ValueIteration, DetourBounds) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const ValueApprox va = value_iteration(mdp, 1e-6);
    EXPECT_TRUE(va.converged);
    EXPECT_NEAR(va.state(mdp, mdp.initial()), 0.995, 1e-6);
    EXPECT_LE(va.state(mdp, mdp.initial()), 0.995 + 1e-12);
    EXPECT_GE(va.upper_state(mdp, mdp.initial()), 0.995 - 1e-12);
    EXPECT_EQ(va.explored_count(), mdp.num_states());
    EXPECT_TRUE(check_valid(mdp, va, max_reach_exact(mdp)).ok);
    EXPECT_THROW(value_iteration(mdp, 0.0), std::invalid_argument);
}

TEST(ValueIteration, AlmostSureStatesGetExactOne) {
    const Mdp mdp = load_model_file(fixture("allgood.pm"));
    const ValueApprox va = value_iteration(mdp, 1e-6);
    for (double v : va.lower) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(ValueIteration, BoundsBracketExactValues) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Mdp mdp = oracle::random_mdp(seed, 2 + seed % 30, 1 + seed % 3);
        const auto exact = max_reach_exact(mdp);
        const ValueApprox va = value_iteration(mdp, 1e-8);
        const auto pv = pair_values(mdp, exact);
        for (std::size_t g = 0; g < mdp.num_choices(); ++g) {
            EXPECT_LE(va.lower[g], pv[g] + 1e-9) << "seed " << seed;
            EXPECT_GE((*va.upper)[g], pv[g] - 1e-9) << "seed " << seed;
        }
        EXPECT_NEAR(va.state(mdp, mdp.initial()), exact[mdp.initial()], 1e-8) << "seed " << seed;
    }
}

TEST(Brtdp, ExploresLittleOfTheLongDetour) {
    const Mdp mdp = load_model_file(fixture("detour_long.pm"));
    const ValueApprox va = brtdp(mdp, 1e-6);
    EXPECT_TRUE(va.converged);
    EXPECT_LT(va.explored_count(), mdp.num_states() / 20);
    EXPECT_NEAR(va.state(mdp, mdp.initial()), 0.995, 1e-6);
}

TEST(Brtdp, ValidOnRandomModels) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Mdp mdp = oracle::random_mdp(seed, 2 + seed % 40, 1 + seed % 3);
        BrtdpOptions o;
        o.seed = seed;
        const ValueApprox va = brtdp(mdp, 1e-6, o);
        const auto exact = max_reach_exact(mdp);
        EXPECT_TRUE(va.converged) << "seed " << seed;
        EXPECT_GE(va.state(mdp, mdp.initial()), exact[mdp.initial()] - 1e-6) << "seed " << seed;
        const auto report = check_valid(mdp, va, exact);
        EXPECT_TRUE(report.ok) << "seed " << seed << ": " << report.message;
    }
}

TEST(Brtdp, SeedDeterminism) {
    const Mdp mdp = load_model_file(fixture("mutex.pm"));
    BrtdpOptions o;
    o.seed = 3;
    const ValueApprox a = brtdp(mdp, 1e-6, o), b = brtdp(mdp, 1e-6, o);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.explored, b.explored);
}

TEST(CheckValid, FlagsEachCondition) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const auto exact = max_reach_exact(mdp);
    const ValueApprox good = value_iteration(mdp, 1e-9);
    ASSERT_TRUE(check_valid(mdp, good, exact).ok);

    ValueApprox over = good;
    over.lower[mdp.first_choice(mdp.initial()) + 1] = 0.999;  // above Val
    EXPECT_EQ(check_valid(mdp, over, exact).condition, 1);

    ValueApprox loose = good;
    for (auto& v : loose.lower) v = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.is_target(s)) loose.lower[mdp.first_choice(s)] = 1.0;
    }
    EXPECT_EQ(check_valid(mdp, loose, exact).condition, 2);

    ValueApprox unsupported = good;
    const StateId q = state_at(mdp, {2, 0});
    unsupported.lower[mdp.first_choice(q)] = 0.0;
    unsupported.lower[mdp.first_choice(q) + 1] = 0.0;  // b at s now exceeds its backup
    EXPECT_EQ(check_valid(mdp, unsupported, exact).condition, 3);
}
