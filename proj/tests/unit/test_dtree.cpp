#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace mdpdistill;

namespace {

using Node = DecisionTree::Node;

FeatureSchema one_var(int lo, int hi) {
    FeatureSchema schema;
    schema.vars = {VarDecl{"x1", lo, hi, lo}};
    schema.action_names = {"a", "b"};
    return schema;
}

TrainingSet seven_points() {
    TrainingSet ts;
    ts.schema = one_var(1, 7);
    for (int x = 1; x <= 7; ++x) ts.rows.push_back({{x, 0, 1}, x <= 3 || x == 7, 1, static_cast<StateId>(x)});
    return ts;
}

TrainingSet random_set(std::mt19937_64& rng, int n_rows) {
    TrainingSet ts;
    ts.schema.vars = {VarDecl{"x", 0, 9, 0}, VarDecl{"y", -3, 3, 0}};
    ts.schema.action_names = {"a", "b", "c"};
    ts.schema.num_modules = 2;
    std::set<std::vector<int>> seen;
    std::uniform_int_distribution<int> x(0, 9), y(-3, 3), act(0, 2), mod(0, 2), rep(1, 20), coin(0, 1);
    while (static_cast<int>(ts.rows.size()) < n_rows) {
        std::vector<int> f{x(rng), y(rng), act(rng), mod(rng)};
        if (!seen.insert(f).second) continue;
        ts.rows.push_back({f, coin(rng) == 1, static_cast<std::uint64_t>(rep(rng)), 0});
    }
    return ts;
}

DecisionTree random_tree(std::mt19937_64& rng, const FeatureSchema& schema, int depth) {
    std::vector<Node> nodes;
    std::function<void(int)> grow = [&](int d) {
        std::uniform_int_distribution<int> coin(0, 3);
        if (d == 0 || coin(rng) == 0) {
            nodes.push_back(Node{true, coin(rng) % 2 == 0, {}, -1, -1});
            return;
        }
        const int id = static_cast<int>(nodes.size());
        std::uniform_int_distribution<int> coord(0, static_cast<int>(schema.arity()) - 1), op(0, 4), k(-3, 9);
        const int c = coord(rng);
        Predicate p = schema.is_categorical(c) ? Predicate::categorical(c, c == schema.action_coord() ? k(rng) & 1 : 1)
                                               : Predicate::numeric(c, static_cast<PredOp>(op(rng)), k(rng));
        nodes.push_back(Node{false, false, p, -1, -1});
        nodes[id].yes = static_cast<int>(nodes.size());
        grow(d - 1);
        nodes[id].no = static_cast<int>(nodes.size());
        grow(d - 1);
    };
    grow(depth);
    return DecisionTree(std::move(nodes));
}

}  // namespace

TEST(Learn, SevenPointExample) {
    LearnParams p;
    p.min_leaf = 1;
    p.confidence = 0.5;
    const DecisionTree t = learn(seven_points(), p);
    EXPECT_EQ(t.size(), 5u);
    EXPECT_EQ(t.depth(), 2u);
    const DecisionTree expected({Node{false, false, Predicate::numeric(0, PredOp::Le, 3), 1, 2}, Node{true, true, {}, -1, -1},
                                 Node{false, false, Predicate::numeric(0, PredOp::Lt, 7), 3, 4},
                                 Node{true, false, {}, -1, -1}, Node{true, true, {}, -1, -1}});
    EXPECT_TRUE(t.equivalent(expected));
    EXPECT_EQ(t.node(0).pred, Predicate::numeric(0, PredOp::Le, 3));
    EXPECT_EQ(t.node(2).pred, Predicate::numeric(0, PredOp::Le, 6));
    EXPECT_TRUE(t.classify({2, 0, 1}));
    EXPECT_TRUE(t.classify({7, 0, 1}));
    EXPECT_FALSE(t.classify({5, 0, 1}));
}

TEST(Learn, DegenerateInputs) {
    TrainingSet ts = seven_points();
    for (auto& r : ts.rows) r.good = true;
    EXPECT_EQ(learn(ts, {}), DecisionTree::leaf(true));
    for (auto& r : ts.rows) r.good = false;
    EXPECT_EQ(learn(ts, {}), DecisionTree::leaf(false));

    const TrainingSet seven = seven_points();
    LearnParams p;
    p.min_leaf = seven.minority_weight() + 1;
    EXPECT_EQ(learn(seven, p).size(), 1u);
}

TEST(Learn, CategoricalSplit) {
    TrainingSet ts;
    ts.schema = one_var(0, 3);
    for (int x = 0; x <= 3; ++x) {
        ts.rows.push_back({{x, 0, 1}, true, 1, 0});
        ts.rows.push_back({{x, 1, 1}, false, 1, 0});
    }
    const DecisionTree t = learn(ts, {});
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.node(0).pred.coord, 1);
    for (int x = 0; x <= 3; ++x) {
        EXPECT_TRUE(t.classify({x, 0, 1}));
        EXPECT_FALSE(t.classify({x, 1, 1}));
    }
}

TEST(Learn, UnprunedTreesAreExact) {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 100; ++round) {
        const TrainingSet ts = random_set(rng, 5 + round);
        LearnParams p;
        p.prune = false;
        const DecisionTree t = learn(ts, p);
        EXPECT_EQ(training_error(t, ts), 0.0) << "round " << round;
        for (const auto& row : ts.rows) EXPECT_EQ(t.classify(row.features), row.good);
    }
}

TEST(Learn, PruningAndLeafSizeShrinkTrees) {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 30; ++round) {
        const TrainingSet ts = random_set(rng, 60);
        LearnParams raw;
        raw.prune = false;
        const std::size_t full = learn(ts, raw).size();
        EXPECT_LE(learn(ts, LearnParams{}).size(), full);
        LearnParams huge;
        huge.min_leaf = ts.minority_weight() + 1;
        EXPECT_EQ(learn(ts, huge).size(), 1u) << "round " << round;
    }
}

TEST(Learn, SizeMonotoneInLeafSizeOnFixtures) {
    for (const char* name : {"detour.pm", "mutex.pm", "sync.pm"}) {
        const Mdp mdp = load_model_file(fixture(name));
        DistillConfig c;
        c.min_leaf = 1;
        const TrainingSet ts = run_distill(mdp, c).training;
        std::size_t last = SIZE_MAX;
        for (double m = 1; m <= ts.minority_weight() + 1; m = m * 2 + 1) {
            LearnParams p;
            p.min_leaf = m;
            const std::size_t size = learn(ts, p).size();
            EXPECT_LE(size, last) << name << " M=" << m;
            last = size;
        }
    }
}

TEST(Learn, Deterministic) {
    std::mt19937_64 rng(8);
    const TrainingSet ts = random_set(rng, 80);
    EXPECT_EQ(learn(ts, {}), learn(ts, {}));
}

TEST(Predicate, NormalForms) {
    const Predicate lt = Predicate::numeric(0, PredOp::Lt, 7);
    bool neg = true;
    EXPECT_EQ(lt.normalized(&neg), Predicate::numeric(0, PredOp::Le, 6));
    EXPECT_FALSE(neg);
    EXPECT_EQ(Predicate::numeric(0, PredOp::Gt, 2).normalized(&neg), Predicate::numeric(0, PredOp::Le, 2));
    EXPECT_TRUE(neg);
    EXPECT_TRUE(lt.equivalent(Predicate::numeric(0, PredOp::Le, 6)));
    EXPECT_FALSE(lt.equivalent(Predicate::numeric(0, PredOp::Le, 7)));
    EXPECT_TRUE(Predicate::numeric(0, PredOp::Ge, 3).holds({3}));
    EXPECT_FALSE(Predicate::numeric(0, PredOp::Gt, 3).holds({3}));
    EXPECT_EQ(parse_pred_op(">="), PredOp::Ge);
    EXPECT_THROW(parse_pred_op("=="), std::invalid_argument);
}

TEST(Tree, ExportsRoundTrip) {
    std::mt19937_64 rng(21);
    FeatureSchema schema = one_var(-3, 9);
    schema.num_modules = 2;
    for (int i = 0; i < 200; ++i) {
        const DecisionTree t = random_tree(rng, schema, 5);
        EXPECT_EQ(DecisionTree::import_json(t.export_json(schema), schema), t);
    }
}

TEST(Tree, JsonAndDotShape) {
    LearnParams p;
    p.min_leaf = 1;
    p.confidence = 0.5;
    const FeatureSchema schema = one_var(1, 7);
    const DecisionTree t = learn(seven_points(), p);
    const std::string json = t.export_json(schema);
    EXPECT_NE(json.find("\"coord\": \"x1\""), std::string::npos);
    EXPECT_NE(json.find("\"op\": \"<=\""), std::string::npos);
    EXPECT_NE(json.find("\"leaf\": \"good\""), std::string::npos);
    const std::string dot = t.export_dot(schema);
    EXPECT_EQ(dot.rfind("digraph", 0), 0u);
    EXPECT_NE(dot.find("x1 <= 3"), std::string::npos);
    EXPECT_NE(dot.find("style=dashed"), std::string::npos);

    const std::string cat = DecisionTree({Node{false, false, Predicate::categorical(1, 1), 1, 2}, Node{true, false, {}, -1, -1},
                                          Node{true, true, {}, -1, -1}})
                                .export_json(schema);
    EXPECT_NE(cat.find("\"cat\": \"action\""), std::string::npos);
    EXPECT_NE(cat.find("\"v\": \"b\""), std::string::npos);

    EXPECT_THROW(DecisionTree::import_json("{\"leaf\": \"maybe\"}", schema), std::exception);
    EXPECT_THROW(DecisionTree::import_json("{\"p\": {\"coord\": \"zz\", \"op\": \"<=\", \"k\": 1}, \"yes\": {\"leaf\": \"good\"}, "
                                           "\"no\": {\"leaf\": \"bad\"}}",
                                           schema),
                 std::exception);
    EXPECT_THROW(DecisionTree::import_json("not json", schema), std::exception);
}

TEST(Tree, RejectsMalformedNodeLists) {
    EXPECT_THROW(DecisionTree(std::vector<Node>{}), std::invalid_argument);
    EXPECT_THROW(DecisionTree({Node{false, false, {}, 1, 1}, Node{true, true, {}, -1, -1}}), std::invalid_argument);
    EXPECT_THROW(DecisionTree({Node{false, false, {}, 0, 1}, Node{true, true, {}, -1, -1}}), std::invalid_argument);
}

TEST(Induce, StrategyAndFallback) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const FeatureSchema schema = FeatureSchema::from(mdp);
    const int a_id = schema.action_id("a");
    const DecisionTree not_a({Node{false, false, Predicate::categorical(schema.action_coord(), a_id), 1, 2},
                              Node{true, false, {}, -1, -1}, Node{true, true, {}, -1, -1}});
    std::vector<StateId> fb;
    const LiberalStrategy st = induce_strategy(not_a, mdp, &fb);
    EXPECT_TRUE(fb.empty());
    EXPECT_EQ(good_names(mdp, st, mdp.initial()), std::set<std::string>{"b"});
    EXPECT_NEAR(evaluate(mdp, st), 0.9925, 1e-12);

    const LiberalStrategy none = induce_strategy(DecisionTree::leaf(false), mdp, &fb);
    EXPECT_EQ(fb.size(), mdp.num_states());
    EXPECT_EQ(none.defined_count(), 0u);
    EXPECT_NEAR(evaluate(mdp, none), 0.49625, 1e-12);
}

TEST(Fit, DetourBudgets) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    DistillConfig c;
    c.min_leaf = 1;
    const DistillReport base = run_distill(mdp, c);

    const FitResult loose = fit_max_leaf(base.training, mdp, 0.01, 0.995);
    EXPECT_TRUE(loose.met);
    EXPECT_LE(loose.tree.size(), 9u);
    const LiberalStrategy st = induce_strategy(loose.tree, mdp);
    EXPECT_EQ(good_names(mdp, st, mdp.initial()), std::set<std::string>{"b"});

    const FitResult tight = fit_max_leaf(base.training, mdp, 0.001, 0.995);
    EXPECT_TRUE(tight.met);
    EXPECT_LE(tight.tree.size(), 9u);
    const LiberalStrategy exact = induce_strategy(tight.tree, mdp);
    EXPECT_EQ(good_names(mdp, exact, mdp.initial()), std::set<std::string>{"b"});
    EXPECT_EQ(good_names(mdp, exact, state_at(mdp, {2, 0})), std::set<std::string>{"d"});
    EXPECT_LE(tight.min_leaf, loose.min_leaf);

    const FitResult any = fit_max_leaf(base.training, mdp, 1.0, 0.995);
    EXPECT_EQ(any.min_leaf, static_cast<std::uint64_t>(base.training.minority_weight()));
    EXPECT_TRUE(any.met);
    ASSERT_TRUE(any.probe(any.min_leaf).has_value());

    EXPECT_THROW(fit_max_leaf(base.training, mdp, 0.0, 0.995), std::invalid_argument);
}

TEST(Fit, RelativeError) {
    EXPECT_DOUBLE_EQ(relative_error(0.5, 0.25), 0.5);
    EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_error(0.5, 0.6), 0.0);
}
