#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "mdpdistill/bdd.hpp"

using namespace mdpdistill;

namespace {

std::vector<char> bits_of(std::uint64_t k, int n) {
    std::vector<char> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b[i] = static_cast<char>((k >> (n - 1 - i)) & 1u);
    return b;
}

}  // namespace

TEST(Bdd, Terminals) {
    const Bdd empty = Bdd::from_bits(4, {});
    EXPECT_TRUE(empty.is_false());
    EXPECT_EQ(empty.node_count(), 0u);
    std::vector<std::vector<char>> all;
    for (std::uint64_t k = 0; k < 16; ++k) all.push_back(bits_of(k, 4));
    const Bdd full = Bdd::from_bits(4, all);
    EXPECT_TRUE(full.is_true());
    EXPECT_EQ(full.node_count(), 0u);
}

TEST(Bdd, SevenPointSet) {
    std::vector<std::vector<char>> set;
    for (std::uint64_t k : {1, 2, 3, 7}) set.push_back(bits_of(k, 3));
    const Bdd bdd = Bdd::from_bits(3, set);
    for (std::uint64_t k = 0; k < 8; ++k) {
        const bool member = k == 1 || k == 2 || k == 3 || k == 7;
        EXPECT_EQ(bdd.contains(bits_of(k, 3)), member) << k;
    }
    // x0 ? (x1 & x2) : (x1 | x2): one x0 node, two x1 nodes sharing a single x2 node.
    EXPECT_EQ(bdd.node_count(), 4u);
}

TEST(Bdd, CanonicalAcrossConstructionOrders) {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 50; ++round) {
        const int n = 1 + round % 10;
        std::set<std::vector<char>> set;
        std::uniform_int_distribution<std::uint64_t> pick(0, (1ULL << n) - 1);
        const int count = static_cast<int>(pick(rng) % 40);
        for (int i = 0; i < count; ++i) set.insert(bits_of(pick(rng), n));
        std::vector<std::vector<char>> items(set.begin(), set.end());
        const Bdd sorted = Bdd::from_bits(n, items);
        std::shuffle(items.begin(), items.end(), rng);
        Bdd inserted(n);
        for (const auto& b : items) inserted.insert(b);
        EXPECT_TRUE(sorted == inserted);
        EXPECT_EQ(sorted.node_count(), inserted.node_count());
        Bdd left(n), right(n);
        for (std::size_t i = 0; i < items.size(); ++i) (i % 2 ? left : right).insert(items[i]);
        left.unite(right);
        EXPECT_TRUE(left == sorted);
        for (std::uint64_t k = 0; k < (1ULL << n); ++k) {
            EXPECT_EQ(sorted.contains(bits_of(k, n)), set.count(bits_of(k, n)) > 0);
        }
    }
}

TEST(Bdd, Layout) {
    const Mdp mdp = load_model_file(fixture("detour.pm"));
    const BitLayout layout = BitLayout::from(FeatureSchema::from(mdp));
    // loc 0..5 -> 3 bits, i 0..3 -> 2 bits, 8 action names -> 3 bits, modules 0..1 -> 1 bit.
    EXPECT_EQ(layout.width, (std::vector<int>{3, 2, 3, 1}));
    EXPECT_EQ(layout.total_bits, 9);
    EXPECT_EQ(layout.encode({5, 2, 1, 1}), (std::vector<char>{1, 0, 1, 1, 0, 0, 0, 1, 1}));
}

TEST(Bdd, FixtureLanguageExactness) {
    std::mt19937_64 rng(9);
    for (const char* name : {"detour.pm", "mutex.pm", "sync.pm", "grid.pm", "allgood.pm"}) {
        const Mdp mdp = load_model_file(fixture(name));
        const SolveReport r = run_solve(mdp, SolveConfig{});
        const auto pairs = good_pairs(mdp, r.strategy);
        const FeatureSchema schema = FeatureSchema::from(mdp);
        const BitLayout layout = BitLayout::from(schema);
        const Bdd bdd = encode_set(pairs, layout);
        const std::set<std::vector<int>> members(pairs.begin(), pairs.end());
        for (const auto& x : pairs) EXPECT_TRUE(contains(bdd, layout, x)) << name;
        int outside = 0;
        while (outside < 1000) {
            std::vector<int> x;
            for (const auto& v : schema.vars) x.push_back(std::uniform_int_distribution<int>(v.lo, v.hi)(rng));
            x.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(schema.action_names.size()) - 1)(rng));
            x.push_back(std::uniform_int_distribution<int>(0, schema.num_modules)(rng));
            if (members.count(x)) continue;
            ++outside;
            EXPECT_FALSE(contains(bdd, layout, x)) << name;
        }
        std::vector<std::vector<int>> reversed(pairs.rbegin(), pairs.rend());
        EXPECT_TRUE(encode_set(reversed, layout) == bdd) << name;
    }
}
