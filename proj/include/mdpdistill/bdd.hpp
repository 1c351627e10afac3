#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mdpdistill/features.hpp"

namespace mdpdistill {

/// Binary encoding of the state-action domain: each coordinate takes ceil(log2(range)) bits,
/// coordinates in declaration order, most significant bit first.
struct BitLayout {
    std::vector<int> lo;
    std::vector<int> width;
    int total_bits = 0;

    static BitLayout from(const FeatureSchema& schema);
    std::vector<char> encode(const std::vector<int>& x) const;
};

/// Reduced ordered BDD with its own hash-consed node store. Node 0 is false, node 1 is true;
/// variables are tested in increasing order from the root.
class Bdd {
   public:
    explicit Bdd(int num_vars = 0);

    /// Exact set of the given bit strings, built bottom-up from the sorted set.
    static Bdd from_bits(int num_vars, std::vector<std::vector<char>> strings);

    /// Union with one minterm via the memoized apply.
    void insert(const std::vector<char>& bits);
    /// Union with another diagram over the same number of variables.
    void unite(const Bdd& other);

    bool contains(const std::vector<char>& bits) const;
    std::size_t node_count() const;
    int num_vars() const { return num_vars_; }
    bool is_false() const { return root_ == 0; }
    bool is_true() const { return root_ == 1; }

    /// Structural equality of the reachable diagrams, which for ROBDDs is set equality.
    friend bool operator==(const Bdd& a, const Bdd& b);

   private:
    struct Node {
        int var;
        std::uint32_t lo, hi;
    };
    struct Key {
        int var;
        std::uint32_t lo, hi;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = (static_cast<std::uint64_t>(k.lo) << 32 | k.hi) * 0x9e3779b97f4a7c15ULL;
            return static_cast<std::size_t>(h ^ (static_cast<std::uint64_t>(k.var) * 0xbf58476d1ce4e5b9ULL));
        }
    };

    std::uint32_t mk(int var, std::uint32_t lo, std::uint32_t hi);
    std::uint32_t minterm(const std::vector<char>& bits);
    std::uint32_t apply_or(std::uint32_t a, std::uint32_t b, std::unordered_map<std::uint64_t, std::uint32_t>& memo);
    std::uint32_t import(const Bdd& other, std::uint32_t id, std::unordered_map<std::uint32_t, std::uint32_t>& memo);
    int var_of(std::uint32_t id) const { return id < 2 ? num_vars_ : nodes_[id].var; }

    int num_vars_;
    std::vector<Node> nodes_;
    std::unordered_map<Key, std::uint32_t, KeyHash> unique_;
    std::uint32_t root_ = 0;
};

/// Diagram of the given feature vectors under the layout.
Bdd encode_set(const std::vector<std::vector<int>>& pairs, const BitLayout& layout);
bool contains(const Bdd& bdd, const BitLayout& layout, const std::vector<int>& pair);

}  // namespace mdpdistill
