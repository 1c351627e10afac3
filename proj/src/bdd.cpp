#include "mdpdistill/bdd.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace mdpdistill {

namespace {

int bits_for(long long range) {
    int w = 0;
    while ((1LL << w) < range) ++w;
    return w;
}

}  // namespace

BitLayout BitLayout::from(const FeatureSchema& schema) {
    BitLayout layout;
    for (const auto& v : schema.vars) {
        layout.lo.push_back(v.lo);
        layout.width.push_back(bits_for(static_cast<long long>(v.hi) - v.lo + 1));
    }
    layout.lo.push_back(0);
    layout.width.push_back(bits_for(static_cast<long long>(schema.action_names.size())));
    layout.lo.push_back(0);
    layout.width.push_back(bits_for(static_cast<long long>(schema.num_modules) + 1));
    for (int w : layout.width) layout.total_bits += w;
    return layout;
}

std::vector<char> BitLayout::encode(const std::vector<int>& x) const {
    if (x.size() != width.size()) throw std::invalid_argument("feature vector does not match the bit layout");
    std::vector<char> bits;
    bits.reserve(static_cast<std::size_t>(total_bits));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long long v = static_cast<long long>(x[i]) - lo[i];
        if (v < 0 || (width[i] < 62 && v >= (1LL << width[i]))) {
            throw std::out_of_range("feature value outside the encoded domain");
        }
        for (int b = width[i] - 1; b >= 0; --b) bits.push_back(static_cast<char>((v >> b) & 1));
    }
    return bits;
}

Bdd::Bdd(int num_vars) : num_vars_(num_vars), nodes_{{num_vars, 0, 0}, {num_vars, 1, 1}} {}

std::uint32_t Bdd::mk(int var, std::uint32_t lo, std::uint32_t hi) {
    if (lo == hi) return lo;
    const Key key{var, lo, hi};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({var, lo, hi});
    unique_.emplace(key, id);
    return id;
}

std::uint32_t Bdd::minterm(const std::vector<char>& bits) {
    if (static_cast<int>(bits.size()) != num_vars_) throw std::invalid_argument("bit string length mismatch");
    std::uint32_t id = 1;
    for (int v = num_vars_ - 1; v >= 0; --v) id = bits[static_cast<std::size_t>(v)] ? mk(v, 0, id) : mk(v, id, 0);
    return id;
}

std::uint32_t Bdd::apply_or(std::uint32_t a, std::uint32_t b, std::unordered_map<std::uint64_t, std::uint32_t>& memo) {
    if (a == 1 || b == 1) return 1;
    if (a == 0) return b;
    if (b == 0 || a == b) return a;
    if (a > b) std::swap(a, b);
    const std::uint64_t key = static_cast<std::uint64_t>(a) << 32 | b;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const int v = std::min(var_of(a), var_of(b));
    const Node na = nodes_[a], nb = nodes_[b];
    const std::uint32_t a0 = na.var == v ? na.lo : a, a1 = na.var == v ? na.hi : a;
    const std::uint32_t b0 = nb.var == v ? nb.lo : b, b1 = nb.var == v ? nb.hi : b;
    const std::uint32_t lo = apply_or(a0, b0, memo);
    const std::uint32_t hi = apply_or(a1, b1, memo);
    const std::uint32_t r = mk(v, lo, hi);
    memo.emplace(key, r);
    return r;
}

void Bdd::insert(const std::vector<char>& bits) {
    std::unordered_map<std::uint64_t, std::uint32_t> memo;
    root_ = apply_or(root_, minterm(bits), memo);
}

std::uint32_t Bdd::import(const Bdd& other, std::uint32_t id, std::unordered_map<std::uint32_t, std::uint32_t>& memo) {
    if (id < 2) return id;
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const Node& n = other.nodes_[id];
    const std::uint32_t lo = import(other, n.lo, memo);
    const std::uint32_t hi = import(other, n.hi, memo);
    const std::uint32_t r = mk(n.var, lo, hi);
    memo.emplace(id, r);
    return r;
}

void Bdd::unite(const Bdd& other) {
    if (other.num_vars_ != num_vars_) throw std::invalid_argument("BDD variable count mismatch");
    std::unordered_map<std::uint32_t, std::uint32_t> imported;
    const std::uint32_t r = import(other, other.root_, imported);
    std::unordered_map<std::uint64_t, std::uint32_t> memo;
    root_ = apply_or(root_, r, memo);
}

Bdd Bdd::from_bits(int num_vars, std::vector<std::vector<char>> strings) {
    for (const auto& s : strings) {
        if (static_cast<int>(s.size()) != num_vars) throw std::invalid_argument("bit string length mismatch");
    }
    std::sort(strings.begin(), strings.end());
    strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
    Bdd bdd(num_vars);
    std::function<std::uint32_t(std::size_t, std::size_t, int)> build = [&](std::size_t b, std::size_t e,
                                                                            int depth) -> std::uint32_t {
        if (b == e) return 0;
        if (depth == num_vars) return 1;
        std::size_t m = b;
        while (m < e && !strings[m][static_cast<std::size_t>(depth)]) ++m;
        const std::uint32_t lo = build(b, m, depth + 1);
        const std::uint32_t hi = build(m, e, depth + 1);
        return bdd.mk(depth, lo, hi);
    };
    bdd.root_ = build(0, strings.size(), 0);
    return bdd;
}

bool Bdd::contains(const std::vector<char>& bits) const {
    if (static_cast<int>(bits.size()) != num_vars_) throw std::invalid_argument("bit string length mismatch");
    std::uint32_t id = root_;
    while (id >= 2) {
        const Node& n = nodes_[id];
        id = bits[static_cast<std::size_t>(n.var)] ? n.hi : n.lo;
    }
    return id == 1;
}

std::size_t Bdd::node_count() const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::uint32_t> stack{root_};
    std::size_t count = 0;
    while (!stack.empty()) {
        const std::uint32_t id = stack.back();
        stack.pop_back();
        if (id < 2 || seen[id]) continue;
        seen[id] = 1;
        ++count;
        stack.push_back(nodes_[id].lo);
        stack.push_back(nodes_[id].hi);
    }
    return count;
}

bool operator==(const Bdd& a, const Bdd& b) {
    if (a.num_vars_ != b.num_vars_) return false;
    std::unordered_map<std::uint32_t, std::uint32_t> match;
    std::function<bool(std::uint32_t, std::uint32_t)> same = [&](std::uint32_t x, std::uint32_t y) {
        if (x < 2 || y < 2) return x == y;
        auto it = match.find(x);
        if (it != match.end()) return it->second == y;
        const auto &nx = a.nodes_[x], &ny = b.nodes_[y];
        if (nx.var != ny.var || !same(nx.lo, ny.lo) || !same(nx.hi, ny.hi)) return false;
        match.emplace(x, y);
        return true;
    };
    return same(a.root_, b.root_);
}

Bdd encode_set(const std::vector<std::vector<int>>& pairs, const BitLayout& layout) {
    std::vector<std::vector<char>> strings;
    strings.reserve(pairs.size());
    for (const auto& p : pairs) strings.push_back(layout.encode(p));
    return Bdd::from_bits(layout.total_bits, std::move(strings));
}

bool contains(const Bdd& bdd, const BitLayout& layout, const std::vector<int>& pair) {
    return bdd.contains(layout.encode(pair));
}

}  // namespace mdpdistill
