#include "mdpdistill/dtree.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mdpdistill/strategy.hpp"

namespace mdpdistill {

using json = nlohmann::json;

const char* to_string(PredOp op) {
    switch (op) {
        case PredOp::Le: return "<=";
        case PredOp::Lt: return "<";
        case PredOp::Ge: return ">=";
        case PredOp::Gt: return ">";
        case PredOp::Eq: return "=";
    }
    return "?";
}

PredOp parse_pred_op(const std::string& text) {
    if (text == "<=") return PredOp::Le;
    if (text == "<") return PredOp::Lt;
    if (text == ">=") return PredOp::Ge;
    if (text == ">") return PredOp::Gt;
    if (text == "=") return PredOp::Eq;
    throw std::invalid_argument("unknown predicate operator '" + text + "'");
}

bool Predicate::holds(const std::vector<int>& x) const {
    const int v = x.at(static_cast<std::size_t>(coord));
    switch (op) {
        case PredOp::Le: return v <= k;
        case PredOp::Lt: return v < k;
        case PredOp::Ge: return v >= k;
        case PredOp::Gt: return v > k;
        case PredOp::Eq: return v == k;
    }
    return false;
}

Predicate Predicate::normalized(bool* negated) const {
    bool neg = false;
    Predicate p = *this;
    switch (op) {
        case PredOp::Le:
        case PredOp::Eq: break;
        case PredOp::Lt: p = {coord, PredOp::Le, k - 1}; break;
        case PredOp::Gt: p = {coord, PredOp::Le, k}, neg = true; break;
        case PredOp::Ge: p = {coord, PredOp::Le, k - 1}, neg = true; break;
    }
    if (negated) *negated = neg;
    return p;
}

bool Predicate::equivalent(const Predicate& other) const {
    bool na = false, nb = false;
    return normalized(&na) == other.normalized(&nb) && na == nb;
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("decision tree needs at least one node");
    std::vector<int> parents(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.leaf) continue;
        for (int c : {n.yes, n.no}) {
            if (c <= static_cast<int>(i) || c >= static_cast<int>(nodes_.size())) {
                throw std::invalid_argument("decision tree child index out of order");
            }
            ++parents[static_cast<std::size_t>(c)];
        }
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (parents[i] != 1) throw std::invalid_argument("decision tree node without a unique parent");
    }
}

DecisionTree DecisionTree::leaf(bool good) {
    Node n;
    n.good = good;
    return DecisionTree(std::vector<Node>{n});
}

std::size_t DecisionTree::size() const { return nodes_.size(); }

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].leaf) {
            d[static_cast<std::size_t>(nodes_[i].yes)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].no)] = d[i] + 1;
        }
    }
    return best;
}

bool DecisionTree::classify(const std::vector<int>& x) const {
    int id = 0;
    while (!nodes_[static_cast<std::size_t>(id)].leaf) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        id = n.pred.holds(x) ? n.yes : n.no;
    }
    return nodes_[static_cast<std::size_t>(id)].good;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const auto &x = a.nodes_[i], &y = b.nodes_[i];
        if (x.leaf != y.leaf) return false;
        if (x.leaf ? x.good != y.good : (!(x.pred == y.pred) || x.yes != y.yes || x.no != y.no)) return false;
    }
    return true;
}

bool DecisionTree::equivalent(const DecisionTree& other) const {
    std::function<bool(int, int)> same = [&](int i, int j) {
        const Node& x = node(i);
        const Node& y = other.node(j);
        if (x.leaf || y.leaf) return x.leaf && y.leaf && x.good == y.good;
        bool nx = false, ny = false;
        if (!(x.pred.normalized(&nx) == y.pred.normalized(&ny))) return false;
        if (nx == ny) return same(x.yes, y.yes) && same(x.no, y.no);
        return same(x.yes, y.no) && same(x.no, y.yes);
    };
    return same(0, 0);
}

namespace {

std::string value_label(const Predicate& p, const FeatureSchema& schema) {
    if (p.coord == schema.action_coord()) return schema.action_names.at(static_cast<std::size_t>(p.k));
    return std::to_string(p.k);
}

std::string predicate_label(const Predicate& p, const FeatureSchema& schema) {
    return schema.coord_name(p.coord) + " " + to_string(p.op) + " " + value_label(p, schema);
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string DecisionTree::export_dot(const FeatureSchema& schema) const {
    std::ostringstream out;
    out << "digraph tree {\n";
    out << "  node [fontname=\"Helvetica\"];\n";
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.leaf) {
            out << "  n" << i << " [shape=ellipse, label=\"" << (n.good ? "good" : "bad") << "\"];\n";
        } else {
            out << "  n" << i << " [shape=box, label=\"" << dot_escape(predicate_label(n.pred, schema)) << "\"];\n";
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.leaf) continue;
        out << "  n" << i << " -> n" << n.yes << ";\n";
        out << "  n" << i << " -> n" << n.no << " [style=dashed];\n";
    }
    out << "}\n";
    return out.str();
}

std::string DecisionTree::export_json(const FeatureSchema& schema) const {
    std::function<json(int)> emit = [&](int id) {
        const Node& n = node(id);
        if (n.leaf) return json{{"leaf", n.good ? "good" : "bad"}};
        json p;
        if (n.pred.coord == schema.action_coord()) {
            p = {{"cat", "action"}, {"v", schema.action_names.at(static_cast<std::size_t>(n.pred.k))}};
        } else if (n.pred.coord == schema.module_coord()) {
            p = {{"cat", "module"}, {"v", n.pred.k}};
        } else {
            p = {{"coord", schema.coord_name(n.pred.coord)}, {"op", to_string(n.pred.op)}, {"k", n.pred.k}};
        }
        return json{{"p", p}, {"yes", emit(n.yes)}, {"no", emit(n.no)}};
    };
    return emit(0).dump(2) + "\n";
}

DecisionTree DecisionTree::import_json(const std::string& text, const FeatureSchema& schema) {
    std::vector<Node> nodes;
    std::function<int(const json&)> read = [&](const json& j) -> int {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (j.contains("leaf")) {
            const auto label = j.at("leaf").get<std::string>();
            if (label != "good" && label != "bad") throw std::invalid_argument("leaf label must be good or bad");
            nodes[static_cast<std::size_t>(id)].good = label == "good";
            return id;
        }
        const json& p = j.at("p");
        Predicate pred;
        if (p.contains("cat")) {
            const auto cat = p.at("cat").get<std::string>();
            if (cat == "action") {
                const int a = schema.action_id(p.at("v").get<std::string>());
                if (a < 0) throw std::invalid_argument("unknown action name in tree");
                pred = Predicate::categorical(schema.action_coord(), a);
            } else if (cat == "module") {
                pred = Predicate::categorical(schema.module_coord(), p.at("v").get<int>());
            } else {
                throw std::invalid_argument("unknown categorical coordinate '" + cat + "'");
            }
        } else {
            const int coord = schema.coord_index(p.at("coord").get<std::string>());
            if (coord < 0 || schema.is_categorical(coord)) throw std::invalid_argument("unknown variable in tree");
            pred = Predicate::numeric(coord, parse_pred_op(p.at("op").get<std::string>()), p.at("k").get<int>());
        }
        Node inner;
        inner.leaf = false;
        inner.pred = pred;
        inner.yes = read(j.at("yes"));
        inner.no = read(j.at("no"));
        nodes[static_cast<std::size_t>(id)] = inner;
        return id;
    };
    try {
        read(json::parse(text));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed tree JSON: ") + e.what());
    }
    return DecisionTree(std::move(nodes));
}

namespace {

double entropy(double g, double b) {
    const double w = g + b;
    double h = 0.0;
    for (double x : {g, b}) {
        if (x > 0.0) h -= x / w * std::log2(x / w);
    }
    return h;
}

int floor_mid(int a, int b) {
    const long long s = static_cast<long long>(a) + b;
    return static_cast<int>(s >= 0 ? s / 2 : -((-s + 1) / 2));
}

// Upper confidence bound on extra errors at a leaf, as in C4.5.
double added_errors(double n, double e, double cf) {
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = boost::math::quantile(boost::math::normal(), 1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r =
        (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
    return r * n - e;
}

struct Work {
    bool leaf = true;
    bool good = true;
    Predicate pred;
    double g = 0.0, b = 0.0;
    std::unique_ptr<Work> yes, no;
};

class Learner {
   public:
    Learner(const TrainingSet& ts, const LearnParams& params) : ts_(ts), params_(params) {}

    std::unique_ptr<Work> grow(std::vector<std::size_t> idx) {
        auto w = std::make_unique<Work>();
        for (auto i : idx) (ts_.rows[i].good ? w->g : w->b) += weight(i);
        w->good = w->g >= w->b;
        if (w->g == 0.0 || w->b == 0.0 || std::min(w->g, w->b) < params_.min_leaf) return w;
        auto split = best_split(idx, w->g, w->b);
        if (!split) return w;
        std::vector<std::size_t> yes, no;
        for (auto i : idx) (split->holds(ts_.rows[i].features) ? yes : no).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        w->leaf = false;
        w->pred = *split;
        w->yes = grow(std::move(yes));
        w->no = grow(std::move(no));
        return w;
    }

    double prune(Work& w) const {
        const double leaf_err = std::min(w.g, w.b) + added_errors(w.g + w.b, std::min(w.g, w.b), params_.confidence);
        if (w.leaf) {
            const double e = w.good ? w.b : w.g;
            return e + added_errors(w.g + w.b, e, params_.confidence);
        }
        const double tree_err = prune(*w.yes) + prune(*w.no);
        if (leaf_err <= tree_err + 0.1) {
            w.leaf = true;
            w.yes.reset();
            w.no.reset();
            return leaf_err;
        }
        return tree_err;
    }

   private:
    double weight(std::size_t i) const { return static_cast<double>(ts_.rows[i].repeat); }

    std::optional<Predicate> best_split(const std::vector<std::size_t>& idx, double g, double b) const {
        const double total = g + b;
        const double parent = entropy(g, b);
        const double m = params_.min_leaf;
        std::optional<Predicate> best;
        double best_gain = 1e-12;
        auto consider = [&](const Predicate& p, double yg, double yb) {
            const double ng = g - yg, nb = b - yb;
            if (yg + yb < m || ng + nb < m) return;
            const double gain = parent - ((yg + yb) * entropy(yg, yb) + (ng + nb) * entropy(ng, nb)) / total;
            if (gain > best_gain + 1e-12 || (!best && gain > best_gain)) {
                best_gain = gain;
                best = p;
            }
        };
        const int arity = static_cast<int>(ts_.schema.arity());
        for (int c = 0; c < arity; ++c) {
            std::map<int, std::pair<double, double>> by_value;
            for (auto i : idx) {
                auto& cell = by_value[ts_.rows[i].features[static_cast<std::size_t>(c)]];
                (ts_.rows[i].good ? cell.first : cell.second) += weight(i);
            }
            if (by_value.size() < 2) continue;
            if (ts_.schema.is_categorical(c)) {
                for (const auto& [v, gb] : by_value) consider(Predicate::categorical(c, v), gb.first, gb.second);
                continue;
            }
            double yg = 0.0, yb = 0.0;
            for (auto it = by_value.begin(); std::next(it) != by_value.end(); ++it) {
                yg += it->second.first;
                yb += it->second.second;
                consider(Predicate::numeric(c, PredOp::Le, floor_mid(it->first, std::next(it)->first)), yg, yb);
            }
        }
        return best;
    }

    const TrainingSet& ts_;
    const LearnParams& params_;
};

void flatten(const Work& w, std::vector<DecisionTree::Node>& out) {
    const std::size_t id = out.size();
    out.emplace_back();
    out[id].good = w.good;
    if (w.leaf) return;
    out[id].leaf = false;
    out[id].pred = w.pred;
    out[id].yes = static_cast<int>(out.size());
    flatten(*w.yes, out);
    out[id].no = static_cast<int>(out.size());
    flatten(*w.no, out);
}

}  // namespace

DecisionTree learn(const TrainingSet& ts, const LearnParams& params) {
    if (!(params.min_leaf >= 1.0)) throw std::invalid_argument("minimum leaf weight must be at least 1");
    if (!(params.confidence > 0.0 && params.confidence <= 0.5)) {
        throw std::invalid_argument("confidence factor must lie in (0, 0.5]");
    }
    if (ts.rows.empty()) return DecisionTree::leaf(true);
    Learner learner(ts, params);
    std::vector<std::size_t> idx(ts.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto root = learner.grow(std::move(idx));
    if (params.prune) learner.prune(*root);
    std::vector<DecisionTree::Node> nodes;
    flatten(*root, nodes);
    return DecisionTree(std::move(nodes));
}

double training_error(const DecisionTree& tree, const TrainingSet& ts) {
    double wrong = 0.0, total = 0.0;
    for (const auto& r : ts.rows) {
        total += static_cast<double>(r.repeat);
        if (tree.classify(r.features) != r.good) wrong += static_cast<double>(r.repeat);
    }
    return total > 0.0 ? wrong / total : 0.0;
}

LiberalStrategy induce_strategy(const DecisionTree& tree, const Mdp& mdp, std::vector<StateId>* fallback) {
    LiberalStrategy strategy(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        std::vector<ActionIndex> good;
        for (ActionIndex a = 0; a < mdp.num_actions(s); ++a) {
            if (tree.classify(pair_features(mdp, s, a))) good.push_back(a);
        }
        if (good.empty()) {
            if (fallback) fallback->push_back(s);
        } else {
            strategy.set(s, std::move(good));
        }
    }
    return strategy;
}

double relative_error(double exact, double value) {
    if (exact <= 0.0) return 0.0;
    return std::max(0.0, (exact - value) / exact);
}

std::optional<FitProbe> FitResult::probe(std::uint64_t m) const {
    for (const auto& p : probes) {
        if (p.min_leaf == m) return p;
    }
    return std::nullopt;
}

FitResult fit_max_leaf(const TrainingSet& ts, const Mdp& mdp, double budget, double exact_value,
                       const LearnParams& base) {
    if (!(budget > 0.0 && budget <= 1.0)) throw std::invalid_argument("error budget must lie in (0, 1]");
    FitResult result;
    std::map<std::uint64_t, std::pair<DecisionTree, FitProbe>> cache;
    auto eval = [&](std::uint64_t m) -> const FitProbe& {
        auto it = cache.find(m);
        if (it != cache.end()) return it->second.second;
        LearnParams params = base;
        params.min_leaf = static_cast<double>(m);
        DecisionTree tree = learn(ts, params);
        const double value = evaluate(mdp, induce_strategy(tree, mdp));
        FitProbe probe{m, tree.size(), value, relative_error(exact_value, value)};
        result.probes.push_back(probe);
        return cache.emplace(m, std::make_pair(std::move(tree), probe)).first->second.second;
    };
    auto ok = [&](std::uint64_t m) { return eval(m).error <= budget; };

    const std::uint64_t top = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(ts.minority_weight())));
    std::uint64_t lo = 1, hi = top;
    if (!ok(1)) {
        const auto& p = cache.at(1);
        result.tree = p.first;
        result.min_leaf = 1;
        result.value = p.second.value;
        result.error = p.second.error;
        return result;
    }
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        if (ok(mid)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    for (const auto& [m, entry] : cache) {
        if (entry.second.error > budget && m < lo) result.non_monotone = true;
    }
    if (result.non_monotone) {
        // A failure below a success: scan a bounded window under the highest failed midpoint.
        std::uint64_t highest_fail = 0;
        for (const auto& [m, entry] : cache) {
            if (entry.second.error > budget) highest_fail = std::max(highest_fail, m);
        }
        std::uint64_t steps = 0;
        for (std::uint64_t m = highest_fail; m > lo + 1 && steps < 64; ++steps) {
            --m;
            if (ok(m)) {
                lo = m;
                break;
            }
        }
    }
    const auto& p = cache.at(lo);
    result.tree = p.first;
    result.min_leaf = lo;
    result.value = p.second.value;
    result.error = p.second.error;
    result.met = true;
    return result;
}

}  // namespace mdpdistill
