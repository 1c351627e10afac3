#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpdistill/features.hpp"
#include "mdpdistill/importance.hpp"
#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

enum class PredOp { Le, Lt, Ge, Gt, Eq };

const char* to_string(PredOp op);
PredOp parse_pred_op(const std::string& text);

/// [x_coord op k]. On the action and module coordinates only Eq is allowed; k is then the
/// action-name index or the module number.
struct Predicate {
    int coord = 0;
    PredOp op = PredOp::Le;
    int k = 0;

    static Predicate numeric(int coord, PredOp op, int k) { return {coord, op, k}; }
    static Predicate categorical(int coord, int value) { return {coord, PredOp::Eq, value}; }

    bool holds(const std::vector<int>& x) const;
    /// Integer-equivalent form using only <= and =. `negated` is set when the normal form
    /// holds exactly when this predicate does not.
    Predicate normalized(bool* negated = nullptr) const;
    /// Same truth value on every integer input.
    bool equivalent(const Predicate& other) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

class DecisionTree {
   public:
    struct Node {
        bool leaf = true;
        bool good = true;
        Predicate pred;
        int yes = -1;
        int no = -1;
    };

    DecisionTree() : nodes_{Node{}} {}
    /// Nodes in pre-order with node 0 as the root; children must follow their parent.
    explicit DecisionTree(std::vector<Node> nodes);
    static DecisionTree leaf(bool good);

    int root() const { return 0; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const;
    std::size_t depth() const;

    bool classify(const std::vector<int>& x) const;

    /// Structural equality with predicates compared up to integer equivalence.
    bool equivalent(const DecisionTree& other) const;
    friend bool operator==(const DecisionTree& a, const DecisionTree& b);

    std::string export_dot(const FeatureSchema& schema) const;
    std::string export_json(const FeatureSchema& schema) const;
    static DecisionTree import_json(const std::string& text, const FeatureSchema& schema);

   private:
    std::vector<Node> nodes_;
};

struct LearnParams {
    double min_leaf = 1.0;
    double confidence = 1e-4;
    bool prune = true;
};

DecisionTree learn(const TrainingSet& ts, const LearnParams& params);

/// Fraction of weighted training mass classified with the wrong label.
double training_error(const DecisionTree& tree, const TrainingSet& ts);

/// a in strategy(s) iff (s,a) is accepted by the tree; states where no action is accepted
/// fall back to don't-care and are appended to `fallback` when given.
LiberalStrategy induce_strategy(const DecisionTree& tree, const Mdp& mdp, std::vector<StateId>* fallback = nullptr);

/// (Val - value) / Val, 0 when Val is 0.
double relative_error(double exact, double value);

struct FitProbe {
    std::uint64_t min_leaf = 0;
    std::size_t size = 0;
    double value = 0.0;
    double error = 0.0;
};

struct FitResult {
    DecisionTree tree;
    std::uint64_t min_leaf = 1;
    double value = 0.0;
    double error = 0.0;
    bool met = false;
    bool non_monotone = false;
    std::vector<FitProbe> probes;  // in evaluation order

    std::optional<FitProbe> probe(std::uint64_t m) const;
};

/// Largest M in [1, minority weight] whose tree keeps the relative error within budget.
FitResult fit_max_leaf(const TrainingSet& ts, const Mdp& mdp, double budget, double exact_value,
                       const LearnParams& base = {});

}  // namespace mdpdistill
