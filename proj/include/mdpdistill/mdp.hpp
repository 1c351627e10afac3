#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mdpdistill {

using StateId = std::uint32_t;
using ActionIndex = std::uint32_t;

/// Thrown when a model (text or programmatic) violates a structural invariant.
class ModelError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct VarDecl {
    std::string name;
    int lo = 0;
    int hi = 0;
    int init = 0;
};

/// Structured action identity: (name, module). Module 0 marks synchronizing actions.
struct ActionAttr {
    int name = 0;  // index into Mdp::action_names()
    int module = 0;

    friend bool operator==(const ActionAttr&, const ActionAttr&) = default;
    friend auto operator<=>(const ActionAttr&, const ActionAttr&) = default;
};

struct Transition {
    StateId target;
    double prob;
};

struct Choice {
    ActionAttr attr;
    std::vector<Transition> dist;
};

inline constexpr const char* kTauName = "tau";

struct ValuationHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (int x : v) {
            h ^= static_cast<std::size_t>(static_cast<unsigned>(x)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

/// Explicit finite MDP over integer-vector states. Immutable once built by MdpBuilder.
///
/// Target states are absorbing: each has exactly one action (tau) with a Dirac self-loop.
class Mdp {
   public:
    std::size_t num_states() const { return choice_begin_.size() - 1; }
    std::size_t num_choices() const { return choices_.size(); }
    std::size_t num_vars() const { return vars_.size(); }
    int num_modules() const { return num_modules_; }

    const std::vector<VarDecl>& vars() const { return vars_; }
    const std::vector<std::string>& action_names() const { return action_names_; }
    const std::string& action_name(ActionAttr attr) const { return action_names_.at(static_cast<std::size_t>(attr.name)); }

    std::span<const int> valuation(StateId s) const {
        return {valuations_.data() + static_cast<std::size_t>(s) * vars_.size(), vars_.size()};
    }

    std::size_t first_choice(StateId s) const { return choice_begin_[s]; }
    std::size_t num_actions(StateId s) const { return choice_begin_[s + 1] - choice_begin_[s]; }
    std::span<const Choice> actions(StateId s) const {
        return {choices_.data() + choice_begin_[s], num_actions(s)};
    }
    const Choice& action(StateId s, ActionIndex a) const { return choices_[choice_begin_[s] + a]; }
    const Choice& choice(std::size_t global) const { return choices_[global]; }

    StateId initial() const { return initial_; }
    bool is_target(StateId s) const { return target_[s] != 0; }
    const std::vector<char>& target_mask() const { return target_; }

    /// Lookup by valuation; returns num_states() when absent.
    StateId find_state(std::span<const int> valuation) const;

    /// Renders "x=1,y=0".
    std::string describe_state(StateId s) const;

   private:
    friend class MdpBuilder;

    std::vector<VarDecl> vars_;
    int num_modules_ = 1;
    std::vector<std::string> action_names_;
    std::vector<int> valuations_;
    std::vector<std::size_t> choice_begin_{0};
    std::vector<Choice> choices_;
    StateId initial_ = 0;
    std::vector<char> target_;
    std::unordered_map<std::vector<int>, StateId, ValuationHash> index_;
};

/// Incremental construction of an Mdp. States may receive choices in any order.
class MdpBuilder {
   public:
    MdpBuilder(std::vector<VarDecl> vars, int num_modules);

    /// Adds a state; throws ModelError on a duplicate valuation.
    StateId add_state(std::vector<int> valuation);
    /// Returns the existing id or adds the state.
    StateId find_or_add_state(const std::vector<int>& valuation, bool* added = nullptr);
    std::size_t num_states() const { return valuations_.size(); }
    const std::vector<int>& valuation(StateId s) const { return valuations_[s]; }

    int intern_action(const std::string& name);

    /// Duplicate successors are merged; zero-probability entries dropped.
    void add_choice(StateId s, ActionAttr attr, std::vector<Transition> dist);
    void set_initial(StateId s) { initial_ = s; }
    void add_target(StateId s);

    /// Makes targets absorbing and validates: non-empty Act(s), distributions summing to 1 within 1e-9.
    Mdp finish() &&;

   private:
    std::vector<VarDecl> vars_;
    int num_modules_;
    std::vector<std::string> action_names_;
    std::unordered_map<std::string, int> action_ids_;
    std::vector<std::vector<int>> valuations_;
    std::unordered_map<std::vector<int>, StateId, ValuationHash> index_;
    std::vector<std::vector<Choice>> choices_;
    std::vector<char> target_;
    StateId initial_ = 0;
};

/// Uniform Markov chain over locations 0..n-1, CSR rows.
struct MarkovChain {
    std::vector<std::size_t> row_begin{0};
    std::vector<StateId> col;
    std::vector<double> prob;
    StateId initial = 0;

    std::size_t size() const { return row_begin.size() - 1; }
    std::span<const StateId> successors(StateId l) const {
        return {col.data() + row_begin[l], row_begin[l + 1] - row_begin[l]};
    }
    std::span<const double> probabilities(StateId l) const {
        return {prob.data() + row_begin[l], row_begin[l + 1] - row_begin[l]};
    }
};

/// Partial map state -> non-empty set of good local action indices. An empty set means
/// the state is a don't-care (simulated and evaluated as uniform over Act(s)).
class LiberalStrategy {
   public:
    LiberalStrategy() = default;
    explicit LiberalStrategy(std::size_t num_states) : choice_(num_states) {}

    std::size_t size() const { return choice_.size(); }
    bool defined(StateId s) const { return !choice_[s].empty(); }
    std::span<const ActionIndex> good(StateId s) const { return choice_[s]; }
    bool is_good(StateId s, ActionIndex a) const;

    /// Actions are sorted and deduplicated; an empty set clears the state.
    void set(StateId s, std::vector<ActionIndex> actions);
    void clear(StateId s) { choice_[s].clear(); }
    std::size_t defined_count() const;

    friend bool operator==(const LiberalStrategy&, const LiberalStrategy&) = default;

   private:
    std::vector<std::vector<ActionIndex>> choice_;
};

/// Throws ModelError when the strategy references a non-enabled action or has the wrong arity.
void validate_strategy(const Mdp& mdp, const LiberalStrategy& strategy);

}  // namespace mdpdistill
