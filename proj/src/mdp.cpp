#include "mdpdistill/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdpdistill {

StateId Mdp::find_state(std::span<const int> valuation) const {
    auto it = index_.find(std::vector<int>(valuation.begin(), valuation.end()));
    return it == index_.end() ? static_cast<StateId>(num_states()) : it->second;
}

std::string Mdp::describe_state(StateId s) const {
    std::ostringstream out;
    auto val = valuation(s);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (i) out << ',';
        out << vars_[i].name << '=' << val[i];
    }
    return out.str();
}

MdpBuilder::MdpBuilder(std::vector<VarDecl> vars, int num_modules)
    : vars_(std::move(vars)), num_modules_(num_modules) {}

StateId MdpBuilder::add_state(std::vector<int> valuation) {
    bool added = false;
    StateId id = find_or_add_state(valuation, &added);
    if (!added) {
        throw ModelError("duplicate state valuation");
    }
    return id;
}

StateId MdpBuilder::find_or_add_state(const std::vector<int>& valuation, bool* added) {
    if (valuation.size() != vars_.size()) {
        throw ModelError("state arity does not match variable declarations");
    }
    auto [it, inserted] = index_.try_emplace(valuation, static_cast<StateId>(valuations_.size()));
    if (inserted) {
        valuations_.push_back(valuation);
        choices_.emplace_back();
        target_.push_back(0);
    }
    if (added) *added = inserted;
    return it->second;
}

int MdpBuilder::intern_action(const std::string& name) {
    auto [it, inserted] = action_ids_.try_emplace(name, static_cast<int>(action_names_.size()));
    if (inserted) action_names_.push_back(name);
    return it->second;
}

void MdpBuilder::add_choice(StateId s, ActionAttr attr, std::vector<Transition> dist) {
    if (s >= valuations_.size()) throw ModelError("choice for unknown state " + std::to_string(s));
    std::sort(dist.begin(), dist.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    std::vector<Transition> merged;
    for (const auto& t : dist) {
        if (t.prob < 0.0 || !std::isfinite(t.prob)) throw ModelError("invalid transition probability");
        if (t.prob == 0.0) continue;
        if (!merged.empty() && merged.back().target == t.target) {
            merged.back().prob += t.prob;
        } else {
            merged.push_back(t);
        }
    }
    choices_[s].push_back(Choice{attr, std::move(merged)});
}

void MdpBuilder::add_target(StateId s) {
    if (s >= valuations_.size()) throw ModelError("target refers to unknown state " + std::to_string(s));
    target_[s] = 1;
}

Mdp MdpBuilder::finish() && {
    Mdp mdp;
    const std::size_t n = valuations_.size();
    if (n == 0) throw ModelError("model has no states");
    if (initial_ >= n) throw ModelError("initial state out of range");

    const int tau = intern_action(kTauName);
    mdp.vars_ = std::move(vars_);
    mdp.num_modules_ = num_modules_;
    mdp.initial_ = initial_;
    mdp.target_ = std::move(target_);
    mdp.valuations_.reserve(n * mdp.vars_.size());
    mdp.choice_begin_.assign(1, 0);
    mdp.choice_begin_.reserve(n + 1);

    for (StateId s = 0; s < n; ++s) {
        mdp.valuations_.insert(mdp.valuations_.end(), valuations_[s].begin(), valuations_[s].end());
        if (mdp.target_[s]) {
            mdp.choices_.push_back(Choice{ActionAttr{tau, 0}, {Transition{s, 1.0}}});
        } else {
            if (choices_[s].empty()) {
                std::ostringstream msg;
                msg << "deadlock: state " << s << " has no enabled action";
                throw ModelError(msg.str());
            }
            for (auto& c : choices_[s]) {
                double sum = 0.0;
                for (const auto& t : c.dist) {
                    if (t.target >= n) throw ModelError("transition to unknown state " + std::to_string(t.target));
                    sum += t.prob;
                }
                if (std::abs(sum - 1.0) > 1e-9) {
                    std::ostringstream msg;
                    msg << "distribution of action '" << action_names_[c.attr.name] << "' in state " << s
                        << " sums to " << sum;
                    throw ModelError(msg.str());
                }
                mdp.choices_.push_back(std::move(c));
            }
        }
        mdp.choice_begin_.push_back(mdp.choices_.size());
    }
    mdp.action_names_ = std::move(action_names_);
    mdp.index_ = std::move(index_);
    return mdp;
}

bool LiberalStrategy::is_good(StateId s, ActionIndex a) const {
    const auto& c = choice_[s];
    return std::binary_search(c.begin(), c.end(), a);
}

void LiberalStrategy::set(StateId s, std::vector<ActionIndex> actions) {
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    choice_[s] = std::move(actions);
}

std::size_t LiberalStrategy::defined_count() const {
    return static_cast<std::size_t>(std::count_if(choice_.begin(), choice_.end(), [](const auto& c) { return !c.empty(); }));
}

void validate_strategy(const Mdp& mdp, const LiberalStrategy& strategy) {
    if (strategy.size() != mdp.num_states()) throw ModelError("strategy arity does not match the MDP");
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionIndex a : strategy.good(s)) {
            if (a >= mdp.num_actions(s)) {
                throw ModelError("strategy selects a non-enabled action in state " + std::to_string(s));
            }
        }
    }
}

}  // namespace mdpdistill
