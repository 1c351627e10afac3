#pragma once

#include <string>
#include <vector>

#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

/// Coordinates of the state-action domain: one per state variable, then the action name
/// (categorical, coded by index into action_names), then the module (categorical, 0..m).
struct FeatureSchema {
    std::vector<VarDecl> vars;
    std::vector<std::string> action_names;
    int num_modules = 1;

    static FeatureSchema from(const Mdp& mdp);

    std::size_t arity() const { return vars.size() + 2; }
    int action_coord() const { return static_cast<int>(vars.size()); }
    int module_coord() const { return static_cast<int>(vars.size()) + 1; }
    bool is_categorical(int coord) const { return coord >= action_coord(); }
    std::string coord_name(int coord) const;
    /// Accepts a variable name, "action" or "module"; returns -1 when unknown.
    int coord_index(const std::string& name) const;
    int action_id(const std::string& name) const;

    friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
        if (a.vars.size() != b.vars.size() || a.action_names != b.action_names || a.num_modules != b.num_modules) {
            return false;
        }
        for (std::size_t i = 0; i < a.vars.size(); ++i) {
            if (a.vars[i].name != b.vars[i].name || a.vars[i].lo != b.vars[i].lo || a.vars[i].hi != b.vars[i].hi) {
                return false;
            }
        }
        return true;
    }
};

/// Feature vector of the pair (s, a).
std::vector<int> pair_features(const Mdp& mdp, StateId s, ActionIndex a);

}  // namespace mdpdistill
