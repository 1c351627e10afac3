#include "mdpdistill/features.hpp"

#include <algorithm>

namespace mdpdistill {

FeatureSchema FeatureSchema::from(const Mdp& mdp) {
    return FeatureSchema{mdp.vars(), mdp.action_names(), mdp.num_modules()};
}

std::string FeatureSchema::coord_name(int coord) const {
    if (coord == action_coord()) return "action";
    if (coord == module_coord()) return "module";
    return vars.at(static_cast<std::size_t>(coord)).name;
}

int FeatureSchema::coord_index(const std::string& name) const {
    if (name == "action") return action_coord();
    if (name == "module") return module_coord();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

int FeatureSchema::action_id(const std::string& name) const {
    auto it = std::find(action_names.begin(), action_names.end(), name);
    return it == action_names.end() ? -1 : static_cast<int>(it - action_names.begin());
}

std::vector<int> pair_features(const Mdp& mdp, StateId s, ActionIndex a) {
    auto val = mdp.valuation(s);
    std::vector<int> f(val.begin(), val.end());
    const auto& attr = mdp.action(s, a).attr;
    f.push_back(attr.name);
    f.push_back(attr.module);
    return f;
}

}  // namespace mdpdistill
