#pragma once

#include <set>
#include <string>

#include "mdpdistill/pipeline.hpp"

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline mdpdistill::Mdp model(const std::string& text) { return mdpdistill::load_model_text(text, false); }

inline mdpdistill::StateId state_at(const mdpdistill::Mdp& mdp, std::vector<int> v) { return mdp.find_state(v); }

inline std::set<std::string> good_names(const mdpdistill::Mdp& mdp, const mdpdistill::LiberalStrategy& st,
                                        mdpdistill::StateId s) {
    std::set<std::string> out;
    for (auto a : st.good(s)) out.insert(mdp.action_name(mdp.action(s, a).attr));
    return out;
}
