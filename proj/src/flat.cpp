#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "mdpdistill/model.hpp"

namespace mdpdistill {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

long long to_int(const std::string& w, int line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(w, &used);
        if (used == w.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(line, 1, "expected an integer but found '" + w + "'");
}

double to_prob(const std::string& w, int line) {
    try {
        std::size_t used = 0;
        double v = std::stod(w, &used);
        if (used < w.size() && w[used] == '/') {
            const std::string rest = w.substr(used + 1);
            std::size_t used2 = 0;
            const double q = std::stod(rest, &used2);
            if (used2 == rest.size() && q != 0.0) return v / q;
        } else if (used == w.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ParseError(line, 1, "expected a probability but found '" + w + "'");
}

}  // namespace

Mdp parse_flat(const std::string& text, const std::optional<std::string>& target_override) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::vector<VarDecl> vars;
    bool have_vars = false;
    std::vector<std::string> action_order;
    int modules = -1;
    struct Act {
        long long state;
        std::string name;
        int module;
        std::vector<std::pair<double, long long>> dist;
        int line;
    };
    std::vector<std::pair<long long, std::vector<int>>> states;
    std::vector<int> state_lines;
    std::vector<Act> acts;
    long long init = -1;
    int init_line = 0;
    std::vector<std::pair<long long, int>> targets;

    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.resize(hash);
        const auto w = split(raw);
        if (w.empty()) continue;
        const std::string& kw = w[0];
        if (kw == "vars") {
            if (have_vars) throw ParseError(line, 1, "duplicate vars header");
            have_vars = true;
            for (std::size_t i = 1; i < w.size(); ++i) {
                const auto colon = w[i].find(':');
                const auto dots = w[i].find("..", colon == std::string::npos ? 0 : colon);
                if (colon == std::string::npos || dots == std::string::npos) {
                    throw ParseError(line, 1, "variable declaration must look like name:lo..hi, found '" + w[i] + "'");
                }
                VarDecl v;
                v.name = w[i].substr(0, colon);
                v.lo = static_cast<int>(to_int(w[i].substr(colon + 1, dots - colon - 1), line));
                v.hi = static_cast<int>(to_int(w[i].substr(dots + 2), line));
                if (v.lo > v.hi) throw ParseError(line, 1, "empty range for variable '" + v.name + "'");
                for (const auto& o : vars) {
                    if (o.name == v.name) throw ParseError(line, 1, "duplicate variable '" + v.name + "'");
                }
                v.init = v.lo;
                vars.push_back(v);
            }
        } else if (kw == "actions") {
            action_order.assign(w.begin() + 1, w.end());
        } else if (kw == "modules") {
            if (w.size() != 2) throw ParseError(line, 1, "modules takes one count");
            modules = static_cast<int>(to_int(w[1], line));
        } else if (kw == "state") {
            if (!have_vars) throw ParseError(line, 1, "state before the vars header");
            if (w.size() != vars.size() + 2) {
                throw ParseError(line, 1, "state needs an id and " + std::to_string(vars.size()) + " values");
            }
            std::vector<int> val;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                const long long x = to_int(w[i + 2], line);
                if (x < vars[i].lo || x > vars[i].hi) {
                    throw ParseError(line, 1, "value of '" + vars[i].name + "' outside its range");
                }
                val.push_back(static_cast<int>(x));
            }
            states.emplace_back(to_int(w[1], line), std::move(val));
            state_lines.push_back(line);
        } else if (kw == "act") {
            if (w.size() < 6 || (w.size() - 4) % 2 != 0) {
                throw ParseError(line, 1, "act needs a state, a name, a module and (prob, successor) pairs");
            }
            Act a{to_int(w[1], line), w[2], static_cast<int>(to_int(w[3], line)), {}, line};
            for (std::size_t i = 4; i < w.size(); i += 2) a.dist.emplace_back(to_prob(w[i], line), to_int(w[i + 1], line));
            acts.push_back(std::move(a));
        } else if (kw == "init") {
            if (w.size() != 2) throw ParseError(line, 1, "init takes one state id");
            init = to_int(w[1], line);
            init_line = line;
        } else if (kw == "target") {
            for (std::size_t i = 1; i < w.size(); ++i) targets.emplace_back(to_int(w[i], line), line);
        } else {
            throw ParseError(line, 1, "unknown directive '" + kw + "'");
        }
    }
    if (states.empty()) throw ModelError("flat model declares no states");
    if (init < 0) throw ModelError("flat model has no init line");

    int max_module = 0;
    for (const auto& a : acts) max_module = std::max(max_module, a.module);
    if (modules < 0) modules = std::max(1, max_module);
    if (max_module > modules) throw ModelError("action module exceeds the declared module count");

    MdpBuilder builder(vars, modules);
    for (const auto& name : action_order) builder.intern_action(name);
    std::map<long long, StateId> ids;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!ids.emplace(states[i].first, static_cast<StateId>(i)).second) {
            throw ParseError(state_lines[i], 1, "duplicate state id " + std::to_string(states[i].first));
        }
        try {
            builder.add_state(states[i].second);
        } catch (const ModelError& e) {
            throw ParseError(state_lines[i], 1, e.what());
        }
    }
    auto lookup = [&](long long id, int at) {
        auto it = ids.find(id);
        if (it == ids.end()) throw ParseError(at, 1, "dangling state id " + std::to_string(id));
        return it->second;
    };
    builder.set_initial(lookup(init, init_line));
    if (target_override) {
        const auto cond = parse_condition(*target_override, vars);
        for (StateId s = 0; s < states.size(); ++s) {
            if (cond->eval(states[s].second)) builder.add_target(s);
        }
    } else {
        for (const auto& [id, at] : targets) builder.add_target(lookup(id, at));
    }
    for (const auto& a : acts) {
        const StateId s = lookup(a.state, a.line);
        double total = 0.0;
        std::vector<Transition> dist;
        for (const auto& [p, t] : a.dist) {
            if (!(p > 0.0 && p <= 1.0)) throw ParseError(a.line, 1, "probabilities must lie in (0, 1]");
            total += p;
            dist.push_back({lookup(t, a.line), p});
        }
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "distribution sums to " << total << ", not 1";
            throw ParseError(a.line, 1, msg.str());
        }
        if (a.module < 0) throw ParseError(a.line, 1, "negative module index");
        builder.add_choice(s, ActionAttr{builder.intern_action(a.name), a.module}, std::move(dist));
    }
    return std::move(builder).finish();
}

std::string write_flat(const Mdp& mdp) {
    std::ostringstream out;
    out << "vars";
    for (const auto& v : mdp.vars()) out << ' ' << v.name << ':' << v.lo << ".." << v.hi;
    out << "\nactions";
    for (const auto& a : mdp.action_names()) out << ' ' << a;
    out << "\nmodules " << mdp.num_modules() << '\n';
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        out << "state " << s;
        for (int x : mdp.valuation(s)) out << ' ' << x;
        out << '\n';
    }
    char buf[64];
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.is_target(s)) continue;
        for (const auto& c : mdp.actions(s)) {
            out << "act " << s << ' ' << mdp.action_name(c.attr) << ' ' << c.attr.module;
            for (const auto& t : c.dist) {
                std::snprintf(buf, sizeof buf, "%.17g", t.prob);
                out << ' ' << buf << ' ' << t.target;
            }
            out << '\n';
        }
    }
    out << "init " << mdp.initial() << '\n';
    out << "target";
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (mdp.is_target(s)) out << ' ' << s;
    }
    out << '\n';
    return out.str();
}

}  // namespace mdpdistill
