#include "mdpdistill/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mdpdistill/bdd.hpp"
#include "mdpdistill/mec.hpp"
#include "mdpdistill/reach.hpp"

namespace mdpdistill {

Mdp load_model_text(const std::string& text, bool flat, const LoadOptions& options) {
    if (flat) return parse_flat(text, options.target_expr);
    ModelAst ast = parse_model(text);
    if (options.target_expr) ast.target = parse_condition(*options.target_expr, ast);
    return build_mdp(ast, options.build);
}

Mdp load_model_file(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const bool flat = path.size() >= 5 && path.compare(path.size() - 5, 5, ".flat") == 0;
    return load_model_text(buf.str(), flat, options);
}

Engine parse_engine(const std::string& text) {
    if (text == "vi") return Engine::ValueIteration;
    if (text == "brtdp") return Engine::Brtdp;
    throw std::invalid_argument("unknown engine '" + text + "' (expected vi or brtdp)");
}

SolveReport run_solve(const Mdp& mdp, const SolveConfig& config) {
    SolveReport report;
    if (config.engine == Engine::ValueIteration) {
        report.va = value_iteration(mdp, config.eps);
    } else {
        BrtdpOptions opts;
        opts.seed = config.seed;
        opts.max_steps = config.max_steps;
        report.va = brtdp(mdp, config.eps, opts);
    }
    report.mecs = mec_decompose(mdp);
    ExtractOptions extract;
    extract.exit_union = config.exit_union;
    report.strategy = extract_liberal(mdp, report.va, report.mecs, extract);
    if (config.verify) {
        report.exact = max_reach_exact(mdp);
        report.validity = check_valid(mdp, report.va, *report.exact);
    }
    return report;
}

DistillReport run_distill(const Mdp& mdp, const DistillConfig& config) {
    if (config.runs == 0) throw std::invalid_argument("number of runs must be at least 1");
    const LearningVariant variant = LearningVariant::parse(config.variant);
    DistillReport report;
    report.solve = run_solve(mdp, config.solve);

    SimulateOptions sim;
    sim.seed = config.solve.seed;
    sim.max_steps = config.sim_max_steps;
    sim.threads = config.threads;
    report.stats = simulate(mdp, report.solve.strategy, config.runs, sim);
    report.importance = importance_of(report.stats, variant.conditioning, variant.measure);

    report.strategy = report.solve.strategy;
    if (config.delta) {
        report.strategy = truncate(mdp, report.strategy, report.importance.weight, *config.delta, config.truncate_mode);
    }
    report.training =
        build_training_set(mdp, report.strategy, report.importance.weight, config.runs, variant.weighting);

    const auto exact = report.solve.exact ? *report.solve.exact : max_reach_exact(mdp);
    report.exact_value = exact[mdp.initial()];

    LearnParams params;
    params.confidence = config.confidence;
    if (config.min_leaf) {
        params.min_leaf = static_cast<double>(*config.min_leaf);
        report.tree = learn(report.training, params);
        report.min_leaf = *config.min_leaf;
        report.tree_value = evaluate(mdp, induce_strategy(report.tree, mdp));
        report.error = relative_error(report.exact_value, report.tree_value);
        report.met = report.error <= config.budget;
    } else {
        FitResult fit = fit_max_leaf(report.training, mdp, config.budget, report.exact_value, params);
        report.tree = std::move(fit.tree);
        report.min_leaf = fit.min_leaf;
        report.tree_value = fit.value;
        report.error = fit.error;
        report.met = fit.met;
        report.probes = std::move(fit.probes);
    }
    induce_strategy(report.tree, mdp, &report.fallback);
    for (StateId s : report.fallback) {
        if (report.importance.weight[s] > 0.0) ++report.fallback_important;
    }
    return report;
}

std::vector<std::vector<int>> good_pairs(const Mdp& mdp, const LiberalStrategy& strategy) {
    std::vector<std::vector<int>> out;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionIndex a : strategy.good(s)) out.push_back(pair_features(mdp, s, a));
    }
    return out;
}

CompareRow run_compare(const std::string& name, const Mdp& mdp, const DistillConfig& config) {
    const DistillReport report = run_distill(mdp, config);
    CompareRow row;
    row.model = name;
    row.states = mdp.num_states();
    row.value = report.exact_value;
    const auto pairs = good_pairs(mdp, report.strategy);
    row.explicit_pairs = pairs.size();
    row.bdd_nodes = encode_set(pairs, BitLayout::from(FeatureSchema::from(mdp))).node_count();
    row.dt_size = report.tree.size();
    row.error = report.error;
    return row;
}

namespace {

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

}  // namespace

void write_compare_text(std::ostream& out, const std::vector<CompareRow>& rows) {
    const std::vector<std::string> head{"model", "|S|", "value", "explicit", "bdd", "dt", "error"};
    std::vector<std::vector<std::string>> cells{head};
    for (const auto& r : rows) {
        cells.push_back({r.model, std::to_string(r.states), fixed(r.value, 6), std::to_string(r.explicit_pairs),
                         std::to_string(r.bdd_nodes), std::to_string(r.dt_size), fixed(100.0 * r.error, 3) + "%"});
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) {
                out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            } else {
                out << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
            }
        }
        out << '\n';
    }
    out << "(bdd counts internal nodes only)\n";
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
    out << "model,states,value,explicit,bdd,dt,error\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.states << ',' << fixed(r.value, 9) << ',' << r.explicit_pairs << ',' << r.bdd_nodes
            << ',' << r.dt_size << ',' << fixed(r.error, 9) << '\n';
    }
}

}  // namespace mdpdistill
