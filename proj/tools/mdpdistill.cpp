#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mdpdistill/bdd.hpp"
#include "mdpdistill/pipeline.hpp"

using namespace mdpdistill;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kBudgetUnmet = 1;
constexpr int kInputError = 2;

struct Flags {
    std::vector<std::string> models;
    std::string target_expr;
    double eps = 1e-6;
    std::string engine = "vi";
    std::uint64_t seed = 0;
    std::size_t max_steps = 0;
    bool verify = false;
    bool exit_union = false;
    long long runs = 10000;
    std::string variant = "IDP";
    double budget = 0.01;
    std::string min_leaf = "auto";
    double confidence = 1e-4;
    double delta = -1.0;
    std::string truncate_mode = "keep-all";
    std::string out;
    unsigned threads = 1;
    std::string csv;
    std::string format = "flat";
    std::string tree;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

LoadOptions load_options(const Flags& f) {
    LoadOptions o;
    if (!f.target_expr.empty()) o.target_expr = f.target_expr;
    return o;
}

SolveConfig solve_config(const Flags& f) {
    SolveConfig c;
    c.eps = f.eps;
    c.engine = parse_engine(f.engine);
    c.seed = f.seed;
    c.max_steps = f.max_steps;
    c.verify = f.verify;
    c.exit_union = f.exit_union;
    return c;
}

DistillConfig distill_config(const Flags& f) {
    if (f.runs < 1) throw std::invalid_argument("--runs must be at least 1");
    DistillConfig c;
    c.solve = solve_config(f);
    c.runs = static_cast<std::size_t>(f.runs);
    LearningVariant::parse(f.variant);
    c.variant = f.variant;
    c.budget = f.budget;
    if (f.min_leaf != "auto") {
        std::size_t used = 0;
        long long m = -1;
        try {
            m = std::stoll(f.min_leaf, &used);
        } catch (const std::exception&) {
        }
        if (m < 1 || used != f.min_leaf.size()) throw std::invalid_argument("--min-leaf must be 'auto' or a positive integer");
        c.min_leaf = static_cast<std::uint64_t>(m);
    }
    c.confidence = f.confidence;
    if (f.delta >= 0.0) c.delta = f.delta;
    c.truncate_mode = parse_truncate_mode(f.truncate_mode);
    c.threads = f.threads;
    return c;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

int cmd_solve(const Flags& f) {
    const Mdp mdp = load_model_file(f.models.at(0), load_options(f));
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport r = run_solve(mdp, solve_config(f));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "model: " << f.models[0] << "\n";
    std::cout << "states: " << mdp.num_states() << "  choices: " << mdp.num_choices() << "\n";
    std::cout << "engine: " << f.engine << "  eps: " << f.eps << "\n";
    std::cout << "V(init)=" << fmt("%.6f", r.va.state(mdp, mdp.initial())) << "\n";
    if (r.va.upper) std::cout << "U(init)=" << fmt("%.6f", r.va.upper_state(mdp, mdp.initial())) << "\n";
    std::cout << "explored: " << r.va.explored_count() << " of " << mdp.num_states() << " states\n";
    std::cout << "converged: " << (r.va.converged ? "yes" : "no") << "  gap: " << fmt("%.3g", r.va.gap)
              << "  iterations: " << r.va.iterations << "\n";
    std::cout << "strategy: " << r.strategy.defined_count() << " defined states, " << r.mecs.size() << " MECs\n";
    if (r.exact) std::cout << "Val(init)=" << fmt("%.9f", (*r.exact)[mdp.initial()]) << " (exact)\n";
    if (r.validity) {
        std::cout << "check: " << (r.validity->ok ? "conditions 1-4 hold" : r.validity->message) << "\n";
    }
    std::cout << "time: " << fmt("%.3f", secs) << " s\n";
    if (!r.va.converged) std::cerr << "warning: iteration budget exhausted before the gap closed\n";
    return kOk;
}

int cmd_distill(const Flags& f) {
    const Mdp mdp = load_model_file(f.models.at(0), load_options(f));
    const DistillConfig config = distill_config(f);
    const auto t0 = std::chrono::steady_clock::now();
    const DistillReport r = run_distill(mdp, config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const FeatureSchema schema = FeatureSchema::from(mdp);

    if (!f.out.empty()) {
        const fs::path dir(f.out);
        fs::create_directories(dir);
        write_file(dir / "tree.json", r.tree.export_json(schema));
        write_file(dir / "tree.dot", r.tree.export_dot(schema));
        std::ostringstream tsv;
        write_strategy_tsv(tsv, mdp, r.strategy, r.importance.weight);
        write_file(dir / "strategy.tsv", tsv.str());
    }

    std::cout << "model: " << f.models[0] << "\n";
    std::cout << "states: " << mdp.num_states() << "  explored: " << r.solve.va.explored_count() << "\n";
    std::cout << "V(init)=" << fmt("%.6f", r.solve.va.state(mdp, mdp.initial()))
              << "  Val(init)=" << fmt("%.6f", r.exact_value) << "\n";
    std::cout << "runs: " << r.stats.runs << "  reaching target: " << r.stats.target_runs << "\n";
    if (r.importance.clipped) std::cout << "clipped importance values: " << r.importance.clipped << "\n";
    std::cout << "variant: " << config.variant << "  training rows: " << r.training.rows.size()
              << "  weight: " << fmt("%.0f", r.training.total_weight()) << "\n";
    std::cout << "min-leaf: " << r.min_leaf << (config.min_leaf ? "" : " (search)") << "  confidence: " << config.confidence
              << "\n";
    std::cout << "tree size: " << r.tree.size() << "\n";
    std::cout << "induced value: " << fmt("%.6f", r.tree_value) << "\n";
    std::cout << "relative error: " << fmt("%.4f", 100.0 * r.error) << "%  (budget " << fmt("%.2f", 100.0 * config.budget)
              << "%)\n";
    std::cout << "fallback states: " << r.fallback.size() << " (" << r.fallback_important << " with positive importance)\n";
    std::cout << "time: " << fmt("%.3f", secs) << " s\n";
    if (!r.met) {
        std::cerr << "error budget not met: best tree has relative error " << fmt("%.4f", 100.0 * r.error) << "%\n";
        return kBudgetUnmet;
    }
    return kOk;
}

int cmd_compare(const Flags& f) {
    const DistillConfig config = distill_config(f);
    std::vector<CompareRow> rows;
    for (const auto& path : f.models) {
        const Mdp mdp = load_model_file(path, load_options(f));
        rows.push_back(run_compare(fs::path(path).filename().string(), mdp, config));
    }
    write_compare_text(std::cout, rows);
    std::string csv_path = f.csv;
    if (csv_path.empty() && !f.out.empty()) {
        fs::create_directories(f.out);
        csv_path = (fs::path(f.out) / "compare.csv").string();
    }
    if (!csv_path.empty()) {
        std::ostringstream csv;
        write_compare_csv(csv, rows);
        write_file(csv_path, csv.str());
    }
    return kOk;
}

int cmd_export(const Flags& f) {
    const Mdp mdp = load_model_file(f.models.at(0), load_options(f));
    std::string text;
    if (f.format == "flat") {
        text = write_flat(mdp);
    } else if (f.format == "dot" || f.format == "json") {
        if (f.tree.empty()) throw std::invalid_argument("--format " + f.format + " needs --tree");
        std::ifstream in(f.tree);
        if (!in) throw std::invalid_argument("cannot open tree file '" + f.tree + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        const FeatureSchema schema = FeatureSchema::from(mdp);
        const DecisionTree tree = DecisionTree::import_json(buf.str(), schema);
        text = f.format == "dot" ? tree.export_dot(schema) : tree.export_json(schema);
    } else {
        throw std::invalid_argument("unknown export format '" + f.format + "' (expected flat, dot or json)");
    }
    if (f.out.empty()) {
        std::cout << text;
    } else {
        write_file(f.out, text);
    }
    return kOk;
}

void model_flags(CLI::App* app, Flags& f, bool many) {
    if (many) {
        app->add_option("--model,models", f.models, "Model files (.flat or guarded commands)")->required();
    } else {
        app->add_option("--model,model", f.models, "Model file (.flat or guarded commands)")->required()->expected(1);
    }
    app->add_option("--target-expr", f.target_expr, "Boolean expression overriding the model's target");
}

void solve_flags(CLI::App* app, Flags& f) {
    app->add_option("--eps", f.eps, "Precision of the value approximation")->check(CLI::PositiveNumber);
    app->add_option("--engine", f.engine, "vi or brtdp")->check(CLI::IsMember({"vi", "brtdp"}));
    app->add_option("--seed", f.seed, "Random seed");
    app->add_option("--max-steps", f.max_steps, "BRTDP path length bound (0: adaptive)");
    app->add_flag("--exit-union", f.exit_union, "Also keep internal actions at MEC exits");
}

void distill_flags(CLI::App* app, Flags& f) {
    app->add_option("--runs", f.runs, "Simulation runs");
    app->add_option("--variant", f.variant, "IDP, IAP, IDE, IAE, OD or OA");
    app->add_option("--budget", f.budget, "Relative error budget");
    app->add_option("--min-leaf", f.min_leaf, "Minimum leaf weight or 'auto'");
    app->add_option("--confidence", f.confidence, "Pruning confidence factor");
    app->add_option("--delta", f.delta, "Importance threshold for truncation");
    app->add_option("--truncate-mode", f.truncate_mode, "keep-all or keep-argmax");
    app->add_option("--threads", f.threads, "Simulation worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distill epsilon-optimal MDP strategies into decision trees"};
    app.require_subcommand(1);
    Flags f;

    auto* solve = app.add_subcommand("solve", "Solve a reachability model");
    model_flags(solve, f, false);
    solve_flags(solve, f);
    solve->add_flag("--verify", f.verify, "Check the result against the exact solution");

    auto* distill = app.add_subcommand("distill", "Solve, simulate and learn a decision tree");
    model_flags(distill, f, false);
    solve_flags(distill, f);
    distill_flags(distill, f);
    distill->add_option("--out", f.out, "Output directory for tree.json, tree.dot and strategy.tsv");

    auto* compare = app.add_subcommand("compare", "Compare explicit, BDD and tree sizes");
    model_flags(compare, f, true);
    solve_flags(compare, f);
    distill_flags(compare, f);
    compare->add_option("--csv", f.csv, "CSV output file");
    compare->add_option("--out", f.out, "Output directory for compare.csv");

    auto* exp = app.add_subcommand("export", "Export a model as flat text or re-render a tree");
    model_flags(exp, f, false);
    exp->add_option("--format", f.format, "flat, dot or json");
    exp->add_option("--tree", f.tree, "Tree JSON for dot/json output");
    exp->add_option("--out", f.out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*solve) return cmd_solve(f);
        if (*distill) return cmd_distill(f);
        if (*compare) return cmd_compare(f);
        return cmd_export(f);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kInputError;
}
