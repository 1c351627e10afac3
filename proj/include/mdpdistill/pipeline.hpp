#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mdpdistill/dtree.hpp"
#include "mdpdistill/importance.hpp"
#include "mdpdistill/mdp.hpp"
#include "mdpdistill/model.hpp"
#include "mdpdistill/solver.hpp"
#include "mdpdistill/strategy.hpp"

namespace mdpdistill {

struct LoadOptions {
    std::optional<std::string> target_expr;
    BuildOptions build;
};

/// Files ending in .flat use the explicit format, everything else the guarded-command language.
Mdp load_model_file(const std::string& path, const LoadOptions& options = {});
Mdp load_model_text(const std::string& text, bool flat, const LoadOptions& options = {});

enum class Engine { ValueIteration, Brtdp };
Engine parse_engine(const std::string& text);

struct SolveConfig {
    double eps = 1e-6;
    Engine engine = Engine::ValueIteration;
    std::uint64_t seed = 0;
    std::size_t max_steps = 0;
    bool verify = false;
    bool exit_union = false;
};

struct SolveReport {
    ValueApprox va;
    std::vector<Mec> mecs;
    LiberalStrategy strategy;
    std::optional<std::vector<double>> exact;
    std::optional<ValidityReport> validity;
};

SolveReport run_solve(const Mdp& mdp, const SolveConfig& config);

struct DistillConfig {
    SolveConfig solve;
    std::size_t runs = 10000;
    std::string variant = "IDP";
    double budget = 0.01;
    std::optional<std::uint64_t> min_leaf;  // unset: binary search
    double confidence = 1e-4;
    std::optional<double> delta;
    TruncateMode truncate_mode = TruncateMode::KeepAll;
    unsigned threads = 1;
    std::size_t sim_max_steps = 1'000'000;
};

struct DistillReport {
    SolveReport solve;
    RunStats stats;
    Importance importance;
    LiberalStrategy strategy;  // after optional truncation
    TrainingSet training;
    DecisionTree tree;
    std::uint64_t min_leaf = 1;
    double exact_value = 0.0;
    double tree_value = 0.0;
    double error = 0.0;
    bool met = true;
    std::vector<FitProbe> probes;
    std::vector<StateId> fallback;
    std::size_t fallback_important = 0;  // fallback states with positive importance
};

DistillReport run_distill(const Mdp& mdp, const DistillConfig& config);

struct CompareRow {
    std::string model;
    std::size_t states = 0;
    double value = 0.0;
    std::size_t explicit_pairs = 0;
    std::size_t bdd_nodes = 0;
    std::size_t dt_size = 0;
    double error = 0.0;
};

/// Good pairs of the defined states of a strategy, as feature vectors.
std::vector<std::vector<int>> good_pairs(const Mdp& mdp, const LiberalStrategy& strategy);

CompareRow run_compare(const std::string& name, const Mdp& mdp, const DistillConfig& config);
void write_compare_text(std::ostream& out, const std::vector<CompareRow>& rows);
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);

}  // namespace mdpdistill
