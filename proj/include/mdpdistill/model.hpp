#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdpdistill/mdp.hpp"

namespace mdpdistill {

/// Model text error carrying a 1-based source position.
class ParseError : public ModelError {
   public:
    ParseError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

   private:
    int line_, column_;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Int, Bool, Var, Neg, Not, Add, Sub, Mul, Min, Max, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
    Kind kind = Kind::Int;
    long long value = 0;  // Int and Bool literals
    std::string name;     // Var
    int var = -1;         // resolved global variable index
    ExprPtr lhs, rhs;
    int line = 0, column = 0;

    bool is_boolean() const;
    long long eval(const std::vector<int>& valuation) const;
    std::string str() const;
};

struct Update {
    std::string var_name;
    int var = -1;
    ExprPtr value;
};

struct Alternative {
    double prob = 1.0;
    std::vector<Update> updates;
};

struct Command {
    std::optional<std::string> label;
    ExprPtr guard;
    std::vector<Alternative> alternatives;
    int line = 0;
};

struct Module {
    std::string name;
    std::vector<VarDecl> vars;
    std::vector<Command> commands;
};

struct ModelAst {
    std::vector<std::pair<std::string, long long>> constants;
    std::vector<Module> modules;
    ExprPtr target;

    /// All variables in declaration order; state vectors follow this order.
    std::vector<VarDecl> all_vars() const;
    std::size_t num_commands() const;
};

/// Parses and type-checks a guarded-command model. Throws ParseError.
ModelAst parse_model(const std::string& text);

/// Parses a boolean expression over the model's variables and constants, e.g. for a target override.
ExprPtr parse_condition(const std::string& text, const ModelAst& model);
ExprPtr parse_condition(const std::string& text, const std::vector<VarDecl>& vars);

struct BuildOptions {
    std::size_t max_states = 20'000'000;
};

/// Explicit MDP reachable from the initial valuation, states numbered in BFS order.
Mdp build_mdp(const ModelAst& model, const BuildOptions& options = {});

/// Whitespace-separated explicit format:
///   vars <name:lo..hi>*      actions <name>*   (optional, fixes the name order)
///   modules <m>              (optional)
///   state <id> <val>*        act <sid> <name> <module> (<prob> <sid'>)+
///   init <id>                target <id>+
/// A target override replaces the listed targets by the states satisfying it.
Mdp parse_flat(const std::string& text, const std::optional<std::string>& target_override = std::nullopt);
std::string write_flat(const Mdp& mdp);

}  // namespace mdpdistill
