#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mdpdistill/pipeline.hpp"
#include "mdpdistill/reach.hpp"

namespace py = pybind11;
using namespace mdpdistill;

namespace {

py::dict solve_py(const Mdp& mdp, double eps, const std::string& engine, std::uint64_t seed, bool verify) {
    SolveConfig config;
    config.eps = eps;
    config.engine = parse_engine(engine);
    config.seed = seed;
    config.verify = verify;
    const SolveReport r = run_solve(mdp, config);
    py::dict out;
    out["value"] = r.va.state(mdp, mdp.initial());
    out["upper"] = r.va.upper ? py::cast(r.va.upper_state(mdp, mdp.initial())) : py::none();
    out["explored"] = r.va.explored_count();
    out["converged"] = r.va.converged;
    std::vector<std::vector<std::string>> strategy(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionIndex a : r.strategy.good(s)) strategy[s].push_back(mdp.action_name(mdp.action(s, a).attr));
    }
    out["strategy"] = strategy;
    if (r.validity) out["valid"] = r.validity->ok;
    return out;
}

py::dict distill_py(const Mdp& mdp, double eps, const std::string& engine, std::uint64_t seed, std::size_t runs,
                    const std::string& variant, double budget, std::optional<std::uint64_t> min_leaf,
                    double confidence, unsigned threads) {
    DistillConfig config;
    config.solve.eps = eps;
    config.solve.engine = parse_engine(engine);
    config.solve.seed = seed;
    config.runs = runs;
    config.variant = variant;
    config.budget = budget;
    config.min_leaf = min_leaf;
    config.confidence = confidence;
    config.threads = threads;
    const DistillReport r = run_distill(mdp, config);
    const FeatureSchema schema = FeatureSchema::from(mdp);
    py::dict out;
    out["tree"] = r.tree;
    out["tree_json"] = r.tree.export_json(schema);
    out["tree_dot"] = r.tree.export_dot(schema);
    out["size"] = r.tree.size();
    out["min_leaf"] = r.min_leaf;
    out["exact_value"] = r.exact_value;
    out["tree_value"] = r.tree_value;
    out["error"] = r.error;
    out["met"] = r.met;
    out["target_runs"] = r.stats.target_runs;
    out["importance"] = r.importance.weight;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MDP strategy distillation core";

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);

    py::class_<Mdp>(m, "Mdp")
        .def_property_readonly("num_states", &Mdp::num_states)
        .def_property_readonly("num_choices", &Mdp::num_choices)
        .def_property_readonly("initial", &Mdp::initial)
        .def_property_readonly("action_names", &Mdp::action_names)
        .def_property_readonly("var_names",
                               [](const Mdp& mdp) {
                                   std::vector<std::string> names;
                                   for (const auto& v : mdp.vars()) names.push_back(v.name);
                                   return names;
                               })
        .def("valuation",
             [](const Mdp& mdp, StateId s) {
                 if (s >= mdp.num_states()) throw py::index_error("state out of range");
                 auto v = mdp.valuation(s);
                 return std::vector<int>(v.begin(), v.end());
             })
        .def("is_target", [](const Mdp& mdp, StateId s) {
            if (s >= mdp.num_states()) throw py::index_error("state out of range");
            return mdp.is_target(s);
        })
        .def("actions",
             [](const Mdp& mdp, StateId s) {
                 if (s >= mdp.num_states()) throw py::index_error("state out of range");
                 std::vector<std::pair<std::string, int>> out;
                 for (const auto& c : mdp.actions(s)) out.emplace_back(mdp.action_name(c.attr), c.attr.module);
                 return out;
             })
        .def("to_flat", &write_flat)
        .def("__repr__", [](const Mdp& mdp) {
            return "<Mdp states=" + std::to_string(mdp.num_states()) + " choices=" + std::to_string(mdp.num_choices()) + ">";
        });

    py::class_<DecisionTree>(m, "Tree")
        .def_property_readonly("size", &DecisionTree::size)
        .def_property_readonly("depth", &DecisionTree::depth)
        .def("classify", &DecisionTree::classify, py::arg("features"))
        .def("__eq__", [](const DecisionTree& a, const DecisionTree& b) { return a == b; });

    m.def("parse_model", [](const std::string& text) { return load_model_text(text, false); }, py::arg("text"),
          "Build an MDP from guarded-command text");
    m.def("parse_flat", [](const std::string& text) { return parse_flat(text); }, py::arg("text"),
          "Build an MDP from the flat explicit format");
    m.def(
        "load_model",
        [](const std::string& path, std::optional<std::string> target) {
            LoadOptions o;
            o.target_expr = std::move(target);
            py::gil_scoped_release release;
            return load_model_file(path, o);
        },
        py::arg("path"), py::arg("target_expr") = py::none());
    m.def(
        "max_reach",
        [](const Mdp& mdp) {
            py::gil_scoped_release release;
            return max_reach_exact(mdp);
        },
        py::arg("mdp"), "Exact maximal reachability value of every state");
    m.def("solve", &solve_py, py::arg("mdp"), py::arg("eps") = 1e-6, py::arg("engine") = "vi", py::arg("seed") = 0,
          py::arg("verify") = false);
    m.def("distill", &distill_py, py::arg("mdp"), py::arg("eps") = 1e-6, py::arg("engine") = "vi",
          py::arg("seed") = 0, py::arg("runs") = 10000, py::arg("variant") = "IDP", py::arg("budget") = 0.01,
          py::arg("min_leaf") = py::none(), py::arg("confidence") = 1e-4, py::arg("threads") = 1);
}
