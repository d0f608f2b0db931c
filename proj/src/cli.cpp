#include "cstree/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cstree/csi.hpp"
#include "cstree/enumeration.hpp"
#include "cstree/interventions.hpp"
#include "cstree/io.hpp"
#include "cstree/learning.hpp"

namespace cstree {

using nlohmann::json;

namespace {

std::vector<int> parse_order(const std::string& text, const std::vector<VariableSpec>& vars) {
    std::vector<int> order;
    std::stringstream ss(text);
    std::string name;
    while (std::getline(ss, name, ',')) {
        auto it = std::find_if(vars.begin(), vars.end(),
                               [&](const VariableSpec& v) { return v.name == name; });
        if (it == vars.end()) throw IoError("ordering names unknown variable '" + name + "'");
        order.push_back(static_cast<int>(it - vars.begin()));
    }
    if (order.size() != vars.size()) throw IoError("ordering must list every variable once");
    return order;
}

json context_json(const std::vector<VariableSpec>& vars, const Context& ctx) {
    json out = json::object();
    for (const auto& [var, val] : ctx.items()) {
        const auto& spec = vars[static_cast<size_t>(var)];
        if (!spec.labels.empty())
            out[spec.name] = spec.labels[static_cast<size_t>(val)];
        else
            out[spec.name] = val;
    }
    return out;
}

json edges_json(const std::vector<VariableSpec>& vars, const Dag& g,
                const std::vector<std::string>& target_names) {
    json out = json::array();
    for (const auto& [f, t] : g.edges()) {
        auto name = [&](int id) {
            if (Dag::is_w_node(id)) return "w_" + target_names[static_cast<size_t>(Dag::w_target(id))];
            return vars[static_cast<size_t>(id)].name;
        };
        out.push_back(json::array({name(f), name(t)}));
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CStree toolkit: context-specific causal models for discrete data"};
    app.require_subcommand(1);

    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable JSON on stdout");

    // learn
    auto* learn = app.add_subcommand("learn", "learn a CStree from CSV data");
    std::string learn_data, learn_order = "auto", learn_out;
    std::uint64_t learn_seed = 0;
    int learn_bins = 0;
    learn->add_option("--data", learn_data, "CSV file")->required();
    learn->add_option("--order", learn_order, "auto or comma-separated variable names");
    learn->add_option("--seed", learn_seed, "seed (reserved; learning is deterministic)");
    learn->add_option("--out", learn_out, "output tree JSON path");
    learn->add_option("--bins", learn_bins, "quantile-discretize numeric columns first");

    // score
    auto* score = app.add_subcommand("score", "BIC of a tree on data");
    std::string score_data, score_tree;
    score->add_option("--data", score_data, "CSV file")->required();
    score->add_option("--tree", score_tree, "tree JSON")->required();

    // equiv
    auto* equiv = app.add_subcommand("equiv", "statistical equivalence of two trees");
    std::string equiv_a, equiv_b;
    equiv->add_option("--a", equiv_a, "tree JSON")->required();
    equiv->add_option("--b", equiv_b, "tree JSON")->required();

    // contexts
    auto* contexts = app.add_subcommand("contexts", "minimal contexts and context graphs");
    std::string contexts_tree;
    contexts->add_option("--tree", contexts_tree, "tree JSON")->required();

    // count
    auto* count = app.add_subcommand("count", "enumeration formulas");
    std::string count_what;
    int count_p = 0;
    count->add_option("--what", count_what, "cstrees|staged|bell|cubical-bell")->required();
    count->add_option("--p", count_p, "size parameter")->required();

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "forward-sample rows from a tree");
    std::string sample_tree, sample_data, sample_out;
    std::int64_t sample_n = 0;
    std::uint64_t sample_seed = 0, sample_param_seed = 0;
    bool sample_have_param_seed = false;
    sample_cmd->add_option("--tree", sample_tree, "tree JSON")->required();
    sample_cmd->add_option("--n", sample_n, "number of rows")->required();
    sample_cmd->add_option("--seed", sample_seed, "sampling seed");
    sample_cmd->add_option("--data", sample_data, "fit stage parameters from this CSV");
    sample_cmd
        ->add_option("--param-seed", sample_param_seed,
                     "draw random positive stage parameters from this seed")
        ->each([&](const std::string&) { sample_have_param_seed = true; });
    sample_cmd->add_option("--out", sample_out, "output CSV path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "random-model learning metrics");
    int sim_p = 6, sim_trials = 10;
    double sim_merge = 0.4;
    std::int64_t sim_n = 100000;
    std::uint64_t sim_seed = 1;
    std::string sim_metrics;
    bool sim_staged = false;
    simulate->add_option("--p", sim_p, "number of binary variables");
    simulate->add_option("--merge-prob", sim_merge, "Bernoulli merge probability");
    simulate->add_option("--n", sim_n, "training sample size");
    simulate->add_option("--trials", sim_trials, "number of trials");
    simulate->add_option("--seed", sim_seed, "seed");
    simulate->add_option("--metrics", sim_metrics, "metrics CSV output path");
    simulate->add_flag("--staged", sim_staged, "use general staged trees and BHC-S");

    // export-dot
    auto* export_dot = app.add_subcommand("export-dot", "DOT rendering");
    std::string dot_tree_path, dot_out, dot_what = "contexts";
    export_dot->add_option("--tree", dot_tree_path, "tree JSON")->required();
    export_dot->add_option("--what", dot_what, "tree|contexts");
    export_dot->add_option("--out", dot_out, "output DOT path");

    // intervene
    auto* intervene = app.add_subcommand("intervene", "interventional target search");
    std::string int_tree, int_obs, int_data, int_out;
    std::int64_t int_budget = 32768;
    intervene->add_option("--tree", int_tree, "observational tree JSON")->required();
    intervene->add_option("--obs", int_obs, "observational CSV")->required();
    intervene->add_option("--int", int_data, "comma-separated interventional CSVs")->required();
    intervene->add_option("--budget", int_budget, "candidate budget");
    intervene->add_option("--out", int_out, "result JSON path");

    std::vector<std::string> argv = args;
    std::vector<char*> raw;
    raw.push_back(const_cast<char*>("cstree"));
    for (auto& a : argv) raw.push_back(a.data());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }

    if (learn->parsed()) {
        Dataset data = ingest_csv(learn_data);
        if (learn_bins >= 2) data = discretize_numeric_columns(data, learn_bins);
        auto [vars, table] = dataset_to_table(data);
        CStree tree = learn_order == "auto" ? bhc_cs_perm(vars, table)
                                            : bhc_cs(vars, table, parse_order(learn_order, vars));
        Score s = bic(tree, table);
        std::string text = tree_to_json(tree);
        if (!learn_out.empty()) save_text(learn_out, text);
        if (as_json) {
            json j;
            j["tree"] = json::parse(text);
            j["bic"] = s.bic;
            j["loglik"] = s.loglik;
            j["free_params"] = s.free_params;
            j["stages"] = tree.total_stages();
            out << j.dump(2) << "\n";
        } else {
            out << "learned tree with " << tree.total_stages() << " stages, BIC " << s.bic << "\n";
            if (learn_out.empty()) out << text;
        }
        return 0;
    }
    if (score->parsed()) {
        CStree tree = load_tree(score_tree);
        ContingencyTable table = to_table(ingest_csv(score_data), tree.variables());
        Score s = bic(tree, table);
        if (as_json) {
            json j;
            j["loglik"] = s.loglik;
            j["free_params"] = s.free_params;
            j["bic"] = s.bic;
            j["n"] = s.n;
            out << j.dump(2) << "\n";
        } else {
            out << "loglik " << s.loglik << ", d " << s.free_params << ", n " << s.n << ", BIC "
                << s.bic << "\n";
        }
        return 0;
    }
    if (equiv->parsed()) {
        CStree a = load_tree(equiv_a);
        CStree b = load_tree(equiv_b);
        bool eq = cstree_equivalent(a, b);
        if (as_json) {
            json j;
            j["equivalent"] = eq;
            out << j.dump(2) << "\n";
        } else {
            out << (eq ? "equivalent" : "not equivalent") << "\n";
        }
        return 0;
    }
    if (contexts->parsed()) {
        CStree tree = load_tree(contexts_tree);
        if (as_json) {
            ContextGraphSet graphs = context_graphs(tree);
            json j = json::array();
            for (const Context& ctx : graphs.contexts) {
                json entry;
                entry["context"] = context_json(tree.variables(), ctx);
                entry["edges"] = edges_json(tree.variables(), graphs.graphs.at(ctx), {});
                j.push_back(std::move(entry));
            }
            out << j.dump(2) << "\n";
        } else {
            out << context_report(tree);
        }
        return 0;
    }
    if (count->parsed()) {
        BigCount value;
        bool tabulated = false;
        if (count_what == "cstrees") {
            value = count_cstrees(count_p);
            tabulated = count_p >= 6;
        } else if (count_what == "staged") {
            value = count_compatible_staged_trees(count_p);
        } else if (count_what == "bell") {
            value = bell(count_p);
        } else if (count_what == "cubical-bell") {
            auto r = cubical_bell(count_p);
            value = r.value;
            tabulated = r.tabulated;
        } else {
            throw IoError("unknown --what (use cstrees|staged|bell|cubical-bell)");
        }
        if (as_json) {
            json j;
            j["value"] = value.str();
            j["tabulated"] = tabulated;
            out << j.dump(2) << "\n";
        } else {
            out << value.str() << "\n";
        }
        return 0;
    }
    if (sample_cmd->parsed()) {
        CStree tree = load_tree(sample_tree);
        ParameterMap params;
        if (!sample_data.empty()) {
            params = mle(tree, to_table(ingest_csv(sample_data), tree.variables())).params;
        } else if (sample_have_param_seed) {
            params = random_parameters(tree, sample_param_seed);
        } else {
            throw IoError("sample needs --data or --param-seed for parameters");
        }
        auto rows = sample_rows(tree, params, sample_n, sample_seed);
        Dataset data;
        for (const auto& v : tree.variables()) data.names.push_back(v.name);
        for (const auto& row : rows) {
            std::vector<std::string> cells;
            for (size_t v = 0; v < row.size(); ++v) {
                const auto& spec = tree.variable(static_cast<int>(v));
                cells.push_back(spec.labels.empty() ? std::to_string(row[v])
                                                    : spec.labels[static_cast<size_t>(row[v])]);
            }
            data.rows.push_back(std::move(cells));
        }
        std::string text = to_csv(data);
        if (!sample_out.empty())
            save_text(sample_out, text);
        else
            out << text;
        return 0;
    }
    if (simulate->parsed()) {
        auto rows = run_simulation(sim_p, sim_merge, sim_n, sim_trials, sim_seed, sim_staged);
        std::ostringstream csv;
        csv << "trial,n,stages_true,shd,accuracy,runtime_ms\n";
        for (const auto& r : rows)
            csv << r.trial << "," << r.n << "," << r.stages_true << "," << r.shd << "," << r.accuracy
                << "," << r.runtime_ms << "\n";
        if (!sim_metrics.empty())
            save_text(sim_metrics, csv.str());
        else
            out << csv.str();
        return 0;
    }
    if (export_dot->parsed()) {
        CStree tree = load_tree(dot_tree_path);
        std::string text;
        if (dot_what == "tree")
            text = dot_tree(tree);
        else if (dot_what == "contexts")
            text = dot_context_graphs(tree);
        else
            throw IoError("unknown --what (use tree|contexts)");
        if (!dot_out.empty())
            save_text(dot_out, text);
        else
            out << text;
        return 0;
    }
    if (intervene->parsed()) {
        CStree tree = load_tree(int_tree);
        ContingencyTable obs = to_table(ingest_csv(int_obs), tree.variables());
        std::vector<ContingencyTable> ints;
        std::stringstream ss(int_data);
        std::string path;
        while (std::getline(ss, path, ','))
            if (!path.empty()) ints.push_back(to_table(ingest_csv(path), tree.variables()));
        if (ints.empty()) throw IoError("--int lists no files");

        std::vector<CStree> clazz = equivalence_class(tree);
        TargetSearchResult result = search_targets_over_class(clazz, obs, ints, int_budget);

        json j;
        j["bic"] = result.best.bic;
        j["loglik"] = result.best.loglik;
        j["free_params"] = result.best.free_params;
        j["class_size"] = clazz.size();
        j["tie_count"] = result.ties.size();
        j["ties"] = json::array();
        for (const auto& itree : result.ties) {
            json entry;
            entry["order"] = json::array();
            for (int var : itree.base().order())
                entry["order"].push_back(itree.base().variable(var).name);
            entry["targets"] = json::array();
            for (size_t t = 1; t < itree.targets().targets.size(); ++t) {
                const auto& target = itree.targets().targets[t];
                json tj;
                tj["name"] = target.name;
                tj["stages"] = json::array();
                for (const Stage& s : target.stages) {
                    json sj;
                    sj["level"] = s.level;
                    sj["context"] = context_json(itree.base().variables(), s.context);
                    tj["stages"].push_back(std::move(sj));
                }
                entry["targets"].push_back(std::move(tj));
            }
            ContextIDagSet idags = context_idags(itree);
            entry["idags"] = json::array();
            for (const Context& ctx : idags.contexts) {
                json gj;
                gj["context"] = context_json(itree.base().variables(), ctx);
                gj["edges"] =
                    edges_json(itree.base().variables(), idags.graphs.at(ctx).graph, idags.target_names);
                entry["idags"].push_back(std::move(gj));
            }
            j["ties"].push_back(std::move(entry));
        }
        std::string text = j.dump(2) + "\n";
        if (!int_out.empty())
            save_text(int_out, text);
        else
            out << text;
        return 0;
    }
    err << "error: no subcommand\n";
    return 1;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(args, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace cstree
