#include "cstree/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cstree/csi.hpp"

namespace cstree {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

std::vector<VariableSpec> Dataset::variable_specs() const {
    std::vector<VariableSpec> out;
    for (int c = 0; c < num_columns(); ++c) {
        if (names[static_cast<size_t>(c)] == "count") continue;
        VariableSpec spec;
        spec.name = names[static_cast<size_t>(c)];
        spec.labels = labels[static_cast<size_t>(c)];
        spec.cardinality = static_cast<int>(spec.labels.size());
        if (spec.cardinality < 2)
            throw IoError("column '" + spec.name + "' has fewer than two distinct values");
        out.push_back(std::move(spec));
    }
    return out;
}

Dataset parse_csv(std::istream& in, const std::string& provenance) {
    Dataset out;
    out.provenance = provenance;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    out.names = split_csv_line(line);
    if (out.names.empty()) throw IoError("empty CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row = split_csv_line(line);
        if (row.size() != out.names.size()) throw IoError("ragged CSV row");
        out.rows.push_back(std::move(row));
    }
    out.labels.resize(out.names.size());
    for (size_t c = 0; c < out.names.size(); ++c) {
        std::set<std::string> uniq;
        for (const auto& row : out.rows) uniq.insert(row[c]);
        out.labels[c].assign(uniq.begin(), uniq.end());
    }
    return out;
}

Dataset ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_csv(in, path);
}

std::string to_csv(const Dataset& data) {
    std::ostringstream os;
    for (size_t c = 0; c < data.names.size(); ++c) os << (c ? "," : "") << data.names[c];
    os << "\n";
    for (const auto& row : data.rows) {
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
        os << "\n";
    }
    return os.str();
}

ContingencyTable to_table(const Dataset& data, const std::vector<VariableSpec>& specs) {
    std::vector<int> col_of(specs.size(), -1);
    int count_col = -1;
    for (int c = 0; c < data.num_columns(); ++c) {
        if (data.names[static_cast<size_t>(c)] == "count") {
            count_col = c;
            continue;
        }
        for (size_t v = 0; v < specs.size(); ++v)
            if (specs[v].name == data.names[static_cast<size_t>(c)]) col_of[v] = c;
    }
    for (size_t v = 0; v < specs.size(); ++v)
        if (col_of[v] < 0) throw IoError("dataset lacks column '" + specs[v].name + "'");

    std::vector<int> shape;
    for (const auto& spec : specs) shape.push_back(spec.cardinality);
    ContingencyTable table(shape);
    std::vector<int> outcome(specs.size());
    for (const auto& row : data.rows) {
        for (size_t v = 0; v < specs.size(); ++v) {
            const auto& labels = specs[v].labels;
            const std::string& value = row[static_cast<size_t>(col_of[v])];
            auto it = std::find(labels.begin(), labels.end(), value);
            if (it == labels.end())
                throw IoError("value '" + value + "' unknown for variable '" + specs[v].name + "'");
            outcome[v] = static_cast<int>(it - labels.begin());
        }
        std::int64_t count = 1;
        if (count_col >= 0) {
            try {
                count = std::stoll(row[static_cast<size_t>(count_col)]);
            } catch (...) {
                throw IoError("bad count value");
            }
            if (count < 0) throw IoError("negative count");
        }
        table.add(outcome, count);
    }
    return table;
}

std::pair<std::vector<VariableSpec>, ContingencyTable> dataset_to_table(const Dataset& data) {
    std::vector<VariableSpec> specs = data.variable_specs();
    return {specs, to_table(data, specs)};
}

std::vector<std::string> quantile_discretize(const std::vector<double>& values, int bins) {
    if (bins < 2 || bins > 9) throw IoError("bins must be in [2, 9]");
    if (values.empty()) throw IoError("empty column");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw IoError("constant column cannot be discretized");
    std::vector<double> edges;
    std::int64_t n = static_cast<std::int64_t>(sorted.size());
    for (int j = 1; j < bins; ++j) {
        std::int64_t idx = (n * j + bins - 1) / bins - 1;  // ceil(n*j/bins) - 1
        edges.push_back(sorted[static_cast<size_t>(std::max<std::int64_t>(0, idx))]);
    }
    auto bin_label = [&](int b) {
        if (bins == 2) return std::string(b == 0 ? "low" : "high");
        std::ostringstream os;
        os << "q" << (b + 1);
        return os.str();
    };
    std::vector<std::string> out;
    out.reserve(values.size());
    for (double x : values) {
        int b = 0;
        while (b < bins - 1 && x > edges[static_cast<size_t>(b)]) ++b;
        out.push_back(bin_label(b));
    }
    return out;
}

Dataset discretize_numeric_columns(const Dataset& data, int bins) {
    Dataset out = data;
    for (size_t c = 0; c < data.names.size(); ++c) {
        if (data.names[c] == "count") continue;
        std::vector<double> numeric;
        bool all_numeric = !data.rows.empty();
        for (const auto& row : data.rows) {
            try {
                size_t used = 0;
                double x = std::stod(row[c], &used);
                if (used != row[c].size()) throw IoError("trailing text");
                numeric.push_back(x);
            } catch (...) {
                all_numeric = false;
                break;
            }
        }
        if (!all_numeric) continue;
        std::vector<std::string> binned = quantile_discretize(numeric, bins);
        for (size_t r = 0; r < out.rows.size(); ++r) out.rows[r][c] = binned[r];
        std::set<std::string> uniq(binned.begin(), binned.end());
        out.labels[c].assign(uniq.begin(), uniq.end());
    }
    out.provenance = data.provenance + " (quantile-discretized)";
    return out;
}

namespace {

json context_to_json(const CStree& tree, const Context& ctx) {
    json out = json::object();
    for (const auto& [var, val] : ctx.items()) {
        const auto& spec = tree.variable(var);
        if (!spec.labels.empty())
            out[spec.name] = spec.labels[static_cast<size_t>(val)];
        else
            out[spec.name] = val;
    }
    return out;
}

}  // namespace

std::string tree_to_json(const CStree& tree) {
    json j;
    j["variables"] = json::array();
    for (const auto& v : tree.variables()) {
        json spec;
        spec["name"] = v.name;
        spec["cardinality"] = v.cardinality;
        if (!v.labels.empty()) spec["labels"] = v.labels;
        j["variables"].push_back(std::move(spec));
    }
    j["order"] = json::array();
    for (int var : tree.order()) j["order"].push_back(tree.variable(var).name);
    j["stages"] = json::array();
    for (int k = 1; k <= tree.num_variables(); ++k)
        for (const Stage& s : tree.staging().per_level[static_cast<size_t>(k - 1)]) {
            json stage;
            stage["level"] = s.level;
            stage["context"] = context_to_json(tree, s.context);
            j["stages"].push_back(std::move(stage));
        }
    return j.dump(2) + "\n";
}

CStree tree_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("bad tree JSON: ") + e.what());
    }
    std::vector<VariableSpec> vars;
    std::map<std::string, int> index;
    for (const auto& spec : j.at("variables")) {
        VariableSpec v;
        v.name = spec.at("name").get<std::string>();
        v.cardinality = spec.at("cardinality").get<int>();
        if (spec.contains("labels")) v.labels = spec.at("labels").get<std::vector<std::string>>();
        index[v.name] = static_cast<int>(vars.size());
        vars.push_back(std::move(v));
    }
    std::vector<int> order;
    for (const auto& name : j.at("order")) {
        auto it = index.find(name.get<std::string>());
        if (it == index.end()) throw IoError("order lists unknown variable");
        order.push_back(it->second);
    }
    Staging staging;
    staging.per_level.resize(vars.size());
    if (j.contains("stages"))
        for (const auto& stage : j.at("stages")) {
            int level = stage.at("level").get<int>();
            if (level < 1 || level > static_cast<int>(vars.size())) throw IoError("stage level out of range");
            Context ctx;
            for (const auto& [name, value] : stage.at("context").items()) {
                auto it = index.find(name);
                if (it == index.end()) throw IoError("stage context names unknown variable");
                const auto& spec = vars[static_cast<size_t>(it->second)];
                int val = -1;
                if (value.is_number_integer()) {
                    val = value.get<int>();
                } else {
                    const std::string label = value.get<std::string>();
                    auto lit = std::find(spec.labels.begin(), spec.labels.end(), label);
                    if (lit == spec.labels.end()) throw IoError("unknown outcome label '" + label + "'");
                    val = static_cast<int>(lit - spec.labels.begin());
                }
                if (val < 0 || val >= spec.cardinality) throw IoError("context value out of range");
                ctx.set(it->second, val);
            }
            staging.per_level[static_cast<size_t>(level - 1)].push_back(Stage{level, std::move(ctx)});
        }
    try {
        return CStree(std::move(vars), std::move(order), std::move(staging));
    } catch (const ModelError& e) {
        throw IoError(std::string("invalid tree: ") + e.what());
    }
}

CStree load_tree(const std::string& path) { return tree_from_json(load_text(path)); }

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

std::string load_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string dot_context_graphs(const CStree& tree) {
    std::ostringstream os;
    ContextGraphSet graphs = context_graphs(tree);
    for (const Context& ctx : graphs.contexts) {
        std::string name = "G[" + context_name(tree.variables(), ctx) + "]";
        os << to_dot(graphs.graphs.at(ctx), name, [&](int id) { return tree.variable(id).name; });
    }
    return os.str();
}

std::string dot_context_idags(const InterventionalCStree& itree) {
    std::ostringstream os;
    ContextIDagSet idags = context_idags(itree);
    const CStree& tree = itree.base();
    for (const Context& ctx : idags.contexts) {
        std::string name = "G[" + context_name(tree.variables(), ctx) + "]";
        os << to_dot(idags.graphs.at(ctx).graph, name, [&](int id) {
            if (Dag::is_w_node(id)) return "w_" + idags.target_names[static_cast<size_t>(Dag::w_target(id))];
            return tree.variable(id).name;
        });
    }
    return os.str();
}

std::string dot_tree(const CStree& tree) {
    static const char* kPalette[] = {"white",     "lightblue",  "orange",    "green",
                                     "red",       "violet",     "yellow",    "cyan",
                                     "pink",      "lime",       "brown",     "magenta",
                                     "olive",     "teal",       "gold",      "plum",
                                     "lightgray", "salmon",     "turquoise", "khaki"};
    constexpr int kColors = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));
    std::ostringstream os;
    os << "digraph tree {\n  rankdir=LR;\n";
    // stable colors: stages in canonical order, singletons stay white
    std::map<Stage, std::string> color;
    int next = 1;
    for (int k = 1; k <= tree.num_variables(); ++k)
        for (const Stage& s : tree.staging().per_level[static_cast<size_t>(k - 1)])
            color[s] = kPalette[next++ % kColors];
    auto node_name = [&](const Prefix& prefix) {
        std::ostringstream name;
        name << "n";
        for (int v : prefix) name << "_" << v;
        return name.str();
    };
    os << "  n [label=\"r\"];\n";
    for (int k = 1; k <= tree.num_variables(); ++k)
        for (const Prefix& prefix : tree.enumerate_prefixes(k)) {
            std::string fill = "white";
            if (k < tree.num_variables()) {
                Stage s = tree.stage_of(prefix);
                auto it = color.find(s);
                if (it != color.end()) fill = it->second;
            }
            os << "  " << node_name(prefix) << " [label=\"\",style=filled,fillcolor=" << fill << "];\n";
            Prefix parent(prefix.begin(), prefix.end() - 1);
            const auto& spec = tree.variable(tree.level_variable(k));
            std::string label = spec.labels.empty() ? std::to_string(prefix.back())
                                                    : spec.labels[static_cast<size_t>(prefix.back())];
            os << "  " << node_name(parent) << " -> " << node_name(prefix) << " [label=\"" << label
               << "\"];\n";
        }
    os << "}\n";
    return os.str();
}

}  // namespace cstree
