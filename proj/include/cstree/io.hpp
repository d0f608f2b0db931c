#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cstree/estimation.hpp"
#include "cstree/interventions.hpp"
#include "cstree/model.hpp"

namespace cstree {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rectangular categorical data with per-column label sets (sorted unique
/// values after ingestion).
struct Dataset {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<std::string>> labels;  // per column, sorted
    std::string provenance;

    int num_columns() const { return static_cast<int>(names.size()); }
    std::vector<VariableSpec> variable_specs() const;
};

Dataset ingest_csv(const std::string& path);
Dataset parse_csv(std::istream& in, const std::string& provenance = "");
std::string to_csv(const Dataset& data);

/// Rows aggregated against the given specs; values must match the labels.
/// A `count` column, when present, carries multiplicities.
ContingencyTable to_table(const Dataset& data, const std::vector<VariableSpec>& specs);

/// Infers specs from the dataset's label sets, then aggregates.
std::pair<std::vector<VariableSpec>, ContingencyTable> dataset_to_table(const Dataset& data);

/// Maps values at or below the j-th empirical bins-quantile to bin j (lower
/// closed; ties go to the lower bin).  bins=2 yields "low"/"high".
std::vector<std::string> quantile_discretize(const std::vector<double>& values, int bins = 2);

/// Replaces every fully numeric column by its quantile discretization.
Dataset discretize_numeric_columns(const Dataset& data, int bins);

std::string tree_to_json(const CStree& tree);
CStree tree_from_json(const std::string& text);
CStree load_tree(const std::string& path);
void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

/// One DOT digraph per minimal-context graph, context in the label.
std::string dot_context_graphs(const CStree& tree);
std::string dot_context_idags(const InterventionalCStree& itree);
/// The event tree itself with nodes colored by stage (stable palette).
std::string dot_tree(const CStree& tree);

}  // namespace cstree
