#pragma once

#include <string>
#include <vector>

#include "graphclust/dense_matrix.hpp"
#include "graphclust/graph.hpp"

namespace graphclust {

struct IngestStats {
    int dangling_citations = 0;
    int duplicate_edges = 0;
    int self_loops = 0;
};

/// A labeled, feature-annotated graph: the unit the algorithms consume.
struct Dataset {
    Graph graph;
    DenseMatrix features;    // n x d
    std::vector<int> labels; // class ids dense in [0, num_classes)
    std::string name;
    int num_classes = 0;
    IngestStats stats;
};

/// Parse the citation-network layout: a .content file (one node per line:
/// id, d feature flags, class string) plus a .cites file (pairs of ids).
/// Ids are remapped densely in content order, class strings mapped in
/// first-appearance order, citation direction discarded. Dangling citations
/// are dropped and counted.
Dataset parse_content_format(const std::string& content_path, const std::string& cites_path,
                             const std::string& name = "");

/// Canonical on-disk format (version GCT1): header `GCT1 n m d k`,
/// optional `#` comment lines, n feature lines, one label line, m edge
/// lines `u v w`.
Dataset load_canonical(const std::string& path);
void save_canonical(const Dataset& ds, const std::string& path,
                    const std::vector<std::string>& comments = {});

/// One-time converter: edge list TSV + feature CSV + label CSV -> Dataset.
/// Node ids in the edge list are row indices into the feature file.
Dataset convert_split_files(const std::string& edges_tsv, const std::string& features_csv,
                            const std::string& labels_csv, const std::string& name);

/// Resolve `--dataset <name|path>`: bundled names {cora, citeseer, uat} are
/// looked up under $GRAPHCLUST_DATA; anything else is treated as a path to
/// a canonical file.
Dataset resolve_dataset(const std::string& name_or_path);

/// Human-readable availability of the bundled dataset names.
std::vector<std::string> dataset_status();

}  // namespace graphclust
