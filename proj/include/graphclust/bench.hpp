#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphclust/ingest.hpp"
#include "graphclust/metrics.hpp"

namespace graphclust {

/// Input problems that should stop a run before any work happens.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AlgoConfig {
    std::string algorithm;
    std::map<std::string, std::string> options;
};

/// One benchmark campaign: the cartesian product datasets x algorithms x
/// seeds, with per-algorithm option sections.
struct BenchPlan {
    std::vector<std::string> datasets;
    std::vector<AlgoConfig> algorithms;
    std::vector<std::uint64_t> seeds;
    std::string output;
    int jobs = 1;
};

/// Line-oriented `key = value` sections:
///   [bench] datasets/algorithms/seeds/output/jobs, then one optional
///   [<algorithm>] section per algorithm carrying its options.
BenchPlan parse_plan_text(const std::string& text, const std::string& origin = "plan");
BenchPlan parse_plan(const std::string& path);

extern const std::vector<std::string> kKnownAlgorithms;

/// Throws ValidationError before any run when the plan is malformed.
void validate_plan(const BenchPlan& plan);

struct RunOutcome {
    MetricsReport report;
    bool failed = false;
    std::string error;
};

/// Runs one algorithm on one dataset with one seed and evaluates the full
/// metric suite. Algorithm wall time is recorded; metric evaluation is not
/// counted.
RunOutcome run_single(const AlgoConfig& config, const Dataset& ds, std::uint64_t seed);

struct BenchResult {
    std::vector<RunOutcome> rows;  // plan order: dataset-major, then algorithm, then seed
    std::string csv;               // raw rows + best-of-seeds summary rows
    std::string json;
    std::string text_table;
    int failures = 0;
};

using DatasetResolver = std::function<Dataset(const std::string&)>;

/// Executes the plan (cells run concurrently up to plan.jobs), assembles
/// deterministic reports. Individual failures mark their row and the
/// harness continues.
BenchResult run_bench(const BenchPlan& plan, const DatasetResolver& resolver = resolve_dataset);

}  // namespace graphclust
