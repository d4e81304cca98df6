#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "json.hpp"

#include "graphclust/bench.hpp"
#include "graphclust/rng.hpp"
#include "graphclust/sbm.hpp"

using namespace graphclust;

namespace {

Dataset toy_dataset() {
    // two triangles joined by a bridge, indicator-ish features
    Dataset ds;
    ds.graph = Graph::from_edges({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}, 6);
    ds.features = DenseMatrix(6, 2);
    for (int i = 0; i < 6; ++i) ds.features(i, i / 3) = 1.0;
    ds.labels = {0, 0, 0, 1, 1, 1};
    ds.num_classes = 2;
    ds.name = "toy";
    return ds;
}

Dataset planted_dataset(std::uint64_t seed) {
    const int n = 60;
    std::vector<int> z(n);
    for (int i = n / 2; i < n; ++i) z[i] = 1;
    DenseMatrix b(2, 2, 0.04);
    b(0, 0) = b(1, 1) = 0.35;
    Dataset ds;
    ds.graph = generate_sbm(n, z, b, seed);
    ds.features = DenseMatrix(n, 4);
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) ds.features(i, j) = (j % 2 == z[i]) + 0.1 * rng.normal();
    ds.labels = std::move(z);
    ds.num_classes = 2;
    ds.name = "planted";
    return ds;
}

// Drop the trailing wall_ms column from every CSV line.
std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        const std::size_t comma = line.rfind(',');
        out += line.substr(0, comma);
        out += '\n';
    }
    return out;
}

const std::string kPlanText = R"(# demo plan
[bench]
datasets = planted
algorithms = spectral leiden sbm
seeds = 0 1
output = out

[leiden]
objective = modularity

[sbm]
method = em
restarts = 2
)";

}  // namespace

TEST_CASE("plan parsing: sections, options, seeds") {
    BenchPlan plan = parse_plan_text(kPlanText);
    CHECK(plan.datasets == std::vector<std::string>{"planted"});
    REQUIRE(plan.algorithms.size() == 3);
    CHECK(plan.algorithms[0].algorithm == "spectral");
    CHECK(plan.algorithms[1].options.at("objective") == "modularity");
    CHECK(plan.algorithms[2].options.at("restarts") == "2");
    CHECK(plan.seeds == std::vector<std::uint64_t>{0, 1});
    CHECK(plan.output == "out");
    CHECK_NOTHROW(validate_plan(plan));
}

TEST_CASE("unknown algorithm rejected before any run") {
    BenchPlan plan = parse_plan_text("[bench]\ndatasets = x\nalgorithms = florble\nseeds = 0\n");
    CHECK_THROWS_WITH_AS(validate_plan(plan), doctest::Contains("florble"), ValidationError);
}

TEST_CASE("malformed plans report their line") {
    CHECK_THROWS_WITH_AS(parse_plan_text("[bench]\nnonsense line\n"), doctest::Contains(":2:"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_plan_text("datasets = x\n"), doctest::Contains("section"),
                         ValidationError);
    CHECK_THROWS_AS(parse_plan_text("[other]\nx = 1\n"), ValidationError);  // no [bench]
}

TEST_CASE("run_single smoke: spectral on the triangle-pair toy") {
    Dataset ds = toy_dataset();
    AlgoConfig cfg{"spectral", {}};
    RunOutcome outcome = run_single(cfg, ds, 0);
    REQUIRE_FALSE(outcome.failed);
    CHECK(outcome.report.entries.at("acc") == doctest::Approx(1.0));
    CHECK(outcome.report.entries.count("modularity") == 1);
    CHECK(outcome.report.wall_ms >= 0.0);
}

TEST_CASE("mcl non-convergence flag propagates into the report") {
    Dataset ds = toy_dataset();
    AlgoConfig cfg{"mcl", {{"max-rounds", "1"}}};
    RunOutcome outcome = run_single(cfg, ds, 0);
    REQUIRE_FALSE(outcome.failed);
    bool flagged = false;
    for (const auto& f : outcome.report.flags) flagged |= f == "mcl_not_converged";
    CHECK(flagged);
}

TEST_CASE("report JSON round-trips") {
    Dataset ds = toy_dataset();
    RunOutcome outcome = run_single({"leiden", {}}, ds, 3);
    auto j = nlohmann::json::parse(outcome.report.to_json());
    CHECK(j["algorithm"] == "leiden");
    CHECK(j["seed"] == 3);
    CHECK(j["acc"].get<double>() == outcome.report.entries.at("acc"));
}

TEST_CASE("invalid options are validation errors, not crashes") {
    Dataset ds = toy_dataset();
    RunOutcome bad = run_single({"leiden", {{"gamma", "abc"}, {"objective", "cpm"}}}, ds, 0);
    CHECK(bad.failed);
    CHECK(bad.error.find("gamma") != std::string::npos);
    RunOutcome unknown = run_single({"nope", {}}, ds, 0);
    CHECK(unknown.failed);
}

TEST_CASE("bench: identical plans give byte-identical reports modulo wall time") {
    Dataset ds = planted_dataset(5);
    auto resolver = [&](const std::string& name) {
        REQUIRE(name == "planted");
        return ds;
    };
    BenchPlan plan = parse_plan_text(kPlanText);
    BenchResult a = run_bench(plan, resolver);
    BenchResult b = run_bench(plan, resolver);
    CHECK(a.failures == 0);
    CHECK(strip_wall(a.csv) == strip_wall(b.csv));
    // 3 algorithms x 2 seeds raw rows + 3 summary rows + header
    CHECK(std::count(a.csv.begin(), a.csv.end(), '\n') == 1 + 6 + 3);
    CHECK(a.text_table.find("leiden") != std::string::npos);
}

TEST_CASE("bench: concurrency preserves the report byte-for-byte") {
    Dataset ds = planted_dataset(6);
    auto resolver = [&](const std::string&) { return ds; };
    BenchPlan plan = parse_plan_text(kPlanText);
    BenchPlan parallel = plan;
    parallel.jobs = 4;
    CHECK(strip_wall(run_bench(plan, resolver).csv) ==
          strip_wall(run_bench(parallel, resolver).csv));
}

TEST_CASE("bench: individual failures mark rows and the harness continues") {
    // an isolated node makes mvgrl's diffusion fail while leiden succeeds
    Dataset ds = toy_dataset();
    Dataset broken = ds;
    broken.graph = Graph::from_edges({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}, 7);
    broken.features = DenseMatrix(7, 2, 0.5);
    broken.labels = {0, 0, 0, 1, 1, 1, 1};
    broken.name = "broken";
    auto resolver = [&](const std::string&) { return broken; };
    BenchPlan plan = parse_plan_text(
        "[bench]\ndatasets = broken\nalgorithms = leiden mvgrl\nseeds = 0\n"
        "[mvgrl]\nepochs = 2\nlatent-dim = 4\n");
    BenchResult res = run_bench(plan, resolver);
    CHECK(res.failures == 1);
    REQUIRE(res.rows.size() == 2);
    CHECK_FALSE(res.rows[0].failed);
    CHECK(res.rows[1].failed);
    CHECK(res.rows[1].error.find("isolated") != std::string::npos);
    CHECK(res.csv.find("failed") != std::string::npos);
}

TEST_CASE("best-of-seeds summary takes the per-metric maximum") {
    Dataset ds = planted_dataset(7);
    auto resolver = [&](const std::string&) { return ds; };
    BenchPlan plan = parse_plan_text(
        "[bench]\ndatasets = planted\nalgorithms = spectral\nseeds = 0 1 2\n");
    BenchResult res = run_bench(plan, resolver);
    // find summary line (seed column == "best")
    std::istringstream in(res.csv);
    std::string line, summary;
    std::vector<double> accs;
    while (std::getline(in, line)) {
        if (line.find(",best,") != std::string::npos) summary = line;
        if (line.rfind("spectral,planted,", 0) == 0 && line.find(",best,") == std::string::npos) {
            // acc is the 4th field
            std::istringstream ls(line);
            std::string tok;
            for (int i = 0; i < 4; ++i) std::getline(ls, tok, ',');
            accs.push_back(std::stod(tok));
        }
    }
    REQUIRE_FALSE(summary.empty());
    REQUIRE(accs.size() == 3);
    std::istringstream ls(summary);
    std::string tok;
    for (int i = 0; i < 4; ++i) std::getline(ls, tok, ',');
    CHECK(std::stod(tok) == doctest::Approx(*std::max_element(accs.begin(), accs.end())));
}
