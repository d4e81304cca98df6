#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "graphclust/ingest.hpp"
#include "graphclust/rng.hpp"

using namespace graphclust;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "graphclust_ingest_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p);
    f << content;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

Dataset toy_triangle_dataset() {
    Dataset ds;
    ds.graph = Graph::from_edges({{0, 1}, {1, 2}, {0, 2}}, 3);
    ds.features = DenseMatrix(3, 2);
    ds.features(0, 0) = 1.0;
    ds.features(1, 1) = 0.25;
    ds.features(2, 0) = -3.5;
    ds.labels = {0, 1, 0};
    ds.name = "triangle";
    ds.num_classes = 2;
    return ds;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
    if (a.graph.num_nodes() != b.graph.num_nodes()) return false;
    if (a.graph.num_edges() != b.graph.num_edges()) return false;
    for (std::size_t i = 0; i < a.graph.num_edges(); ++i) {
        const Edge &ea = a.graph.edges()[i], &eb = b.graph.edges()[i];
        if (ea.u != eb.u || ea.v != eb.v || ea.w != eb.w) return false;
    }
    if (!a.features.same_shape(b.features)) return false;
    for (std::size_t i = 0; i < a.features.size(); ++i)
        if (a.features.data()[i] != b.features.data()[i]) return false;
    return a.labels == b.labels && a.num_classes == b.num_classes;
}

}  // namespace

TEST_CASE("content format: 2-line content + 1-line cites") {
    auto dir = temp_dir();
    write_file(dir / "toy.content", "p1 1 0 1 ml\np2 0 1 0 db\n");
    write_file(dir / "toy.cites", "p1 p2\n");
    Dataset ds = parse_content_format((dir / "toy.content").string(), (dir / "toy.cites").string());
    CHECK(ds.graph.num_nodes() == 2);
    CHECK(ds.graph.num_edges() == 1);
    CHECK(ds.features.cols() == 3);
    CHECK(ds.num_classes == 2);
    CHECK(ds.labels[0] == 0);  // first-appearance order
    CHECK(ds.labels[1] == 1);
    CHECK(ds.name == "toy");
}

TEST_CASE("content format: dangling citation dropped with count") {
    auto dir = temp_dir();
    write_file(dir / "d.content", "a 1 c1\nb 0 c1\n");
    write_file(dir / "d.cites", "a b\na missing\n");
    Dataset ds = parse_content_format((dir / "d.content").string(), (dir / "d.cites").string());
    CHECK(ds.graph.num_edges() == 1);
    CHECK(ds.stats.dangling_citations == 1);
}

TEST_CASE("content format: citation direction discarded, reverse dup counted") {
    auto dir = temp_dir();
    write_file(dir / "r.content", "a 1 x\nb 0 x\n");
    write_file(dir / "r.cites", "a b\nb a\n");
    Dataset ds = parse_content_format((dir / "r.content").string(), (dir / "r.cites").string());
    CHECK(ds.graph.num_edges() == 1);
    CHECK(ds.stats.duplicate_edges == 1);
}

TEST_CASE("content format: malformed line reports line number") {
    auto dir = temp_dir();
    write_file(dir / "m.content", "a 1 0 x\nb 1 y\n");
    write_file(dir / "m.cites", "");
    CHECK_THROWS_WITH_AS(
        parse_content_format((dir / "m.content").string(), (dir / "m.cites").string()),
        doctest::Contains(":2:"), std::runtime_error);
}

TEST_CASE("content format: label distribution invariant under line shuffling") {
    auto dir = temp_dir();
    std::vector<std::string> lines = {"n0 1 0 red", "n1 0 1 blue", "n2 1 1 red", "n3 0 0 green"};
    write_file(dir / "s.cites", "n0 n1\nn2 n3\n");

    auto histogram = [&](const std::vector<std::string>& ls) {
        std::string body;
        for (const auto& l : ls) body += l + "\n";
        write_file(dir / "s.content", body);
        Dataset ds =
            parse_content_format((dir / "s.content").string(), (dir / "s.cites").string());
        std::map<int, int> h;
        for (int l : ds.labels) ++h[l];
        std::vector<int> counts;
        for (auto& [k, v] : h) counts.push_back(v);
        std::sort(counts.begin(), counts.end());
        return counts;
    };

    auto base = histogram(lines);
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        rng.shuffle(lines);
        CHECK(histogram(lines) == base);
    }
}

TEST_CASE("canonical round-trip: triangle") {
    auto dir = temp_dir();
    Dataset ds = toy_triangle_dataset();
    const auto p = dir / "tri.gct";
    save_canonical(ds, p.string());
    Dataset back = load_canonical(p.string());
    CHECK(datasets_equal(ds, back));
    // save(load(p)) is byte-identical: canonical float formatting
    const auto p2 = dir / "tri2.gct";
    save_canonical(back, p2.string());
    CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("canonical round-trip: random dataset with zero-feature rows") {
    auto dir = temp_dir();
    Rng rng(17);
    Dataset ds;
    const int n = 50;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.uniform() < 0.08) edges.push_back({u, v, 1.0});
    ds.graph = Graph::from_edges(edges, n);
    ds.features = DenseMatrix(n, 8);
    for (int i = 0; i < n; ++i) {
        if (i % 7 == 0) continue;  // leave zero rows in place
        for (int j = 0; j < 8; ++j) ds.features(i, j) = rng.uniform(-2.0, 2.0);
    }
    ds.labels.resize(n);
    for (auto& l : ds.labels) l = static_cast<int>(rng.uniform_index(4));
    ds.num_classes = 4;
    ds.name = "rand";
    const auto p = dir / "rand.gct";
    save_canonical(ds, p.string());
    CHECK(datasets_equal(ds, load_canonical(p.string())));
}

TEST_CASE("canonical: comments preserved through load") {
    auto dir = temp_dir();
    Dataset ds = toy_triangle_dataset();
    const auto p = dir / "com.gct";
    save_canonical(ds, p.string(), {"converted from unit test", "provenance: none"});
    CHECK(datasets_equal(ds, load_canonical(p.string())));
}

TEST_CASE("canonical: empty dataset rejected") {
    auto dir = temp_dir();
    write_file(dir / "empty.gct", "GCT1 0 0 0 1\n");
    CHECK_THROWS_WITH_AS(load_canonical((dir / "empty.gct").string()),
                         doctest::Contains("empty dataset"), std::runtime_error);
}

TEST_CASE("canonical: version and dimension mismatches rejected") {
    auto dir = temp_dir();
    write_file(dir / "v.gct", "GCT9 1 0 1 1\n0.5\n0\n");
    CHECK_THROWS_WITH_AS(load_canonical((dir / "v.gct").string()),
                         doctest::Contains("version"), std::runtime_error);
    write_file(dir / "dim.gct", "GCT1 2 0 2 1\n0.5\n0.5 1\n0 0\n");
    CHECK_THROWS_WITH_AS(load_canonical((dir / "dim.gct").string()),
                         doctest::Contains("dimension mismatch"), std::runtime_error);
}

TEST_CASE("converter: split files to dataset") {
    auto dir = temp_dir();
    write_file(dir / "e.tsv", "0\t1\n1\t2\t2.5\n");
    write_file(dir / "f.csv", "1,0\n0,1\n0.5,0.5\n");
    write_file(dir / "l.csv", "alpha\nbeta\nalpha\n");
    Dataset ds = convert_split_files((dir / "e.tsv").string(), (dir / "f.csv").string(),
                                     (dir / "l.csv").string(), "converted");
    CHECK(ds.graph.num_nodes() == 3);
    CHECK(ds.graph.num_edges() == 2);
    CHECK(ds.graph.edge_weight(1, 2) == 2.5);
    CHECK(ds.num_classes == 2);
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
}

TEST_CASE("resolver: plain path loads canonical, unknown path errors") {
    auto dir = temp_dir();
    Dataset ds = toy_triangle_dataset();
    const auto p = dir / "res.gct";
    save_canonical(ds, p.string());
    CHECK(datasets_equal(ds, resolve_dataset(p.string())));
    CHECK_THROWS(resolve_dataset((dir / "nope.gct").string()));
}

TEST_CASE("resolver: bundled names honor GRAPHCLUST_DATA") {
    auto dir = temp_dir() / "datadir";
    std::filesystem::create_directories(dir);
    write_file(dir / "cora.content", "p1 1 0 ml\np2 0 1 db\n");
    write_file(dir / "cora.cites", "p1 p2\n");
    setenv("GRAPHCLUST_DATA", dir.string().c_str(), 1);
    Dataset ds = resolve_dataset("cora");
    CHECK(ds.graph.num_nodes() == 2);
    CHECK(ds.name == "cora");
    unsetenv("GRAPHCLUST_DATA");
    CHECK_THROWS_WITH_AS(resolve_dataset("cora"), doctest::Contains("GRAPHCLUST_DATA"),
                         std::runtime_error);
}

// Table-3 shape checks for the real datasets, exercised only when the files
// are present in GRAPHCLUST_DATA.
TEST_CASE("real cora/citeseer/uat shapes when available") {
    const char* env = std::getenv("GRAPHCLUST_DATA");
    if (!env) {
        MESSAGE("GRAPHCLUST_DATA unset; skipping real-dataset shape checks");
        return;
    }
    struct Expect {
        const char* name;
        int n, d, k;
    };
    for (const Expect& e : {Expect{"cora", 2708, 1433, 7}, Expect{"citeseer", 3312, 3312, 6},
                            Expect{"uat", 1190, 239, 4}}) {
        try {
            Dataset ds = resolve_dataset(e.name);
            CHECK(ds.graph.num_nodes() == e.n);
            CHECK(static_cast<int>(ds.features.cols()) == e.d);
            CHECK(ds.num_classes == e.k);
            if (std::string(e.name) == "cora") {
                // symmetrized/deduplicated count within 1% of the cited 5429
                CHECK(ds.graph.num_edges() >= 5429 * 0.99);
                CHECK(ds.graph.num_edges() <= 5429 * 1.01);
            }
        } catch (const std::exception& ex) {
            MESSAGE("dataset ", e.name, " unavailable: ", ex.what());
        }
    }
}
