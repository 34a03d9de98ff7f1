// hspc command line tool.
//
// Exit codes: 0 success, 2 usage error, 3 data/format error, 4 internal
// invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "hspc/classify.hpp"
#include "hspc/error.hpp"
#include "hspc/experiment.hpp"
#include "hspc/hsp.hpp"
#include "hspc/io.hpp"
#include "hspc/sw_index.hpp"
#include "hspc/synthetic.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInvariant = 4;

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Points for graph commands; labels are irrelevant there, so fvecs rows get label 0.
hspc::LabeledDataset loadPoints(const std::string& path) {
    if (std::filesystem::path(path).extension() == ".csv") return hspc::loadCsvDataset(path);
    auto table = hspc::loadFvecs(path);
    if (table.rows() == 0) throw hspc::EmptyDatasetError(fmt::format("{}: no vectors", path));
    const std::size_t rows = table.rows();
    return hspc::LabeledDataset(std::move(table.values), table.dimension, std::vector<hspc::ClassId>(rows, 0));
}

struct IndexOptions {
    std::size_t m = 16;
    std::size_t efConstruction = 200;
    std::size_t efSearch = 100;
    std::uint64_t seed = 42;

    void attach(CLI::App* app) {
        app->add_option("--m", m, "Graph degree bound (level 0 allows twice this)")->capture_default_str();
        app->add_option("--ef-construction", efConstruction, "Beam width while building")->capture_default_str();
        app->add_option("--ef-search", efSearch, "Beam width while searching")->capture_default_str();
        app->add_option("--seed", seed, "Level assignment seed")->capture_default_str();
    }

    hspc::IndexParams params() const {
        hspc::IndexParams p;
        p.maxNeighbors = m;
        p.efConstruction = efConstruction;
        p.efSearch = efSearch;
        p.seed = seed;
        return p;
    }
};

int runGen(const std::string& specPath, const std::string& outPath, const std::string& labelsOut) {
    std::ifstream in(specPath);
    if (!in) throw hspc::IoError(fmt::format("cannot open {}", specPath));
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw hspc::FormatError(fmt::format("{}: {}", specPath, e.what()));
    }
    const auto spec = hspc::GeneratorSpec::fromJson(j);
    const auto data = hspc::generateSynthetic(spec);
    hspc::VectorTable table{data.dimension(), {data.values().begin(), data.values().end()}};
    hspc::writeFvecs(outPath, table);
    hspc::writeLabels(labelsOut, data.labels());
    std::cerr << fmt::format("wrote {} vectors of dimension {} ({} classes)\n", data.size(), data.dimension(),
                             data.numClasses());
    return 0;
}

int runHspGraph(const std::string& dataPath, const std::string& outPath) {
    const auto data = loadPoints(dataPath);
    const auto graph = hspc::buildHspGraph(data);
    if (outPath.empty() || outPath == "-") {
        hspc::writeGraph(graph, std::cout);
    } else {
        std::ofstream out(outPath, std::ios::binary);
        if (!out) throw hspc::IoError(fmt::format("cannot open {} for writing", outPath));
        hspc::writeGraph(graph, out);
    }
    return 0;
}

int runHspVerify(const std::string& dataPath, std::size_t stretchLimit) {
    const auto data = loadPoints(dataPath);
    const auto graph = hspc::buildHspGraph(data);

    std::vector<hspc::Id> all(data.size());
    for (hspc::Id i = 0; i < data.size(); ++i) all[i] = i;
    std::size_t violations = 0;
    for (hspc::Id u = 0; u < data.size(); ++u) {
        std::vector<hspc::Id> others;
        others.reserve(all.size());
        for (hspc::Id v : all) {
            if (v != u) others.push_back(v);
        }
        const auto audit = hspc::auditNeighborhood(data, data.vector(u), others, graph.adjacency[u]);
        violations += audit.violations;
        for (const auto& m : audit.messages) std::cout << fmt::format("node {}: {}\n", u, m);
    }
    const auto degrees = hspc::outDegreeStats(graph);
    std::cout << fmt::format("nodes {} edges {} out-degree min {} max {} mean {:.3f}\n", graph.size(),
                             graph.edgeCount(), degrees.min, degrees.max, degrees.mean);
    std::cout << fmt::format("survivor/elimination violations {}\n", violations);

    const auto mst = hspc::verifyMstContainment(graph, data);
    std::cout << fmt::format("mst edges {} missing from graph {}\n", mst.mstEdges.size(), mst.missing.size());
    for (const auto& [a, b] : mst.missing) std::cout << fmt::format("  missing mst edge {}-{}\n", a, b);

    if (data.size() <= stretchLimit) {
        const auto stretch = hspc::empiricalStretch(graph, data);
        std::cout << fmt::format("max stretch {:.6f} between {} and {}\n", stretch.maxStretch, stretch.from,
                                 stretch.to);
    } else {
        std::cout << fmt::format("stretch skipped ({} nodes > limit {})\n", data.size(), stretchLimit);
    }

    if (violations > 0 || !mst.contained) throw InvariantViolation("HSP graph invariants violated");
    return 0;
}

int runClassify(const std::string& dataPath, const std::string& labelsPath, const std::string& queriesPath,
                const std::string& kindName, std::optional<std::size_t> k, const std::string& ruleName,
                const IndexOptions& indexOptions, const std::string& outPath) {
    const auto kind = hspc::parseClassifierKind(kindName);
    const auto rule = hspc::parseVoteRule(ruleName);
    if (!kind || !rule) throw hspc::ContractError("unknown classifier or rule");

    hspc::ClassifierSpec spec;
    spec.kind = *kind;
    spec.rule = *rule;
    if (hspc::takesK(*kind)) {
        if (!k) throw hspc::ContractError(fmt::format("--k is required for {}", kindName));
        spec.k = k;
    }
    if (hspc::isProbabilistic(*kind)) spec.indexParams = indexOptions.params();

    const auto train = hspc::loadDataset(dataPath, labelsPath);
    std::optional<hspc::LabeledDataset> labeledQueries;
    hspc::VectorTable queries;
    if (std::filesystem::path(queriesPath).extension() == ".csv") {
        labeledQueries = hspc::loadCsvDataset(queriesPath);
        queries.dimension = labeledQueries->dimension();
        queries.values.assign(labeledQueries->values().begin(), labeledQueries->values().end());
    } else {
        queries = hspc::loadFvecs(queriesPath);
    }

    const hspc::Classifier classifier(spec, train);
    std::ofstream file;
    if (!outPath.empty() && outPath != "-") {
        file.open(outPath, std::ios::binary);
        if (!file) throw hspc::IoError(fmt::format("cannot open {} for writing", outPath));
    }
    std::ostream& out = file.is_open() ? file : std::cout;
    std::size_t correct = 0;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        const auto p = classifier.predict(queries.row(q));
        out << p.label << '\n';
        if (labeledQueries && p.label == labeledQueries->label(static_cast<hspc::Id>(q))) ++correct;
    }
    if (labeledQueries && queries.rows() > 0) {
        std::cerr << fmt::format("accuracy {:.2f}% ({}/{})\n", 100.0 * static_cast<double>(correct) /
                                                                   static_cast<double>(queries.rows()),
                                 correct, queries.rows());
    }
    return 0;
}

int runBench(const std::string& configPath, const std::string& outPath, bool summary) {
    auto config = hspc::ExperimentConfig::load(configPath);
    if (!outPath.empty()) config.outPath = outPath;
    if (config.outPath.empty()) throw hspc::ContractError("no output path (use --out or set \"out\" in the config)");
    const auto report = hspc::runExperiment(config);
    hspc::writeReportCsv(report, config.outPath);
    if (summary) hspc::writeSummaryTable(hspc::summarizeMax(report), std::cout);
    return 0;
}

int runIndexBuild(const std::string& dataPath, const std::string& outPath, const IndexOptions& options) {
    const auto data = loadPoints(dataPath);
    const auto index = hspc::buildIndex(data, options.params());
    index.save(outPath);
    std::cerr << fmt::format("indexed {} points on {} levels, level 0 connected: {}\n", index.size(),
                             index.levelCount(), index.levelZeroConnected() ? "yes" : "no");
    return 0;
}

int runIndexInfo(const std::string& indexPath, const std::string& dataPath) {
    const auto index = hspc::SmallWorldIndex::load(indexPath);
    const auto& p = index.params();
    std::cout << fmt::format("nodes {}\ndimension {}\nlevels {}\nentry point {}\n", index.size(), index.dimension(),
                             index.levelCount(), index.entryPoint());
    std::cout << fmt::format("m {}\nef_construction {}\nef_search {}\nlevel_scale {}\nseed {}\n", p.maxNeighbors,
                             p.efConstruction, p.efSearch, p.effectiveLevelScale(), p.seed);
    std::cout << fmt::format("fingerprint {:016x}\n", index.datasetFingerprint());
    for (std::size_t l = 0; l < index.levelCount(); ++l) {
        std::cout << fmt::format("level {}: {} nodes\n", l, index.levelSize(l));
    }
    std::cout << fmt::format("level 0 connected {}\n", index.levelZeroConnected() ? "yes" : "no");
    if (!dataPath.empty()) {
        const auto data = loadPoints(dataPath);
        const bool match = data.fingerprint() == index.datasetFingerprint();
        std::cout << fmt::format("dataset matches {}\n", match ? "yes" : "no");
        if (!match) throw hspc::StaleIndexError("index was built over a different dataset");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Half-space proximal classifiers, kNN baselines and benchmark harness"};
    app.require_subcommand(1);

    std::string specPath, outPath, labelsOut, dataPath, labelsPath, queriesPath, configPath, indexPath;
    std::string kindName, ruleName = "majority";
    std::optional<std::size_t> k;
    std::size_t stretchLimit = 2000;
    bool summary = false;
    IndexOptions indexOptions;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled dataset");
    gen->add_option("--spec", specPath, "Generator spec (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", outPath, "Output vectors (.fvecs)")->required();
    gen->add_option("--labels-out", labelsOut, "Output labels (one per line)")->required();

    auto* hsp = app.add_subcommand("hsp", "HSP graph tools");
    hsp->require_subcommand(1);
    auto* graph = hsp->add_subcommand("graph", "Export the HSP graph adjacency");
    graph->add_option("--data", dataPath, "Points (.fvecs or labeled .csv)")->required()->check(CLI::ExistingFile);
    graph->add_option("--out", outPath, "Adjacency text file (default stdout)");
    auto* verify = hsp->add_subcommand("verify", "Check survivor, MST and stretch properties");
    verify->add_option("--data", dataPath, "Points (.fvecs or labeled .csv)")->required()->check(CLI::ExistingFile);
    verify->add_option("--stretch-limit", stretchLimit, "Skip all-pairs stretch above this many points")
        ->capture_default_str();

    auto* classify = app.add_subcommand("classify", "Classify query vectors");
    classify->add_option("--data", dataPath, "Training vectors (.fvecs or labeled .csv)")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--labels", labelsPath, "Training labels (for .fvecs data)");
    classify->add_option("--queries", queriesPath, "Query vectors (.fvecs, or .csv to also report accuracy)")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--classifier", kindName, "knn, pknn, hsp, ahsp or pahsp")
        ->required()
        ->check(CLI::IsMember({"knn", "pknn", "hsp", "ahsp", "pahsp"}));
    classify->add_option("--k", k, "Neighborhood size (not used by hsp)");
    classify->add_option("--rule", ruleName, "majority, dudani or invdist")
        ->check(CLI::IsMember({"majority", "dudani", "invdist"}))
        ->capture_default_str();
    classify->add_option("--out", outPath, "Predicted labels (default stdout)");
    indexOptions.attach(classify);

    auto* bench = app.add_subcommand("bench", "Run a k-sweep experiment");
    bench->add_option("--config", configPath, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", outPath, "Report CSV (overrides the config's \"out\")");
    bench->add_flag("--summary", summary, "Print the per-technique maximum accuracy table");

    auto* index = app.add_subcommand("index", "Small-world index tools");
    index->require_subcommand(1);
    auto* build = index->add_subcommand("build", "Build and save an index");
    build->add_option("--data", dataPath, "Points (.fvecs or labeled .csv)")->required()->check(CLI::ExistingFile);
    build->add_option("--out", outPath, "Index file")->required();
    indexOptions.attach(build);
    auto* info = index->add_subcommand("info", "Describe an index file");
    info->add_option("--index,index", indexPath, "Index file")->required()->check(CLI::ExistingFile);
    info->add_option("--data", dataPath, "Dataset to check the index against")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) return runGen(specPath, outPath, labelsOut);
        if (*graph) return runHspGraph(dataPath, outPath);
        if (*verify) return runHspVerify(dataPath, stretchLimit);
        if (*classify) {
            return runClassify(dataPath, labelsPath, queriesPath, kindName, k, ruleName, indexOptions, outPath);
        }
        if (*bench) return runBench(configPath, outPath, summary);
        if (*build) return runIndexBuild(dataPath, outPath, indexOptions);
        if (*info) return runIndexInfo(indexPath, dataPath);
    } catch (const hspc::ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvariantViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const hspc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInvariant;
    }
    return kExitUsage;
}
