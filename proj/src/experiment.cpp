#include "hspc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "hspc/error.hpp"
#include "hspc/hsp.hpp"
#include "hspc/io.hpp"
#include "hspc/knn.hpp"
#include "hspc/parallel.hpp"

namespace hspc {

namespace {

using Clock = std::chrono::steady_clock;

double millisSince(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

// Hit flags for one pass over the test queries: [rule][query].
using Hits = std::vector<std::vector<std::uint8_t>>;

std::size_t countHits(const std::vector<std::uint8_t>& flags) {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

}  // namespace

LabeledDataset DataSource::load() const {
    if (generator) return generateSynthetic(*generator);
    if (vectors.empty()) throw ContractError("experiment data needs either vectors or a generator");
    return loadDataset(vectors, labels);
}

void ExperimentConfig::validate(std::optional<std::size_t> datasetSize) const {
    if (classifiers.empty()) throw ContractError("no classifiers configured");
    if (rules.empty()) throw ContractError("no voting rules configured");
    if (kMin < 1) throw ContractError("k_min must be >= 1");
    if (kMax < kMin) throw ContractError("k_max must be >= k_min");
    if (testSampleCount == 0) throw ContractError("test_samples must be positive");
    if (datasetSize && testSampleCount >= *datasetSize) {
        throw ContractError(
            fmt::format("test_samples ({}) must be smaller than the dataset ({})", testSampleCount, *datasetSize));
    }
    if (std::any_of(classifiers.begin(), classifiers.end(), isProbabilistic)) indexParams.validate();
}

ExperimentConfig ExperimentConfig::fromJson(const nlohmann::json& j, const std::filesystem::path& baseDir) {
    ExperimentConfig c;
    try {
        const auto& data = j.at("data");
        if (data.contains("generator")) {
            c.data.generator = GeneratorSpec::fromJson(data.at("generator"));
        } else {
            c.data.vectors = resolve(baseDir, data.at("vectors").get<std::string>());
            if (data.contains("labels")) c.data.labels = resolve(baseDir, data.at("labels").get<std::string>());
        }
        c.testSampleCount = j.value("test_samples", c.testSampleCount);
        c.kMin = j.value("k_min", c.kMin);
        c.kMax = j.value("k_max", c.kMax);
        c.seed = j.value("seed", c.seed);
        c.recordTiming = j.value("timing", c.recordTiming);
        c.threads = j.value("threads", c.threads);
        if (j.contains("out")) c.outPath = resolve(baseDir, j.at("out").get<std::string>());

        for (const auto& name : j.at("classifiers")) {
            const auto kind = parseClassifierKind(name.get<std::string>());
            if (!kind) throw FormatError(fmt::format("unknown classifier '{}'", name.get<std::string>()));
            c.classifiers.push_back(*kind);
        }
        if (j.contains("rules")) {
            c.rules.clear();
            for (const auto& name : j.at("rules")) {
                const auto rule = parseVoteRule(name.get<std::string>());
                if (!rule) throw FormatError(fmt::format("unknown voting rule '{}'", name.get<std::string>()));
                c.rules.push_back(*rule);
            }
        }
        if (j.contains("index")) {
            const auto& ix = j.at("index");
            c.indexParams.maxNeighbors = ix.value("m", c.indexParams.maxNeighbors);
            c.indexParams.efConstruction = ix.value("ef_construction", c.indexParams.efConstruction);
            c.indexParams.efSearch = ix.value("ef_search", c.indexParams.efSearch);
            c.indexParams.seed = ix.value("seed", c.indexParams.seed);
            if (ix.contains("level_scale")) c.indexParams.levelScale = ix.at("level_scale").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("bad experiment config: {}", e.what()));
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return fromJson(j, path.parent_path());
}

std::pair<std::vector<Id>, std::vector<Id>> splitTestTrain(std::size_t n, std::size_t testCount, std::uint64_t seed) {
    if (testCount > n) throw ContractError("test sample larger than the dataset");
    std::vector<Id> perm(n);
    std::iota(perm.begin(), perm.end(), Id{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Id> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(testCount));
    std::vector<Id> train(perm.begin() + static_cast<std::ptrdiff_t>(testCount), perm.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {std::move(test), std::move(train)};
}

AccuracyReport runExperiment(const ExperimentConfig& config, const LabeledDataset& data) {
    config.validate(data.size());
    const auto [testIds, trainIds] = splitTestTrain(data.size(), config.testSampleCount, config.seed);
    const LabeledDataset train = data.subset(trainIds);
    const std::size_t nTest = testIds.size();
    const std::size_t nRules = config.rules.size();

    std::vector<std::size_t> ks(config.kMax - config.kMin + 1);
    std::iota(ks.begin(), ks.end(), config.kMin);

    auto makeRow = [&](ClassifierKind kind, VoteRule rule, std::optional<std::size_t> k, std::size_t correct,
                       double ms) {
        ReportRow row;
        row.classifier = kind;
        row.rule = rule;
        row.k = k;
        row.correct = correct;
        row.accuracy = static_cast<double>(correct) * 100.0 / static_cast<double>(nTest);
        row.nTest = nTest;
        row.nTrain = train.size();
        row.dimension = data.dimension();
        row.seed = config.seed;
        if (config.recordTiming) row.elapsedMs = ms;
        return row;
    };

    // Votes every rule over one neighborhood and records hits for query q.
    auto vote = [&](Hits& hits, std::size_t q, std::span<const Neighbor> neighborhood) {
        const ClassId truth = data.label(testIds[q]);
        for (std::size_t r = 0; r < nRules; ++r) {
            hits[r][q] = tallyAndPredict(neighborhood, train.labels(), config.rules[r]).label == truth ? 1 : 0;
        }
    };

    std::optional<SmallWorldIndex> index;
    AccuracyReport report;
    for (const ClassifierKind kind : config.classifiers) {
        Hits hits(nRules, std::vector<std::uint8_t>(nTest, 0));

        if (kind == ClassifierKind::Hsp) {
            const auto start = Clock::now();
            parallelFor(
                nTest,
                [&](std::size_t q) { vote(hits, q, hspNeighborsAll(train, data.vector(testIds[q]))); },
                config.threads);
            const double ms = millisSince(start);
            for (std::size_t r = 0; r < nRules; ++r) {
                report.rows.push_back(makeRow(kind, config.rules[r], std::nullopt, countHits(hits[r]), ms));
            }
            continue;
        }

        const bool probabilistic = isProbabilistic(kind);
        const bool hspFamily = kind == ClassifierKind::AsymptoticHsp || kind == ClassifierKind::ProbabilisticAsymptoticHsp;
        const std::size_t ef = config.indexParams.efSearch;

        // One candidate search per query serves every k: exact results are
        // prefix-closed, and approximate ones are too while k <= efSearch
        // because the beam width stays efSearch.
        const auto baseStart = Clock::now();
        if (probabilistic && !index) index = SmallWorldIndex::build(train, config.indexParams);
        std::vector<KnnResult> base(nTest);
        parallelFor(
            nTest,
            [&](std::size_t q) {
                const auto query = data.vector(testIds[q]);
                base[q] = probabilistic ? index->search(train, query, std::min(config.kMax, ef), ef)
                                        : knnSearch(train, query, config.kMax);
            },
            config.threads);
        const double baseMs = millisSince(baseStart) / static_cast<double>(ks.size());

        std::vector<std::vector<std::size_t>> correct(nRules, std::vector<std::size_t>(ks.size(), 0));
        std::vector<double> elapsed(ks.size(), 0.0);
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const std::size_t k = ks[ki];
            const auto start = Clock::now();
            parallelFor(
                nTest,
                [&](std::size_t q) {
                    const auto query = data.vector(testIds[q]);
                    std::vector<Neighbor> ball;
                    if (probabilistic && k > ef) {
                        ball = index->search(train, query, k, ef).entries;
                    } else {
                        const auto& all = base[q].entries;
                        ball.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(k, all.size())));
                    }
                    if (hspFamily) {
                        std::vector<Id> ids;
                        ids.reserve(ball.size());
                        for (const auto& n : ball) ids.push_back(n.id);
                        vote(hits, q, hspNeighbors(train, query, ids));
                    } else {
                        vote(hits, q, ball);
                    }
                },
                config.threads);
            elapsed[ki] = millisSince(start) + baseMs;
            for (std::size_t r = 0; r < nRules; ++r) correct[r][ki] = countHits(hits[r]);
        }
        for (std::size_t r = 0; r < nRules; ++r) {
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                report.rows.push_back(makeRow(kind, config.rules[r], ks[ki], correct[r][ki], elapsed[ki]));
            }
        }
    }
    return report;
}

AccuracyReport runExperiment(const ExperimentConfig& config) {
    LabeledDataset data;
    try {
        data = config.data.load();
    } catch (const Error& e) {
        throw DataError(fmt::format("loading experiment data: {}", e.what()));
    }
    return runExperiment(config, data);
}

void writeReportCsv(const AccuracyReport& report, std::ostream& out) {
    out << "classifier,rule,k,accuracy,n_test,n_train,dim,seed,elapsed_ms\n";
    for (const auto& r : report.rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", toString(r.classifier), toString(r.rule),
                           r.k ? fmt::format("{}", *r.k) : std::string(), r.accuracy, r.nTest, r.nTrain, r.dimension,
                           r.seed, r.elapsedMs ? fmt::format("{:.3f}", *r.elapsedMs) : std::string());
    }
}

void writeReportCsv(const AccuracyReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    writeReportCsv(report, out);
    out.flush();
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::vector<MaxAccuracy> summarizeMax(const AccuracyReport& report) {
    std::vector<MaxAccuracy> out;
    for (const auto& row : report.rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const MaxAccuracy& m) {
            return m.classifier == row.classifier && m.rule == row.rule;
        });
        if (it == out.end()) {
            out.push_back({row.classifier, row.rule, row.accuracy, row.k});
        } else if (row.accuracy > it->accuracy ||
                   (row.accuracy == it->accuracy && row.k && (!it->bestK || *row.k < *it->bestK))) {
            it->accuracy = row.accuracy;
            it->bestK = row.k;
        }
    }
    return out;
}

void writeSummaryTable(const std::vector<MaxAccuracy>& summary, std::ostream& out) {
    std::vector<ClassifierKind> kinds;
    std::vector<VoteRule> rules;
    for (const auto& m : summary) {
        if (std::find(kinds.begin(), kinds.end(), m.classifier) == kinds.end()) kinds.push_back(m.classifier);
        if (std::find(rules.begin(), rules.end(), m.rule) == rules.end()) rules.push_back(m.rule);
    }
    out << fmt::format("{:<10}", "");
    for (auto r : rules) out << fmt::format("{:>20}", toString(r));
    out << '\n';
    for (auto kind : kinds) {
        out << fmt::format("{:<10}", toString(kind));
        for (auto r : rules) {
            auto it = std::find_if(summary.begin(), summary.end(),
                                   [&](const MaxAccuracy& m) { return m.classifier == kind && m.rule == r; });
            if (it == summary.end()) {
                out << fmt::format("{:>20}", "-");
            } else if (it->bestK) {
                out << fmt::format("{:>20}", fmt::format("{:.2f} (k={})", it->accuracy, *it->bestK));
            } else {
                out << fmt::format("{:>20}", fmt::format("{:.2f}", it->accuracy));
            }
        }
        out << '\n';
    }
}

std::vector<std::pair<std::size_t, double>> accuracyCurve(const AccuracyReport& report, ClassifierKind kind,
                                                          VoteRule rule) {
    std::vector<std::pair<std::size_t, double>> curve;
    for (const auto& row : report.rows) {
        if (row.classifier == kind && row.rule == rule && row.k) curve.emplace_back(*row.k, row.accuracy);
    }
    std::sort(curve.begin(), curve.end());
    return curve;
}

double totalVariation(const std::vector<std::pair<std::size_t, double>>& curve) {
    double tv = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) tv += std::abs(curve[i].second - curve[i - 1].second);
    return tv;
}

}  // namespace hspc
