#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hspc/classify.hpp"
#include "hspc/synthetic.hpp"

namespace hspc {

/// Where the experiment data comes from: a feature file (fvecs + labels, or a
/// labeled .csv) or a synthetic generator.
struct DataSource {
    std::filesystem::path vectors;
    std::filesystem::path labels;
    std::optional<GeneratorSpec> generator;

    LabeledDataset load() const;
};

struct ExperimentConfig {
    DataSource data;
    std::size_t testSampleCount = 1000;
    std::size_t kMin = 1;
    std::size_t kMax = 300;
    std::vector<ClassifierKind> classifiers;
    std::vector<VoteRule> rules{VoteRule::Majority};
    IndexParams indexParams;
    std::uint64_t seed = 1;
    bool recordTiming = false;  // elapsed_ms is left blank unless set, so reports stay byte-stable
    unsigned threads = 0;       // 0 = all cores
    std::filesystem::path outPath;

    /// Throws ContractError for an empty classifier or rule list, kMin < 1,
    /// kMax < kMin, or a test sample that does not leave any training data.
    void validate(std::optional<std::size_t> datasetSize = std::nullopt) const;

    /// Relative data paths resolve against `baseDir`. See README for keys.
    static ExperimentConfig fromJson(const nlohmann::json& j, const std::filesystem::path& baseDir = {});
    static ExperimentConfig load(const std::filesystem::path& path);
};

struct ReportRow {
    ClassifierKind classifier = ClassifierKind::Knn;
    VoteRule rule = VoteRule::Majority;
    std::optional<std::size_t> k;  // empty for Hsp
    double accuracy = 0.0;         // percent
    std::size_t correct = 0;
    std::size_t nTest = 0;
    std::size_t nTrain = 0;
    std::size_t dimension = 0;
    std::uint64_t seed = 0;
    std::optional<double> elapsedMs;
};

struct AccuracyReport {
    std::vector<ReportRow> rows;
};

/// Seeded split of `data` into test ids (sampled without replacement) and the
/// remaining training ids, both ascending.
std::pair<std::vector<Id>, std::vector<Id>> splitTestTrain(std::size_t n, std::size_t testCount, std::uint64_t seed);

/// Runs every classifier x rule x k cell over the held-out queries.
///
/// Rows come out grouped by classifier (config order), then rule, then
/// ascending k. Hsp gets one row per rule. Probabilistic classifiers share one
/// index built over the training split. Accuracy is correct / nTest * 100.
AccuracyReport runExperiment(const ExperimentConfig& config, const LabeledDataset& data);
AccuracyReport runExperiment(const ExperimentConfig& config);

/// CSV with header classifier,rule,k,accuracy,n_test,n_train,dim,seed,elapsed_ms.
void writeReportCsv(const AccuracyReport& report, std::ostream& out);
void writeReportCsv(const AccuracyReport& report, const std::filesystem::path& path);

struct MaxAccuracy {
    ClassifierKind classifier;
    VoteRule rule;
    double accuracy;
    std::optional<std::size_t> bestK;  // smallest k reaching the maximum
};

/// Maximum accuracy per (classifier, rule), in order of first appearance.
std::vector<MaxAccuracy> summarizeMax(const AccuracyReport& report);

/// Classifier-by-rule grid of maxima as fixed-width text.
void writeSummaryTable(const std::vector<MaxAccuracy>& summary, std::ostream& out);

/// (k, accuracy) points for one classifier and rule, ascending k.
std::vector<std::pair<std::size_t, double>> accuracyCurve(const AccuracyReport& report, ClassifierKind kind,
                                                          VoteRule rule);

/// Sum of absolute differences between consecutive accuracies.
double totalVariation(const std::vector<std::pair<std::size_t, double>>& curve);

}  // namespace hspc
