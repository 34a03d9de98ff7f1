#include "hspc/classify.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/core.h>

#include "hspc/error.hpp"
#include "hspc/hsp.hpp"
#include "hspc/knn.hpp"

namespace hspc {

namespace {

constexpr std::array<std::pair<VoteRule, std::string_view>, 3> kRuleNames{{
    {VoteRule::Majority, "majority"},
    {VoteRule::Dudani, "dudani"},
    {VoteRule::InverseDistance, "invdist"},
}};

constexpr std::array<std::pair<ClassifierKind, std::string_view>, 5> kKindNames{{
    {ClassifierKind::Knn, "knn"},
    {ClassifierKind::ProbabilisticKnn, "pknn"},
    {ClassifierKind::Hsp, "hsp"},
    {ClassifierKind::AsymptoticHsp, "ahsp"},
    {ClassifierKind::ProbabilisticAsymptoticHsp, "pahsp"},
}};

Prediction fromCandidates(const LabeledDataset& dataset, std::span<const float> query, const KnnResult& ball,
                          VoteRule rule) {
    const auto ids = ball.ids();
    return tallyAndPredict(hspNeighbors(dataset, query, ids), dataset.labels(), rule);
}

}  // namespace

std::string_view toString(VoteRule rule) noexcept {
    for (const auto& [r, name] : kRuleNames) {
        if (r == rule) return name;
    }
    return "?";
}

std::string_view toString(ClassifierKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "?";
}

std::optional<VoteRule> parseVoteRule(std::string_view name) noexcept {
    for (const auto& [r, n] : kRuleNames) {
        if (n == name) return r;
    }
    return std::nullopt;
}

std::optional<ClassifierKind> parseClassifierKind(std::string_view name) noexcept {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

void ClassifierSpec::validate() const {
    if (takesK(kind)) {
        if (!k || *k == 0) throw ContractError(fmt::format("{} needs k >= 1", toString(kind)));
    } else if (k) {
        throw ContractError("the HSP classifier takes no k");
    }
    if (isProbabilistic(kind)) {
        if (!indexParams) throw ContractError(fmt::format("{} needs index parameters", toString(kind)));
        indexParams->validate();
    }
}

std::vector<double> voteWeights(std::span<const double> distances, VoteRule rule) {
    if (distances.empty()) throw ContractError("vote weights need at least one distance");
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (!std::isfinite(distances[i]) || distances[i] < 0.0) {
            throw ContractError(fmt::format("distance {} is not a finite non-negative value", i));
        }
        if (i > 0 && distances[i] < distances[i - 1]) {
            throw ContractError(fmt::format("distances must be ascending (index {})", i));
        }
    }

    std::vector<double> w(distances.size(), 1.0);
    switch (rule) {
        case VoteRule::Majority:
            break;
        case VoteRule::Dudani: {
            const double nearest = distances.front();
            const double farthest = distances.back();
            if (farthest != nearest) {
                for (std::size_t j = 0; j < w.size(); ++j) w[j] = (farthest - distances[j]) / (farthest - nearest);
            }
            break;
        }
        case VoteRule::InverseDistance:
            for (std::size_t j = 0; j < w.size(); ++j) {
                w[j] = distances[j] == 0.0 ? 1.0 / kZeroDistanceEpsilon : 1.0 / distances[j];
            }
            break;
    }
    return w;
}

Prediction tallyAndPredict(std::span<const Neighbor> neighborhood, std::span<const ClassId> labels, VoteRule rule) {
    if (neighborhood.empty()) throw EmptyNeighborhoodError("cannot vote over an empty neighborhood");

    std::vector<double> distances;
    distances.reserve(neighborhood.size());
    for (const auto& n : neighborhood) {
        if (n.id >= labels.size()) throw ContractError(fmt::format("neighbor id {} has no label", n.id));
        distances.push_back(n.distance);
    }
    const auto weights = voteWeights(distances, rule);

    Prediction p;
    std::map<ClassId, double> nearestSupporter;
    for (std::size_t i = 0; i < neighborhood.size(); ++i) {
        const ClassId c = labels[neighborhood[i].id];
        p.votes[c] += weights[i];
        nearestSupporter.try_emplace(c, distances[i]);  // distances ascend, first is nearest
    }

    // Map iteration is ascending by class id, so strict comparisons keep the smaller id on full ties.
    bool first = true;
    for (const auto& [c, total] : p.votes) {
        if (first) {
            p.label = c;
            first = false;
            continue;
        }
        const double bestTotal = p.votes[p.label];
        if (total > bestTotal || (total == bestTotal && nearestSupporter[c] < nearestSupporter[p.label])) {
            p.label = c;
        }
    }
    p.neighborhood.assign(neighborhood.begin(), neighborhood.end());
    return p;
}

Prediction classifyKnn(const LabeledDataset& dataset, std::span<const float> query, std::size_t k, VoteRule rule,
                       std::optional<Id> exclude) {
    return tallyAndPredict(knnSearch(dataset, query, k, exclude).entries, dataset.labels(), rule);
}

Prediction classifyProbabilisticKnn(const SmallWorldIndex& index, const LabeledDataset& dataset,
                                    std::span<const float> query, std::size_t k, VoteRule rule,
                                    std::optional<std::size_t> efSearch, std::optional<Id> exclude) {
    const auto found = index.search(dataset, query, k, efSearch.value_or(index.params().efSearch), exclude);
    return tallyAndPredict(found.entries, dataset.labels(), rule);
}

Prediction classifyHsp(const LabeledDataset& dataset, std::span<const float> query, VoteRule rule,
                       std::optional<Id> exclude) {
    if (dataset.empty()) throw EmptyDatasetError("HSP classifier over an empty dataset");
    return tallyAndPredict(hspNeighborsAll(dataset, query, exclude), dataset.labels(), rule);
}

Prediction classifyAsymptoticHsp(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                                 VoteRule rule, std::optional<Id> exclude) {
    return fromCandidates(dataset, query, knnSearch(dataset, query, k, exclude), rule);
}

Prediction classifyProbabilisticAsymptoticHsp(const SmallWorldIndex& index, const LabeledDataset& dataset,
                                              std::span<const float> query, std::size_t k, VoteRule rule,
                                              std::optional<std::size_t> efSearch, std::optional<Id> exclude) {
    const auto ball = index.search(dataset, query, k, efSearch.value_or(index.params().efSearch), exclude);
    return fromCandidates(dataset, query, ball, rule);
}

Classifier::Classifier(ClassifierSpec spec, const LabeledDataset& dataset) : spec_(std::move(spec)), dataset_(&dataset) {
    spec_.validate();
    if (isProbabilistic(spec_.kind)) index_ = SmallWorldIndex::build(dataset, *spec_.indexParams);
}

Prediction Classifier::predict(std::span<const float> query, std::optional<Id> exclude) const {
    const auto& ds = *dataset_;
    switch (spec_.kind) {
        case ClassifierKind::Knn:
            return classifyKnn(ds, query, *spec_.k, spec_.rule, exclude);
        case ClassifierKind::ProbabilisticKnn:
            return classifyProbabilisticKnn(*index_, ds, query, *spec_.k, spec_.rule, std::nullopt, exclude);
        case ClassifierKind::Hsp:
            return classifyHsp(ds, query, spec_.rule, exclude);
        case ClassifierKind::AsymptoticHsp:
            return classifyAsymptoticHsp(ds, query, *spec_.k, spec_.rule, exclude);
        case ClassifierKind::ProbabilisticAsymptoticHsp:
            return classifyProbabilisticAsymptoticHsp(*index_, ds, query, *spec_.k, spec_.rule, std::nullopt,
                                                      exclude);
    }
    throw ContractError("unknown classifier kind");
}

}  // namespace hspc
