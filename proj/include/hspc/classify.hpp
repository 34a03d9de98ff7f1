#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hspc/metric.hpp"
#include "hspc/neighbors.hpp"
#include "hspc/sw_index.hpp"

namespace hspc {

enum class VoteRule { Majority, Dudani, InverseDistance };

enum class ClassifierKind { Knn, ProbabilisticKnn, Hsp, AsymptoticHsp, ProbabilisticAsymptoticHsp };

/// Short names used on the command line and in reports: majority, dudani, invdist.
std::string_view toString(VoteRule rule) noexcept;
/// knn, pknn, hsp, ahsp, pahsp.
std::string_view toString(ClassifierKind kind) noexcept;
std::optional<VoteRule> parseVoteRule(std::string_view name) noexcept;
std::optional<ClassifierKind> parseClassifierKind(std::string_view name) noexcept;

constexpr bool isProbabilistic(ClassifierKind kind) noexcept {
    return kind == ClassifierKind::ProbabilisticKnn || kind == ClassifierKind::ProbabilisticAsymptoticHsp;
}
constexpr bool takesK(ClassifierKind kind) noexcept { return kind != ClassifierKind::Hsp; }

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Knn;
    std::optional<std::size_t> k;  // absent for Hsp
    VoteRule rule = VoteRule::Majority;
    std::optional<IndexParams> indexParams;  // required by probabilistic kinds

    /// Throws ContractError when k or indexParams presence does not match the kind.
    void validate() const;
};

struct Prediction {
    ClassId label = 0;
    std::map<ClassId, double> votes;
    std::vector<Neighbor> neighborhood;
};

/// Weight of an inverse-distance vote for a neighbor at distance zero is 1/kZeroDistanceEpsilon.
inline constexpr double kZeroDistanceEpsilon = 1e-12;

/// Per-neighbor vote weights for ascending distances.
///   Majority:        1
///   Dudani:          (d_k - d_j) / (d_k - d_1), or 1 for all when d_k == d_1
///   InverseDistance: 1 / d_j, with d_j == 0 mapped to 1/epsilon
/// Throws ContractError for empty, negative, non-finite or descending input.
std::vector<double> voteWeights(std::span<const double> distances, VoteRule rule);

/// Sums weights per class. The winner has the largest total; ties go to the
/// class whose nearest supporter is closest, then to the smaller class id.
Prediction tallyAndPredict(std::span<const Neighbor> neighborhood, std::span<const ClassId> labels, VoteRule rule);

Prediction classifyKnn(const LabeledDataset& dataset, std::span<const float> query, std::size_t k, VoteRule rule,
                       std::optional<Id> exclude = std::nullopt);

/// `efSearch` defaults to the index's own parameter.
Prediction classifyProbabilisticKnn(const SmallWorldIndex& index, const LabeledDataset& dataset,
                                    std::span<const float> query, std::size_t k, VoteRule rule,
                                    std::optional<std::size_t> efSearch = std::nullopt,
                                    std::optional<Id> exclude = std::nullopt);

/// HSP neighborhood over the whole training set; there is no size parameter.
Prediction classifyHsp(const LabeledDataset& dataset, std::span<const float> query, VoteRule rule,
                       std::optional<Id> exclude = std::nullopt);

/// HSP restricted to the exact k-nearest neighbors of the query.
Prediction classifyAsymptoticHsp(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                                 VoteRule rule, std::optional<Id> exclude = std::nullopt);

/// HSP restricted to the approximate k-nearest neighbors from `index`.
Prediction classifyProbabilisticAsymptoticHsp(const SmallWorldIndex& index, const LabeledDataset& dataset,
                                              std::span<const float> query, std::size_t k, VoteRule rule,
                                              std::optional<std::size_t> efSearch = std::nullopt,
                                              std::optional<Id> exclude = std::nullopt);

/// A validated ClassifierSpec bound to its training set. Probabilistic kinds
/// build their index on construction.
class Classifier {
public:
    Classifier(ClassifierSpec spec, const LabeledDataset& dataset);

    Prediction predict(std::span<const float> query, std::optional<Id> exclude = std::nullopt) const;

    const ClassifierSpec& spec() const noexcept { return spec_; }
    const SmallWorldIndex* index() const noexcept { return index_ ? &*index_ : nullptr; }

private:
    ClassifierSpec spec_;
    const LabeledDataset* dataset_;
    std::optional<SmallWorldIndex> index_;
};

}  // namespace hspc
