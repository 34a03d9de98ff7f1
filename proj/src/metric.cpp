#include "hspc/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <fmt/core.h>

#include "hspc/error.hpp"

namespace hspc {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnvMix(std::uint64_t& h, std::uint64_t word, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        h ^= (word >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
}

void requireFinite(std::span<const float> values, std::size_t dimension) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DataError(fmt::format("non-finite component at row {}, column {}", i / dimension, i % dimension));
        }
    }
}

}  // namespace

FeatureVector::FeatureVector(Id id_, std::vector<float> components_) : id(id_), components(std::move(components_)) {
    if (components.empty()) {
        throw DimensionError("feature vector must have dimension >= 1");
    }
    requireFinite(components, components.size());
}

double squaredDistance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
    }
    return detail::squaredL2(a.data(), b.data(), a.size());
}

double distance(std::span<const float> a, std::span<const float> b) { return std::sqrt(squaredDistance(a, b)); }

LabeledDataset::LabeledDataset(std::vector<float> values, std::size_t dimension, std::vector<ClassId> labels,
                               std::optional<std::size_t> numClasses)
    : values_(std::move(values)), dimension_(dimension), labels_(std::move(labels)) {
    if (dimension_ == 0) {
        throw DimensionError("dataset dimension must be >= 1");
    }
    if (values_.size() != labels_.size() * dimension_) {
        throw DimensionError(fmt::format("{} values do not form {} rows of dimension {}", values_.size(),
                                         labels_.size(), dimension_));
    }
    requireFinite(values_, dimension_);

    const std::size_t observed =
        labels_.empty() ? 1 : static_cast<std::size_t>(*std::max_element(labels_.begin(), labels_.end())) + 1;
    numClasses_ = numClasses.value_or(observed);
    if (numClasses_ == 0) {
        throw DataError("numClasses must be positive");
    }
    if (observed > numClasses_) {
        throw DataError(fmt::format("label {} out of range for {} classes", observed - 1, numClasses_));
    }

    std::uint64_t h = kFnvOffset;
    fnvMix(h, labels_.size(), 8);
    fnvMix(h, dimension_, 8);
    for (float v : values_) {
        fnvMix(h, std::bit_cast<std::uint32_t>(v), 4);
    }
    fingerprint_ = h;
}

LabeledDataset LabeledDataset::fromRows(const std::vector<std::vector<float>>& rows, std::vector<ClassId> labels,
                                        std::optional<std::size_t> numClasses) {
    if (rows.empty()) {
        throw EmptyDatasetError("cannot infer dimension from zero rows");
    }
    const std::size_t dim = rows.front().size();
    std::vector<float> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            throw DimensionError(fmt::format("row {} has dimension {}, expected {}", i, rows[i].size(), dim));
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    if (labels.size() != rows.size()) {
        throw DimensionError(fmt::format("{} labels for {} rows", labels.size(), rows.size()));
    }
    return LabeledDataset(std::move(flat), dim, std::move(labels), numClasses);
}

FeatureVector LabeledDataset::featureVector(Id id) const {
    auto v = vector(id);
    return FeatureVector(id, std::vector<float>(v.begin(), v.end()));
}

LabeledDataset LabeledDataset::subset(std::span<const Id> ids) const {
    std::vector<float> flat;
    flat.reserve(ids.size() * dimension_);
    std::vector<ClassId> labels;
    labels.reserve(ids.size());
    for (Id id : ids) {
        if (id >= size()) {
            throw DataError(fmt::format("subset id {} out of range for {} rows", id, size()));
        }
        auto v = vector(id);
        flat.insert(flat.end(), v.begin(), v.end());
        labels.push_back(labels_[id]);
    }
    return LabeledDataset(std::move(flat), dimension_, std::move(labels), numClasses_);
}

void LabeledDataset::checkQuery(std::span<const float> query) const {
    if (query.size() != dimension_) {
        throw DimensionError(fmt::format("query has dimension {}, dataset has {}", query.size(), dimension_));
    }
}

}  // namespace hspc
