#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hspc {

using Id = std::uint32_t;
using ClassId = std::uint32_t;

/// One point of the metric space. Components are finite and dimension >= 1.
struct FeatureVector {
    FeatureVector(Id id, std::vector<float> components);

    Id id;
    std::vector<float> components;

    std::size_t dimension() const noexcept { return components.size(); }
    std::span<const float> view() const noexcept { return components; }
};

/// Euclidean distance with 64-bit accumulation in index order.
/// Throws DimensionError when the operands differ in length.
double distance(std::span<const float> a, std::span<const float> b);
double squaredDistance(std::span<const float> a, std::span<const float> b);

namespace detail {
// Unchecked kernel; callers guarantee equal lengths.
inline double squaredL2(const float* a, const float* b, std::size_t dim) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}
}  // namespace detail

/// Immutable training corpus: row-major vectors plus one class label per row.
/// Row ids are 0..size()-1 in storage order.
class LabeledDataset {
public:
    LabeledDataset() = default;

    /// `values` holds size()*dimension floats row by row. When `numClasses` is
    /// omitted it is max(label)+1.
    LabeledDataset(std::vector<float> values, std::size_t dimension, std::vector<ClassId> labels,
                   std::optional<std::size_t> numClasses = std::nullopt);

    static LabeledDataset fromRows(const std::vector<std::vector<float>>& rows, std::vector<ClassId> labels,
                                   std::optional<std::size_t> numClasses = std::nullopt);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t numClasses() const noexcept { return numClasses_; }

    std::span<const float> vector(Id id) const noexcept {
        return {values_.data() + static_cast<std::size_t>(id) * dimension_, dimension_};
    }
    const float* row(Id id) const noexcept { return values_.data() + static_cast<std::size_t>(id) * dimension_; }
    ClassId label(Id id) const noexcept { return labels_[id]; }
    std::span<const ClassId> labels() const noexcept { return labels_; }
    std::span<const float> values() const noexcept { return values_; }

    FeatureVector featureVector(Id id) const;

    /// 64-bit FNV-1a over (size, dimension, raw float bits).
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    /// New dataset holding the given rows, renumbered 0..ids.size()-1.
    /// The class count is preserved.
    LabeledDataset subset(std::span<const Id> ids) const;

    double distance(Id a, Id b) const noexcept { return std::sqrt(squaredDistance(a, b)); }
    double squaredDistance(Id a, Id b) const noexcept { return detail::squaredL2(row(a), row(b), dimension_); }
    double distanceTo(std::span<const float> query, Id b) const noexcept {
        return std::sqrt(detail::squaredL2(query.data(), row(b), dimension_));
    }

    /// Throws DimensionError when `query` does not match the dataset.
    void checkQuery(std::span<const float> query) const;

private:
    std::vector<float> values_;
    std::size_t dimension_ = 0;
    std::vector<ClassId> labels_;
    std::size_t numClasses_ = 0;
    std::uint64_t fingerprint_ = 0;
};

}  // namespace hspc
