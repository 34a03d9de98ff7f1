#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "hspc/metric.hpp"

namespace hspc {

/// Row-major block of equally sized float vectors, as stored in .fvecs files.
struct VectorTable {
    std::size_t dimension = 0;
    std::vector<float> values;

    std::size_t rows() const noexcept { return dimension == 0 ? 0 : values.size() / dimension; }
    std::span<const float> row(std::size_t i) const noexcept { return {values.data() + i * dimension, dimension}; }
    FeatureVector featureVector(std::size_t i) const;
};

/// Parses repeated [int32 dim][dim x float32] little-endian records. An empty
/// input yields an empty table. Truncation and mixed dimensions raise
/// FormatError naming the byte offset; NaN or infinite values raise DataError.
VectorTable parseFvecs(std::span<const std::uint8_t> bytes);
VectorTable loadFvecs(const std::filesystem::path& path);
std::vector<std::uint8_t> encodeFvecs(const VectorTable& table);
void writeFvecs(const std::filesystem::path& path, const VectorTable& table);

/// One non-negative integer per line. Bad lines raise FormatError with the
/// 1-based line number.
std::vector<ClassId> parseLabels(std::string_view text);
std::vector<ClassId> loadLabels(const std::filesystem::path& path);
void writeLabels(const std::filesystem::path& path, std::span<const ClassId> labels);

/// Comma-separated floats with the class label in the last column.
LabeledDataset loadCsvDataset(const std::filesystem::path& path);

/// `.csv` files carry their own labels; anything else is read as fvecs and
/// paired with `labelsPath`, which must then be given.
LabeledDataset loadDataset(const std::filesystem::path& vectorsPath, const std::filesystem::path& labelsPath = {});

}  // namespace hspc
