#include "hspc/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "hspc/error.hpp"

namespace hspc {

namespace {

std::vector<std::uint8_t> readBytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string readText(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t readLe32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void putLe32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::string_view trimLine(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    return line;
}

template <typename T>
bool parseWhole(std::string_view text, T& out) {
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// Splits on '\n'; a final empty line after a trailing newline is dropped.
std::vector<std::string_view> splitLines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace

FeatureVector VectorTable::featureVector(std::size_t i) const {
    auto r = row(i);
    return FeatureVector(static_cast<Id>(i), std::vector<float>(r.begin(), r.end()));
}

VectorTable parseFvecs(std::span<const std::uint8_t> bytes) {
    VectorTable table;
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 4) {
            throw FormatError(fmt::format("truncated record header at byte {}", offset));
        }
        const auto dim = static_cast<std::int32_t>(readLe32(bytes.data() + offset));
        if (dim <= 0) throw FormatError(fmt::format("non-positive dimension {} at byte {}", dim, offset));
        if (table.dimension == 0) {
            table.dimension = static_cast<std::size_t>(dim);
        } else if (table.dimension != static_cast<std::size_t>(dim)) {
            throw FormatError(
                fmt::format("record at byte {} has dimension {}, expected {}", offset, dim, table.dimension));
        }
        const std::size_t payload = static_cast<std::size_t>(dim) * 4;
        if (bytes.size() - offset - 4 < payload) {
            throw FormatError(fmt::format("truncated record at byte {}", offset));
        }
        const std::uint8_t* p = bytes.data() + offset + 4;
        for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
            const float v = std::bit_cast<float>(readLe32(p + 4 * i));
            if (!std::isfinite(v)) {
                throw DataError(fmt::format("non-finite value in record {} component {}", table.rows(), i));
            }
            table.values.push_back(v);
        }
        offset += 4 + payload;
    }
    return table;
}

VectorTable loadFvecs(const std::filesystem::path& path) {
    try {
        return parseFvecs(readBytes(path));
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<std::uint8_t> encodeFvecs(const VectorTable& table) {
    std::vector<std::uint8_t> out;
    out.reserve(table.rows() * (4 + 4 * table.dimension));
    for (std::size_t r = 0; r < table.rows(); ++r) {
        putLe32(out, static_cast<std::uint32_t>(table.dimension));
        for (float v : table.row(r)) putLe32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

void writeFvecs(const std::filesystem::path& path, const VectorTable& table) {
    const auto bytes = encodeFvecs(table);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::vector<ClassId> parseLabels(std::string_view text) {
    std::vector<ClassId> labels;
    const auto lines = splitLines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        ClassId value = 0;
        if (!parseWhole(trimLine(lines[i]), value)) {
            throw FormatError(fmt::format("line {}: expected a non-negative integer label", i + 1));
        }
        labels.push_back(value);
    }
    return labels;
}

std::vector<ClassId> loadLabels(const std::filesystem::path& path) {
    try {
        return parseLabels(readText(path));
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void writeLabels(const std::filesystem::path& path, std::span<const ClassId> labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    for (ClassId l : labels) out << l << '\n';
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

LabeledDataset loadCsvDataset(const std::filesystem::path& path) {
    const std::string text = readText(path);
    std::vector<float> values;
    std::vector<ClassId> labels;
    std::size_t dim = 0;
    const auto lines = splitLines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trimLine(lines[i]);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trimLine(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2) {
            throw FormatError(fmt::format("{}: line {}: need at least one feature and a label", path.string(), i + 1));
        }
        if (dim == 0) dim = fields.size() - 1;
        if (fields.size() - 1 != dim) {
            throw FormatError(fmt::format("{}: line {}: {} features, expected {}", path.string(), i + 1,
                                          fields.size() - 1, dim));
        }
        for (std::size_t f = 0; f < dim; ++f) {
            float v = 0.0f;
            if (!parseWhole(fields[f], v)) {
                throw FormatError(fmt::format("{}: line {}: bad number '{}'", path.string(), i + 1, fields[f]));
            }
            values.push_back(v);
        }
        ClassId label = 0;
        if (!parseWhole(fields.back(), label)) {
            throw FormatError(fmt::format("{}: line {}: bad label '{}'", path.string(), i + 1, fields.back()));
        }
        labels.push_back(label);
    }
    if (labels.empty()) throw EmptyDatasetError(fmt::format("{}: no rows", path.string()));
    return LabeledDataset(std::move(values), dim, std::move(labels));
}

LabeledDataset loadDataset(const std::filesystem::path& vectorsPath, const std::filesystem::path& labelsPath) {
    if (vectorsPath.extension() == ".csv") return loadCsvDataset(vectorsPath);
    if (labelsPath.empty()) {
        throw FormatError(fmt::format("{}: fvecs data needs a labels file", vectorsPath.string()));
    }
    auto table = loadFvecs(vectorsPath);
    auto labels = loadLabels(labelsPath);
    if (labels.size() != table.rows()) {
        throw DataError(fmt::format("{} vectors but {} labels", table.rows(), labels.size()));
    }
    if (table.rows() == 0) throw EmptyDatasetError(fmt::format("{}: no vectors", vectorsPath.string()));
    return LabeledDataset(std::move(table.values), table.dimension, std::move(labels));
}

}  // namespace hspc
