#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hspc/metric.hpp"
#include "hspc/neighbors.hpp"

namespace hspc {

struct IndexParams {
    std::size_t maxNeighbors = 16;     // degree bound above level 0; level 0 allows twice this
    std::size_t efConstruction = 200;  // beam width while inserting
    std::size_t efSearch = 100;        // default beam width for queries
    std::optional<double> levelScale;  // defaults to 1/ln(maxNeighbors)
    std::uint64_t seed = 42;

    double effectiveLevelScale() const;
    /// Throws ContractError for maxNeighbors < 2, zero beam widths or a
    /// non-positive level scale.
    void validate() const;
};

/// Hierarchical small-world proximity graph for approximate kNN.
///
/// Insertion is sequential and seeded, so a given (dataset, params) pair always
/// produces the same graph. Neighbor selection keeps the closest candidates
/// (no diversity heuristic), except that pruning never removes a node's last
/// inbound link on a level. Once built the index is read-only and may be
/// searched from many threads.
class SmallWorldIndex {
public:
    static SmallWorldIndex build(const LabeledDataset& dataset, const IndexParams& params);

    /// Approximate top-k in canonical order. The beam is max(efSearch, k)
    /// wide. Throws StaleIndexError if `dataset` is not the one indexed.
    KnnResult search(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                     std::size_t efSearch, std::optional<Id> exclude = std::nullopt) const;

    const IndexParams& params() const noexcept { return params_; }
    std::uint64_t datasetFingerprint() const noexcept { return fingerprint_; }
    std::size_t size() const noexcept { return links_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    Id entryPoint() const noexcept { return entry_; }
    std::size_t levelCount() const noexcept { return links_.empty() ? 0 : links_[entry_].size(); }
    /// Highest level `id` is linked on.
    std::size_t nodeLevel(Id id) const noexcept { return links_[id].size() - 1; }
    std::span<const Id> neighbors(Id id, std::size_t level) const noexcept { return links_[id][level]; }
    std::size_t levelSize(std::size_t level) const noexcept;
    std::size_t degreeBound(std::size_t level) const noexcept {
        return level == 0 ? 2 * params_.maxNeighbors : params_.maxNeighbors;
    }

    /// True when every node is reachable from the entry point on level 0.
    bool levelZeroConnected() const;

    void serialize(std::ostream& out) const;
    static SmallWorldIndex deserialize(std::istream& in);
    std::vector<std::uint8_t> toBytes() const;
    static SmallWorldIndex fromBytes(std::span<const std::uint8_t> bytes);
    void save(const std::filesystem::path& path) const;
    static SmallWorldIndex load(const std::filesystem::path& path);

private:
    std::vector<Neighbor> searchLayer(const LabeledDataset& dataset, std::span<const float> query,
                                      const std::vector<Neighbor>& entries, std::size_t ef, std::size_t level) const;
    // `inbound[node][level]` counts links pointing at node; only needed while building.
    void insert(const LabeledDataset& dataset, Id id, std::size_t level,
                std::vector<std::vector<std::uint32_t>>& inbound);
    void checkDataset(const LabeledDataset& dataset) const;

    IndexParams params_;
    std::uint64_t fingerprint_ = 0;
    std::size_t dimension_ = 0;
    Id entry_ = 0;
    std::vector<std::vector<std::vector<Id>>> links_;  // node -> level -> neighbor ids
};

inline SmallWorldIndex buildIndex(const LabeledDataset& dataset, const IndexParams& params) {
    return SmallWorldIndex::build(dataset, params);
}

inline KnnResult annSearch(const SmallWorldIndex& index, const LabeledDataset& dataset,
                           std::span<const float> query, std::size_t k, std::size_t efSearch) {
    return index.search(dataset, query, k, efSearch);
}

/// Mean over queries of |approx ∩ exact| / |exact|. `queries` is row-major
/// with the dataset's dimension.
double recallAtK(const SmallWorldIndex& index, const LabeledDataset& dataset, std::span<const float> queries,
                 std::size_t k, std::size_t efSearch);

}  // namespace hspc
