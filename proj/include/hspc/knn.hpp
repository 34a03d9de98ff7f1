#pragma once

#include <optional>
#include <span>

#include "hspc/metric.hpp"
#include "hspc/neighbors.hpp"

namespace hspc {

/// Exact k-nearest neighbors by linear scan with a bounded max-heap.
///
/// Entries come back ascending by distance, ties by smaller id; with k >= the
/// number of candidates every candidate is returned. `exclude` drops one id
/// (self-match for in-sample queries). Throws EmptyDatasetError on an empty
/// dataset and ContractError for k == 0.
KnnResult knnSearch(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                    std::optional<Id> exclude = std::nullopt);

}  // namespace hspc
