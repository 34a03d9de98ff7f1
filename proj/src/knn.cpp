#include "hspc/knn.hpp"

#include <algorithm>
#include <queue>

#include "hspc/error.hpp"

namespace hspc {

namespace {

struct HeapOrder {
    bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closerThan(a, b); }
};

}  // namespace

KnnResult knnSearch(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                    std::optional<Id> exclude) {
    if (dataset.empty()) {
        throw EmptyDatasetError("kNN search over an empty dataset");
    }
    if (k == 0) {
        throw ContractError("k must be >= 1");
    }
    dataset.checkQuery(query);

    // Max-heap on the canonical order: the top is the worst of the current k.
    std::vector<Neighbor> storage;
    storage.reserve(std::min(k, dataset.size()) + 1);
    std::priority_queue<Neighbor, std::vector<Neighbor>, HeapOrder> heap(HeapOrder{}, std::move(storage));
    for (Id id = 0; id < dataset.size(); ++id) {
        if (exclude && *exclude == id) continue;
        const Neighbor n{id, dataset.distanceTo(query, id)};
        if (heap.size() < k) {
            heap.push(n);
        } else if (closerThan(n, heap.top())) {
            heap.pop();
            heap.push(n);
        }
    }

    KnnResult result;
    result.k = k;
    result.entries.resize(heap.size());
    for (auto it = result.entries.rbegin(); it != result.entries.rend(); ++it) {
        *it = heap.top();
        heap.pop();
    }
    return result;
}

}  // namespace hspc
