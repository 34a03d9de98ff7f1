#pragma once

#include <vector>

#include "hspc/metric.hpp"

namespace hspc {

struct Neighbor {
    Id id;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Canonical neighbor order: ascending distance, then ascending id.
inline bool closerThan(const Neighbor& a, const Neighbor& b) noexcept {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

/// Neighbors in selection order, as produced by the HSP test.
using Neighborhood = std::vector<Neighbor>;

/// Exact or approximate k-nearest neighbors in canonical order.
struct KnnResult {
    std::vector<Neighbor> entries;
    std::size_t k = 0;

    std::vector<Id> ids() const {
        std::vector<Id> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.id);
        return out;
    }
};

}  // namespace hspc
