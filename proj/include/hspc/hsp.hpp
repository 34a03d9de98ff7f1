#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hspc/metric.hpp"
#include "hspc/neighbors.hpp"

namespace hspc {

/// Half-space proximal neighbor selection.
///
/// Repeatedly takes the candidate nearest to `query` (ties to the smaller id),
/// appends it, and drops every remaining candidate c with
/// d(c, query) > d(c, selected). Stops when no candidate is left. The selected
/// point is always removed, so a candidate coinciding with the query cannot
/// stall the loop.
///
/// Throws EmptyCandidatesError for an empty candidate list and ContractError
/// when ids repeat or fall outside the dataset.
Neighborhood hspNeighbors(const LabeledDataset& dataset, std::span<const float> query,
                          std::span<const Id> candidates);

/// Convenience overload: candidates are every id except `exclude`.
Neighborhood hspNeighborsAll(const LabeledDataset& dataset, std::span<const float> query,
                             std::optional<Id> exclude = std::nullopt);

/// Directed HSP graph: adjacency[u] = hspNeighbors(u, all other ids).
struct HspGraph {
    std::vector<Neighborhood> adjacency;

    std::size_t size() const noexcept { return adjacency.size(); }
    std::size_t edgeCount() const noexcept;
    /// Undirected support as sorted, de-duplicated (min, max) pairs.
    std::vector<std::pair<Id, Id>> undirectedEdges() const;
};

/// Builds the graph over every point; `threads` = 0 uses all cores. The result
/// does not depend on the thread count.
HspGraph buildHspGraph(const LabeledDataset& dataset, unsigned threads = 0);

struct DegreeStats {
    std::size_t min = 0;
    std::size_t max = 0;
    double mean = 0.0;
};

DegreeStats outDegreeStats(const HspGraph& graph);

struct MstCheck {
    bool contained = true;
    std::vector<std::pair<Id, Id>> mstEdges;  // (min, max), ascending
    std::vector<std::pair<Id, Id>> missing;
};

/// Builds the Euclidean MST with dense Prim and checks that each of its edges
/// is present in the undirected support of `graph`.
MstCheck verifyMstContainment(const HspGraph& graph, const LabeledDataset& dataset);

struct StretchResult {
    double maxStretch = 1.0;
    Id from = 0;
    Id to = 0;
};

/// Max over pairs of shortest-path length (undirected support, Euclidean edge
/// weights) divided by the direct distance. Pairs at distance zero are skipped.
/// Throws DisconnectedError when some pair is unreachable.
StretchResult empiricalStretch(const HspGraph& graph, const LabeledDataset& dataset);

/// Result of re-checking a neighborhood against the HSP invariants.
struct NeighborhoodAudit {
    std::size_t violations = 0;
    std::vector<std::string> messages;  // capped; `violations` is the full count

    bool ok() const noexcept { return violations == 0; }
};

/// Re-checks, in rooted distances: ascending order, distinct ids, first entry
/// equal to the exact 1-NN among `candidates`, the survivor pair property and
/// elimination soundness for every candidate that was not selected.
NeighborhoodAudit auditNeighborhood(const LabeledDataset& dataset, std::span<const float> query,
                                    std::span<const Id> candidates, const Neighborhood& neighborhood);

/// One line per node: `nodeId: id,id,...` in selection order.
void writeGraph(const HspGraph& graph, std::ostream& out);

}  // namespace hspc
