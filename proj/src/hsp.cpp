#include "hspc/hsp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

#include <fmt/core.h>

#include "hspc/error.hpp"
#include "hspc/parallel.hpp"

namespace hspc {

namespace {

struct Candidate {
    Id id;
    double toQuery;
};

void checkCandidates(const LabeledDataset& dataset, std::span<const Id> candidates) {
    std::vector<Id> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty() && sorted.back() >= dataset.size()) {
        throw ContractError(fmt::format("candidate id {} out of range for {} points", sorted.back(), dataset.size()));
    }
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ContractError("candidate ids must be distinct");
    }
}

Neighborhood runHsp(const LabeledDataset& dataset, std::vector<Candidate> alive) {
    Neighborhood out;
    while (!alive.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < alive.size(); ++i) {
            const auto& c = alive[i];
            const auto& b = alive[best];
            if (c.toQuery < b.toQuery || (c.toQuery == b.toQuery && c.id < b.id)) best = i;
        }
        const Candidate selected = alive[best];
        out.push_back({selected.id, selected.toQuery});

        const float* v = dataset.row(selected.id);
        const std::size_t dim = dataset.dimension();
        std::size_t kept = 0;
        for (std::size_t i = 0; i < alive.size(); ++i) {
            if (i == best) continue;
            const Candidate c = alive[i];
            const double toSelected = std::sqrt(detail::squaredL2(dataset.row(c.id), v, dim));
            if (!(c.toQuery > toSelected)) alive[kept++] = c;
        }
        alive.resize(kept);
    }
    return out;
}

}  // namespace

Neighborhood hspNeighbors(const LabeledDataset& dataset, std::span<const float> query,
                          std::span<const Id> candidates) {
    if (candidates.empty()) {
        throw EmptyCandidatesError("HSP test needs at least one candidate");
    }
    dataset.checkQuery(query);
    checkCandidates(dataset, candidates);

    std::vector<Candidate> alive;
    alive.reserve(candidates.size());
    for (Id id : candidates) alive.push_back({id, dataset.distanceTo(query, id)});
    return runHsp(dataset, std::move(alive));
}

Neighborhood hspNeighborsAll(const LabeledDataset& dataset, std::span<const float> query, std::optional<Id> exclude) {
    dataset.checkQuery(query);
    std::vector<Candidate> alive;
    alive.reserve(dataset.size());
    for (Id id = 0; id < dataset.size(); ++id) {
        if (exclude && *exclude == id) continue;
        alive.push_back({id, dataset.distanceTo(query, id)});
    }
    if (alive.empty()) {
        throw EmptyCandidatesError("HSP test needs at least one candidate");
    }
    return runHsp(dataset, std::move(alive));
}

std::size_t HspGraph::edgeCount() const noexcept {
    std::size_t total = 0;
    for (const auto& a : adjacency) total += a.size();
    return total;
}

std::vector<std::pair<Id, Id>> HspGraph::undirectedEdges() const {
    std::vector<std::pair<Id, Id>> edges;
    edges.reserve(edgeCount());
    for (Id u = 0; u < adjacency.size(); ++u) {
        for (const auto& n : adjacency[u]) edges.emplace_back(std::min(u, n.id), std::max(u, n.id));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

HspGraph buildHspGraph(const LabeledDataset& dataset, unsigned threads) {
    if (dataset.empty()) {
        throw EmptyDatasetError("cannot build an HSP graph over an empty dataset");
    }
    HspGraph graph;
    graph.adjacency.resize(dataset.size());
    if (dataset.size() == 1) return graph;
    parallelFor(
        dataset.size(),
        [&](std::size_t u) {
            graph.adjacency[u] = hspNeighborsAll(dataset, dataset.vector(static_cast<Id>(u)), static_cast<Id>(u));
        },
        threads);
    return graph;
}

DegreeStats outDegreeStats(const HspGraph& graph) {
    if (graph.size() == 0) {
        throw ContractError("degree statistics need a non-empty graph");
    }
    DegreeStats s;
    s.min = std::numeric_limits<std::size_t>::max();
    std::size_t total = 0;
    for (const auto& a : graph.adjacency) {
        s.min = std::min(s.min, a.size());
        s.max = std::max(s.max, a.size());
        total += a.size();
    }
    s.mean = static_cast<double>(total) / static_cast<double>(graph.size());
    return s;
}

MstCheck verifyMstContainment(const HspGraph& graph, const LabeledDataset& dataset) {
    const std::size_t n = dataset.size();
    if (graph.size() != n) {
        throw ContractError(fmt::format("graph has {} nodes, dataset {}", graph.size(), n));
    }
    MstCheck check;
    if (n < 2) return check;

    // Dense Prim over the complete Euclidean graph.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n, kInf);
    std::vector<Id> parent(n, 0);
    std::vector<char> inTree(n, 0);
    best[0] = 0.0;
    for (std::size_t iter = 0; iter < n; ++iter) {
        std::optional<Id> next;
        for (Id i = 0; i < n; ++i) {
            if (!inTree[i] && (!next || best[i] < best[*next])) next = i;
        }
        const Id u = *next;
        inTree[u] = 1;
        if (iter > 0) check.mstEdges.emplace_back(std::min(u, parent[u]), std::max(u, parent[u]));
        for (Id v = 0; v < n; ++v) {
            if (inTree[v]) continue;
            const double d = dataset.distance(u, v);
            if (d < best[v]) {
                best[v] = d;
                parent[v] = u;
            }
        }
    }

    std::sort(check.mstEdges.begin(), check.mstEdges.end());
    const auto support = graph.undirectedEdges();
    for (const auto& e : check.mstEdges) {
        if (!std::binary_search(support.begin(), support.end(), e)) check.missing.push_back(e);
    }
    check.contained = check.missing.empty();
    return check;
}

StretchResult empiricalStretch(const HspGraph& graph, const LabeledDataset& dataset) {
    const std::size_t n = dataset.size();
    if (graph.size() != n) {
        throw ContractError(fmt::format("graph has {} nodes, dataset {}", graph.size(), n));
    }
    std::vector<std::vector<std::pair<Id, double>>> adj(n);
    for (const auto& [a, b] : graph.undirectedEdges()) {
        const double w = dataset.distance(a, b);
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    StretchResult result;
    std::vector<double> dist(n);
    using Item = std::pair<double, Id>;
    for (Id s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), kInf);
        dist[s] = 0.0;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (auto [v, w] : adj[u]) {
                if (d + w < dist[v]) {
                    dist[v] = d + w;
                    heap.emplace(dist[v], v);
                }
            }
        }
        for (Id t = s + 1; t < n; ++t) {
            if (dist[t] == kInf) {
                throw DisconnectedError(fmt::format("no path between {} and {}", s, t), s, t);
            }
            const double direct = dataset.distance(s, t);
            if (direct == 0.0) continue;
            const double ratio = dist[t] / direct;
            if (ratio > result.maxStretch) result = {ratio, s, t};
        }
    }
    return result;
}

NeighborhoodAudit auditNeighborhood(const LabeledDataset& dataset, std::span<const float> query,
                                    std::span<const Id> candidates, const Neighborhood& neighborhood) {
    constexpr std::size_t kMaxMessages = 16;
    NeighborhoodAudit audit;
    auto fail = [&](std::string msg) {
        ++audit.violations;
        if (audit.messages.size() < kMaxMessages) audit.messages.push_back(std::move(msg));
    };

    if (neighborhood.empty() && !candidates.empty()) fail("empty neighborhood for a non-empty candidate set");

    std::vector<Id> selected;
    for (std::size_t i = 0; i < neighborhood.size(); ++i) {
        const auto& e = neighborhood[i];
        if (i > 0 && e.distance < neighborhood[i - 1].distance) {
            fail(fmt::format("entry {} (id {}) closer than its predecessor", i, e.id));
        }
        if (e.distance != dataset.distanceTo(query, e.id)) {
            fail(fmt::format("entry {} reports distance {} for id {}", i, e.distance, e.id));
        }
        selected.push_back(e.id);
    }
    std::vector<Id> sortedSelected = selected;
    std::sort(sortedSelected.begin(), sortedSelected.end());
    if (std::adjacent_find(sortedSelected.begin(), sortedSelected.end()) != sortedSelected.end()) {
        fail("neighborhood repeats an id");
    }

    if (!candidates.empty() && !neighborhood.empty()) {
        Neighbor nearest{candidates[0], dataset.distanceTo(query, candidates[0])};
        for (Id c : candidates) {
            Neighbor n{c, dataset.distanceTo(query, c)};
            if (closerThan(n, nearest)) nearest = n;
        }
        if (neighborhood.front().id != nearest.id) {
            fail(fmt::format("first entry {} is not the nearest candidate {}", neighborhood.front().id, nearest.id));
        }
    }

    for (std::size_t j = 0; j < neighborhood.size(); ++j) {
        const Id later = neighborhood[j].id;
        for (std::size_t i = 0; i < j; ++i) {
            if (dataset.distance(later, neighborhood[i].id) < neighborhood[j].distance) {
                fail(fmt::format("survivor {} lies in the forbidden half-space of {}", later, neighborhood[i].id));
            }
        }
    }

    for (Id c : candidates) {
        if (std::binary_search(sortedSelected.begin(), sortedSelected.end(), c)) continue;
        const double toQuery = dataset.distanceTo(query, c);
        const bool eliminated = std::any_of(selected.begin(), selected.end(),
                                            [&](Id v) { return dataset.distance(c, v) < toQuery; });
        if (!eliminated) fail(fmt::format("candidate {} dropped without a shadowing neighbor", c));
    }
    return audit;
}

void writeGraph(const HspGraph& graph, std::ostream& out) {
    for (std::size_t u = 0; u < graph.size(); ++u) {
        out << u << ':';
        const auto& adj = graph.adjacency[u];
        for (std::size_t i = 0; i < adj.size(); ++i) {
            out << (i == 0 ? " " : ",") << adj[i].id;
        }
        out << '\n';
    }
}

}  // namespace hspc
