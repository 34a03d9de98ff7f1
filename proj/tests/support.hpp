#pragma once

// Test-only data generators and independent reference implementations.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hspc/metric.hpp"
#include "hspc/neighbors.hpp"

namespace hspc::fixtures {

inline LabeledDataset uniformDataset(std::size_t n, std::size_t dim, std::uint64_t seed, std::size_t classes = 2,
                                     float scale = 1.0f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, scale);
    std::uniform_int_distribution<ClassId> label(0, static_cast<ClassId>(classes - 1));
    std::vector<float> values(n * dim);
    for (auto& v : values) v = u(rng);
    std::vector<ClassId> labels(n);
    for (auto& l : labels) l = label(rng);
    return LabeledDataset(std::move(values), dim, std::move(labels), classes);
}

inline LabeledDataset gaussianDataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<float> values(n * dim);
    for (auto& v : values) v = g(rng);
    return LabeledDataset(std::move(values), dim, std::vector<ClassId>(n, 0));
}

/// Small-integer grid coordinates: many exact distance ties.
inline LabeledDataset gridDataset(std::size_t n, std::size_t dim, std::uint64_t seed, int span = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, span);
    std::vector<float> values(n * dim);
    for (auto& v : values) v = static_cast<float>(u(rng));
    return LabeledDataset(std::move(values), dim, std::vector<ClassId>(n, 0));
}

inline std::vector<float> randomQuery(std::size_t dim, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    std::vector<float> q(dim);
    for (auto& v : q) v = u(rng);
    return q;
}

inline std::vector<Id> allIds(std::size_t n, std::optional<Id> except = std::nullopt) {
    std::vector<Id> ids;
    for (Id i = 0; i < n; ++i) {
        if (!except || *except != i) ids.push_back(i);
    }
    return ids;
}

inline std::vector<Id> idsOf(const std::vector<Neighbor>& ns) {
    std::vector<Id> ids;
    for (const auto& n : ns) ids.push_back(n.id);
    return ids;
}

namespace oracle {

/// Plain long-double reference for the Euclidean distance.
inline long double naiveDistance(std::span<const float> a, std::span<const float> b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

/// HSP by explicit forbidden half-spaces. Each selected v contributes the open
/// half-space {x : (x - (q+v)/2) . (v - q) > 0}; a candidate is available while
/// it lies in none of them. The nearest available candidate (ties to smaller
/// id) is selected next.
inline std::vector<Id> hspHalfSpaces(const LabeledDataset& data, std::span<const float> query,
                                     std::span<const Id> candidates) {
    const std::size_t dim = data.dimension();
    struct HalfSpace {
        std::vector<long double> normal;
        long double offset;
    };
    std::vector<HalfSpace> forbidden;
    std::vector<Id> selected;

    auto inForbidden = [&](Id c) {
        const auto x = data.vector(c);
        for (const auto& h : forbidden) {
            long double dot = 0.0L;
            for (std::size_t i = 0; i < dim; ++i) dot += h.normal[i] * static_cast<long double>(x[i]);
            if (dot > h.offset) return true;
        }
        return false;
    };

    while (true) {
        std::optional<Id> best;
        long double bestDist = 0.0L;
        for (Id c : candidates) {
            if (std::find(selected.begin(), selected.end(), c) != selected.end()) continue;
            if (inForbidden(c)) continue;
            const long double d = naiveDistance(query, data.vector(c));
            if (!best || d < bestDist || (d == bestDist && c < *best)) {
                best = c;
                bestDist = d;
            }
        }
        if (!best) break;
        selected.push_back(*best);
        const auto v = data.vector(*best);
        HalfSpace h;
        h.normal.resize(dim);
        h.offset = 0.0L;
        for (std::size_t i = 0; i < dim; ++i) {
            const long double q = query[i];
            const long double vi = v[i];
            h.normal[i] = vi - q;
            h.offset += h.normal[i] * (q + vi) / 2.0L;
        }
        forbidden.push_back(std::move(h));
    }
    return selected;
}

/// Exact kNN by sorting every candidate on (distance, id).
inline std::vector<Neighbor> sortAllKnn(const LabeledDataset& data, std::span<const float> query, std::size_t k,
                                        std::optional<Id> exclude = std::nullopt) {
    std::vector<Neighbor> all;
    for (Id i = 0; i < data.size(); ++i) {
        if (exclude && *exclude == i) continue;
        all.push_back({i, hspc::distance(query, data.vector(i))});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return std::tie(a.distance, a.id) < std::tie(b.distance, b.id);
    });
    all.resize(std::min(k, all.size()));
    return all;
}

/// Kruskal MST over the complete Euclidean graph, edges as sorted (min, max) pairs.
inline std::vector<std::pair<Id, Id>> kruskalMst(const LabeledDataset& data) {
    const std::size_t n = data.size();
    struct Edge {
        long double w;
        Id a, b;
    };
    std::vector<Edge> edges;
    for (Id a = 0; a < n; ++a) {
        for (Id b = a + 1; b < n; ++b) edges.push_back({naiveDistance(data.vector(a), data.vector(b)), a, b});
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.w, x.a, x.b) < std::tie(y.w, y.a, y.b); });
    std::vector<Id> parent(n);
    std::iota(parent.begin(), parent.end(), Id{0});
    auto find = [&](Id x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::pair<Id, Id>> out;
    for (const auto& e : edges) {
        const Id ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        out.emplace_back(e.a, e.b);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Majority/weighted vote by direct counting over a sort-all neighborhood.
inline ClassId referenceKnnLabel(const LabeledDataset& data, std::span<const float> query, std::size_t k) {
    const auto nn = sortAllKnn(data, query, k);
    std::vector<std::size_t> counts(data.numClasses(), 0);
    std::vector<double> nearest(data.numClasses(), INFINITY);
    for (const auto& n : nn) {
        const ClassId c = data.label(n.id);
        ++counts[c];
        nearest[c] = std::min(nearest[c], n.distance);
    }
    ClassId best = 0;
    for (ClassId c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best] || (counts[c] == counts[best] && nearest[c] < nearest[best])) best = c;
    }
    return best;
}

}  // namespace oracle

}  // namespace hspc::fixtures
