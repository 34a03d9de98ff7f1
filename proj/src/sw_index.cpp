#include "hspc/sw_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "hspc/error.hpp"
#include "hspc/knn.hpp"

namespace hspc {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'P', 'X'};
constexpr std::uint16_t kFormatVersion = 1;

struct Farther {
    bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closerThan(b, a); }
};
struct Closer {
    bool operator()(const Neighbor& a, const Neighbor& b) const noexcept { return closerThan(a, b); }
};

// Generation-stamped visited set reused across searches on the same thread.
class VisitedSet {
public:
    void reset(std::size_t n) {
        if (marks_.size() < n) marks_.assign(n, 0);
        if (++generation_ == 0) {
            std::fill(marks_.begin(), marks_.end(), 0);
            generation_ = 1;
        }
    }
    bool insert(Id id) {
        if (marks_[id] == generation_) return false;
        marks_[id] = generation_;
        return true;
    }

private:
    std::vector<std::uint32_t> marks_;
    std::uint32_t generation_ = 0;
};

VisitedSet& threadVisited() {
    thread_local VisitedSet visited;
    return visited;
}

// Uniform double in (0, 1) from the top 53 bits.
double openUnit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

class ByteWriter {
public:
    void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint64_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void raw(char* out, std::size_t n) {
        need(n);
        std::copy_n(bytes_.data() + pos_, n, out);
        pos_ += n;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }
    bool done() const noexcept { return pos_ == bytes_.size(); }
    std::size_t offset() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(fmt::format("index file truncated at byte {}", pos_));
        }
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

double IndexParams::effectiveLevelScale() const {
    return levelScale.value_or(1.0 / std::log(static_cast<double>(maxNeighbors)));
}

void IndexParams::validate() const {
    if (maxNeighbors < 2) throw ContractError("maxNeighbors must be >= 2");
    if (efConstruction == 0 || efSearch == 0) throw ContractError("beam widths must be positive");
    if (maxNeighbors > std::numeric_limits<std::uint16_t>::max() / 2) {
        throw ContractError("maxNeighbors too large for the index file format");
    }
    const double scale = effectiveLevelScale();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ContractError("levelScale must be a positive finite number");
}

SmallWorldIndex SmallWorldIndex::build(const LabeledDataset& dataset, const IndexParams& params) {
    params.validate();
    if (dataset.empty()) {
        throw EmptyDatasetError("cannot index an empty dataset");
    }
    SmallWorldIndex index;
    index.params_ = params;
    index.params_.levelScale = params.effectiveLevelScale();
    index.fingerprint_ = dataset.fingerprint();
    index.dimension_ = dataset.dimension();
    index.links_.resize(dataset.size());

    std::mt19937_64 rng(params.seed);
    const double scale = *index.params_.levelScale;
    std::vector<std::vector<std::uint32_t>> inbound(dataset.size());
    for (Id id = 0; id < dataset.size(); ++id) {
        const auto level = static_cast<std::size_t>(std::floor(-std::log(openUnit(rng)) * scale));
        index.insert(dataset, id, level, inbound);
    }
    return index;
}

void SmallWorldIndex::insert(const LabeledDataset& dataset, Id id, std::size_t level,
                             std::vector<std::vector<std::uint32_t>>& inbound) {
    links_[id].resize(level + 1);
    inbound[id].assign(level + 1, 0);
    if (id == 0) {
        entry_ = 0;
        return;
    }
    const auto query = dataset.vector(id);
    const std::size_t top = levelCount() - 1;

    std::vector<Neighbor> entries{{entry_, dataset.distanceTo(query, entry_)}};
    for (std::size_t l = top; l > level; --l) {
        entries = searchLayer(dataset, query, entries, 1, l);
        entries.resize(1);
    }

    for (std::size_t l = std::min(level, top) + 1; l-- > 0;) {
        auto found = searchLayer(dataset, query, entries, params_.efConstruction, l);
        const std::size_t keep = std::min(params_.maxNeighbors, found.size());
        auto& own = links_[id][l];
        for (std::size_t i = 0; i < keep; ++i) {
            own.push_back(found[i].id);
            ++inbound[found[i].id][l];
        }

        const std::size_t bound = degreeBound(l);
        for (std::size_t i = 0; i < keep; ++i) {
            const Id other = found[i].id;
            auto& theirs = links_[other][l];
            theirs.push_back(id);
            ++inbound[id][l];
            if (theirs.size() <= bound) continue;
            std::vector<Neighbor> ranked;
            ranked.reserve(theirs.size());
            for (Id t : theirs) ranked.push_back({t, dataset.distance(other, t)});
            std::sort(ranked.begin(), ranked.end(), Closer{});
            // Closest-M keeps the nearest `bound`, except that a link which is
            // its target's last way in survives in place of the next farthest.
            // Plain closest-M strands outliers in higher dimensions.
            std::size_t drop = ranked.size() - 1;
            while (drop > 0 && inbound[ranked[drop].id][l] <= 1) --drop;
            if (inbound[ranked[drop].id][l] <= 1) drop = ranked.size() - 1;
            --inbound[ranked[drop].id][l];
            ranked.erase(ranked.begin() + static_cast<std::ptrdiff_t>(drop));
            theirs.clear();
            for (const auto& r : ranked) theirs.push_back(r.id);
        }
        entries = std::move(found);
    }

    if (level > top) entry_ = id;
}

std::vector<Neighbor> SmallWorldIndex::searchLayer(const LabeledDataset& dataset, std::span<const float> query,
                                                   const std::vector<Neighbor>& entries, std::size_t ef,
                                                   std::size_t level) const {
    auto& visited = threadVisited();
    visited.reset(links_.size());

    std::priority_queue<Neighbor, std::vector<Neighbor>, Farther> frontier;  // closest on top
    std::priority_queue<Neighbor, std::vector<Neighbor>, Closer> best;       // farthest on top
    for (const auto& e : entries) {
        if (!visited.insert(e.id)) continue;
        frontier.push(e);
        best.push(e);
        if (best.size() > ef) best.pop();
    }

    const std::size_t dim = dataset.dimension();
    while (!frontier.empty()) {
        const Neighbor current = frontier.top();
        if (best.size() >= ef && closerThan(best.top(), current)) break;
        frontier.pop();
        for (Id next : links_[current.id][level]) {
            if (!visited.insert(next)) continue;
            const Neighbor n{next, std::sqrt(detail::squaredL2(query.data(), dataset.row(next), dim))};
            if (best.size() < ef || closerThan(n, best.top())) {
                frontier.push(n);
                best.push(n);
                if (best.size() > ef) best.pop();
            }
        }
    }

    std::vector<Neighbor> out(best.size());
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        *it = best.top();
        best.pop();
    }
    return out;
}

void SmallWorldIndex::checkDataset(const LabeledDataset& dataset) const {
    if (dataset.fingerprint() != fingerprint_ || dataset.size() != links_.size() ||
        dataset.dimension() != dimension_) {
        throw StaleIndexError("index was built over a different dataset");
    }
}

KnnResult SmallWorldIndex::search(const LabeledDataset& dataset, std::span<const float> query, std::size_t k,
                                  std::size_t efSearch, std::optional<Id> exclude) const {
    if (k == 0) throw ContractError("k must be >= 1");
    checkDataset(dataset);
    dataset.checkQuery(query);

    const std::size_t want = exclude ? k + 1 : k;
    std::vector<Neighbor> entries{{entry_, dataset.distanceTo(query, entry_)}};
    for (std::size_t l = levelCount() - 1; l > 0; --l) {
        entries = searchLayer(dataset, query, entries, 1, l);
        entries.resize(1);
    }
    auto found = searchLayer(dataset, query, entries, std::max(efSearch, want), 0);

    KnnResult result;
    result.k = k;
    for (const auto& n : found) {
        if (exclude && n.id == *exclude) continue;
        if (result.entries.size() == k) break;
        result.entries.push_back(n);
    }
    return result;
}

std::size_t SmallWorldIndex::levelSize(std::size_t level) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(links_.begin(), links_.end(), [&](const auto& node) { return node.size() > level; }));
}

bool SmallWorldIndex::levelZeroConnected() const {
    if (links_.empty()) return true;
    std::vector<char> seen(links_.size(), 0);
    std::vector<Id> stack{entry_};
    seen[entry_] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Id u = stack.back();
        stack.pop_back();
        for (Id v : links_[u][0]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == links_.size();
}

std::vector<std::uint8_t> SmallWorldIndex::toBytes() const {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u16(kFormatVersion);
    w.u32(params_.maxNeighbors);
    w.u32(params_.efConstruction);
    w.u32(params_.efSearch);
    w.f64(params_.effectiveLevelScale());
    w.u64(params_.seed);
    w.u64(fingerprint_);
    w.u32(links_.size());
    w.u32(dimension_);
    w.u32(entry_);
    const std::size_t levels = levelCount();
    w.u32(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        w.u32(levelSize(l));
        for (Id id = 0; id < links_.size(); ++id) {
            if (links_[id].size() <= l) continue;
            const auto& adj = links_[id][l];
            w.u32(id);
            w.u16(static_cast<std::uint16_t>(adj.size()));
            for (Id n : adj) w.u32(n);
        }
    }
    return w.take();
}

SmallWorldIndex SmallWorldIndex::fromBytes(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (!std::equal(magic, magic + 4, kMagic)) throw FormatError("not an index file (bad magic)");
    if (const auto version = r.u16(); version != kFormatVersion) {
        throw FormatError(fmt::format("unsupported index format version {}", version));
    }

    SmallWorldIndex index;
    index.params_.maxNeighbors = r.u32();
    index.params_.efConstruction = r.u32();
    index.params_.efSearch = r.u32();
    index.params_.levelScale = r.f64();
    index.params_.seed = r.u64();
    try {
        index.params_.validate();
    } catch (const ContractError& e) {
        throw FormatError(fmt::format("invalid index parameters: {}", e.what()));
    }
    index.fingerprint_ = r.u64();
    const std::size_t n = r.u32();
    index.dimension_ = r.u32();
    index.entry_ = r.u32();
    const std::size_t levels = r.u32();
    if (n == 0 || levels == 0 || index.entry_ >= n) throw FormatError("index header is inconsistent");
    index.links_.resize(n);

    for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t members = r.u32();
        if (l == 0 && members != n) throw FormatError("level 0 must contain every node");
        Id previous = 0;
        for (std::size_t m = 0; m < members; ++m) {
            const std::size_t at = r.offset();
            const Id id = r.u32();
            if (id >= n || (m > 0 && id <= previous) || index.links_[id].size() != l) {
                throw FormatError(fmt::format("bad node id {} on level {} at byte {}", id, l, at));
            }
            previous = id;
            const std::size_t degree = r.u16();
            if (degree > index.degreeBound(l)) {
                throw FormatError(fmt::format("node {} exceeds the degree bound on level {}", id, l));
            }
            auto& adj = index.links_[id].emplace_back();
            adj.reserve(degree);
            for (std::size_t d = 0; d < degree; ++d) {
                const Id neighbor = r.u32();
                if (neighbor >= n) throw FormatError(fmt::format("neighbor id {} out of range", neighbor));
                adj.push_back(neighbor);
            }
        }
    }
    for (Id id = 0; id < n; ++id) {
        for (std::size_t l = 0; l < index.links_[id].size(); ++l) {
            for (Id neighbor : index.links_[id][l]) {
                if (index.links_[neighbor].size() <= l) {
                    throw FormatError(fmt::format("node {} links to {} which is absent from level {}", id, neighbor, l));
                }
            }
        }
    }
    if (index.links_[index.entry_].size() != levels) throw FormatError("entry point is not on the top level");
    if (!r.done()) throw FormatError(fmt::format("trailing bytes after offset {}", r.offset()));
    return index;
}

void SmallWorldIndex::serialize(std::ostream& out) const {
    const auto bytes = toBytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed to write index");
}

SmallWorldIndex SmallWorldIndex::deserialize(std::istream& in) {
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return fromBytes(bytes);
}

void SmallWorldIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    serialize(out);
}

SmallWorldIndex SmallWorldIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    return deserialize(in);
}

double recallAtK(const SmallWorldIndex& index, const LabeledDataset& dataset, std::span<const float> queries,
                 std::size_t k, std::size_t efSearch) {
    const std::size_t dim = dataset.dimension();
    if (queries.empty() || queries.size() % dim != 0) {
        throw ContractError("queries must hold a positive whole number of rows");
    }
    const std::size_t count = queries.size() / dim;
    double total = 0.0;
    for (std::size_t q = 0; q < count; ++q) {
        const auto query = queries.subspan(q * dim, dim);
        auto exact = knnSearch(dataset, query, k).ids();
        auto approx = index.search(dataset, query, k, efSearch).ids();
        std::sort(exact.begin(), exact.end());
        std::sort(approx.begin(), approx.end());
        std::vector<Id> common;
        std::set_intersection(exact.begin(), exact.end(), approx.begin(), approx.end(), std::back_inserter(common));
        total += static_cast<double>(common.size()) / static_cast<double>(exact.size());
    }
    return total / static_cast<double>(count);
}

}  // namespace hspc
