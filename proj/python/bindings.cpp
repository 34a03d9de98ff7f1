#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "hspc/classify.hpp"
#include "hspc/error.hpp"
#include "hspc/experiment.hpp"
#include "hspc/hsp.hpp"
#include "hspc/io.hpp"
#include "hspc/knn.hpp"
#include "hspc/sw_index.hpp"
#include "hspc/synthetic.hpp"

namespace py = pybind11;
using namespace hspc;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::span<const float> asQuery(const FloatArray& a) {
    if (a.ndim() != 1) throw DimensionError("query must be a 1-d array");
    return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

LabeledDataset makeDataset(const FloatArray& points, const std::vector<ClassId>& labels,
                           std::optional<std::size_t> numClasses) {
    if (points.ndim() != 2) throw DimensionError("points must be a 2-d array");
    const auto n = static_cast<std::size_t>(points.shape(0));
    const auto dim = static_cast<std::size_t>(points.shape(1));
    std::vector<float> values(points.data(), points.data() + n * dim);
    std::vector<ClassId> l = labels.empty() ? std::vector<ClassId>(n, 0) : labels;
    return LabeledDataset(std::move(values), dim, std::move(l), numClasses);
}

py::array_t<float> toArray(std::span<const float> values, std::size_t dim) {
    const auto rows = dim == 0 ? 0 : values.size() / dim;
    py::array_t<float> out({rows, dim});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::list toPairs(std::span<const Neighbor> ns) {
    py::list out;
    for (const auto& n : ns) out.append(py::make_tuple(n.id, n.distance));
    return out;
}

VoteRule rule(const std::string& name) {
    const auto r = parseVoteRule(name);
    if (!r) throw ContractError("unknown voting rule '" + name + "'");
    return *r;
}

nlohmann::json toJson(const py::dict& d) {
    return nlohmann::json::parse(py::str(py::module_::import("json").attr("dumps")(d)).cast<std::string>());
}

AccuracyReport runReport(const py::dict& config, const std::optional<LabeledDataset>& data) {
    auto j = toJson(config);
    if (data && !j.contains("data")) j["data"] = {{"vectors", ""}};
    const auto c = ExperimentConfig::fromJson(j);
    py::gil_scoped_release release;
    return data ? runExperiment(c, *data) : runExperiment(c);
}

py::dict rowToDict(const ReportRow& r) {
    py::dict d;
    d["classifier"] = std::string(toString(r.classifier));
    d["rule"] = std::string(toString(r.rule));
    d["k"] = r.k ? py::cast(*r.k) : py::none();
    d["accuracy"] = r.accuracy;
    d["correct"] = r.correct;
    d["n_test"] = r.nTest;
    d["n_train"] = r.nTrain;
    d["dim"] = r.dimension;
    d["seed"] = r.seed;
    d["elapsed_ms"] = r.elapsedMs ? py::cast(*r.elapsedMs) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Half-space proximal (HSP) neighborhoods, exact kNN and small-world index classifiers.";

    auto base = py::register_exception<Error>(m, "HspcError", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<EmptyCandidatesError>(m, "EmptyCandidatesError", base.ptr());
    py::register_exception<EmptyDatasetError>(m, "EmptyDatasetError", base.ptr());
    py::register_exception<EmptyNeighborhoodError>(m, "EmptyNeighborhoodError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<DisconnectedError>(m, "DisconnectedError", base.ptr());
    py::register_exception<StaleIndexError>(m, "StaleIndexError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<LabeledDataset>(m, "Dataset")
        .def(py::init(&makeDataset), py::arg("points"), py::arg("labels") = std::vector<ClassId>{},
             py::arg("num_classes") = std::nullopt)
        .def("__len__", &LabeledDataset::size)
        .def_property_readonly("dimension", &LabeledDataset::dimension)
        .def_property_readonly("num_classes", &LabeledDataset::numClasses)
        .def_property_readonly("fingerprint", &LabeledDataset::fingerprint)
        .def_property_readonly("points", [](const LabeledDataset& d) { return toArray(d.values(), d.dimension()); })
        .def_property_readonly("labels",
                               [](const LabeledDataset& d) { return std::vector<ClassId>(d.labels().begin(), d.labels().end()); })
        .def("subset", [](const LabeledDataset& d, const std::vector<Id>& ids) { return d.subset(ids); })
        .def("__repr__", [](const LabeledDataset& d) {
            return "Dataset(n=" + std::to_string(d.size()) + ", dim=" + std::to_string(d.dimension()) +
                   ", classes=" + std::to_string(d.numClasses()) + ")";
        });

    m.def("distance", [](const FloatArray& a, const FloatArray& b) { return distance(asQuery(a), asQuery(b)); });

    m.def(
        "hsp_neighbors",
        [](const LabeledDataset& d, const FloatArray& q, std::optional<std::vector<Id>> candidates,
           std::optional<Id> exclude) {
            const auto query = asQuery(q);
            std::vector<Neighbor> nb;
            {
                py::gil_scoped_release release;
                nb = candidates ? hspNeighbors(d, query, *candidates) : hspNeighborsAll(d, query, exclude);
            }
            return toPairs(nb);
        },
        py::arg("dataset"), py::arg("query"), py::arg("candidates") = std::nullopt, py::arg("exclude") = std::nullopt,
        "HSP neighborhood as [(id, distance)] in selection order.");

    m.def(
        "build_hsp_graph",
        [](const LabeledDataset& d, unsigned threads) {
            HspGraph g;
            {
                py::gil_scoped_release release;
                g = buildHspGraph(d, threads);
            }
            std::vector<std::vector<Id>> out;
            for (const auto& nb : g.adjacency) {
                auto& ids = out.emplace_back();
                for (const auto& n : nb) ids.push_back(n.id);
            }
            return out;
        },
        py::arg("dataset"), py::arg("threads") = 0u, "Adjacency lists (neighbor ids in selection order).");

    m.def(
        "verify_hsp_graph",
        [](const LabeledDataset& d, std::size_t stretchLimit) {
            const auto g = buildHspGraph(d);
            const auto mst = verifyMstContainment(g, d);
            const auto deg = outDegreeStats(g);
            py::dict r;
            r["max_out_degree"] = deg.max;
            r["mean_out_degree"] = deg.mean;
            r["mst_contained"] = mst.contained;
            r["missing_mst_edges"] = mst.missing;
            r["max_stretch"] = d.size() <= stretchLimit ? py::cast(empiricalStretch(g, d).maxStretch) : py::none();
            return r;
        },
        py::arg("dataset"), py::arg("stretch_limit") = 2000);

    m.def(
        "knn_search",
        [](const LabeledDataset& d, const FloatArray& q, std::size_t k, std::optional<Id> exclude) {
            return toPairs(knnSearch(d, asQuery(q), k, exclude).entries);
        },
        py::arg("dataset"), py::arg("query"), py::arg("k"), py::arg("exclude") = std::nullopt);

    py::class_<IndexParams>(m, "IndexParams")
        .def(py::init([](std::size_t m_, std::size_t efc, std::size_t efs, std::uint64_t seed,
                         std::optional<double> levelScale) {
                 IndexParams p;
                 p.maxNeighbors = m_;
                 p.efConstruction = efc;
                 p.efSearch = efs;
                 p.seed = seed;
                 p.levelScale = levelScale;
                 p.validate();
                 return p;
             }),
             py::arg("m") = 16, py::arg("ef_construction") = 200, py::arg("ef_search") = 100, py::arg("seed") = 42,
             py::arg("level_scale") = std::nullopt)
        .def_readwrite("m", &IndexParams::maxNeighbors)
        .def_readwrite("ef_construction", &IndexParams::efConstruction)
        .def_readwrite("ef_search", &IndexParams::efSearch)
        .def_readwrite("seed", &IndexParams::seed)
        .def_readwrite("level_scale", &IndexParams::levelScale);

    py::class_<SmallWorldIndex>(m, "Index")
        .def_static(
            "build",
            [](const LabeledDataset& d, const IndexParams& p) {
                py::gil_scoped_release release;
                return SmallWorldIndex::build(d, p);
            },
            py::arg("dataset"), py::arg("params") = IndexParams{})
        .def(
            "search",
            [](const SmallWorldIndex& ix, const LabeledDataset& d, const FloatArray& q, std::size_t k,
               std::optional<std::size_t> ef, std::optional<Id> exclude) {
                return toPairs(ix.search(d, asQuery(q), k, ef.value_or(ix.params().efSearch), exclude).entries);
            },
            py::arg("dataset"), py::arg("query"), py::arg("k"), py::arg("ef_search") = std::nullopt,
            py::arg("exclude") = std::nullopt)
        .def(
            "recall",
            [](const SmallWorldIndex& ix, const LabeledDataset& d, const FloatArray& queries, std::size_t k,
               std::optional<std::size_t> ef) {
                if (queries.ndim() != 2) throw DimensionError("queries must be a 2-d array");
                const std::span<const float> flat(queries.data(), static_cast<std::size_t>(queries.size()));
                py::gil_scoped_release release;
                return recallAtK(ix, d, flat, k, ef.value_or(ix.params().efSearch));
            },
            py::arg("dataset"), py::arg("queries"), py::arg("k"), py::arg("ef_search") = std::nullopt)
        .def("__len__", &SmallWorldIndex::size)
        .def_property_readonly("params", &SmallWorldIndex::params)
        .def_property_readonly("level_count", &SmallWorldIndex::levelCount)
        .def_property_readonly("entry_point", &SmallWorldIndex::entryPoint)
        .def_property_readonly("dataset_fingerprint", &SmallWorldIndex::datasetFingerprint)
        .def("level_zero_connected", &SmallWorldIndex::levelZeroConnected)
        .def("neighbors",
             [](const SmallWorldIndex& ix, Id id, std::size_t level) {
                 if (id >= ix.size() || level > ix.nodeLevel(id)) throw ContractError("no such node or level");
                 const auto s = ix.neighbors(id, level);
                 return std::vector<Id>(s.begin(), s.end());
             })
        .def("to_bytes",
             [](const SmallWorldIndex& ix) {
                 const auto b = ix.toBytes();
                 return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
             })
        .def_static("from_bytes",
                    [](const py::bytes& b) {
                        const std::string s = b;
                        return SmallWorldIndex::fromBytes(
                            {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
                    })
        .def("save", &SmallWorldIndex::save)
        .def_static("load", &SmallWorldIndex::load);

    py::class_<Prediction>(m, "Prediction")
        .def_readonly("label", &Prediction::label)
        .def_readonly("votes", &Prediction::votes)
        .def_property_readonly("neighborhood", [](const Prediction& p) { return toPairs(p.neighborhood); })
        .def("__repr__", [](const Prediction& p) {
            return "Prediction(label=" + std::to_string(p.label) + ", neighbors=" +
                   std::to_string(p.neighborhood.size()) + ")";
        });

    m.def(
        "vote_weights",
        [](const std::vector<double>& distances, const std::string& r) { return voteWeights(distances, rule(r)); },
        py::arg("distances"), py::arg("rule"));

    m.def(
        "classify",
        [](const LabeledDataset& d, const FloatArray& q, const std::string& classifier, std::optional<std::size_t> k,
           const std::string& r, const SmallWorldIndex* index, std::optional<std::size_t> ef,
           std::optional<Id> exclude) {
            const auto kind = parseClassifierKind(classifier);
            if (!kind) throw ContractError("unknown classifier '" + classifier + "'");
            const auto query = asQuery(q);
            const auto vr = rule(r);
            if (takesK(*kind) && !k) throw ContractError(classifier + " needs k");
            if (!takesK(*kind) && k) throw ContractError("hsp takes no k");
            if (isProbabilistic(*kind) && index == nullptr) throw ContractError(classifier + " needs an index");
            switch (*kind) {
                case ClassifierKind::Knn: return classifyKnn(d, query, *k, vr, exclude);
                case ClassifierKind::Hsp: return classifyHsp(d, query, vr, exclude);
                case ClassifierKind::AsymptoticHsp: return classifyAsymptoticHsp(d, query, *k, vr, exclude);
                case ClassifierKind::ProbabilisticKnn:
                    return classifyProbabilisticKnn(*index, d, query, *k, vr, ef, exclude);
                case ClassifierKind::ProbabilisticAsymptoticHsp:
                    return classifyProbabilisticAsymptoticHsp(*index, d, query, *k, vr, ef, exclude);
            }
            throw ContractError("unreachable classifier kind");
        },
        py::arg("dataset"), py::arg("query"), py::arg("classifier"), py::arg("k") = std::nullopt,
        py::arg("rule") = "majority", py::arg("index") = nullptr, py::arg("ef_search") = std::nullopt,
        py::arg("exclude") = std::nullopt,
        "classifier: knn, pknn, hsp, ahsp or pahsp; rule: majority, dudani or invdist.");

    m.def(
        "generate_synthetic",
        [](const py::dict& spec) {
            return generateSynthetic(GeneratorSpec::fromJson(toJson(spec)));
        },
        py::arg("spec"), "Keys: kind, classes, points_per_class, dimension, separation, noise, seed.");

    m.def("load_fvecs", [](const std::filesystem::path& p) {
        const auto t = loadFvecs(p);
        return toArray(t.values, t.dimension);
    });
    m.def("write_fvecs", [](const std::filesystem::path& p, const FloatArray& a) {
        if (a.ndim() != 2) throw DimensionError("points must be a 2-d array");
        VectorTable t;
        t.dimension = static_cast<std::size_t>(a.shape(1));
        t.values.assign(a.data(), a.data() + a.size());
        writeFvecs(p, t);
    });
    m.def("load_dataset", &loadDataset, py::arg("vectors"), py::arg("labels") = std::filesystem::path{});

    m.def(
        "run_experiment",
        [](const py::dict& config, const std::optional<LabeledDataset>& data) {
            const auto report = runReport(config, data);
            py::list rows;
            for (const auto& r : report.rows) rows.append(rowToDict(r));
            return rows;
        },
        py::arg("config"), py::arg("data") = std::nullopt,
        "Runs a k sweep. `config` uses the bench JSON keys; `data` replaces the config's data section.");

    m.def(
        "experiment_csv",
        [](const py::dict& config, const std::optional<LabeledDataset>& data) {
            std::ostringstream out;
            writeReportCsv(runReport(config, data), out);
            return out.str();
        },
        py::arg("config"), py::arg("data") = std::nullopt);
}
