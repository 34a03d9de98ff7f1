#include "hspc/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "hspc/error.hpp"

namespace hspc {

void GeneratorSpec::validate() const {
    if (numClasses == 0 || pointsPerClass == 0 || dimension == 0) {
        throw ContractError("generator counts must be positive");
    }
    if (!(classSeparation >= 0.0) || !std::isfinite(classSeparation)) {
        throw ContractError("class separation must be a finite value >= 0");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ContractError("noise must be a finite value >= 0");
    if (kind == GeneratorKind::TwoMoons && (numClasses != 2 || dimension < 2)) {
        throw ContractError("two-moons data needs exactly 2 classes and dimension >= 2");
    }
}

GeneratorSpec GeneratorSpec::fromJson(const nlohmann::json& j) {
    GeneratorSpec s;
    try {
        const auto kind = j.value("kind", std::string("gaussian"));
        if (kind == "gaussian") {
            s.kind = GeneratorKind::GaussianMixture;
        } else if (kind == "moons") {
            s.kind = GeneratorKind::TwoMoons;
        } else {
            throw FormatError(fmt::format("unknown generator kind '{}'", kind));
        }
        s.numClasses = j.value("classes", s.numClasses);
        s.pointsPerClass = j.value("points_per_class", s.pointsPerClass);
        s.dimension = j.value("dimension", s.dimension);
        s.classSeparation = j.value("separation", s.classSeparation);
        s.noise = j.value("noise", s.noise);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("bad generator spec: {}", e.what()));
    }
    return s;
}

nlohmann::json GeneratorSpec::toJson() const {
    return {{"kind", kind == GeneratorKind::GaussianMixture ? "gaussian" : "moons"},
            {"classes", numClasses},
            {"points_per_class", pointsPerClass},
            {"dimension", dimension},
            {"separation", classSeparation},
            {"noise", noise},
            {"seed", seed}};
}

LabeledDataset generateSynthetic(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t n = spec.numClasses * spec.pointsPerClass;
    std::vector<float> values;
    values.reserve(n * spec.dimension);
    std::vector<ClassId> labels;
    labels.reserve(n);

    if (spec.kind == GeneratorKind::GaussianMixture) {
        // Means at separation/sqrt(2) along distinct directions are pairwise `separation` apart.
        const double radius = spec.classSeparation / std::numbers::sqrt2;
        std::vector<std::vector<double>> means(spec.numClasses, std::vector<double>(spec.dimension, 0.0));
        for (std::size_t c = 0; c < spec.numClasses; ++c) {
            if (spec.numClasses <= spec.dimension) {
                means[c][c] = radius;
                continue;
            }
            double norm = 0.0;
            for (auto& m : means[c]) {
                m = gauss(rng);
                norm += m * m;
            }
            norm = std::sqrt(norm);
            for (auto& m : means[c]) m *= radius / norm;
        }
        for (std::size_t c = 0; c < spec.numClasses; ++c) {
            for (std::size_t p = 0; p < spec.pointsPerClass; ++p) {
                for (std::size_t d = 0; d < spec.dimension; ++d) {
                    values.push_back(static_cast<float>(means[c][d] + gauss(rng)));
                }
                labels.push_back(static_cast<ClassId>(c));
            }
        }
    } else {
        std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t p = 0; p < spec.pointsPerClass; ++p) {
                const double t = angle(rng);
                double x = std::cos(t);
                double y = std::sin(t);
                if (c == 1) {
                    x = 1.0 - x;
                    y = 0.5 - y - spec.classSeparation;
                }
                values.push_back(static_cast<float>(x + spec.noise * gauss(rng)));
                values.push_back(static_cast<float>(y + spec.noise * gauss(rng)));
                for (std::size_t d = 2; d < spec.dimension; ++d) {
                    values.push_back(static_cast<float>(spec.noise * gauss(rng)));
                }
                labels.push_back(static_cast<ClassId>(c));
            }
        }
    }
    return LabeledDataset(std::move(values), spec.dimension, std::move(labels), spec.numClasses);
}

}  // namespace hspc
