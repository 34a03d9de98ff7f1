#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "hspc/metric.hpp"

namespace hspc {

enum class GeneratorKind { GaussianMixture, TwoMoons };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::GaussianMixture;
    std::size_t numClasses = 2;
    std::size_t pointsPerClass = 100;
    std::size_t dimension = 2;
    double classSeparation = 1.0;
    double noise = 0.1;  // TwoMoons only: std-dev of the Gaussian jitter
    std::uint64_t seed = 1;

    void validate() const;

    /// Keys: kind ("gaussian" | "moons"), classes, points_per_class,
    /// dimension, separation, noise, seed. Missing keys keep their defaults.
    static GeneratorSpec fromJson(const nlohmann::json& j);
    nlohmann::json toJson() const;
};

/// Seeded synthetic labeled data, stored class by class.
///
/// GaussianMixture: class c is N(mean_c, I) with means pairwise
/// `classSeparation` apart (scaled basis vectors when numClasses <= dimension,
/// otherwise scaled random unit directions).
/// TwoMoons: two interleaved half circles in the first two coordinates,
/// pulled apart vertically by `classSeparation`, with isotropic `noise` on
/// every coordinate. Requires numClasses == 2 and dimension >= 2.
LabeledDataset generateSynthetic(const GeneratorSpec& spec);

}  // namespace hspc
