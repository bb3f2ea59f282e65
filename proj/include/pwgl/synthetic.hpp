#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace pwgl {

struct LabelSpec {
    std::vector<double> coords;
    double value = 0.0;
    int class_id = -1;
};

enum class Generator { uniform_box, strip_density, uniform_ball };

/// Declarative description of a synthetic sample.
///
/// uniform_box: uniform on [0,1]^d. strip_density: on [0,1]^d with density
/// proportional to 1 outside the slab strip_lo <= x_1 <= strip_hi and to
/// density_ratio inside it. uniform_ball: uniform on the unit ball.
struct SyntheticSpec {
    Generator generator = Generator::uniform_box;
    std::size_t dim = 2;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double strip_lo = 0.45;
    double strip_hi = 0.55;
    double density_ratio = 0.6;
    std::vector<LabelSpec> labels;

    /// Probability mass of the strip under the normalized density.
    double strip_mass() const {
        const double w = strip_hi - strip_lo;
        return w * density_ratio / ((1.0 - w) + w * density_ratio);
    }
};

inline SyntheticSpec synthetic_spec(Generator generator, std::size_t dim, std::size_t n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.generator = generator;
    spec.dim = dim;
    spec.n = n;
    spec.seed = seed;
    return spec;
}

inline void validate(const SyntheticSpec& spec) {
    if (spec.n < 1) throw ConfigError("sample size must be at least 1");
    if (spec.dim < 1) throw ConfigError("dimension must be at least 1");
    if (spec.generator == Generator::strip_density) {
        if (!(spec.density_ratio > 0.0 && spec.density_ratio <= 1.0))
            throw ConfigError("strip density ratio must lie in (0, 1]");
        if (!(0.0 <= spec.strip_lo && spec.strip_lo < spec.strip_hi && spec.strip_hi <= 1.0))
            throw ConfigError("strip bounds must satisfy 0 <= lo < hi <= 1");
    }
    for (const auto& l : spec.labels)
        if (l.coords.size() != spec.dim) throw ConfigError("label coordinates have the wrong dimension");
}

/// n i.i.d. draws followed by the label locations as extra nodes.
inline PointCloud generate(const SyntheticSpec& spec) {
    validate(spec);
    CounterRng rng(spec.seed);
    PointCloud cloud(spec.dim);
    std::vector<double> x(spec.dim);
    for (std::size_t i = 0; i < spec.n; ++i) {
        switch (spec.generator) {
        case Generator::uniform_box:
            for (auto& v : x) v = rng.uniform();
            break;
        case Generator::strip_density:
            // rejection: accept a uniform proposal with probability density / max density
            for (;;) {
                for (auto& v : x) v = rng.uniform();
                const bool in_strip = x[0] >= spec.strip_lo && x[0] <= spec.strip_hi;
                if (!in_strip || rng.uniform() < spec.density_ratio) break;
            }
            break;
        case Generator::uniform_ball:
            for (;;) {
                double r2 = 0.0;
                for (auto& v : x) {
                    v = rng.uniform(-1.0, 1.0);
                    r2 += v * v;
                }
                if (r2 <= 1.0) break;
            }
            break;
        }
        cloud.add_point(x);
    }
    for (const auto& l : spec.labels) cloud.append_labeled(l.coords, l.value, l.class_id);
    return cloud;
}

/// The two labels g(0, 1/2, ..., 1/2) = 0 and g(1, 1/2, ..., 1/2) = 1.
inline std::vector<LabelSpec> two_point_box_labels(std::size_t dim) {
    LabelSpec a{std::vector<double>(dim, 0.5), 0.0, 0};
    LabelSpec b{std::vector<double>(dim, 0.5), 1.0, 1};
    a.coords[0] = 0.0;
    b.coords[0] = 1.0;
    return {a, b};
}

} // namespace pwgl
