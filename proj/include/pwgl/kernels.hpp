#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "error.hpp"

namespace pwgl {

enum class KernelKind { indicator, gaussian, custom };

/// Radial kernel profile eta(t), t = |x - y| / eps.
///
/// The indicator is 1 on [0, 1]. The Gaussian is exp(-t^2 / (2 s^2)) with
/// s = sigma / eps, hard-zeroed beyond `support` (2 by default). With
/// `normalized` set, the Gaussian is multiplied by exp(1 / (2 s^2)) so that
/// eta(1) = 1, putting it in the class eta >= 1 on [0, 1].
struct KernelProfile {
    KernelKind kind = KernelKind::gaussian;
    double sigma_factor = 0.5;
    double support = 2.0;
    bool normalized = false;
    std::function<double(double)> custom; // used when kind == custom; must vanish beyond `support`

    static KernelProfile indicator() {
        KernelProfile p;
        p.kind = KernelKind::indicator;
        p.support = 1.0;
        return p;
    }
    static KernelProfile gaussian(double sigma_factor = 0.5, double support = 2.0, bool normalized = false) {
        KernelProfile p;
        p.kind = KernelKind::gaussian;
        p.sigma_factor = sigma_factor;
        p.support = support;
        p.normalized = normalized;
        return p;
    }

    /// Radius beyond which eta vanishes, in rescaled units.
    double support_radius() const noexcept { return kind == KernelKind::indicator ? 1.0 : support; }

    /// Points where eta may jump (used to split quadratures).
    double breakpoint() const noexcept { return support_radius(); }

    void validate() const {
        if (kind == KernelKind::gaussian && !(sigma_factor > 0.0))
            throw ConfigError("gaussian sigma_factor must be positive");
        if (kind != KernelKind::indicator && !(support > 0.0 && support <= 2.0))
            throw ConfigError("kernel support must lie in (0, 2]");
        if (kind == KernelKind::custom && !custom) throw ConfigError("custom kernel without a profile");
    }

    std::string name() const {
        switch (kind) {
        case KernelKind::indicator: return "indicator";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::custom: return "custom";
        }
        return "?";
    }
};

inline double eta(const KernelProfile& profile, double t) {
    if (t < 0.0 || std::isnan(t)) throw DataError("kernel profile evaluated at negative distance");
    switch (profile.kind) {
    case KernelKind::indicator: return t <= 1.0 ? 1.0 : 0.0;
    case KernelKind::gaussian: {
        if (t > profile.support) return 0.0;
        const double s2 = profile.sigma_factor * profile.sigma_factor;
        const double e = profile.normalized ? (1.0 - t * t) : -t * t;
        return std::exp(e / (2.0 * s2));
    }
    case KernelKind::custom: return t > profile.support ? 0.0 : profile.custom(t);
    }
    return 0.0;
}

/// eps^{-d} eta(|displacement| / eps).
inline double eta_eps(const KernelProfile& profile, std::span<const double> displacement, double eps) {
    double s = 0.0;
    for (double v : displacement) s += v * v;
    return std::pow(eps, -static_cast<double>(displacement.size())) * eta(profile, std::sqrt(s) / eps);
}

/// Same as eta_eps, from a precomputed distance.
inline double eta_eps_at(const KernelProfile& profile, double dist, std::size_t dim, double eps) {
    return std::pow(eps, -static_cast<double>(dim)) * eta(profile, dist / eps);
}

// ---------------------------------------------------------------------------
// Label weights

struct TruncatedVariant {};
struct TwoRegionVariant {
    double radius = 0.0;
};

/// Parameters of the singular label weight gamma and its truncation gamma_zeta.
struct WeightProfile {
    double alpha = 2.0;
    double r0 = 1.0;
    double zeta = std::numeric_limits<double>::infinity();
    std::variant<TruncatedVariant, TwoRegionVariant> variant = TruncatedVariant{};
    bool global_formula = true;
    /// Minimum label separation R; only consulted when global_formula is false.
    double label_separation = std::numeric_limits<double>::infinity();
    /// Replaces 1 + (r0/dist)^alpha when set (validation oracles use a pure power law).
    std::function<double(double)> custom_gamma;

    bool two_region() const noexcept { return std::holds_alternative<TwoRegionVariant>(variant); }
    double region_radius() const noexcept { return two_region() ? std::get<TwoRegionVariant>(variant).radius : 0.0; }

    void validate() const {
        if (!(alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
        if (!(r0 > 0.0)) throw ConfigError("r0 must be positive");
        if (!(zeta > 1.0)) throw ConfigError("zeta must exceed 1");
        if (std::isinf(zeta) && !(two_region() && region_radius() == 0.0))
            throw ConfigError("zeta = inf is only supported with the two_region variant at radius 0");
        if (two_region() && !(region_radius() >= 0.0)) throw ConfigError("two_region radius must be nonnegative");
    }
};

/// gamma(dist) = 1 + (r0 / dist)^alpha, +inf at dist = 0 (alpha > 0).
inline double gamma(const WeightProfile& w, double dist) {
    if (dist < 0.0 || std::isnan(dist)) throw DataError("gamma evaluated at negative distance");
    if (w.custom_gamma) return w.custom_gamma(dist);
    if (w.alpha == 0.0) return 2.0;
    const double formula = dist == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 + std::pow(w.r0 / dist, w.alpha);
    if (w.global_formula) return formula;
    return dist <= w.label_separation / 4.0 ? std::max(1.0, formula) : 1.0;
}

/// Truncated weight: min(gamma, zeta), or zeta inside radius r for the two-region variant.
inline double gamma_zeta(const WeightProfile& w, double dist) {
    if (!(w.zeta > 1.0)) throw ConfigError("zeta must exceed 1");
    if (w.two_region()) return dist <= w.region_radius() ? w.zeta : gamma(w, dist);
    return std::min(gamma(w, dist), w.zeta);
}

/// Distance below which the truncated weight saturates at zeta: r0 (zeta - 1)^{-1/alpha}.
inline double crossover_radius(const WeightProfile& w) {
    if (w.alpha == 0.0) return 0.0;
    return w.r0 * std::pow(w.zeta - 1.0, -1.0 / w.alpha);
}

// ---------------------------------------------------------------------------
// Moments

struct KernelMoments {
    double sigma_eta = 0.0; // int eta(|z|) z_1^2 dz
    double theta_eta = 0.0; // (1/d) int eta(|z|) |z|^2 dz
};

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double unit_sphere_area(std::size_t d) {
    const double h = static_cast<double>(d) / 2.0;
    return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

namespace detail {

/// Composite Simpson on [a, b] with an even number of panels. Endpoints are
/// evaluated just inside the interval so one-sided limits are used at jumps.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    if (panels % 2) ++panels;
    if (b <= a) return 0.0;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(std::nextafter(a, b)) + f(std::nextafter(b, a));
    for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

/// int_0^2 eta(r) r^p dr, split at the kernel's breakpoint.
inline double radial_moment(const KernelProfile& profile, double power, std::size_t panels) {
    auto f = [&](double r) { return eta(profile, r) * std::pow(r, power); };
    const double b = profile.breakpoint();
    return simpson(f, 0.0, b, panels) + (b < 2.0 ? simpson(f, b, 2.0, panels) : 0.0);
}

} // namespace detail

/// Second moments of eta in dimension d.
///
/// theta uses the closed-form sphere area; sigma integrates the angular factor
/// int_{S^{d-1}} w_1^2 dw numerically in hyperspherical coordinates, so the two
/// values agree only if the radial-symmetry identity holds.
inline KernelMoments kernel_moments(const KernelProfile& profile, std::size_t d, std::size_t panels = 20000) {
    if (d == 0) throw ConfigError("dimension must be at least 1");
    const double radial = detail::radial_moment(profile, static_cast<double>(d) + 1.0, panels);
    KernelMoments m;
    m.theta_eta = unit_sphere_area(d) * radial / static_cast<double>(d);
    double angular = 2.0; // d = 1: the two points {-1, +1}
    if (d > 1) {
        // int_{S^{d-1}} w_1^2 = |S^{d-2}| int_0^pi cos^2(t) sin^{d-2}(t) dt
        const double dd = static_cast<double>(d);
        auto g = [dd](double t) { return std::cos(t) * std::cos(t) * std::pow(std::sin(t), dd - 2.0); };
        angular = unit_sphere_area(d - 1) * detail::simpson(g, 0.0, std::numbers::pi, panels);
    }
    m.sigma_eta = angular * radial;
    return m;
}

} // namespace pwgl
