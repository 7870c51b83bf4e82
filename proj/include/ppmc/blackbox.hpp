#pragma once

#include <cmath>
#include <span>
#include <string>

namespace ppmc {

enum class InputLaw { standard_gaussian, uniform_cube };

/// Gaussian spike of mass 100 on a Gaussian plateau, evaluated on the
/// centered unit cube.
struct SpikePlateau {
    int dim = 20;
    double spike_width = 0.01;
    double plateau_width = 0.1;
    double spike_mass = 100.0;

    double operator()(std::span<const double> u) const {
        double ss = 0.0;
        for (double v : u) ss += v * v;
        const double d = static_cast<double>(dim);
        const double log_spike = std::log(spike_mass) -
                                 0.5 * d * std::log(6.283185307179586 * spike_width * spike_width) -
                                 ss / (2.0 * spike_width * spike_width);
        const double log_plateau = -0.5 * d * std::log(6.283185307179586 * plateau_width * plateau_width) -
                                   ss / (2.0 * plateau_width * plateau_width);
        return std::exp(log_spike) + std::exp(log_plateau);
    }

    /// Mean over the cube: a product of one-dimensional error-function
    /// integrals per mixture component.
    double reference_mean() const {
        const double inv_sqrt2 = 0.7071067811865475244;
        const double s = std::erf(0.5 / spike_width * inv_sqrt2);
        const double p = std::erf(0.5 / plateau_width * inv_sqrt2);
        return spike_mass * std::pow(s, dim) + std::pow(p, dim);
    }

    std::string spec() const { return "spike"; }
};

/// Heavy-tailed variant: narrower spike divided by |u|^(0.8 d),
/// giving a tail index of 1.25.
struct HeavyTailSpike {
    SpikePlateau base{20, 0.001, 0.1, 100.0};

    double operator()(std::span<const double> u) const {
        double ss = 0.0;
        for (double v : u) ss += v * v;
        return base(u) / std::pow(ss, 0.4 * static_cast<double>(base.dim));
    }

    int dim() const { return base.dim; }
    std::string spec() const { return "heavytail"; }
};

/// A scalar variable realised as X = g(U) for a deterministic integrand g
/// over a simple input law.
template <class G>
struct BlackBoxTarget {
    int input_dimension;
    InputLaw input_law;
    G integrand;
};

inline BlackBoxTarget<SpikePlateau> make_spike_target() {
    return {20, InputLaw::uniform_cube, SpikePlateau{}};
}

inline BlackBoxTarget<HeavyTailSpike> make_heavytail_target() {
    return {20, InputLaw::uniform_cube, HeavyTailSpike{}};
}

} // namespace ppmc
