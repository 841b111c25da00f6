#pragma once

#include "decompound/coefficients.hpp"
#include "decompound/rng.hpp"
#include "decompound/spaces.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace decompound {

enum class LawKind { HeatZonal, WrappedNormal, UniformCap };

namespace detail {
struct RadialTable;
}

/// One step of the walk: geodesic length and unit direction.
struct StepDraw {
    double distance = 0.0;
    /// Unit tangent vector at the base point the draw was made for.
    std::vector<double> direction;
};

/**
 * K-invariant step distribution with known spherical coefficients.
 *
 *  - HeatZonal(tau0): coefficients exp(-kappa * tau0); on tori this is a
 *    wrapped Gaussian with per-axis variance 2 tau0.
 *  - WrappedNormal(sigma, mean): tori only; each axis is mean + sigma * N(0,1)
 *    wrapped to [0, 2pi). Not inverse invariant when mean != 0.
 *  - UniformCap(rho): spheres only; uniform on the geodesic ball of radius rho.
 *
 * Immutable; safe to share between threads. Sampling needs a caller-owned Rng.
 */
class StepLaw {
public:
    static StepLaw heat(const Space& space, double tau0);
    static StepLaw wrapped_normal(const Space& space, double sigma, double mean_angle = 0.0);
    static StepLaw uniform_cap(const Space& space, double rho);

    [[nodiscard]] LawKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Space& space() const noexcept { return space_; }
    [[nodiscard]] double tau0() const noexcept { return a_; }
    [[nodiscard]] double sigma() const noexcept { return a_; }
    [[nodiscard]] double mean_angle() const noexcept { return b_; }
    [[nodiscard]] double rho() const noexcept { return a_; }

    /// x and x^{-1} equal in law; all coefficients are then real.
    [[nodiscard]] bool inverse_invariant() const noexcept;

    /// Text form accepted by parse_law, e.g. "heat:tau=0.5".
    [[nodiscard]] std::string spec() const;

    /// Density with respect to the normalized invariant measure.
    [[nodiscard]] double density(std::span<const double> coords) const;

    /// Zonal density as a function of the distance to p_0 (spheres only).
    [[nodiscard]] double radial_density(double theta) const;

    /// P(distance to p_0 <= theta) (spheres only); evaluated without the sampling table.
    [[nodiscard]] double radial_cdf(double theta) const;

    /// Draws the geodesic length of a step (spheres only).
    [[nodiscard]] double sample_distance(Rng& rng) const;

    /// Draws a step leaving `base`; on spheres the direction is uniform in the tangent space at base.
    [[nodiscard]] StepDraw sample_at(std::span<const double> base, Rng& rng) const;

    /// Truncation degree of the heat series on spheres (0 otherwise).
    [[nodiscard]] int series_degree() const noexcept { return static_cast<int>(series_.size()) - 1; }

private:
    StepLaw(LawKind kind, Space space, double a, double b);

    LawKind kind_;
    Space space_;
    double a_;
    double b_;
    // Heat on spheres: d_l exp(-kappa_l tau0), l = 0..L.
    std::vector<double> series_;
    std::shared_ptr<const detail::RadialTable> table_;
};

/// Parses "heat:tau=0.5", "wn:sigma=0.7,mean=0", "cap:rho=1.0". Throws ConfigError.
StepLaw parse_law(const Space& space, std::string_view text);

/// <f_X, phi_pi> = integral of f_X * conj(phi_pi) d(lambda_M).
CoefficientVector true_coefficients(const StepLaw& law, std::span<const SpectralIndex> indices);

/// E[phi_pi(X)]: the step-law transform entering the Levy–Khinchin exponent. Equals
/// conj(<f_X, phi_pi>); identical to true_coefficients for inverse-invariant laws.
CoefficientVector step_transform(const StepLaw& law, std::span<const SpectralIndex> indices);

/**
 * Quadrature oracle for true_coefficients: Gauss–Legendre in the polar angle
 * against sin^{d-1} on spheres, the trapezoidal rule on tori. Requires
 * nodes >= 2 * (max degree) + 8.
 */
CoefficientVector quadrature_coefficients(const StepLaw& law, std::span<const SpectralIndex> indices,
                                          int nodes);

/// One step drawn at p_0.
StepDraw sample_step(const StepLaw& law, Rng& rng);

/// Uniform unit tangent vector at `base` (Gaussian projection; any unit vector on tori).
std::vector<double> random_tangent(const Space& space, std::span<const double> base, Rng& rng);

/// Integral of sin^n over [0, theta].
double sine_power_integral(int n, double theta);

}  // namespace decompound
