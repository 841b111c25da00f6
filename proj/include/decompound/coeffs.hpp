#pragma once

#include "decompound/coefficients.hpp"
#include "decompound/simulate.hpp"
#include "decompound/spaces.hpp"
#include "decompound/steplaws.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace decompound {

enum class EstimatorVariant {
    /// log of the symmetrized transform, truncated below delta/m.
    RealLog,
    /// log of the symmetrized transform, truncated only where it is <= 0.
    RealLogUntruncated,
    /// Principal complex log of the raw transform; needs Re > 0 and |nu| >= delta/m.
    ComplexLog,
    /// RealLog plus the known heat-noise correction tau^2 kappa / (2 t Lambda).
    NoiseCorrected,
};

std::string to_string(EstimatorVariant v);
EstimatorVariant parse_variant(std::string_view text);

struct EstimatorConfig {
    EstimatorVariant variant = EstimatorVariant::RealLog;
    double delta = 1.0;
    double intensity = 1.0;
    double time = 1.0;
    /// Noise scale assumed by NoiseCorrected.
    double noise_tau = 0.0;

    void validate() const;
    /// Non-fatal configuration remarks (e.g. principal-branch risk for ComplexLog).
    [[nodiscard]] std::vector<std::string> warnings() const;
    /// Whether the variant consumes the symmetrized (real) transform.
    [[nodiscard]] bool wants_symmetrized() const noexcept;
};

/// nu_m(pi) for a list of indices, with the mean squared modulus for standard errors.
struct EmpiricalTransform {
    std::vector<SpectralIndex> indices;
    std::vector<std::complex<double>> values;
    /// Mean of |phi|^2 (or of Re(phi)^2 when symmetrized).
    std::vector<double> mean_square;
    std::size_t m = 0;
    bool symmetrized = false;

    /// Throws DomainError if the label is absent.
    [[nodiscard]] std::size_t position(const std::vector<int>& label) const;
    /// Monte Carlo standard error of values[i].
    [[nodiscard]] double standard_error(std::size_t i) const;
};

/**
 * Averages phi_pi over the observations. symmetrize = true returns the real
 * part average (1/2m) sum(phi + conj(phi)) and is only offered for
 * inverse-invariant laws. Deterministic for any thread count.
 */
EmpiricalTransform empirical_transform(const ObservationSet& obs, std::span<const SpectralIndex> indices,
                                       bool symmetrize, unsigned threads = 0);

struct CoefficientEstimate {
    std::complex<double> value;
    bool truncated = false;
};

/// Applies the variant's inversion of nu = exp(t Lambda (c - 1)) with its truncation rule.
CoefficientEstimate estimate_coefficient(const EmpiricalTransform& nu, const SpectralIndex& index,
                                         const EstimatorConfig& cfg);

/// Same rule applied to a single transform value from m observations.
CoefficientEstimate estimate_from_transform(std::complex<double> nu, std::size_t m, bool symmetrized,
                                            const SpectralIndex& index, const EstimatorConfig& cfg);

/// One-sided Hoeffding bound exp(-gap^2 m / 4) for means of [-1, 1] variables.
double deviation_bound(double gap, std::size_t m);

struct MseResult {
    double mse = 0.0;
    double standard_error = 0.0;
    std::vector<double> squared_errors;
};

/// Jackknife standard error of the mean of `values`.
double jackknife_stderr(std::span<const double> values);

/**
 * Monte Carlo E|c_m(pi) - E[phi_pi(X)]|^2 over independent replicate
 * observation sets drawn from `process` (replicate seeds derived from
 * process.seed, m and the replicate number).
 */
MseResult coefficient_mse(const ProcessConfig& process, const EstimatorConfig& cfg, const SpectralIndex& index,
                          std::size_t m, std::size_t replicates, unsigned threads = 0);

/// Noise-free convenience form with Lambda and t taken from cfg.
MseResult coefficient_mse(const StepLaw& law, const EstimatorConfig& cfg, const SpectralIndex& index, std::size_t m,
                          std::size_t replicates, std::uint64_t seed, unsigned threads = 0);

}  // namespace decompound
