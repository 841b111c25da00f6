#pragma once

#include "decompound/coefficients.hpp"
#include "decompound/coeffs.hpp"
#include "decompound/simulate.hpp"
#include "decompound/spaces.hpp"
#include "decompound/steplaws.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace decompound {

/// Sobolev class H^s(M), optionally with a radius bound Q.
struct SobolevSpec {
    double s = 2.0;
    std::optional<double> radius;

    void validate() const;
};

/**
 * Spectral-cutoff estimate sum_{kappa <= cutoff} d_pi c(pi) phi_pi.
 *
 * `coeffs` follow the <f, phi> = int f conj(phi) convention, so for the
 * complex estimator they are the conjugates of the raw log-inversion output.
 */
struct DensityEstimate {
    CoefficientVector coeffs;
    Space space;
    std::size_t m = 0;
    double cutoff = 0.0;
    double scale = 1.0;
    double s = 2.0;
    EstimatorConfig estimator;
};

/// scale * m^{2 / (2s + d)}.
double smoothing_cutoff(std::size_t m, double s, const Space& space, double scale);

/// Full pipeline: cutoff, index set, empirical transform, per-index estimates.
DensityEstimate reconstruct(const ObservationSet& obs, const EstimatorConfig& cfg, const SobolevSpec& spec,
                            double scale, unsigned threads = 0);

/// Estimates from a precomputed transform; every transform index with casimir <= cutoff is used.
DensityEstimate reconstruct_from_transform(const EmpiricalTransform& nu, const Space& space,
                                           const EstimatorConfig& cfg, double s, double scale, double cutoff);

struct L2Error {
    double variance_term = 0.0;
    double bias_term = 0.0;
    double total = 0.0;
};

/**
 * Parseval split of ||f_est - f||^2 into the in-band variance term and the
 * out-of-band bias term. `truth` must contain every estimate index (throws
 * NumericalError otherwise); indices absent from `truth` count as zero.
 */
L2Error l2_error(const DensityEstimate& est, const CoefficientVector& truth);

/// Ground-truth coefficients with an estimate of the discarded tail sum d_pi |c|^2.
struct TruthSpectrum {
    CoefficientVector coeffs;
    double tail_bound = 0.0;
};

/**
 * True coefficients over spectrum(space, K) with K >= cover_casimir chosen so
 * the omitted coefficients satisfy |c|^2 < e^-80 (heat, wrapped normal). Uniform
 * caps use K = 4 * cover_casimir and a monotone ~1/l tail estimate.
 */
TruthSpectrum truth_spectrum(const StepLaw& law, double cover_casimir);

/// sqrt(sum d|c|^2 + sum d kappa^s |c|^2); s = 0 gives the L^2 norm.
/// Throws NumericalError when the outer half of the spectrum still contributes more than 1e-10.
double sobolev_norm(const CoefficientVector& coeffs, const Space& space, double s);

struct PointValue {
    double value = 0.0;
    double imag_residual = 0.0;
};

/// Synthesis at a point: real part and the discarded imaginary part.
PointValue evaluate_full(const DensityEstimate& est, const Point& point);

/// Real part of the synthesis; throws NumericalError if the imaginary residual exceeds 1e-9.
double evaluate(const DensityEstimate& est, const Point& point);

/// Synthesis of an arbitrary coefficient vector (complex result).
std::complex<double> synthesize(const CoefficientVector& coeffs, const Space& space, std::span<const double> coords);

struct ProfileSample {
    double coordinate = 0.0;
    double value = 0.0;
};

/**
 * Density along the polar angle (spheres) or the angle (circle) on `points`
 * equally spaced nodes, for plotting. With clip = true negative values are
 * set to 0 and the profile is renormalized to integrate to 1; never use the
 * clipped values in error metrics.
 */
std::vector<ProfileSample> density_profile(const DensityEstimate& est, int points, bool clip);

/// CoefficientVector CSV for the estimate.
void write_estimate_csv(std::ostream& out, const DensityEstimate& est);
/// JSON sidecar with space, m, s, scale, cutoff and the estimator settings.
void write_estimate_sidecar(std::ostream& out, const DensityEstimate& est);

}  // namespace decompound
