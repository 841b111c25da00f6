#include "decompound/density.hpp"

#include "decompound/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace decompound {

namespace {

constexpr double kPi = std::numbers::pi;

/// Exponential decay rate a with |c(pi)| = exp(-a kappa), for laws that have one.
std::optional<double> decay_rate(const StepLaw& law)
{
    switch (law.kind()) {
    case LawKind::HeatZonal:
        return law.tau0();
    case LawKind::WrappedNormal:
        return 0.5 * law.sigma() * law.sigma();
    case LawKind::UniformCap:
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

void SobolevSpec::validate() const
{
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("Sobolev order s must be positive");
    if (radius && !(*radius > 1.0)) throw DomainError("Sobolev radius must exceed 1");
}

double smoothing_cutoff(std::size_t m, double s, const Space& space, double scale)
{
    if (m == 0) throw DomainError("smoothing_cutoff: m must be positive");
    if (!(s > 0.0)) throw DomainError("smoothing_cutoff: s must be positive");
    if (!(scale > 0.0)) throw DomainError("smoothing_cutoff: scale must be positive");
    return scale * std::pow(static_cast<double>(m), 2.0 / (2.0 * s + space.dim()));
}

DensityEstimate reconstruct_from_transform(const EmpiricalTransform& nu, const Space& space,
                                           const EstimatorConfig& cfg, double s, double scale, double cutoff)
{
    std::vector<CoefficientEntry> entries;
    for (const auto& idx : nu.indices) {
        if (idx.casimir > cutoff) continue;
        const auto est = estimate_coefficient(nu, idx, cfg);
        entries.push_back({idx, std::conj(est.value), est.truncated});
    }
    return DensityEstimate{CoefficientVector(std::move(entries)), space, nu.m, cutoff, scale, s, cfg};
}

DensityEstimate reconstruct(const ObservationSet& obs, const EstimatorConfig& cfg, const SobolevSpec& spec,
                            double scale, unsigned threads)
{
    cfg.validate();
    spec.validate();
    const auto& law = obs.config().law;
    const bool real_variant =
        cfg.variant == EstimatorVariant::RealLog || cfg.variant == EstimatorVariant::RealLogUntruncated;
    if (real_variant && !law.inverse_invariant()) {
        throw DomainError("reconstruct: real estimators need an inverse-invariant step law");
    }
    const double cutoff = smoothing_cutoff(obs.size(), spec.s, obs.space(), scale);
    const auto indices = spectrum(obs.space(), cutoff);
    const bool sym = cfg.wants_symmetrized() && law.inverse_invariant();
    const auto nu = empirical_transform(obs, indices, sym, threads);
    return reconstruct_from_transform(nu, obs.space(), cfg, spec.s, scale, cutoff);
}

L2Error l2_error(const DensityEstimate& est, const CoefficientVector& truth)
{
    L2Error err;
    for (const auto& e : est.coeffs.entries()) {
        const auto* t = truth.find(e.index.label);
        if (!t) throw NumericalError("l2_error: truth has no entry for index " + e.index.label_string());
        err.variance_term += static_cast<double>(e.index.multiplicity) * std::norm(e.value - t->value);
    }
    for (const auto& t : truth.entries()) {
        if (est.coeffs.find(t.index.label)) continue;
        err.bias_term += static_cast<double>(t.index.multiplicity) * std::norm(t.value);
    }
    err.total = err.variance_term + err.bias_term;
    return err;
}

TruthSpectrum truth_spectrum(const StepLaw& law, double cover_casimir)
{
    const Space& space = law.space();
    TruthSpectrum out;
    if (const auto rate = decay_rate(law)) {
        // |c|^2 < e^-80 beyond K, small enough for kappa^s weights with s up to ~4; the next band is the tail.
        const double k_main = std::max(cover_casimir, 40.0 / *rate);
        const double k_tail = k_main + 40.0 / *rate;
        const auto main = spectrum(space, k_main);
        out.coeffs = true_coefficients(law, main);
        const auto tail_idx = spectrum(space, k_tail);
        for (const auto& idx : tail_idx) {
            if (idx.casimir <= k_main) continue;
            out.tail_bound += static_cast<double>(idx.multiplicity) * std::exp(-2.0 * *rate * idx.casimir);
        }
        return out;
    }
    const double k_main = std::max(4.0 * cover_casimir, 4.0 * space.dim());
    const auto main = spectrum(space, k_main);
    out.coeffs = true_coefficients(law, main);
    // d_l |c_l|^2 = O(l^-2) for caps: bound the tail by A / L with A = max l^2 d_l |c_l|^2 over the upper half.
    const int top = main.back().degree();
    double amp = 0.0;
    for (const auto& e : out.coeffs.entries()) {
        const int l = e.index.degree();
        if (2 * l < top) continue;
        amp = std::max(amp, static_cast<double>(l) * l * e.index.multiplicity * std::norm(e.value));
    }
    out.tail_bound = top > 0 ? amp / top : 0.0;
    return out;
}

double sobolev_norm(const CoefficientVector& coeffs, [[maybe_unused]] const Space& space, double s)
{
    if (!(s >= 0.0)) throw DomainError("sobolev_norm: s must be non-negative");
    const double k_max = coeffs.max_casimir();
    double total = 0.0;
    double outer = 0.0;
    for (const auto& e : coeffs.entries()) {
        const double weight = s == 0.0 ? 1.0 : 1.0 + std::pow(e.index.casimir, s);
        const double term = static_cast<double>(e.index.multiplicity) * weight * std::norm(e.value);
        total += term;
        if (e.index.casimir > 0.5 * k_max) outer += term;
    }
    if (k_max > 0.0 && outer > 1e-10 * std::max(1.0, total)) {
        throw NumericalError("sobolev_norm: coefficient tail is not summable at order s (outer half contributes " +
                             std::to_string(outer) + ")");
    }
    return std::sqrt(total);
}

std::complex<double> synthesize(const CoefficientVector& coeffs, const Space& space, std::span<const double> coords)
{
    std::vector<SpectralIndex> indices;
    indices.reserve(coeffs.size());
    for (const auto& e : coeffs.entries()) indices.push_back(e.index);
    const SphericalEvaluator eval(space, indices);
    std::vector<std::complex<double>> phi(indices.size());
    eval.evaluate(coords, phi);
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        sum += static_cast<double>(indices[i].multiplicity) * coeffs.entries()[i].value * phi[i];
    }
    return sum;
}

PointValue evaluate_full(const DensityEstimate& est, const Point& point)
{
    validate_point(est.space, point);
    const auto v = synthesize(est.coeffs, est.space, point.coords);
    return {v.real(), std::abs(v.imag())};
}

double evaluate(const DensityEstimate& est, const Point& point)
{
    const auto pv = evaluate_full(est, point);
    if (pv.imag_residual > 1e-9) {
        throw NumericalError("evaluate: imaginary residual " + std::to_string(pv.imag_residual) +
                             " exceeds 1e-9; coefficients are not those of a real density");
    }
    return pv.value;
}

std::vector<ProfileSample> density_profile(const DensityEstimate& est, int points, bool clip)
{
    if (points < 2) throw DomainError("density_profile: need at least two points");
    const Space& space = est.space;
    if (space.kind() == SpaceKind::Torus && space.dim() > 1) {
        throw DomainError("density_profile: only the circle and spheres have a one-dimensional profile");
    }
    const bool sphere = space.kind() == SpaceKind::Sphere;
    const double span = sphere ? kPi : 2.0 * kPi;
    const int intervals = sphere ? points - 1 : points;

    std::vector<ProfileSample> out(points);
    std::vector<double> weight(points);
    for (int i = 0; i < points; ++i) {
        const double x = span * i / intervals;
        const Point p = sphere ? sphere_point_at_polar(space, x) : point_at(space, std::vector<double>{x});
        out[i] = {x, evaluate_full(est, p).value};
        // Trapezoidal weights against the normalized radial measure.
        if (sphere) {
            const double end = (i == 0 || i == points - 1) ? 0.5 : 1.0;
            weight[i] = end * (span / intervals) * std::pow(std::sin(x), space.dim() - 1);
        } else {
            weight[i] = 1.0 / points;
        }
    }
    if (!clip) return out;

    double mass = 0.0;
    double norm = 0.0;
    for (int i = 0; i < points; ++i) {
        out[i].value = std::max(0.0, out[i].value);
        mass += weight[i] * out[i].value;
        norm += weight[i];
    }
    if (mass > 0.0) {
        for (auto& sample : out) sample.value *= norm / mass;
    }
    return out;
}

void write_estimate_csv(std::ostream& out, const DensityEstimate& est)
{
    write_coefficients_csv(out, est.coeffs);
}

void write_estimate_sidecar(std::ostream& out, const DensityEstimate& est)
{
    nlohmann::ordered_json j;
    j["space"] = est.space.name();
    j["m"] = est.m;
    j["s"] = est.s;
    j["scale"] = est.scale;
    j["cutoff"] = est.cutoff;
    j["indices"] = est.coeffs.size();
    j["estimator"] = {
        {"variant", to_string(est.estimator.variant)},
        {"delta", est.estimator.delta},
        {"intensity", est.estimator.intensity},
        {"time", est.estimator.time},
        {"noise_tau", est.estimator.noise_tau},
    };
    out << j.dump(2) << '\n';
}

}  // namespace decompound
