#include "decompound/coeffs.hpp"

#include "decompound/error.hpp"
#include "decompound/format.hpp"
#include "decompound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace decompound {

namespace {

// Observations are reduced in fixed blocks so sums do not depend on the thread count.
constexpr std::size_t kReduceBlock = 4096;

}  // namespace

std::string to_string(EstimatorVariant v)
{
    switch (v) {
    case EstimatorVariant::RealLog:
        return "real";
    case EstimatorVariant::RealLogUntruncated:
        return "real-untruncated";
    case EstimatorVariant::ComplexLog:
        return "complex";
    case EstimatorVariant::NoiseCorrected:
        return "noise-corrected";
    }
    return {};
}

EstimatorVariant parse_variant(std::string_view text)
{
    if (text == "real") return EstimatorVariant::RealLog;
    if (text == "real-untruncated") return EstimatorVariant::RealLogUntruncated;
    if (text == "complex") return EstimatorVariant::ComplexLog;
    if (text == "noise-corrected") return EstimatorVariant::NoiseCorrected;
    throw ConfigError("unknown estimator '" + std::string(text) +
                      "' (expected real, real-untruncated, complex or noise-corrected)");
}

void EstimatorConfig::validate() const
{
    if (variant != EstimatorVariant::RealLogUntruncated && !(delta > 0.0)) {
        throw DomainError("estimator: delta must be positive");
    }
    if (!(intensity > 0.0) || !(time > 0.0)) throw DomainError("estimator: intensity and time must be positive");
    if (!(noise_tau >= 0.0)) throw DomainError("estimator: noise_tau must be non-negative");
}

std::vector<std::string> EstimatorConfig::warnings() const
{
    std::vector<std::string> out;
    if (variant == EstimatorVariant::ComplexLog && intensity * time > 0.5 * std::numbers::pi) {
        out.push_back("complex estimator with t*Lambda = " + format_double(intensity * time) +
                      " > pi/2: the principal logarithm may take the wrong branch for extreme coefficients");
    }
    return out;
}

bool EstimatorConfig::wants_symmetrized() const noexcept
{
    return variant == EstimatorVariant::RealLog || variant == EstimatorVariant::RealLogUntruncated ||
           variant == EstimatorVariant::NoiseCorrected;
}

std::size_t EmpiricalTransform::position(const std::vector<int>& label) const
{
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i].label == label) return i;
    }
    SpectralIndex tmp;
    tmp.label = label;
    throw DomainError("empirical transform has no index " + tmp.label_string());
}

double EmpiricalTransform::standard_error(std::size_t i) const
{
    const double var = std::max(0.0, mean_square[i] - std::norm(values[i]));
    return m > 1 ? std::sqrt(var / static_cast<double>(m - 1)) : 0.0;
}

EmpiricalTransform empirical_transform(const ObservationSet& obs, std::span<const SpectralIndex> indices,
                                       bool symmetrize, unsigned threads)
{
    if (obs.size() == 0) throw DomainError("empirical_transform: empty observation set");
    if (symmetrize && !obs.config().law.inverse_invariant()) {
        throw DomainError("empirical_transform: the symmetrized transform needs an inverse-invariant law");
    }
    const SphericalEvaluator eval(obs.space(), indices);
    const std::size_t n_idx = indices.size();
    const std::size_t m = obs.size();
    const std::size_t blocks = (m + kReduceBlock - 1) / kReduceBlock;

    std::vector<std::complex<double>> sums(blocks * n_idx);
    std::vector<double> squares(blocks * n_idx);
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::vector<std::complex<double>> phi(n_idx);
        auto* sum = sums.data() + b * n_idx;
        auto* sq = squares.data() + b * n_idx;
        const std::size_t end = std::min(m, (b + 1) * kReduceBlock);
        for (std::size_t k = b * kReduceBlock; k < end; ++k) {
            eval.evaluate(obs.coords(k), phi);
            for (std::size_t i = 0; i < n_idx; ++i) {
                if (symmetrize) {
                    const double re = phi[i].real();
                    sum[i] += re;
                    sq[i] += re * re;
                } else {
                    sum[i] += phi[i];
                    sq[i] += std::norm(phi[i]);
                }
            }
        }
    });

    EmpiricalTransform out;
    out.indices.assign(indices.begin(), indices.end());
    out.values.assign(n_idx, 0.0);
    out.mean_square.assign(n_idx, 0.0);
    out.m = m;
    out.symmetrized = symmetrize;
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < n_idx; ++i) {
            out.values[i] += sums[b * n_idx + i];
            out.mean_square[i] += squares[b * n_idx + i];
        }
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n_idx; ++i) {
        out.values[i] *= inv_m;
        out.mean_square[i] *= inv_m;
    }
    return out;
}

CoefficientEstimate estimate_from_transform(std::complex<double> nu, std::size_t m, bool symmetrized,
                                            const SpectralIndex& index, const EstimatorConfig& cfg)
{
    cfg.validate();
    if (m == 0) throw DomainError("estimate_coefficient: m must be positive");
    const bool needs_sym =
        cfg.variant == EstimatorVariant::RealLog || cfg.variant == EstimatorVariant::RealLogUntruncated;
    if (needs_sym && !symmetrized) {
        throw DomainError("estimator " + to_string(cfg.variant) + " needs the symmetrized transform");
    }
    if (cfg.variant == EstimatorVariant::ComplexLog && symmetrized) {
        throw DomainError("complex estimator needs the unsymmetrized transform");
    }
    if (index.is_trivial()) return {1.0, false};

    const double rate = cfg.intensity * cfg.time;
    const double floor = cfg.delta / static_cast<double>(m);

    switch (cfg.variant) {
    case EstimatorVariant::RealLog:
    case EstimatorVariant::NoiseCorrected: {
        const double v = std::min(nu.real(), 1.0);
        if (!(v >= floor)) return {0.0, true};
        double c = std::log(v) / rate + 1.0;
        if (cfg.variant == EstimatorVariant::NoiseCorrected) {
            c += cfg.noise_tau * cfg.noise_tau * index.casimir / (2.0 * rate);
        }
        return {c, false};
    }
    case EstimatorVariant::RealLogUntruncated: {
        const double v = std::min(nu.real(), 1.0);
        if (!(v > 0.0)) return {0.0, true};
        return {std::log(v) / rate + 1.0, false};
    }
    case EstimatorVariant::ComplexLog: {
        const double modulus = std::abs(nu);
        if (!(nu.real() > 0.0) || !(modulus >= floor)) return {0.0, true};
        if (modulus > 1.0) nu /= modulus;
        return {std::log(nu) / rate + 1.0, false};
    }
    }
    return {0.0, true};
}

CoefficientEstimate estimate_coefficient(const EmpiricalTransform& nu, const SpectralIndex& index,
                                         const EstimatorConfig& cfg)
{
    const std::size_t i = nu.position(index.label);
    return estimate_from_transform(nu.values[i], nu.m, nu.symmetrized, index, cfg);
}

double deviation_bound(double gap, std::size_t m)
{
    if (!(gap > 0.0 && gap <= 2.0)) throw DomainError("deviation_bound: gap must lie in (0, 2]");
    return std::exp(-gap * gap * static_cast<double>(m) / 4.0);
}

double jackknife_stderr(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double total = 0.0;
    for (double v : values) total += v;
    std::vector<double> loo(n);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = (total - values[i]) / static_cast<double>(n - 1);
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
}

MseResult coefficient_mse(const ProcessConfig& process, const EstimatorConfig& cfg, const SpectralIndex& index,
                          std::size_t m, std::size_t replicates, unsigned threads)
{
    cfg.validate();
    if (replicates == 0) throw DomainError("coefficient_mse: replicates must be positive");
    const bool sym = cfg.wants_symmetrized() && process.law.inverse_invariant();
    if (cfg.wants_symmetrized() && cfg.variant != EstimatorVariant::NoiseCorrected && !sym) {
        throw DomainError("coefficient_mse: real estimators need an inverse-invariant law");
    }
    const std::vector<SpectralIndex> one{index};
    const std::complex<double> target = step_transform(process.law, one).entries().front().value;

    MseResult result;
    result.squared_errors.assign(replicates, 0.0);
    parallel_for(replicates, threads, [&](std::size_t r) {
        ProcessConfig rep = process;
        rep.seed = derive_seed(process.seed, {m, r});
        const auto obs = sample_compound(rep, m, 1);
        const auto nu = empirical_transform(obs, one, sym, 1);
        const auto est = estimate_coefficient(nu, index, cfg);
        result.squared_errors[r] = std::norm(est.value - target);
    });
    double s = 0.0;
    for (double e : result.squared_errors) s += e;
    result.mse = s / static_cast<double>(replicates);
    result.standard_error = jackknife_stderr(result.squared_errors);
    return result;
}

MseResult coefficient_mse(const StepLaw& law, const EstimatorConfig& cfg, const SpectralIndex& index, std::size_t m,
                          std::size_t replicates, std::uint64_t seed, unsigned threads)
{
    ProcessConfig process{law};
    process.intensity = cfg.intensity;
    process.time = cfg.time;
    process.seed = seed;
    return coefficient_mse(process, cfg, index, m, replicates, threads);
}

}  // namespace decompound
