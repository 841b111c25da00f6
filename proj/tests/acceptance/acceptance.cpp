// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "decompound/coeffs.hpp"
#include "decompound/density.hpp"
#include "decompound/harness.hpp"
#include "decompound/parallel.hpp"
#include "decompound/simulate.hpp"
#include "decompound/spaces.hpp"
#include "decompound/steplaws.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

using namespace decompound;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

ProcessConfig make_process(StepLaw law, std::uint64_t seed, double noise_tau = 0.0)
{
    ProcessConfig p{std::move(law)};
    p.seed = seed;
    p.noise_tau = noise_tau;
    return p;
}

// Bias inequality violations accumulated over every density study run here.
std::size_t g_bias_violations = 0;
std::size_t g_density_runs = 0;

StudyResult density_study(const std::string& space, const std::string& law, double scale)
{
    StudyConfig cfg;
    cfg.space = space;
    cfg.law = law;
    cfg.s = 2.0;
    cfg.scale = scale;
    cfg.replicates = 100;
    cfg.seed = 5;
    auto r = run_convergence_study(cfg);
    g_bias_violations += r.bias_violations;
    ++g_density_runs;
    return r;
}

Verdict exactness()
{
    const std::vector<StepLaw> laws{StepLaw::wrapped_normal(Space::circle(), 0.7), StepLaw::heat(Space::torus(2), 0.2),
                                    StepLaw::heat(Space::sphere(2), 0.3), StepLaw::uniform_cap(Space::sphere(3), 1.0)};
    const std::vector<EstimatorVariant> variants{EstimatorVariant::RealLog, EstimatorVariant::RealLogUntruncated,
                                                 EstimatorVariant::ComplexLog, EstimatorVariant::NoiseCorrected};
    int checked = 0, bad = 0;
    for (std::size_t li = 0; li < laws.size(); ++li) {
        for (std::size_t m : {1, 10, 100}) {
            const auto obs = sample_compound(make_process(laws[li], derive_seed(11, {li, m}), 0.1), m);
            for (const auto v : variants) {
                EstimatorConfig cfg;
                cfg.variant = v;
                cfg.noise_tau = 0.1;
                const auto est = reconstruct(obs, cfg, SobolevSpec{}, 1.0);
                ++checked;
                if (est.coeffs.entries().front().value != std::complex<double>(1.0, 0.0)) ++bad;
            }
        }
    }
    return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) + " estimates exactly 1"};
}

Verdict oracle_equivalence()
{
    const std::vector<StepLaw> laws{StepLaw::heat(Space::circle(), 0.3),         StepLaw::heat(Space::torus(2), 0.2),
                                    StepLaw::heat(Space::sphere(2), 0.05),       StepLaw::heat(Space::sphere(2), 0.5),
                                    StepLaw::heat(Space::sphere(3), 0.3),        StepLaw::wrapped_normal(Space::circle(), 0.7),
                                    StepLaw::wrapped_normal(Space::circle(), 1.0, 0.5),
                                    StepLaw::wrapped_normal(Space::torus(2), 0.6, 0.3)};
    double worst = 0.0;
    std::size_t count = 0;
    for (const auto& law : laws) {
        const auto idx = spectrum(law.space(), 100.0);
        int max_deg = 0;
        for (const auto& i : idx) max_deg = std::max(max_deg, i.degree());
        const auto exact = true_coefficients(law, idx);
        const auto quad = quadrature_coefficients(law, idx, 4 * max_deg + 16);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            worst = std::max(worst, std::abs(exact.entries()[i].value - quad.entries()[i].value));
        }
        count += idx.size();
    }
    return {worst <= 1e-8, "max |diff| " + fmt(worst) + " over " + std::to_string(count) + " indices"};
}

Verdict levy_khinchin()
{
    bool ok = true;
    std::string detail;
    const std::vector<StepLaw> laws{StepLaw::wrapped_normal(Space::circle(), 0.7, 0.5),
                                    StepLaw::heat(Space::sphere(2), 0.5)};
    for (std::size_t li = 0; li < laws.size(); ++li) {
        const auto& law = laws[li];
        const std::size_t m = 100000;
        const auto obs = sample_compound(make_process(law, derive_seed(13, {li})), m);
        const auto idx = spectrum(law.space(), 20.0);
        const auto target = step_transform(law, idx);
        const SphericalEvaluator eval(law.space(), idx);
        std::vector<std::complex<double>> sum(idx.size());
        std::vector<double> sr(idx.size()), si(idx.size());
        std::vector<std::complex<double>> phi(idx.size());
        for (std::size_t k = 0; k < m; ++k) {
            eval.evaluate(obs.coords(k), phi);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                sum[i] += phi[i];
                sr[i] += phi[i].real() * phi[i].real();
                si[i] += phi[i].imag() * phi[i].imag();
            }
        }
        std::size_t pass = 0;
        const double n = static_cast<double>(m);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto mean = sum[i] / n;
            const double se_re = std::sqrt(std::max(0.0, sr[i] / n - mean.real() * mean.real()) / (n - 1));
            const double se_im = std::sqrt(std::max(0.0, si[i] / n - mean.imag() * mean.imag()) / (n - 1));
            const auto expect = std::exp(target.entries()[i].value - 1.0);
            if (std::abs(mean.real() - expect.real()) <= 4.0 * se_re + 1e-12 &&
                std::abs(mean.imag() - expect.imag()) <= 4.0 * se_im + 1e-12) {
                ++pass;
            }
        }
        const double frac = static_cast<double>(pass) / static_cast<double>(idx.size());
        ok = ok && frac >= 0.95;
        detail += law.space().name() + " " + std::to_string(pass) + "/" + std::to_string(idx.size()) + "; ";
    }
    return {ok, detail + "need >= 95% within 4 se"};
}

Verdict coefficient_rate()
{
    StudyConfig cfg;
    cfg.replicates = 200;
    cfg.seed = 7;
    const auto r = run_coefficient_study(cfg);
    const auto& f = r.fits.at(0);
    if (!f.fit) return {false, "no fit: " + f.note};
    const double slope = f.fit->slope;
    return {slope >= -1.2 && slope <= -0.8, "circle n=" + f.index + " slope " + fmt(slope) + " CI [" +
                                                fmt(f.fit->ci_low) + ", " + fmt(f.fit->ci_high) + "], window [-1.2, -0.8]"};
}

Verdict density_rate()
{
    struct Case {
        std::string space, law;
        double reference;
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : {Case{"circle", "wn:sigma=0.7,mean=0", -0.8}, Case{"sphere:2", "heat:tau=0.3", -2.0 / 3.0}}) {
        const auto r = density_study(c.space, c.law, 1.0);
        const auto& f = r.fits.at(0);
        const bool pass = f.fit && std::abs(f.fit->slope - c.reference) <= 0.15;
        ok = ok && pass;
        detail += c.space + " slope " + (f.fit ? fmt(f.fit->slope) : "n/a") + " vs " + fmt(c.reference) + " +- 0.15 (" +
                  (pass ? "ok" : "out") + "); ";
        for (double scale : {0.5, 2.0}) {
            const auto rs = density_study(c.space, c.law, scale);
            std::cout << "  info: " << c.space << " scale " << scale << " slope "
                      << (rs.fits[0].fit ? fmt(rs.fits[0].fit->slope) : "n/a") << '\n';
        }
    }
    return {ok, detail};
}

Verdict census()
{
    const StudyConfig defaults;
    bool ok = true;
    std::string detail;
    for (const auto& space : {Space::circle(), Space::torus(2), Space::sphere(2), Space::sphere(3)}) {
        const auto fit = run_census(space, defaults.thresholds);
        const bool pass = std::abs(fit.spherical.slope - fit.spherical_reference) <= 0.1 &&
                          std::abs(fit.weighted.slope - fit.weighted_reference) <= 0.1;
        ok = ok && pass;
        detail += space.name() + " " + fmt(fit.spherical.slope) + "/" + fmt(fit.weighted.slope) + " vs " +
                  fmt(fit.spherical_reference) + "/" + fmt(fit.weighted_reference) + "; ";
    }
    return {ok, detail};
}

Verdict hoeffding()
{
    struct Case {
        StepLaw law;
        std::vector<int> label;
    };
    const std::vector<Case> cases{{StepLaw::wrapped_normal(Space::circle(), 0.7), {1}},
                                  {StepLaw::heat(Space::sphere(2), 0.3), {2}}};
    const std::size_t reps = 10000;
    bool ok = true;
    std::string detail;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        const std::vector<SpectralIndex> idx{make_index(c.law.space(), c.label)};
        const double nu = std::exp(step_transform(c.law, idx).entries()[0].value.real() - 1.0);
        for (std::size_t m : {50, 200}) {
            std::vector<char> hit(reps);
            parallel_for(reps, 0, [&](std::size_t r) {
                const auto obs = sample_compound(make_process(c.law, derive_seed(17, {ci, m, r})), m, 1);
                const auto num = empirical_transform(obs, idx, true, 1);
                hit[r] = num.values[0].real() - nu <= -nu / 2.0 ? 1 : 0;
            });
            double freq = 0.0;
            for (char h : hit) freq += h;
            freq /= static_cast<double>(reps);
            const double bound = std::exp(-nu * nu * static_cast<double>(m) / 16.0);
            const double se = std::sqrt(bound * (1.0 - bound) / static_cast<double>(reps));
            const bool pass = freq <= bound + 3.0 * se;
            ok = ok && pass;
            detail += c.law.space().name() + " m=" + std::to_string(m) + " " + fmt(freq) + " <= " + fmt(bound) +
                      "+3se; ";
        }
    }
    return {ok, detail};
}

Verdict noise_correction()
{
    StudyConfig cfg;
    cfg.space = "sphere:2";
    cfg.law = "heat:tau=0.3";
    cfg.noise_tau = 0.3;
    cfg.variant = EstimatorVariant::NoiseCorrected;
    cfg.indices = {"1", "2"};
    cfg.replicates = 200;
    cfg.seed = 8;
    const auto corrected = run_coefficient_study(cfg);
    bool ok = true;
    std::string detail;
    for (const auto& f : corrected.fits) {
        const bool pass = f.fit && std::abs(f.fit->slope + 1.0) <= 0.2;
        ok = ok && pass;
        detail += "corrected l=" + f.index + " slope " + (f.fit ? fmt(f.fit->slope) : "n/a") + "; ";
    }

    cfg.estimator_tau = 0.0;
    cfg.indices = {"2"};
    const auto ignored = run_coefficient_study(cfg);
    const double kappa = 6.0;
    const double lt = cfg.intensity * cfg.time;
    const double floor = std::pow(1.0 - std::exp(-0.09 * kappa / 2.0), 2) / (lt * lt) * 0.5;
    for (const auto& row : ignored.rows) {
        if (row.m < 10000) continue;
        ok = ok && row.total > floor;
        detail += "ignored m=" + std::to_string(row.m) + " mse " + fmt(row.total) + "; ";
    }
    return {ok, detail + "plateau floor " + fmt(floor)};
}

Verdict bias_inequality()
{
    return {g_density_runs > 0 && g_bias_violations == 0,
            std::to_string(g_bias_violations) + " violation(s) over " + std::to_string(g_density_runs) +
                " density studies x 4 grid points x 100 replicates"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"1 exactness", exactness},
        {"2 oracle equivalence", oracle_equivalence},
        {"3 Levy-Khinchin", levy_khinchin},
        {"4 coefficient rate", coefficient_rate},
        {"5 density rate", density_rate},
        {"6 census exponents", census},
        {"7 Hoeffding exceedance", hoeffding},
        {"8 noise correction", noise_correction},
        {"9 bias inequality", bias_inequality},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        while (!v.detail.empty() && (v.detail.back() == ';' || v.detail.back() == ' ')) v.detail.pop_back();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (v.passed ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt(secs) << " s]"
                  << std::endl;
        if (!v.passed) ++failures;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
