// decompound: command-line front end for the studies, the sampler and one-shot estimates.

#include "decompound/coeffs.hpp"
#include "decompound/density.hpp"
#include "decompound/error.hpp"
#include "decompound/format.hpp"
#include "decompound/harness.hpp"
#include "decompound/simulate.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace dc = decompound;

namespace {

constexpr int kConfigError = 2;
constexpr int kAssertFailed = 3;

/// Flags that mirror StudyConfig keys. Values stay as text and go through apply_setting.
struct StudyFlags {
    std::string config;
    std::map<std::string, std::string> values;
    bool assert_checks = false;

    void add_to(CLI::App& app)
    {
        app.add_option("--config", config, "INI-style study configuration file")->check(CLI::ExistingFile);
        const std::pair<const char*, const char*> keys[] = {
            {"space", "circle, torus:<d> or sphere:<d>"},
            {"law", "heat:tau=..., wn:sigma=...,mean=... or cap:rho=..."},
            {"intensity", "Poisson intensity"},
            {"time", "observation time"},
            {"mode", "iid or trajectory"},
            {"noise_tau", "heat-kernel noise scale on the observations"},
            {"estimator", "real, real-untruncated, complex or noise-corrected"},
            {"delta", "truncation constant"},
            {"estimator_tau", "noise scale assumed by the estimator"},
            {"s", "Sobolev order"},
            {"scale", "cutoff scale"},
            {"m_grid", "comma-separated sample sizes"},
            {"replicates", "replicates per grid point"},
            {"seed", "master seed"},
            {"indices", "space-separated index labels (coefficient study)"},
            {"thresholds", "comma-separated casimir thresholds (census)"},
            {"out", "output directory"},
            {"threads", "worker threads (0 = all cores)"},
            {"bootstrap", "bootstrap resamples for the slope CI"},
        };
        for (const auto& [key, help] : keys) {
            std::string flag = std::string("--") + key;
            std::replace(flag.begin() + 2, flag.end(), '_', '-');
            app.add_option_function<std::string>(
                flag, [this, k = std::string(key)](const std::string& v) { values[k] = v; }, help);
        }
        app.add_flag_function("--coefficients", [this](std::int64_t) { values["coefficients"] = "true"; },
                              "write coefficients_m<k>.csv per grid point");
        app.add_flag_function("--svg", [this](std::int64_t) { values["svg"] = "true"; }, "write chart.svg");
        app.add_flag("--assert", assert_checks, "exit with status 3 if a rate or bias check fails");
    }

    [[nodiscard]] dc::StudyConfig build() const
    {
        dc::StudyConfig cfg = config.empty() ? dc::StudyConfig{} : dc::load_study_config(config);
        for (const auto& [k, v] : values) {
            try {
                dc::apply_setting(cfg, k, v);
            } catch (const dc::ConfigError& e) {
                throw dc::ConfigError(std::string("--") + k + ": " + e.what());
            }
        }
        return cfg;
    }
};

void print_summary(const dc::StudyResult& result)
{
    if (result.census) {
        const auto& c = *result.census;
        std::cout << "spherical exponent " << dc::format_double(c.spherical.slope) << " (reference "
                  << dc::format_double(c.spherical_reference) << ")\n"
                  << "weighted exponent  " << dc::format_double(c.weighted.slope) << " (reference "
                  << dc::format_double(c.weighted_reference) << ")\n";
        return;
    }
    for (const auto& r : result.rows) {
        std::cout << "m=" << r.m << " index=" << r.index << " total=" << dc::format_double(r.total)
                  << " variance=" << dc::format_double(r.variance_term) << " bias=" << dc::format_double(r.bias_term)
                  << " stderr=" << dc::format_double(r.standard_error) << '\n';
    }
    for (const auto& f : result.fits) {
        std::cout << "fit " << f.index << ": ";
        if (f.fit) {
            std::cout << "slope " << dc::format_double(f.fit->slope) << " [" << dc::format_double(f.fit->ci_low)
                      << ", " << dc::format_double(f.fit->ci_high) << "]";
        } else {
            std::cout << f.note;
        }
        std::cout << " reference " << dc::format_double(result.reference_slope) << '\n';
    }
}

int finish_study(const dc::StudyResult& result, bool assert_checks)
{
    dc::write_study_outputs(result);
    print_summary(result);
    std::cout << "wrote " << result.config.out_dir.string() << '\n';
    if (!assert_checks) return 0;
    bool ok = true;
    for (const auto& a : dc::check_study(result)) {
        std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
        ok = ok && a.passed;
    }
    return ok ? 0 : kAssertFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decompounding of compound Poisson walks on the circle, tori and spheres"};
    app.require_subcommand(1);

    StudyFlags density_flags, coeff_flags, census_flags;
    auto* density = app.add_subcommand("study-density", "density-level MSE over a grid of sample sizes");
    density_flags.add_to(*density);
    auto* coeff = app.add_subcommand("study-coeff", "per-coefficient MSE over a grid of sample sizes");
    coeff_flags.add_to(*coeff);
    auto* census = app.add_subcommand("census", "spectral counts below casimir thresholds");
    census_flags.add_to(*census);

    auto* sample = app.add_subcommand("sample", "draw observations and write them as CSV");
    std::string s_space = "circle", s_law = "wn:sigma=0.7,mean=0", s_mode = "iid", s_output;
    double s_intensity = 1.0, s_time = 1.0, s_noise = 0.0;
    std::size_t s_m = 1000;
    std::uint64_t s_seed = 1;
    unsigned s_threads = 0;
    sample->add_option("--space", s_space, "space")->capture_default_str();
    sample->add_option("--law", s_law, "step law")->capture_default_str();
    sample->add_option("--intensity", s_intensity, "Poisson intensity")->capture_default_str();
    sample->add_option("--time", s_time, "observation time")->capture_default_str();
    sample->add_option("--mode", s_mode, "iid or trajectory")->capture_default_str();
    sample->add_option("--noise-tau", s_noise, "observation noise scale")->capture_default_str();
    sample->add_option("-m,--m", s_m, "number of observations")->capture_default_str();
    sample->add_option("--seed", s_seed, "seed")->capture_default_str();
    sample->add_option("--threads", s_threads, "worker threads");
    sample->add_option("-o,--output", s_output, "output file (default stdout)");

    auto* coeffs = app.add_subcommand("coeffs", "estimate coefficients from an observations CSV");
    std::string c_input, c_estimator = "real", c_out;
    double c_delta = 1.0, c_s = 2.0, c_scale = 1.0;
    std::optional<double> c_tau;
    unsigned c_threads = 0;
    coeffs->add_option("input", c_input, "observations CSV written by 'sample'")->required()->check(CLI::ExistingFile);
    coeffs->add_option("--estimator", c_estimator, "estimator variant")->capture_default_str();
    coeffs->add_option("--delta", c_delta, "truncation constant")->capture_default_str();
    coeffs->add_option("--estimator-tau", c_tau, "noise scale assumed by the estimator (default: from the file)");
    coeffs->add_option("--s", c_s, "Sobolev order")->capture_default_str();
    coeffs->add_option("--scale", c_scale, "cutoff scale")->capture_default_str();
    coeffs->add_option("--threads", c_threads, "worker threads");
    coeffs->add_option("--out", c_out, "directory for estimate.csv and estimate.json (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (density->parsed()) {
            const auto cfg = density_flags.build();
            for (const auto& w : cfg.estimator().warnings()) std::cerr << "warning: " << w << '\n';
            return finish_study(dc::run_convergence_study(cfg), density_flags.assert_checks);
        }
        if (coeff->parsed()) {
            const auto cfg = coeff_flags.build();
            for (const auto& w : cfg.estimator().warnings()) std::cerr << "warning: " << w << '\n';
            return finish_study(dc::run_coefficient_study(cfg), coeff_flags.assert_checks);
        }
        if (census->parsed()) {
            return finish_study(dc::run_census_study(census_flags.build()), census_flags.assert_checks);
        }
        if (sample->parsed()) {
            dc::StudyConfig cfg;
            cfg.space = s_space;
            cfg.law = s_law;
            dc::ProcessConfig p{cfg.parsed_law()};
            p.intensity = s_intensity;
            p.time = s_time;
            p.mode = dc::parse_sampling_mode(s_mode);
            p.noise_tau = s_noise;
            p.seed = s_seed;
            const auto obs = dc::sample_compound(p, s_m, s_threads);
            if (s_output.empty()) {
                dc::write_observations_csv(std::cout, obs);
            } else {
                std::ofstream f(s_output, std::ios::binary);
                if (!f) throw dc::ConfigError("cannot write " + s_output);
                dc::write_observations_csv(f, obs);
            }
            return 0;
        }
        if (coeffs->parsed()) {
            std::ifstream in(c_input);
            const auto obs = dc::read_observations_csv(in);
            dc::EstimatorConfig ecfg;
            ecfg.variant = dc::parse_variant(c_estimator);
            ecfg.delta = c_delta;
            ecfg.intensity = obs.config().intensity;
            ecfg.time = obs.config().time;
            ecfg.noise_tau = c_tau.value_or(obs.config().noise_tau);
            for (const auto& w : ecfg.warnings()) std::cerr << "warning: " << w << '\n';
            const auto est = dc::reconstruct(obs, ecfg, dc::SobolevSpec{c_s, std::nullopt}, c_scale, c_threads);
            if (c_out.empty()) {
                dc::write_estimate_csv(std::cout, est);
                return 0;
            }
            std::filesystem::create_directories(c_out);
            std::ofstream csv(std::filesystem::path(c_out) / "estimate.csv", std::ios::binary);
            std::ofstream json(std::filesystem::path(c_out) / "estimate.json", std::ios::binary);
            if (!csv || !json) throw dc::ConfigError("cannot write into " + c_out);
            dc::write_estimate_csv(csv, est);
            dc::write_estimate_sidecar(json, est);
            return 0;
        }
    } catch (const dc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const dc::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
