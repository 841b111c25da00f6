#include "doctest.h"

#include "decompound/error.hpp"
#include "decompound/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace decompound;

namespace {

StudyConfig small_density_config()
{
    StudyConfig cfg;
    cfg.space = "sphere:2";
    cfg.law = "heat:tau=0.3";
    cfg.m_grid = {100, 400, 1600};
    cfg.replicates = 12;
    cfg.bootstrap = 50;
    cfg.seed = 9;
    return cfg;
}

std::string results_text(const StudyResult& r)
{
    std::ostringstream out;
    write_results_csv(out, r);
    return out.str();
}

std::string config_error(const std::string& text)
{
    std::istringstream in(text);
    try {
        parse_study_config(in, "study.ini").validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("rate fits on exact power laws")
{
    std::vector<double> x, y, y3;
    for (double m : {100.0, 1000.0, 10000.0, 100000.0}) {
        x.push_back(std::log(m));
        y.push_back(std::log(1.0 / m));
        y3.push_back(std::log(3.0 * std::pow(m, -0.8)));
    }
    const auto f = fit_rate(x, y);
    CHECK(std::abs(f.slope + 1.0) < 1e-12);
    CHECK(std::abs(f.intercept) < 1e-10);
    CHECK(f.ci_low == doctest::Approx(f.slope));
    CHECK(f.ci_high == doctest::Approx(f.slope));

    const auto g = fit_rate(x, y3);
    CHECK(g.slope == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(g.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(fit_rate(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DomainError);
    CHECK_THROWS_AS(fit_rate(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DomainError);
}

TEST_CASE("t interval matches a hand computation")
{
    // Residuals +-0.1 around y = -x: slope se = sqrt(0.04 / 1 / 2) = 0.1414, t_{0.975,1} = 12.706.
    const std::vector<double> x{0.0, 1.0, 2.0};
    const std::vector<double> y{0.05, -1.1, -1.95};
    const auto f = fit_rate(x, y);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    double sse = 0.0;
    for (int i = 0; i < 3; ++i) sse += std::pow(y[i] - (f.intercept + f.slope * x[i]), 2);
    const double se = std::sqrt(sse / 1.0 / 2.0);
    CHECK(f.ci_high - f.slope == doctest::Approx(12.7062047361747 * se).epsilon(1e-9));
}

TEST_CASE("bootstrap interval widens with an outlier")
{
    const std::vector<std::size_t> m{100, 1000, 10000, 100000};
    std::vector<std::vector<double>> clean, noisy;
    for (std::size_t mi : m) {
        std::vector<double> c, n;
        for (int r = 0; r < 40; ++r) {
            const double base = 1.0 / static_cast<double>(mi) * (1.0 + 0.1 * ((r % 5) - 2));
            c.push_back(base);
            n.push_back(r == 0 && mi == 10000 ? base * 200.0 : base);
        }
        clean.push_back(c);
        noisy.push_back(n);
    }
    const auto a = fit_rate_bootstrap(m, clean, 400, 3);
    const auto b = fit_rate_bootstrap(m, noisy, 400, 3);
    CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(a.ci_low <= a.slope);
    CHECK(a.ci_high >= a.slope);
    CHECK(b.ci_high - b.ci_low > 3.0 * (a.ci_high - a.ci_low));
    const auto again = fit_rate_bootstrap(m, noisy, 400, 3);
    CHECK(again.ci_low == b.ci_low);
    CHECK(again.ci_high == b.ci_high);
}

TEST_CASE("config files")
{
    std::istringstream in(
        "# study\n"
        "[process]\n"
        "space = sphere:2\n"
        "law = heat:tau=0.3\n"
        "; whole-line comment\n"
        "\n"
        "[study]\n"
        "m_grid = 100, 1000, 10000\n"
        "replicates = 20\n"
        "indices = 1 2\n"
        "estimator_tau = auto\n");
    const auto cfg = parse_study_config(in, "study.ini");
    CHECK(cfg.space == "sphere:2");
    CHECK(cfg.law == "heat:tau=0.3");
    CHECK(cfg.m_grid == std::vector<std::size_t>{100, 1000, 10000});
    CHECK(cfg.replicates == 20);
    CHECK(cfg.indices == std::vector<std::string>{"1", "2"});
    CHECK_FALSE(cfg.estimator_tau.has_value());
    cfg.validate();

    const auto unknown = config_error("[study]\nreplicates = 5\nbogus = 1\n");
    CHECK(unknown.find("study.ini:3") != std::string::npos);
    CHECK(unknown.find("bogus") != std::string::npos);

    const auto bad_number = config_error("\n\nintensity = fast\n");
    CHECK(bad_number.find("study.ini:3") != std::string::npos);
    CHECK(bad_number.find("intensity") != std::string::npos);

    CHECK(config_error("m_grid = 100, 100, 1000\n").find("m_grid") != std::string::npos);
    CHECK(config_error("m_grid = 100, 1000\n").find("m_grid") != std::string::npos);
    CHECK(config_error("law = wn:sigma=0.7,mean=0.5\n").find("estimator") != std::string::npos);
    CHECK(config_error("law = wn:sigma=0.7,mean=0.5\nestimator = complex\n").empty());
    CHECK(config_error("[process\n").find("study.ini:1") != std::string::npos);
    CHECK(config_error("space = sphere:2\nlaw = heat:tau=0.3\nindices = 1;2\n").find("indices") != std::string::npos);
    CHECK_THROWS_AS(load_study_config("/nonexistent/study.ini"), ConfigError);
}

TEST_CASE("echo covers the config and round-trips")
{
    StudyConfig cfg = small_density_config();
    cfg.noise_tau = 0.2;
    cfg.estimator_tau = 0.1;
    cfg.variant = EstimatorVariant::NoiseCorrected;
    std::ostringstream text;
    for (const auto& [k, v] : cfg.echo()) text << k << " = " << v << '\n';
    std::istringstream in(text.str());
    const auto back = parse_study_config(in, "echo");
    std::ostringstream again;
    for (const auto& [k, v] : back.echo()) again << k << " = " << v << '\n';
    CHECK(again.str() == text.str());
}

TEST_CASE("census exponents")
{
    const StudyConfig defaults;
    struct Case {
        Space space;
        double spherical, weighted;
    };
    for (const auto& c : {Case{Space::circle(), 0.5, 0.5}, Case{Space::torus(2), 1.0, 1.0},
                          Case{Space::sphere(2), 0.5, 1.0}, Case{Space::sphere(3), 0.5, 1.5}}) {
        const auto fit = run_census(c.space, defaults.thresholds);
        INFO(c.space.name());
        CHECK(fit.spherical_reference == c.spherical);
        CHECK(fit.weighted_reference == c.weighted);
        CHECK(std::abs(fit.spherical.slope - c.spherical) <= 0.1);
        CHECK(std::abs(fit.weighted.slope - c.weighted) <= 0.1);
    }
    CHECK_THROWS_AS(run_census(Space::circle(), std::vector<double>{100, 200, 900}), DomainError);
    StudyConfig cfg;
    cfg.space = "sphere:3";
    const auto study = run_census_study(cfg);
    for (const auto& a : check_study(study)) CHECK(a.passed);
}

TEST_CASE("density study rows and determinism")
{
    StudyConfig cfg = small_density_config();
    cfg.threads = 1;
    const auto a = run_convergence_study(cfg);
    cfg.threads = 4;
    const auto b = run_convergence_study(cfg);
    CHECK(results_text(a) == results_text(b));

    REQUIRE(a.rows.size() == 3);
    CHECK(a.reference_slope == doctest::Approx(-2.0 / 3.0));
    for (const auto& row : a.rows) {
        CHECK(row.total == row.variance_term + row.bias_term);
        CHECK(row.bias_term <= row.bias_bound);
        CHECK(row.n_indices >= 1);
    }
    CHECK(a.bias_violations == 0);
    REQUIRE(a.fits.size() == 1);
    REQUIRE(a.fits[0].fit.has_value());
    CHECK(a.fits[0].fit->slope < 0.0);
    CHECK(a.first_estimates.size() == 3);

    cfg.seed = 10;
    CHECK(results_text(run_convergence_study(cfg)) != results_text(a));
}

TEST_CASE("coefficient study")
{
    StudyConfig cfg;
    cfg.m_grid = {100, 1000, 10000};
    cfg.replicates = 30;
    cfg.bootstrap = 50;
    cfg.indices = {"0", "1"};
    const auto r = run_coefficient_study(cfg);
    REQUIRE(r.fits.size() == 2);
    CHECK_FALSE(r.fits[0].fit.has_value());
    CHECK(r.fits[0].note.find("skipped") != std::string::npos);
    REQUIRE(r.fits[1].fit.has_value());
    CHECK(r.fits[1].fit->slope < -0.5);
    for (const auto& row : r.rows) CHECK(row.total == row.variance_term + row.bias_term);
    const auto checks = check_study(r);
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].name == "rate 1");
    CHECK(results_text(r).find("# fit index=0 skipped: all errors are zero") != std::string::npos);

    cfg.indices.clear();
    const auto d = run_coefficient_study(cfg);
    REQUIRE(d.fits.size() == 1);
    CHECK(d.fits[0].index == "1");
}

TEST_CASE("study outputs on disk")
{
    StudyConfig cfg = small_density_config();
    cfg.out_dir = std::filesystem::temp_directory_path() / "decompound_harness_test";
    cfg.write_coefficients = true;
    cfg.write_svg = true;
    std::filesystem::remove_all(cfg.out_dir);
    const auto r = run_convergence_study(cfg);
    write_study_outputs(r);
    for (const char* name : {"results.csv", "plotdata.csv", "chart.svg", "coefficients_m100.csv",
                             "coefficients_m1600.csv"}) {
        CHECK(std::filesystem::exists(cfg.out_dir / name));
    }
    std::ifstream svg(cfg.out_dir / "chart.svg");
    std::stringstream text;
    text << svg.rdbuf();
    CHECK(text.str().rfind("<svg", 0) == 0);
    CHECK(text.str().find("</svg>") != std::string::npos);

    std::ifstream res(cfg.out_dir / "results.csv");
    std::stringstream rtext;
    rtext << res.rdbuf();
    CHECK(rtext.str() == results_text(r));
    CHECK(rtext.str().find("# law = heat:tau=0.3") != std::string::npos);
    std::filesystem::remove_all(cfg.out_dir);
}
