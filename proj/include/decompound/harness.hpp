#pragma once

#include "decompound/coeffs.hpp"
#include "decompound/density.hpp"
#include "decompound/simulate.hpp"
#include "decompound/spaces.hpp"
#include "decompound/steplaws.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace decompound {

/**
 * Settings for a Monte Carlo study. Every field has a default and all of them
 * are echoed into the output files.
 */
struct StudyConfig {
    std::string space = "circle";
    std::string law = "wn:sigma=0.7,mean=0";
    double intensity = 1.0;
    double time = 1.0;
    SamplingMode mode = SamplingMode::IID;
    /// Noise applied to the observations.
    double noise_tau = 0.0;

    EstimatorVariant variant = EstimatorVariant::RealLog;
    double delta = 1.0;
    /// Noise scale assumed by the estimator; defaults to noise_tau.
    std::optional<double> estimator_tau;

    double s = 2.0;
    double scale = 1.0;
    std::vector<std::size_t> m_grid{100, 1000, 10000, 100000};
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    /// Index labels for the coefficient study; empty = lowest nonzero casimir.
    std::vector<std::string> indices;

    /// Casimir thresholds for the census.
    std::vector<double> thresholds{100, 215.443469003188, 464.158883361278, 1000, 2154.43469003188,
                                   4641.58883361278, 10000};

    std::filesystem::path out_dir = "out";
    unsigned threads = 0;
    bool write_coefficients = false;
    bool write_svg = false;
    std::size_t bootstrap = 1000;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    [[nodiscard]] Space parsed_space() const;
    [[nodiscard]] StepLaw parsed_law() const;
    [[nodiscard]] ProcessConfig process() const;
    [[nodiscard]] EstimatorConfig estimator() const;
    /// "key = value" lines covering every field, in a fixed order.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Sets one field from text; throws ConfigError on unknown keys or bad values.
void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view value);

/**
 * Reads an INI-style file ([section] headers, key = value lines, whole-line
 * '#' or ';' comments; index labels may contain ';'). Section names are only for grouping. Errors carry the file
 * name, line and key.
 */
StudyConfig load_study_config(const std::filesystem::path& path, StudyConfig base = {});
StudyConfig parse_study_config(std::istream& in, const std::string& source, StudyConfig base = {});

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// OLS on (x, y); needs >= 3 points and two distinct abscissae. The CI is the t-based 95% interval.
RateFit fit_rate(std::span<const double> x, std::span<const double> y);

/**
 * OLS of log(mean error) on log(m) with a 95% percentile bootstrap CI:
 * each resample redraws the replicates at every m with replacement.
 * errors[i] holds the replicate errors at m[i].
 */
RateFit fit_rate_bootstrap(std::span<const std::size_t> m, const std::vector<std::vector<double>>& errors,
                           std::size_t resamples, std::uint64_t seed);

struct StudyRow {
    std::size_t m = 0;
    std::string index;  ///< label for coefficient studies, "all" for density studies
    double cutoff = 0.0;
    std::size_t n_indices = 0;
    double variance_term = 0.0;
    double bias_term = 0.0;
    double total = 0.0;
    double standard_error = 0.0;
    double bias_bound = 0.0;  ///< T^-s ||f||_s^2 (density studies)
    double truncated_fraction = 0.0;
};

struct SeriesFit {
    std::string index;
    std::optional<RateFit> fit;  ///< empty when skipped
    std::string note;
};

struct CensusFit {
    std::vector<CensusRow> rows;
    RateFit spherical;
    RateFit weighted;
    double spherical_reference = 0.0;  ///< r/2
    double weighted_reference = 0.0;   ///< d/2
};

struct StudyResult {
    std::string kind;  ///< "density", "coefficient" or "census"
    StudyConfig config;
    std::vector<StudyRow> rows;
    std::vector<SeriesFit> fits;
    double reference_slope = 0.0;
    std::optional<CensusFit> census;
    /// Estimates of the first replicate at each m, in m_grid order.
    std::vector<CoefficientVector> first_estimates;
    /// Replicates whose bias term exceeded the bound (density studies).
    std::size_t bias_violations = 0;
};

/// Density-level MSE over m_grid: reconstruct, l2_error against the truth, average, fit.
StudyResult run_convergence_study(const StudyConfig& cfg);

/// Per-index coefficient MSE over m_grid with a rate fit per index.
StudyResult run_coefficient_study(const StudyConfig& cfg);

/// Weyl census over cfg.thresholds with log-log exponent fits.
CensusFit run_census(const Space& space, std::span<const double> thresholds);
StudyResult run_census_study(const StudyConfig& cfg);

struct AssertionOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Checks used by --assert: slope windows and the bias inequality.
std::vector<AssertionOutcome> check_study(const StudyResult& result);

void write_results_csv(std::ostream& out, const StudyResult& result);
void write_plotdata_csv(std::ostream& out, const StudyResult& result);
void write_svg_chart(std::ostream& out, const StudyResult& result);

/// Writes results.csv, plotdata.csv and the optional files into cfg.out_dir.
void write_study_outputs(const StudyResult& result);

}  // namespace decompound
