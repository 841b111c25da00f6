#include "decompound/harness.hpp"

#include "decompound/error.hpp"
#include "decompound/format.hpp"
#include "decompound/parallel.hpp"
#include "decompound/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace decompound {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_list(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(sep, start);
        const auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!piece.empty()) out.emplace_back(piece);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double to_double(std::string_view key, std::string_view value)
{
    double v = 0.0;
    if (!parse_double(value, v) || !std::isfinite(v)) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
    }
    return v;
}

std::uint64_t to_count(std::string_view key, std::string_view value)
{
    const double v = to_double(key, value);
    if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
        throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(value) + "'");
    }
    return static_cast<std::uint64_t>(v);
}

bool to_bool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Last index of the lowest nonzero casimir shell (n = 1 on the circle).
SpectralIndex lowest_nontrivial(const Space& space)
{
    const auto idx = spectrum(space, 4.0 * space.dim() + 4.0);
    double shell = 0.0;
    for (const auto& i : idx) {
        if (i.casimir > 0.0) {
            shell = i.casimir;
            break;
        }
    }
    SpectralIndex pick;
    for (const auto& i : idx) {
        if (i.casimir == shell) pick = i;
    }
    return pick;
}

bool is_real_variant(EstimatorVariant v)
{
    return v == EstimatorVariant::RealLog || v == EstimatorVariant::RealLogUntruncated;
}

double percentile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

void StudyConfig::validate() const
{
    Space sp = parsed_space();
    StepLaw lw = parsed_law();
    try {
        process().validate();
        estimator().validate();
        SobolevSpec{s, std::nullopt}.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(scale > 0.0)) throw ConfigError("scale: must be positive");
    if (m_grid.size() < 3) throw ConfigError("m_grid: need at least 3 values for a rate fit");
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] == 0) throw ConfigError("m_grid: values must be positive");
        if (i && m_grid[i] <= m_grid[i - 1]) throw ConfigError("m_grid: values must be strictly increasing");
    }
    if (replicates < 2) throw ConfigError("replicates: need at least 2");
    if (bootstrap < 10) throw ConfigError("bootstrap: need at least 10 resamples");
    if (is_real_variant(variant) && !lw.inverse_invariant()) {
        throw ConfigError("estimator: " + to_string(variant) + " needs an inverse-invariant law, '" + law +
                          "' is not (use complex)");
    }
    for (const auto& label : indices) {
        try {
            (void)parse_index(sp, label);
        } catch (const std::exception& e) {
            throw ConfigError("indices: " + std::string(e.what()));
        }
    }
    for (double t : thresholds) {
        if (!(t > 0.0)) throw ConfigError("thresholds: values must be positive");
    }
}

Space StudyConfig::parsed_space() const
{
    try {
        return parse_space(space);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("space: " + std::string(e.what()));
    }
}

StepLaw StudyConfig::parsed_law() const
{
    const Space sp = parsed_space();
    try {
        return parse_law(sp, law);
    } catch (const ConfigError& e) {
        throw ConfigError("law: " + std::string(e.what()));
    } catch (const std::exception& e) {
        throw ConfigError("law: " + std::string(e.what()));
    }
}

ProcessConfig StudyConfig::process() const
{
    ProcessConfig p{parsed_law()};
    p.intensity = intensity;
    p.time = time;
    p.mode = mode;
    p.noise_tau = noise_tau;
    p.seed = seed;
    return p;
}

EstimatorConfig StudyConfig::estimator() const
{
    EstimatorConfig e;
    e.variant = variant;
    e.delta = delta;
    e.intensity = intensity;
    e.time = time;
    e.noise_tau = estimator_tau.value_or(noise_tau);
    return e;
}

std::vector<std::pair<std::string, std::string>> StudyConfig::echo() const
{
    std::vector<std::string> grid;
    for (auto m : m_grid) grid.push_back(std::to_string(m));
    std::vector<std::string> ts;
    for (double t : thresholds) ts.push_back(format_double(t));
    return {
        {"space", space},
        {"law", law},
        {"intensity", format_double(intensity)},
        {"time", format_double(time)},
        {"mode", to_string(mode)},
        {"noise_tau", format_double(noise_tau)},
        {"estimator", to_string(variant)},
        {"delta", format_double(delta)},
        {"estimator_tau", format_double(estimator_tau.value_or(noise_tau))},
        {"s", format_double(s)},
        {"scale", format_double(scale)},
        {"m_grid", join(grid, ",")},
        {"replicates", std::to_string(replicates)},
        {"seed", std::to_string(seed)},
        {"indices", indices.empty() ? "auto" : join(indices, " ")},
        {"thresholds", join(ts, ",")},
        {"bootstrap", std::to_string(bootstrap)},
    };
}

void apply_setting(StudyConfig& cfg, std::string_view key, std::string_view raw)
{
    const auto value = trim(raw);
    const std::string v(value);
    if (key == "space") {
        cfg.space = v;
    } else if (key == "law") {
        cfg.law = v;
    } else if (key == "intensity") {
        cfg.intensity = to_double(key, value);
    } else if (key == "time") {
        cfg.time = to_double(key, value);
    } else if (key == "mode") {
        try {
            cfg.mode = parse_sampling_mode(value);
        } catch (const std::exception& e) {
            throw ConfigError("mode: " + std::string(e.what()));
        }
    } else if (key == "noise_tau") {
        cfg.noise_tau = to_double(key, value);
    } else if (key == "estimator") {
        cfg.variant = parse_variant(value);
    } else if (key == "delta") {
        cfg.delta = to_double(key, value);
    } else if (key == "estimator_tau") {
        if (value == "auto") {
            cfg.estimator_tau.reset();
        } else {
            cfg.estimator_tau = to_double(key, value);
        }
    } else if (key == "s") {
        cfg.s = to_double(key, value);
    } else if (key == "scale") {
        cfg.scale = to_double(key, value);
    } else if (key == "m_grid") {
        cfg.m_grid.clear();
        for (const auto& part : split_list(value, ',')) cfg.m_grid.push_back(to_count(key, part));
    } else if (key == "replicates") {
        cfg.replicates = to_count(key, value);
    } else if (key == "seed") {
        cfg.seed = to_count(key, value);
    } else if (key == "indices") {
        cfg.indices.clear();
        if (value != "auto") {
            std::istringstream in(v);
            std::string label;
            while (in >> label) cfg.indices.push_back(label);
        }
    } else if (key == "thresholds") {
        cfg.thresholds.clear();
        for (const auto& part : split_list(value, ',')) cfg.thresholds.push_back(to_double(key, part));
    } else if (key == "out") {
        cfg.out_dir = v;
    } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(to_count(key, value));
    } else if (key == "coefficients") {
        cfg.write_coefficients = to_bool(key, value);
    } else if (key == "svg") {
        cfg.write_svg = to_bool(key, value);
    } else if (key == "bootstrap") {
        cfg.bootstrap = to_count(key, value);
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

StudyConfig parse_study_config(std::istream& in, const std::string& source, StudyConfig base)
{
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = source + ":" + std::to_string(lineno);
        auto text = trim(line);
        if (lineno == 1 && text.substr(0, 3) == "\xEF\xBB\xBF") text = trim(text.substr(3));
        if (text.empty() || text.front() == '#' || text.front() == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = std::string(trim(text.substr(1, text.size() - 2)));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const auto key = trim(text.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": missing key");
        try {
            apply_setting(base, key, text.substr(eq + 1));
        } catch (const std::exception& e) {
            const auto prefix = section.empty() ? std::string() : "[" + section + "] ";
            throw ConfigError(where + ": " + prefix + e.what());
        }
    }
    return base;
}

StudyConfig load_study_config(const std::filesystem::path& path, StudyConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_study_config(in, path.string(), std::move(base));
}

// ---------------------------------------------------------------------------
// rate fits

RateFit fit_rate(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size()) throw DomainError("fit_rate: x and y differ in length");
    if (n < 3) throw DomainError("fit_rate: need at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("fit_rate: non-finite point");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * static_cast<double>(n))) {
        throw DomainError("fit_rate: degenerate abscissae");
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        sse += r * r;
    }
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double q = boost::math::quantile(dist, 0.975);
    fit.ci_low = fit.slope - q * se;
    fit.ci_high = fit.slope + q * se;
    return fit;
}

RateFit fit_rate_bootstrap(std::span<const std::size_t> m, const std::vector<std::vector<double>>& errors,
                           std::size_t resamples, std::uint64_t seed)
{
    if (m.size() != errors.size()) throw DomainError("fit_rate_bootstrap: grid and errors differ in length");
    std::vector<double> x(m.size());
    std::vector<double> y(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (errors[i].empty()) throw DomainError("fit_rate_bootstrap: no replicates at m = " + std::to_string(m[i]));
        x[i] = std::log(static_cast<double>(m[i]));
        const double e = mean_of(errors[i]);
        if (!(e > 0.0)) throw DomainError("fit_rate_bootstrap: zero mean error at m = " + std::to_string(m[i]));
        y[i] = std::log(e);
    }
    RateFit fit = fit_rate(x, y);
    if (resamples == 0) return fit;

    Rng rng = Rng::stream(seed, {0xb0075ULL});
    std::vector<double> slopes;
    slopes.reserve(resamples);
    std::vector<double> yb(m.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        bool ok = true;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto& e = errors[i];
            double s = 0.0;
            for (std::size_t k = 0; k < e.size(); ++k) {
                s += e[static_cast<std::size_t>(rng.uniform() * static_cast<double>(e.size()))];
            }
            if (!(s > 0.0)) ok = false;
            yb[i] = std::log(s / static_cast<double>(e.size()));
        }
        if (ok) slopes.push_back(fit_rate(x, yb).slope);
    }
    if (slopes.size() >= 2) {
        fit.ci_low = percentile(slopes, 0.025);
        fit.ci_high = percentile(slopes, 0.975);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// studies

StudyResult run_convergence_study(const StudyConfig& cfg)
{
    cfg.validate();
    const ProcessConfig process = cfg.process();
    const EstimatorConfig ecfg = cfg.estimator();
    const Space& space = process.space();
    const SobolevSpec spec{cfg.s, std::nullopt};

    const double top_cutoff = smoothing_cutoff(cfg.m_grid.back(), cfg.s, space, cfg.scale);
    const TruthSpectrum truth = truth_spectrum(process.law, top_cutoff);
    double norm_sq = std::numeric_limits<double>::quiet_NaN();
    try {
        const double n = sobolev_norm(truth.coeffs, space, cfg.s);
        norm_sq = n * n;
    } catch (const NumericalError&) {
        // Not in H^s: the bias inequality has no finite right-hand side.
    }

    StudyResult result;
    result.kind = "density";
    result.config = cfg;
    result.reference_slope = -2.0 * cfg.s / (2.0 * cfg.s + space.dim());

    std::vector<std::vector<double>> totals;
    for (const std::size_t m : cfg.m_grid) {
        const std::size_t reps = cfg.replicates;
        std::vector<L2Error> errs(reps);
        std::vector<double> trunc(reps);
        std::vector<std::optional<DensityEstimate>> first(1);
        parallel_for(reps, cfg.threads, [&](std::size_t r) {
            ProcessConfig rep = process;
            rep.seed = derive_seed(cfg.seed, {m, r});
            const auto obs = sample_compound(rep, m, 1);
            auto est = reconstruct(obs, ecfg, spec, cfg.scale, 1);
            errs[r] = l2_error(est, truth.coeffs);
            std::size_t t = 0;
            for (const auto& e : est.coeffs.entries()) t += e.truncated ? 1 : 0;
            trunc[r] = est.coeffs.empty() ? 0.0 : static_cast<double>(t) / static_cast<double>(est.coeffs.size());
            if (r == 0) first[0] = std::move(est);
        });

        StudyRow row;
        row.m = m;
        row.index = "all";
        row.cutoff = first[0]->cutoff;
        row.n_indices = first[0]->coeffs.size();
        std::vector<double> v(reps), b(reps), tot(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            v[r] = errs[r].variance_term;
            b[r] = errs[r].bias_term;
            tot[r] = errs[r].total;
        }
        row.variance_term = mean_of(v);
        row.bias_term = mean_of(b);
        row.total = row.variance_term + row.bias_term;
        row.standard_error = jackknife_stderr(tot);
        row.bias_bound = std::pow(row.cutoff, -cfg.s) * norm_sq;
        row.truncated_fraction = mean_of(trunc);
        if (std::isfinite(row.bias_bound)) {
            for (double x : b) {
                if (!(x <= row.bias_bound)) ++result.bias_violations;
            }
        }
        result.rows.push_back(row);
        result.first_estimates.push_back(first[0]->coeffs);
        totals.push_back(std::move(tot));
    }

    SeriesFit sf{"all", std::nullopt, {}};
    try {
        sf.fit = fit_rate_bootstrap(cfg.m_grid, totals, cfg.bootstrap, cfg.seed);
    } catch (const DomainError& e) {
        sf.note = e.what();
    }
    result.fits.push_back(sf);
    return result;
}

StudyResult run_coefficient_study(const StudyConfig& cfg)
{
    cfg.validate();
    const ProcessConfig process = cfg.process();
    const EstimatorConfig ecfg = cfg.estimator();
    const Space& space = process.space();

    std::vector<SpectralIndex> indices;
    if (cfg.indices.empty()) {
        indices.push_back(lowest_nontrivial(space));
    } else {
        for (const auto& label : cfg.indices) indices.push_back(parse_index(space, label));
    }
    const auto targets = step_transform(process.law, indices);
    const bool sym = ecfg.wants_symmetrized() && process.law.inverse_invariant();
    const std::size_t n_idx = indices.size();

    StudyResult result;
    result.kind = "coefficient";
    result.config = cfg;
    result.reference_slope = -1.0;

    // errors[i][g] = replicate squared errors for index i at grid point g
    std::vector<std::vector<std::vector<double>>> errors(n_idx);
    for (std::size_t g = 0; g < cfg.m_grid.size(); ++g) {
        const std::size_t m = cfg.m_grid[g];
        const std::size_t reps = cfg.replicates;
        std::vector<CoefficientEstimate> est(reps * n_idx);
        parallel_for(reps, cfg.threads, [&](std::size_t r) {
            ProcessConfig rep = process;
            rep.seed = derive_seed(cfg.seed, {m, r});
            const auto obs = sample_compound(rep, m, 1);
            const auto nu = empirical_transform(obs, indices, sym, 1);
            for (std::size_t i = 0; i < n_idx; ++i) est[r * n_idx + i] = estimate_coefficient(nu, indices[i], ecfg);
        });

        std::vector<CoefficientEntry> first;
        for (std::size_t i = 0; i < n_idx; ++i) {
            const auto target = targets.entries()[i].value;
            std::vector<double> sq(reps);
            std::complex<double> mean = 0.0;
            double trunc = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& e = est[r * n_idx + i];
                sq[r] = std::norm(e.value - target);
                mean += e.value;
                trunc += e.truncated ? 1.0 : 0.0;
            }
            mean /= static_cast<double>(reps);
            double var = 0.0;
            for (std::size_t r = 0; r < reps; ++r) var += std::norm(est[r * n_idx + i].value - mean);

            StudyRow row;
            row.m = m;
            row.index = indices[i].label_string();
            row.n_indices = 1;
            row.variance_term = var / static_cast<double>(reps);
            row.bias_term = std::norm(mean - target);
            row.total = row.variance_term + row.bias_term;
            row.standard_error = jackknife_stderr(sq);
            row.truncated_fraction = trunc / static_cast<double>(reps);
            result.rows.push_back(row);
            errors[i].push_back(std::move(sq));
            first.push_back({indices[i], est[i].value, est[i].truncated});
        }
        result.first_estimates.emplace_back(std::move(first));
    }

    for (std::size_t i = 0; i < n_idx; ++i) {
        SeriesFit sf{indices[i].label_string(), std::nullopt, {}};
        bool all_zero = true;
        for (const auto& col : errors[i]) {
            for (double e : col) all_zero = all_zero && e == 0.0;
        }
        if (all_zero) {
            sf.note = "skipped: all errors are zero";
        } else {
            try {
                sf.fit = fit_rate_bootstrap(cfg.m_grid, errors[i], cfg.bootstrap, derive_seed(cfg.seed, {i}));
            } catch (const DomainError& e) {
                sf.note = std::string("skipped: ") + e.what();
            }
        }
        result.fits.push_back(sf);
    }
    return result;
}

CensusFit run_census(const Space& space, std::span<const double> thresholds)
{
    if (thresholds.size() < 3) throw DomainError("run_census: need at least 3 thresholds");
    const auto [lo, hi] = std::minmax_element(thresholds.begin(), thresholds.end());
    if (!(*lo > 0.0) || *hi / *lo < 100.0 * (1.0 - 1e-12)) {
        throw DomainError("run_census: thresholds must be positive and span at least two decades");
    }
    CensusFit out;
    out.rows = weyl_census(space, thresholds);
    std::vector<double> x, ys, yw;
    for (const auto& row : out.rows) {
        x.push_back(std::log(row.threshold));
        ys.push_back(std::log(static_cast<double>(row.count_spherical)));
        yw.push_back(std::log(static_cast<double>(row.count_weighted)));
    }
    out.spherical = fit_rate(x, ys);
    out.weighted = fit_rate(x, yw);
    out.spherical_reference = 0.5 * space.rank();
    out.weighted_reference = 0.5 * space.dim();
    return out;
}

StudyResult run_census_study(const StudyConfig& cfg)
{
    StudyResult result;
    result.kind = "census";
    result.config = cfg;
    try {
        result.census = run_census(cfg.parsed_space(), cfg.thresholds);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("thresholds: ") + e.what());
    }
    return result;
}

std::vector<AssertionOutcome> check_study(const StudyResult& result)
{
    std::vector<AssertionOutcome> out;
    auto window = [&](const std::string& name, double value, double centre, double tol) {
        const bool ok = std::abs(value - centre) <= tol;
        out.push_back({name, ok,
                       "slope " + format_double(value) + " vs " + format_double(centre) + " +- " + format_double(tol)});
    };
    if (result.kind == "census" && result.census) {
        const auto& c = *result.census;
        window("census spherical exponent", c.spherical.slope, c.spherical_reference, 0.1);
        window("census weighted exponent", c.weighted.slope, c.weighted_reference, 0.1);
        return out;
    }
    const double tol = result.kind == "density" ? 0.15 : 0.2;
    for (const auto& f : result.fits) {
        if (!f.fit) continue;
        window("rate " + f.index, f.fit->slope, result.reference_slope, tol);
    }
    if (result.kind == "density") {
        out.push_back({"bias inequality", result.bias_violations == 0,
                       std::to_string(result.bias_violations) + " replicate(s) above T^-s ||f||_s^2"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// output

void write_results_csv(std::ostream& out, const StudyResult& result)
{
    out << "# decompound study kind=" << result.kind << '\n';
    for (const auto& [k, v] : result.config.echo()) out << "# " << k << " = " << v << '\n';
    if (result.census) {
        const auto& c = *result.census;
        out << "# fit spherical slope=" << format_double(c.spherical.slope)
            << " intercept=" << format_double(c.spherical.intercept) << " ci_low=" << format_double(c.spherical.ci_low)
            << " ci_high=" << format_double(c.spherical.ci_high)
            << " reference=" << format_double(c.spherical_reference) << '\n';
        out << "# fit weighted slope=" << format_double(c.weighted.slope)
            << " intercept=" << format_double(c.weighted.intercept) << " ci_low=" << format_double(c.weighted.ci_low)
            << " ci_high=" << format_double(c.weighted.ci_high)
            << " reference=" << format_double(c.weighted_reference) << '\n';
        out << "threshold,count_spherical,count_weighted\n";
        for (const auto& row : c.rows) {
            out << format_double(row.threshold) << ',' << row.count_spherical << ',' << row.count_weighted << '\n';
        }
        return;
    }
    for (const auto& f : result.fits) {
        out << "# fit index=" << f.index;
        if (f.fit) {
            out << " slope=" << format_double(f.fit->slope) << " intercept=" << format_double(f.fit->intercept)
                << " ci_low=" << format_double(f.fit->ci_low) << " ci_high=" << format_double(f.fit->ci_high);
        } else {
            out << " " << f.note;
        }
        out << " reference=" << format_double(result.reference_slope) << '\n';
    }
    out << "m,index,cutoff,n_indices,variance_term,bias_term,total,stderr,bias_bound,truncated_fraction\n";
    for (const auto& r : result.rows) {
        out << r.m << ',' << r.index << ',' << format_double(r.cutoff) << ',' << r.n_indices << ','
            << format_double(r.variance_term) << ',' << format_double(r.bias_term) << ',' << format_double(r.total)
            << ',' << format_double(r.standard_error) << ',' << format_double(r.bias_bound) << ','
            << format_double(r.truncated_fraction) << '\n';
    }
}

namespace {

struct PlotSeries {
    std::string name;
    std::vector<double> x, y, fitted, reference;
};

std::vector<PlotSeries> plot_series(const StudyResult& result)
{
    std::vector<PlotSeries> out;
    if (result.census) {
        const auto& c = *result.census;
        PlotSeries s{"spherical", {}, {}, {}, {}};
        PlotSeries w{"weighted", {}, {}, {}, {}};
        for (const auto& row : c.rows) {
            const double t = row.threshold;
            s.x.push_back(t);
            w.x.push_back(t);
            s.y.push_back(static_cast<double>(row.count_spherical));
            w.y.push_back(static_cast<double>(row.count_weighted));
            s.fitted.push_back(std::exp(c.spherical.intercept) * std::pow(t, c.spherical.slope));
            w.fitted.push_back(std::exp(c.weighted.intercept) * std::pow(t, c.weighted.slope));
            const double t0 = c.rows.front().threshold;
            s.reference.push_back(static_cast<double>(c.rows.front().count_spherical) *
                                  std::pow(t / t0, c.spherical_reference));
            w.reference.push_back(static_cast<double>(c.rows.front().count_weighted) *
                                  std::pow(t / t0, c.weighted_reference));
        }
        out.push_back(std::move(s));
        out.push_back(std::move(w));
        return out;
    }
    for (const auto& f : result.fits) {
        PlotSeries p{f.index, {}, {}, {}, {}};
        for (const auto& r : result.rows) {
            if (r.index != f.index) continue;
            const double m = static_cast<double>(r.m);
            p.x.push_back(m);
            p.y.push_back(r.total);
            p.fitted.push_back(f.fit ? std::exp(f.fit->intercept) * std::pow(m, f.fit->slope)
                                     : std::numeric_limits<double>::quiet_NaN());
        }
        for (double m : p.x) p.reference.push_back(p.y.front() * std::pow(m / p.x.front(), result.reference_slope));
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

void write_plotdata_csv(std::ostream& out, const StudyResult& result)
{
    out << (result.census ? "threshold" : "m") << ",series,value,fitted,reference\n";
    for (const auto& s : plot_series(result)) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << format_double(s.x[i]) << ',' << s.name << ',' << format_double(s.y[i]) << ','
                << format_double(s.fitted[i]) << ',' << format_double(s.reference[i]) << '\n';
        }
    }
}

void write_svg_chart(std::ostream& out, const StudyResult& result)
{
    const auto series = plot_series(result);
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            for (double v : {s.y[i], s.fitted[i], s.reference[i]}) {
                if (!(v > 0.0) || !std::isfinite(v)) continue;
                y0 = std::min(y0, std::log10(v));
                y1 = std::max(y1, std::log10(v));
            }
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
        }
    }
    if (!std::isfinite(x0) || !std::isfinite(y0)) {
        x0 = y0 = 0.0;
        x1 = y1 = 1.0;
    }
    if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-9) y1 = y0 + 1.0;
    const double W = 640, H = 480, L = 70, R = 20, T = 30, B = 50;
    auto px = [&](double v) { return L + (std::log10(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (std::log10(v) - y0) / (y1 - y0) * (H - T - B); };
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(2);
        s << std::fixed << v;
        return s.str();
    };
    auto polyline = [&](const std::vector<double>& xs, const std::vector<double>& ys, const char* style) {
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!(ys[i] > 0.0) || !std::isfinite(ys[i])) continue;
            pts += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
        }
        if (!pts.empty()) out << "<polyline fill=\"none\" " << style << " points=\"" << pts << "\"/>\n";
    };

    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = static_cast<int>(std::ceil(x0)); k <= static_cast<int>(std::floor(x1)); ++k) {
        const double x = px(std::pow(10.0, k));
        out << "<text x=\"" << num(x) << "\" y=\"" << H - B + 18 << "\" font-size=\"12\" text-anchor=\"middle\">1e"
            << k << "</text>\n";
    }
    for (int k = static_cast<int>(std::ceil(y0)); k <= static_cast<int>(std::floor(y1)); ++k) {
        const double y = py(std::pow(10.0, k));
        out << "<text x=\"" << L - 6 << "\" y=\"" << num(y + 4) << "\" font-size=\"12\" text-anchor=\"end\">1e" << k
            << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
        << (result.census ? "casimir threshold T" : "m") << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string c = colours[k % 5];
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.y[i] > 0.0)) continue;
            out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"4\" fill=\"" << c
                << "\"/>\n";
        }
        polyline(s.x, s.fitted, ("stroke=\"" + c + "\"").c_str());
        polyline(s.x, s.reference, ("stroke=\"" + c + "\" stroke-dasharray=\"6,4\"").c_str());
        out << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 16 * static_cast<int>(k) << "\" font-size=\"12\" fill=\""
            << c << "\">" << s.name << " (solid: fit, dashed: reference)</text>\n";
    }
    out << "</svg>\n";
}

void write_study_outputs(const StudyResult& result)
{
    const auto& dir = result.config.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("results.csv");
        write_results_csv(f, result);
    }
    {
        auto f = open("plotdata.csv");
        write_plotdata_csv(f, result);
    }
    if (result.config.write_svg) {
        auto f = open("chart.svg");
        write_svg_chart(f, result);
    }
    if (result.config.write_coefficients) {
        for (std::size_t g = 0; g < result.first_estimates.size() && g < result.config.m_grid.size(); ++g) {
            auto f = open("coefficients_m" + std::to_string(result.config.m_grid[g]) + ".csv");
            write_coefficients_csv(f, result.first_estimates[g]);
        }
    }
}

}  // namespace decompound
