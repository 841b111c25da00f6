#include "decompound/steplaws.hpp"

#include "decompound/error.hpp"
#include "decompound/format.hpp"
#include "decompound/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace decompound {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSeriesTail = 1e-14;
constexpr int kMaxSeriesDegree = 20000;
constexpr int kTableIntervals = 1 << 12;

/// Wrapped Gaussian density of one angle relative to d(theta)/2pi.
double wrapped_density_1d(double theta, double sigma, double mean)
{
    const double x = std::remainder(theta - mean, kTwoPi);
    if (sigma < 2.5) {
        const int k_max = static_cast<int>(std::ceil(7.0 * sigma / kTwoPi)) + 1;
        double s = 0.0;
        for (int k = -k_max; k <= k_max; ++k) {
            const double y = x + kTwoPi * k;
            s += std::exp(-0.5 * y * y / (sigma * sigma));
        }
        return s * kTwoPi / (sigma * std::sqrt(kTwoPi));
    }
    double s = 1.0;
    for (int n = 1;; ++n) {
        const double term = std::exp(-0.5 * n * n * sigma * sigma);
        s += 2.0 * term * std::cos(n * x);
        if (term < 1e-18) break;
    }
    return s;
}

double kv_param(const std::map<std::string, double, std::less<>>& kv, std::string_view key, std::string_view law,
                const double* fallback = nullptr)
{
    const auto it = kv.find(key);
    if (it == kv.end()) {
        if (fallback) return *fallback;
        throw ConfigError("law '" + std::string(law) + "': missing parameter '" + std::string(key) + "'");
    }
    return it->second;
}

}  // namespace

double sine_power_integral(int n, double theta)
{
    if (n < 0) throw DomainError("sine_power_integral: negative power");
    if (n == 0) return theta;
    const double half = std::sin(0.5 * theta);
    if (n == 1) return 2.0 * half * half;  // 1 - cos(theta) without cancellation
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return -c * std::pow(s, n - 1) / n + (n - 1.0) / n * sine_power_integral(n - 2, theta);
}

namespace detail {

/**
 * Tabulated radial CDF on 2^12 equal intervals of [0, pi] with exact node
 * values and slopes, interpolated by a Fritsch–Carlson-limited cubic Hermite.
 * Inversion error stays well below 1e-6 rad for the heat laws used here.
 */
struct RadialTable {
    double step = 0.0;
    std::vector<double> cdf;
    std::vector<double> slope;

    template <typename Cdf, typename Pdf>
    RadialTable(Cdf&& cdf_fn, Pdf&& pdf_fn)
    {
        const int n = kTableIntervals;
        step = kPi / n;
        cdf.resize(n + 1);
        slope.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            const double th = i * step;
            cdf[i] = cdf_fn(th);
            slope[i] = std::max(0.0, pdf_fn(th));
        }
        cdf[0] = 0.0;
        const double total = cdf[n];
        for (auto& v : cdf) v /= total;
        for (auto& v : slope) v /= total;
        for (int i = 1; i <= n; ++i) cdf[i] = std::max(cdf[i], cdf[i - 1]);
        cdf[n] = 1.0;

        for (int i = 0; i < n; ++i) {
            const double secant = (cdf[i + 1] - cdf[i]) / step;
            if (secant <= 0.0) {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            const double a = slope[i] / secant;
            const double b = slope[i + 1] / secant;
            const double r2 = a * a + b * b;
            if (r2 > 9.0) {
                const double t = 3.0 / std::sqrt(r2);
                slope[i] = t * a * secant;
                slope[i + 1] = t * b * secant;
            }
        }
    }

    [[nodiscard]] double invert(double u) const
    {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t i = static_cast<std::size_t>(std::distance(cdf.begin(), it));
        i = std::clamp<std::size_t>(i, 1, cdf.size() - 1) - 1;
        const double f0 = cdf[i];
        const double f1 = cdf[i + 1];
        if (f1 <= f0) return i * step;
        const double m0 = slope[i] * step;
        const double m1 = slope[i + 1] * step;
        auto hermite = [&](double s) {
            const double s2 = s * s;
            const double s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * m1;
        };
        auto hermite_d = [&](double s) {
            const double s2 = s * s;
            return (6 * s2 - 6 * s) * f0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * f1 + (3 * s2 - 2 * s) * m1;
        };
        double lo = 0.0;
        double hi = 1.0;
        double s = std::clamp((u - f0) / (f1 - f0), 0.0, 1.0);
        for (int iter = 0; iter < 60; ++iter) {
            const double g = hermite(s) - u;
            if (g > 0) hi = s; else lo = s;
            const double d = hermite_d(s);
            double next = d > 0 ? s - g / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) < 1e-15) {
                s = next;
                break;
            }
            s = next;
        }
        return (i + s) * step;
    }
};

}  // namespace detail

StepLaw::StepLaw(LawKind kind, Space space, double a, double b) : kind_(kind), space_(space), a_(a), b_(b) {}

StepLaw StepLaw::heat(const Space& space, double tau0)
{
    if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw DomainError("heat law: tau0 must be positive");
    StepLaw law(LawKind::HeatZonal, space, tau0, 0.0);
    if (space.kind() != SpaceKind::Sphere) return law;

    for (int l = 0;; ++l) {
        if (l > kMaxSeriesDegree) throw DomainError("heat law: tau0 too small for the series truncation");
        const auto idx = make_index(space, {l});
        const double term = static_cast<double>(idx.multiplicity) * std::exp(-idx.casimir * tau0);
        if (l > 0 && term < kSeriesTail) break;
        law.series_.push_back(term);
    }
    const StepLaw& ref = law;
    law.table_ = std::make_shared<const detail::RadialTable>(
        [&ref](double th) { return ref.radial_cdf(th); },
        [&ref](double th) {
            const int dd = ref.space_.dim();
            return ref.radial_density(th) * std::pow(std::sin(th), dd - 1) / sine_power_integral(dd - 1, kPi);
        });
    return law;
}

StepLaw StepLaw::wrapped_normal(const Space& space, double sigma, double mean_angle)
{
    if (space.kind() == SpaceKind::Sphere) throw DomainError("wrapped normal law is defined on tori only");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("wrapped normal law: sigma must be positive");
    if (!std::isfinite(mean_angle)) throw DomainError("wrapped normal law: mean must be finite");
    return StepLaw(LawKind::WrappedNormal, space, sigma, mean_angle);
}

StepLaw StepLaw::uniform_cap(const Space& space, double rho)
{
    if (space.kind() != SpaceKind::Sphere) throw DomainError("uniform cap law is defined on spheres only");
    if (!(rho > 0.0 && rho <= kPi)) throw DomainError("uniform cap law: rho must lie in (0, pi]");
    return StepLaw(LawKind::UniformCap, space, rho, 0.0);
}

bool StepLaw::inverse_invariant() const noexcept
{
    return kind_ != LawKind::WrappedNormal || b_ == 0.0;
}

std::string StepLaw::spec() const
{
    switch (kind_) {
    case LawKind::HeatZonal:
        return "heat:tau=" + format_double(a_);
    case LawKind::WrappedNormal:
        return "wn:sigma=" + format_double(a_) + ",mean=" + format_double(b_);
    case LawKind::UniformCap:
        return "cap:rho=" + format_double(a_);
    }
    return {};
}

double StepLaw::radial_density(double theta) const
{
    if (space_.kind() != SpaceKind::Sphere) throw DomainError("radial_density: spheres only");
    const int d = space_.dim();
    if (kind_ == LawKind::UniformCap) {
        return theta <= a_ ? sine_power_integral(d - 1, kPi) / sine_power_integral(d - 1, a_) : 0.0;
    }
    thread_local std::vector<double> p;
    p.resize(series_.size());
    gegenbauer_normalized_all(space_.gegenbauer_lambda(), std::cos(theta), p);
    double s = 0.0;
    for (std::size_t l = series_.size(); l-- > 0;) s += series_[l] * p[l];
    return s;
}

double StepLaw::radial_cdf(double theta) const
{
    if (space_.kind() != SpaceKind::Sphere) throw DomainError("radial_cdf: spheres only");
    const int d = space_.dim();
    theta = std::clamp(theta, 0.0, kPi);
    if (kind_ == LawKind::UniformCap) {
        return sine_power_integral(d - 1, std::min(theta, a_)) / sine_power_integral(d - 1, a_);
    }
    // Integral of P_l^lambda(cos t) sin^{d-1} t over [0, theta] is sin^d(theta) P_{l-1}^{lambda+1}(cos theta) / d.
    thread_local std::vector<double> q;
    q.resize(series_.size() > 1 ? series_.size() - 1 : 1);
    gegenbauer_normalized_all(space_.gegenbauer_lambda() + 1.0, std::cos(theta), q);
    double s = 0.0;
    for (std::size_t l = series_.size(); l-- > 1;) s += series_[l] * q[l - 1];
    const double total = sine_power_integral(d - 1, theta) + std::pow(std::sin(theta), d) * s / d;
    return std::clamp(total / sine_power_integral(d - 1, kPi), 0.0, 1.0);
}

double StepLaw::density(std::span<const double> coords) const
{
    if (space_.kind() == SpaceKind::Sphere) return radial_density(distance_to_origin(space_, coords));
    const double sigma = kind_ == LawKind::HeatZonal ? std::sqrt(2.0 * a_) : a_;
    const double mean = kind_ == LawKind::WrappedNormal ? b_ : 0.0;
    double f = 1.0;
    for (double c : coords) f *= wrapped_density_1d(c, sigma, mean);
    return f;
}

double StepLaw::sample_distance(Rng& rng) const
{
    if (space_.kind() != SpaceKind::Sphere) throw DomainError("sample_distance: spheres only");
    if (kind_ == LawKind::HeatZonal) return table_->invert(rng.uniform());

    const int d = space_.dim();
    const double u = rng.uniform();
    if (d == 2) return 2.0 * std::asin(std::min(1.0, std::sqrt(u) * std::sin(0.5 * a_)));
    // Invert the cap CDF by safeguarded Newton.
    const double target = u * sine_power_integral(d - 1, a_);
    double lo = 0.0;
    double hi = a_;
    double th = u * a_;
    for (int iter = 0; iter < 100; ++iter) {
        const double g = sine_power_integral(d - 1, th) - target;
        if (g > 0) hi = th; else lo = th;
        const double dg = std::pow(std::sin(th), d - 1);
        double next = dg > 0 ? th - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - th) < 1e-15) return next;
        th = next;
    }
    return th;
}

std::vector<double> random_tangent(const Space& space, std::span<const double> base, Rng& rng)
{
    std::vector<double> v(base.size());
    for (;;) {
        for (auto& x : v) x = rng.normal();
        if (space.kind() == SpaceKind::Sphere) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * base[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * base[i];
            // Second pass removes the residual component left by rounding.
            dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * base[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * base[i];
        }
        double n2 = 0.0;
        for (double x : v) n2 += x * x;
        if (n2 > 1e-20) {
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& x : v) x *= inv;
            return v;
        }
    }
}

StepDraw StepLaw::sample_at(std::span<const double> base, Rng& rng) const
{
    StepDraw draw;
    if (space_.kind() == SpaceKind::Sphere) {
        draw.distance = sample_distance(rng);
        draw.direction = random_tangent(space_, base, rng);
        return draw;
    }
    const double sigma = kind_ == LawKind::HeatZonal ? std::sqrt(2.0 * a_) : a_;
    const double mean = kind_ == LawKind::WrappedNormal ? b_ : 0.0;
    draw.direction.resize(base.size());
    double n2 = 0.0;
    for (auto& x : draw.direction) {
        x = mean + sigma * rng.normal();
        n2 += x * x;
    }
    draw.distance = std::sqrt(n2);
    if (draw.distance == 0.0) {
        std::fill(draw.direction.begin(), draw.direction.end(), 0.0);
        draw.direction[0] = 1.0;
    } else {
        for (auto& x : draw.direction) x /= draw.distance;
    }
    return draw;
}

StepDraw sample_step(const StepLaw& law, Rng& rng)
{
    const auto p0 = origin(law.space());
    return law.sample_at(p0.coords, rng);
}

StepLaw parse_law(const Space& space, std::string_view text)
{
    const auto colon = text.find(':');
    const auto kind = text.substr(0, colon);
    std::map<std::string, double, std::less<>> kv;
    if (colon != std::string_view::npos) {
        auto rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("law '" + std::string(text) + "': expected key=value, got '" + std::string(item) + "'");
            }
            double v = 0.0;
            if (!parse_double(item.substr(eq + 1), v)) {
                throw ConfigError("law '" + std::string(text) + "': bad number for '" + std::string(item.substr(0, eq)) + "'");
            }
            kv.emplace(std::string(item.substr(0, eq)), v);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    auto check_keys = [&](std::initializer_list<std::string_view> allowed) {
        for (const auto& [k, v] : kv) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
                throw ConfigError("law '" + std::string(text) + "': unknown parameter '" + k + "'");
            }
        }
    };
    try {
        if (kind == "heat") {
            check_keys({"tau"});
            return StepLaw::heat(space, kv_param(kv, "tau", text));
        }
        if (kind == "wn") {
            check_keys({"sigma", "mean"});
            const double zero = 0.0;
            return StepLaw::wrapped_normal(space, kv_param(kv, "sigma", text), kv_param(kv, "mean", text, &zero));
        }
        if (kind == "cap") {
            check_keys({"rho"});
            return StepLaw::uniform_cap(space, kv_param(kv, "rho", text));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("law '") + std::string(text) + "': " + e.what());
    }
    throw ConfigError("unknown law '" + std::string(text) + "' (expected heat:, wn: or cap:)");
}

namespace {

std::complex<double> analytic_coefficient(const StepLaw& law, const SpectralIndex& idx)
{
    if (idx.is_trivial()) return 1.0;
    const Space& space = law.space();
    switch (law.kind()) {
    case LawKind::HeatZonal:
        return std::exp(-idx.casimir * law.tau0());
    case LawKind::WrappedNormal: {
        double n_sum = 0.0;
        for (int v : idx.label) n_sum += v;
        const double mag = std::exp(-0.5 * idx.casimir * law.sigma() * law.sigma());
        const double phase = -n_sum * law.mean_angle();
        return phase == 0.0 ? std::complex<double>(mag) : std::polar(mag, phase);
    }
    case LawKind::UniformCap: {
        // <1_cap / |cap|, P_l> = sin^d(rho) P_{l-1}^{lambda+1}(cos rho) / (d * int_0^rho sin^{d-1}).
        const int d = space.dim();
        const double rho = law.rho();
        const double num = std::pow(std::sin(rho), d) *
                           gegenbauer_normalized(idx.label[0] - 1, space.gegenbauer_lambda() + 1.0, std::cos(rho));
        return num / (d * sine_power_integral(d - 1, rho));
    }
    }
    return 0.0;
}

void check_indices(const StepLaw& law, std::span<const SpectralIndex> indices)
{
    for (const auto& idx : indices) {
        if (!belongs_to(law.space(), idx)) {
            throw DomainError("index " + idx.label_string() + " does not belong to " + law.space().name());
        }
    }
}

}  // namespace

CoefficientVector true_coefficients(const StepLaw& law, std::span<const SpectralIndex> indices)
{
    check_indices(law, indices);
    std::vector<CoefficientEntry> entries;
    entries.reserve(indices.size());
    for (const auto& idx : indices) entries.push_back({idx, analytic_coefficient(law, idx), false});
    return CoefficientVector(std::move(entries));
}

CoefficientVector step_transform(const StepLaw& law, std::span<const SpectralIndex> indices)
{
    return true_coefficients(law, indices).conjugated();
}

CoefficientVector quadrature_coefficients(const StepLaw& law, std::span<const SpectralIndex> indices, int nodes)
{
    check_indices(law, indices);
    int max_degree = 0;
    for (const auto& idx : indices) max_degree = std::max(max_degree, idx.degree());
    if (nodes < 2 * max_degree + 8) {
        throw DomainError("quadrature_coefficients: need at least " + std::to_string(2 * max_degree + 8) +
                          " nodes for degree " + std::to_string(max_degree));
    }
    const Space& space = law.space();
    std::vector<CoefficientEntry> entries;
    entries.reserve(indices.size());

    if (space.kind() == SpaceKind::Sphere) {
        const int d = space.dim();
        const double lambda = space.gegenbauer_lambda();
        const double upper = law.kind() == LawKind::UniformCap ? law.rho() : kPi;
        const auto rule = gauss_legendre(nodes, 0.0, upper);
        const double z = sine_power_integral(d - 1, kPi);
        std::vector<double> weight(nodes);
        std::vector<double> x(nodes);
        for (int i = 0; i < nodes; ++i) {
            const double th = rule.nodes[i];
            x[i] = std::cos(th);
            weight[i] = rule.weights[i] * law.radial_density(th) * std::pow(std::sin(th), d - 1) / z;
        }
        for (const auto& idx : indices) {
            double s = 0.0;
            for (int i = 0; i < nodes; ++i) s += weight[i] * gegenbauer_normalized(idx.label[0], lambda, x[i]);
            entries.push_back({idx, s, false});
        }
        return CoefficientVector(std::move(entries));
    }

    // Trapezoidal rule on the product grid; exact for trigonometric polynomials of degree < nodes.
    const int d = space.dim();
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(nodes);
    std::vector<double> f(total);
    std::vector<double> theta(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int j = 0; j < d; ++j) {
            theta[j] = kTwoPi * static_cast<double>(rem % nodes) / nodes;
            rem /= nodes;
        }
        f[flat] = law.density(theta);
    }
    for (const auto& idx : indices) {
        std::complex<double> s = 0.0;
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            double phase = 0.0;
            for (int j = 0; j < d; ++j) {
                phase += idx.label[j] * (kTwoPi * static_cast<double>(rem % nodes) / nodes);
                rem /= nodes;
            }
            s += f[flat] * std::polar(1.0, -phase);
        }
        entries.push_back({idx, s / static_cast<double>(total), false});
    }
    return CoefficientVector(std::move(entries));
}

}  // namespace decompound
