#include "decompound/simulate.hpp"

#include "decompound/error.hpp"
#include "decompound/format.hpp"
#include "decompound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace decompound {

namespace {

// Stream tags keep the per-purpose random streams disjoint.
constexpr std::uint64_t kIidStream = 1;
constexpr std::uint64_t kTrajectoryStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

constexpr const char* kHeaderTag = "# decompound observations";

void take_steps(const StepLaw& law, std::int64_t count, std::vector<double>& point, Rng& rng)
{
    const Space& space = law.space();
    Point cur{std::move(point)};
    for (std::int64_t i = 0; i < count; ++i) {
        const auto step = law.sample_at(cur.coords, rng);
        cur = geodesic_step(space, cur, step.distance, step.direction);
    }
    point = std::move(cur.coords);
}

}  // namespace

std::string to_string(SamplingMode mode)
{
    return mode == SamplingMode::IID ? "iid" : "trajectory";
}

SamplingMode parse_sampling_mode(std::string_view text)
{
    if (text == "iid") return SamplingMode::IID;
    if (text == "trajectory") return SamplingMode::Trajectory;
    throw ConfigError("unknown sampling mode '" + std::string(text) + "' (expected iid or trajectory)");
}

void ProcessConfig::validate() const
{
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw DomainError("intensity must be positive");
    if (!(time > 0.0) || !std::isfinite(time)) throw DomainError("time must be positive");
    if (!(intensity * time > 0.0)) throw DomainError("intensity * time must be positive");
    if (!(noise_tau >= 0.0) || !std::isfinite(noise_tau)) throw DomainError("noise_tau must be non-negative");
}

std::string ProcessConfig::describe() const
{
    std::ostringstream os;
    os << "space=" << space().name() << " law=" << law.spec() << " intensity=" << format_double(intensity)
       << " time=" << format_double(time) << " mode=" << to_string(mode) << " noise_tau=" << format_double(noise_tau)
       << " seed=" << seed;
    return os.str();
}

ProcessConfig parse_process_config(std::string_view text)
{
    std::map<std::string, std::string, std::less<>> kv;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(std::string("process config: missing '") + key + "'");
        return it->second;
    };
    auto number = [&](const char* key) {
        double v = 0.0;
        if (!parse_double(need(key), v)) throw ConfigError(std::string("process config: bad number for '") + key + "'");
        return v;
    };
    const Space space = parse_space(need("space"));
    ProcessConfig cfg{parse_law(space, need("law"))};
    cfg.intensity = number("intensity");
    cfg.time = number("time");
    cfg.mode = kv.count("mode") ? parse_sampling_mode(kv["mode"]) : SamplingMode::IID;
    cfg.noise_tau = kv.count("noise_tau") ? number("noise_tau") : 0.0;
    if (kv.count("seed")) {
        try {
            cfg.seed = std::stoull(kv["seed"]);
        } catch (const std::exception&) {
            throw ConfigError("process config: bad seed");
        }
    }
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("process config: ") + e.what());
    }
    return cfg;
}

ObservationSet::ObservationSet(ProcessConfig config, std::vector<double> flat_coords)
    : config_(std::move(config)), width_(static_cast<std::size_t>(config_.space().coord_dim())),
      data_(std::move(flat_coords))
{
    if (data_.empty() || data_.size() % width_ != 0) {
        throw DomainError("ObservationSet: need a positive whole number of points");
    }
}

Point ObservationSet::point(std::size_t k) const
{
    const auto c = coords(k);
    return Point{std::vector<double>(c.begin(), c.end())};
}

std::int64_t poisson_draw(double rate, Rng& rng)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("poisson_draw: rate must be positive");
    if (rate <= 30.0) {
        const double limit = std::exp(-rate);
        std::int64_t k = 0;
        double p = rng.uniform_pos();
        while (p > limit) {
            ++k;
            p *= rng.uniform_pos();
        }
        return k;
    }
    // Transformed rejection with squeeze (Hörmann 1993).
    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform_pos();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + rate + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -rate + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
            return k;
        }
    }
}

std::vector<double> carry_to_origin(const Space& space, std::span<const double> from, std::span<const double> x)
{
    std::vector<double> out(x.begin(), x.end());
    if (space.is_flat()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = wrap_angle(x[i] - from[i]);
        return out;
    }
    const std::size_t n = x.size();
    const double c = from[n - 1];  // <from, p_0>
    if (c > -1.0 + 1e-12) {
        // R = I - (u+v)(u+v)^T / (1+c) + 2 v u^T with u = from, v = p_0.
        double s_dot = 0.0;
        double u_dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = from[i] + (i + 1 == n ? 1.0 : 0.0);
            s_dot += s * x[i];
            u_dot += from[i] * x[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double s = from[i] + (i + 1 == n ? 1.0 : 0.0);
            out[i] = x[i] - s * s_dot / (1.0 + c);
        }
        out[n - 1] += 2.0 * u_dot;
    } else {
        // Antipodal base point: half-turn in the (e_1, e_{d+1}) plane.
        out[0] = -x[0];
        out[n - 1] = -x[n - 1];
    }
    double n2 = 0.0;
    for (double v : out) n2 += v * v;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : out) v *= inv;
    return out;
}

ObservationSet sample_compound(const ProcessConfig& config, std::size_t m, unsigned threads)
{
    config.validate();
    if (m == 0) throw DomainError("sample_compound: m must be positive");

    const Space& space = config.space();
    const auto width = static_cast<std::size_t>(space.coord_dim());
    const double rate = config.intensity * config.time;
    const auto p0 = origin(space).coords;
    std::vector<double> data(m * width);

    std::optional<StepLaw> noise;
    if (config.noise_tau > 0.0) noise = StepLaw::heat(space, 0.5 * config.noise_tau * config.noise_tau);

    auto add_noise = [&](std::size_t k, std::vector<double>& point) {
        if (!noise) return;
        Rng rng = Rng::stream(config.seed, {kNoiseStream, k});
        take_steps(*noise, 1, point, rng);
    };

    if (config.mode == SamplingMode::IID) {
        parallel_for(m, threads, [&](std::size_t k) {
            Rng rng = Rng::stream(config.seed, {kIidStream, k});
            std::vector<double> point = p0;
            take_steps(config.law, poisson_draw(rate, rng), point, rng);
            add_noise(k, point);
            std::copy(point.begin(), point.end(), data.begin() + static_cast<std::ptrdiff_t>(k * width));
        });
    } else {
        Rng rng = Rng::stream(config.seed, {kTrajectoryStream});
        std::vector<double> position = p0;
        for (std::size_t k = 0; k < m; ++k) {
            const auto steps = poisson_draw(rate, rng);
            std::vector<double> increment = p0;
            if (steps > 0) {
                const std::vector<double> previous = position;
                take_steps(config.law, steps, position, rng);
                increment = carry_to_origin(space, previous, position);
            }
            add_noise(k, increment);
            std::copy(increment.begin(), increment.end(), data.begin() + static_cast<std::ptrdiff_t>(k * width));
        }
    }
    return ObservationSet(config, std::move(data));
}

void write_observations_csv(std::ostream& out, const ObservationSet& obs)
{
    out << kHeaderTag << ' ' << obs.config().describe() << " m=" << obs.size() << '\n';
    for (std::size_t j = 0; j < obs.width(); ++j) out << (j ? "," : "") << 'x' << j;
    out << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const auto c = obs.coords(k);
        for (std::size_t j = 0; j < c.size(); ++j) out << (j ? "," : "") << c[j];
        out << '\n';
    }
}

ObservationSet read_observations_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind(kHeaderTag, 0) != 0) {
        throw ConfigError("observations CSV: missing '# decompound observations' header");
    }
    ProcessConfig cfg = parse_process_config(std::string_view(line).substr(std::string_view(kHeaderTag).size()));
    if (!std::getline(in, line)) throw ConfigError("observations CSV: missing column header");
    const auto width = static_cast<std::size_t>(cfg.space().coord_dim());
    std::vector<double> data;
    int line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string field;
        std::size_t count = 0;
        while (std::getline(ss, field, ',')) {
            double v = 0.0;
            if (!parse_double(field, v)) {
                throw ConfigError("observations CSV line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            data.push_back(v);
            ++count;
        }
        if (count != width) {
            throw ConfigError("observations CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(width) + " columns");
        }
    }
    if (data.empty()) throw ConfigError("observations CSV: no observations");
    return ObservationSet(std::move(cfg), std::move(data));
}

}  // namespace decompound
