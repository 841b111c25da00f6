#pragma once

#include "decompound/rng.hpp"
#include "decompound/spaces.hpp"
#include "decompound/steplaws.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace decompound {

enum class SamplingMode {
    /// Independent copies of p_t.
    IID,
    /// One path observed at t, 2t, ..., mt; each observation is the increment
    /// since the previous sampling time, carried back to p_0.
    Trajectory,
};

std::string to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(std::string_view text);

struct ProcessConfig {
    StepLaw law;
    /// Poisson intensity Lambda.
    double intensity = 1.0;
    /// Observation time t.
    double time = 1.0;
    SamplingMode mode = SamplingMode::IID;
    /// Heat-kernel observation noise scale tau (0 = noiseless).
    double noise_tau = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] const Space& space() const noexcept { return law.space(); }
    /// Throws DomainError on Lambda*t <= 0 or negative noise.
    void validate() const;
    /// Whitespace-separated key=value form used in CSV headers.
    [[nodiscard]] std::string describe() const;
};

/// Inverse of ProcessConfig::describe (extra keys such as m= are ignored).
ProcessConfig parse_process_config(std::string_view text);

/// m observed points stored contiguously; immutable once built.
class ObservationSet {
public:
    ObservationSet(ProcessConfig config, std::vector<double> flat_coords);

    [[nodiscard]] const ProcessConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Space& space() const noexcept { return config_.space(); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size() / width_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::span<const double> coords(std::size_t k) const noexcept
    {
        return {data_.data() + k * width_, width_};
    }
    [[nodiscard]] Point point(std::size_t k) const;
    [[nodiscard]] const std::vector<double>& flat() const noexcept { return data_; }

private:
    ProcessConfig config_;
    std::size_t width_;
    std::vector<double> data_;
};

/// Poisson(rate) variate: multiplication method up to rate 30, PTRS above.
std::int64_t poisson_draw(double rate, Rng& rng);

/**
 * Draws m observations of the compound process started at p_0.
 * Output depends only on (config, m); `threads` only changes wall time.
 */
ObservationSet sample_compound(const ProcessConfig& config, std::size_t m, unsigned threads = 0);

/// Rotation of the sphere taking `from` to p_0 along their great circle, applied to `x`.
std::vector<double> carry_to_origin(const Space& space, std::span<const double> from, std::span<const double> x);

/// Header comment with the full config, a column header, then one row per point (17 significant digits).
void write_observations_csv(std::ostream& out, const ObservationSet& obs);
ObservationSet read_observations_csv(std::istream& in);

}  // namespace decompound
