#include "decompound/spaces.hpp"

#include "decompound/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace decompound {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

std::int64_t sphere_multiplicity(int l, int d)
{
    return binomial(l + d, l) - binomial(l + d - 2, l - 2);
}

int parse_int(std::string_view s, std::string_view what)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Space Space::circle() { return Space(SpaceKind::Circle, 1); }

Space Space::torus(int d)
{
    if (d < 1) throw DomainError("torus dimension must be positive");
    return Space(SpaceKind::Torus, d);
}

Space Space::sphere(int d)
{
    if (d < 2) throw DomainError("sphere dimension must be at least 2");
    return Space(SpaceKind::Sphere, d);
}

std::string Space::name() const
{
    switch (kind_) {
    case SpaceKind::Circle:
        return "circle";
    case SpaceKind::Torus:
        return "torus:" + std::to_string(dim_);
    case SpaceKind::Sphere:
        return "sphere:" + std::to_string(dim_);
    }
    return {};
}

Space parse_space(std::string_view text)
{
    if (text == "circle") return Space::circle();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("unknown space '" + std::string(text) + "' (expected circle, torus:<d> or sphere:<d>)");
    }
    const auto kind = text.substr(0, colon);
    const int d = parse_int(text.substr(colon + 1), "space dimension");
    try {
        if (kind == "torus") return Space::torus(d);
        if (kind == "sphere") return Space::sphere(d);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown space kind '" + std::string(kind) + "'");
}

bool SpectralIndex::is_trivial() const noexcept
{
    return std::all_of(label.begin(), label.end(), [](int v) { return v == 0; });
}

int SpectralIndex::degree() const noexcept
{
    int deg = 0;
    for (int v : label) deg = std::max(deg, std::abs(v));
    return deg;
}

std::string SpectralIndex::label_string() const
{
    std::string out;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(label[i]);
    }
    return out;
}

bool spectrum_less(const SpectralIndex& a, const SpectralIndex& b)
{
    if (a.casimir != b.casimir) return a.casimir < b.casimir;
    return a.label < b.label;
}

SpectralIndex make_index(const Space& space, std::vector<int> label)
{
    SpectralIndex idx;
    if (space.kind() == SpaceKind::Sphere) {
        if (label.size() != 1 || label[0] < 0) {
            throw DomainError("sphere index label must be a single non-negative degree");
        }
        const double l = label[0];
        idx.casimir = l * (l + space.dim() - 1);
        idx.multiplicity = sphere_multiplicity(label[0], space.dim());
    } else {
        if (label.size() != static_cast<std::size_t>(space.dim())) {
            throw DomainError("torus index label must have one entry per dimension");
        }
        double c = 0.0;
        for (int v : label) c += static_cast<double>(v) * v;
        idx.casimir = c;
        idx.multiplicity = 1;
    }
    idx.label = std::move(label);
    return idx;
}

SpectralIndex parse_index(const Space& space, std::string_view text)
{
    std::vector<int> label;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(';', start);
        if (end == std::string_view::npos) end = text.size();
        label.push_back(parse_int(text.substr(start, end - start), "index label"));
        start = end + 1;
    }
    try {
        return make_index(space, std::move(label));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("index '") + std::string(text) + "': " + e.what());
    }
}

bool belongs_to(const Space& space, const SpectralIndex& index)
{
    try {
        const auto ref = make_index(space, index.label);
        return ref.casimir == index.casimir && ref.multiplicity == index.multiplicity;
    } catch (const DomainError&) {
        return false;
    }
}

Point origin(const Space& space)
{
    Point p;
    p.coords.assign(space.coord_dim(), 0.0);
    if (space.kind() == SpaceKind::Sphere) p.coords.back() = 1.0;
    return p;
}

double wrap_angle(double theta) noexcept
{
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

void validate_point(const Space& space, const Point& point)
{
    if (point.coords.size() != static_cast<std::size_t>(space.coord_dim())) {
        throw DomainError("point has wrong number of coordinates for " + space.name());
    }
    if (space.kind() == SpaceKind::Sphere) {
        double n2 = 0.0;
        for (double c : point.coords) n2 += c * c;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) throw DomainError("sphere point is not a unit vector");
    } else {
        for (double c : point.coords) {
            if (!(c >= 0.0 && c < kTwoPi)) throw DomainError("torus angle not reduced to [0, 2pi)");
        }
    }
}

Point point_at(const Space& space, std::span<const double> coords)
{
    Point p{std::vector<double>(coords.begin(), coords.end())};
    if (space.kind() == SpaceKind::Sphere) {
        double n2 = 0.0;
        for (double c : p.coords) n2 += c * c;
        const double n = std::sqrt(n2);
        if (n == 0.0) throw DomainError("cannot normalize the zero vector onto the sphere");
        for (double& c : p.coords) c /= n;
    } else {
        for (double& c : p.coords) c = wrap_angle(c);
    }
    validate_point(space, p);
    return p;
}

Point sphere_point_at_polar(const Space& space, double polar_angle)
{
    if (space.kind() != SpaceKind::Sphere) throw DomainError("sphere_point_at_polar: not a sphere");
    Point p = origin(space);
    p.coords[0] = std::sin(polar_angle);
    p.coords.back() = std::cos(polar_angle);
    return p;
}

std::vector<SpectralIndex> spectrum(const Space& space, double casimir_max)
{
    if (!(casimir_max >= 0.0)) throw DomainError("spectrum: casimir_max must be non-negative");
    std::vector<SpectralIndex> out;
    if (space.kind() == SpaceKind::Sphere) {
        const int d = space.dim();
        for (int l = 0;; ++l) {
            const double c = static_cast<double>(l) * (l + d - 1);
            if (c > casimir_max) break;
            out.push_back(make_index(space, {l}));
        }
        return out;
    }

    const int d = space.dim();
    const int r = static_cast<int>(std::floor(std::sqrt(casimir_max)));
    std::vector<int> label(d, 0);
    // Depth-first over coordinates, pruning on the partial squared norm.
    std::function<void(int, double)> visit = [&](int axis, double partial) {
        if (axis == d) {
            out.push_back(make_index(space, label));
            return;
        }
        for (int v = -r; v <= r; ++v) {
            const double next = partial + static_cast<double>(v) * v;
            if (next > casimir_max) continue;
            label[axis] = v;
            visit(axis + 1, next);
        }
        label[axis] = 0;
    };
    visit(0, 0.0);
    std::sort(out.begin(), out.end(), spectrum_less);
    return out;
}

double gegenbauer_normalized(int n, double lambda, double x)
{
    if (n < 0) throw DomainError("gegenbauer degree must be non-negative");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;  // normalized C_1 is x for every lambda
    for (int k = 1; k < n; ++k) {
        const double next = (2.0 * (k + lambda) * x * cur - k * prev) / (k + 2.0 * lambda);
        prev = cur;
        cur = next;
    }
    return cur;
}

void gegenbauer_normalized_all(double lambda, double x, std::span<double> out)
{
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = x;
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        const double kk = static_cast<double>(k);
        out[k + 1] = (2.0 * (kk + lambda) * x * out[k] - kk * out[k - 1]) / (kk + 2.0 * lambda);
    }
}

namespace {

double sphere_cos_to_origin(std::span<const double> coords)
{
    return std::clamp(coords.back(), -1.0, 1.0);
}

}  // namespace

std::complex<double> spherical(const Space& space, const SpectralIndex& index, const Point& point)
{
    if (!belongs_to(space, index)) throw DomainError("spherical: index does not belong to " + space.name());
    validate_point(space, point);
    if (space.kind() == SpaceKind::Sphere) {
        return gegenbauer_normalized(index.label[0], space.gegenbauer_lambda(),
                                     sphere_cos_to_origin(point.coords));
    }
    double phase = 0.0;
    for (std::size_t j = 0; j < index.label.size(); ++j) phase += index.label[j] * point.coords[j];
    if (phase == 0.0) return 1.0;
    return std::polar(1.0, phase);
}

Point geodesic_step(const Space& space, const Point& from, double distance,
                    std::span<const double> direction)
{
    if (!(distance >= 0.0)) throw DomainError("geodesic_step: distance must be non-negative");
    if (direction.size() != from.coords.size()) throw DomainError("geodesic_step: direction has wrong size");
    double n2 = 0.0;
    for (double v : direction) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw DomainError("geodesic_step: direction is not a unit vector");

    Point to = from;
    if (distance == 0.0) return to;

    if (space.kind() == SpaceKind::Sphere) {
        double dot = 0.0;
        for (std::size_t i = 0; i < direction.size(); ++i) dot += direction[i] * from.coords[i];
        if (std::abs(dot) > 1e-9) throw DomainError("geodesic_step: direction is not tangent at the base point");
        const double c = std::cos(distance);
        const double s = std::sin(distance);
        double norm2 = 0.0;
        for (std::size_t i = 0; i < to.coords.size(); ++i) {
            to.coords[i] = c * from.coords[i] + s * direction[i];
            norm2 += to.coords[i] * to.coords[i];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : to.coords) v *= inv;
        return to;
    }

    for (std::size_t i = 0; i < to.coords.size(); ++i) {
        to.coords[i] = wrap_angle(from.coords[i] + distance * direction[i]);
    }
    return to;
}

double distance_to_origin(const Space& space, std::span<const double> coords)
{
    if (space.kind() == SpaceKind::Sphere) {
        double perp2 = 0.0;
        for (std::size_t i = 0; i + 1 < coords.size(); ++i) perp2 += coords[i] * coords[i];
        return std::atan2(std::sqrt(perp2), coords.back());
    }
    double s = 0.0;
    for (double a : coords) {
        double r = std::remainder(a, kTwoPi);  // in [-pi, pi]
        s += r * r;
    }
    return std::sqrt(s);
}

double distance_to_origin(const Space& space, const Point& point)
{
    validate_point(space, point);
    return distance_to_origin(space, std::span<const double>(point.coords));
}

double distance(const Space& space, std::span<const double> a, std::span<const double> b)
{
    if (space.kind() == SpaceKind::Sphere) {
        double diff2 = 0.0;
        double sum2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            diff2 += (a[i] - b[i]) * (a[i] - b[i]);
            sum2 += (a[i] + b[i]) * (a[i] + b[i]);
        }
        // Chord-based form is accurate at both small and near-antipodal distances.
        return 2.0 * std::atan2(std::sqrt(diff2), std::sqrt(sum2));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = std::remainder(a[i] - b[i], kTwoPi);
        s += r * r;
    }
    return std::sqrt(s);
}

std::vector<CensusRow> weyl_census(const Space& space, std::span<const double> thresholds)
{
    std::vector<CensusRow> rows;
    if (thresholds.empty()) return rows;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw DomainError("weyl_census: thresholds must be positive");
        if (i && !(thresholds[i] > thresholds[i - 1])) throw DomainError("weyl_census: thresholds must increase");
    }
    const auto all = spectrum(space, thresholds.back());
    std::size_t pos = 0;
    std::int64_t spherical_count = 0;
    std::int64_t weighted = 0;
    for (double t : thresholds) {
        while (pos < all.size() && all[pos].casimir <= t) {
            ++spherical_count;
            weighted += all[pos].multiplicity;
            ++pos;
        }
        rows.push_back({t, spherical_count, weighted});
    }
    return rows;
}

SphericalEvaluator::SphericalEvaluator(Space space, std::span<const SpectralIndex> indices) : space_(space)
{
    labels_.reserve(indices.size());
    for (const auto& idx : indices) {
        if (!belongs_to(space_, idx)) throw DomainError("SphericalEvaluator: index does not belong to " + space_.name());
        labels_.push_back(idx.label);
        max_degree_ = std::max(max_degree_, idx.degree());
    }
}

void SphericalEvaluator::evaluate(std::span<const double> coords, std::span<std::complex<double>> out) const
{
    thread_local std::vector<double> legendre;
    thread_local std::vector<std::complex<double>> powers;

    if (space_.kind() == SpaceKind::Sphere) {
        legendre.resize(static_cast<std::size_t>(max_degree_) + 1);
        gegenbauer_normalized_all(space_.gegenbauer_lambda(), sphere_cos_to_origin(coords), legendre);
        for (std::size_t i = 0; i < labels_.size(); ++i) out[i] = legendre[labels_[i][0]];
        return;
    }

    // powers[j * (K + 1) + k] = exp(i k theta_j)
    const std::size_t stride = static_cast<std::size_t>(max_degree_) + 1;
    powers.resize(stride * coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) {
        auto* row = powers.data() + j * stride;
        row[0] = 1.0;
        if (stride > 1) {
            const std::complex<double> base = coords[j] == 0.0 ? std::complex<double>(1.0) : std::polar(1.0, coords[j]);
            for (std::size_t k = 1; k < stride; ++k) {
                // Re-anchor periodically to keep the product unimodular to rounding.
                row[k] = (k % 16 == 0) ? std::polar(1.0, static_cast<double>(k) * coords[j]) : row[k - 1] * base;
            }
        }
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        std::complex<double> v = 1.0;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            const int n = labels_[i][j];
            if (n == 0) continue;
            const auto p = powers[j * stride + static_cast<std::size_t>(std::abs(n))];
            v *= n > 0 ? p : std::conj(p);
        }
        out[i] = v;
    }
}

}  // namespace decompound
