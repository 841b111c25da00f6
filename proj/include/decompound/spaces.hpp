#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace decompound {

enum class SpaceKind { Circle, Torus, Sphere };

/**
 * A compact symmetric space with its normalized invariant measure.
 *
 * Circle and Torus(d) carry the unit flat metric; Sphere(d) is the unit
 * round sphere in R^{d+1} with base point e_{d+1}.
 */
class Space {
public:
    static Space circle();
    static Space torus(int d);
    static Space sphere(int d);

    [[nodiscard]] SpaceKind kind() const noexcept { return kind_; }
    /// Manifold dimension d.
    [[nodiscard]] int dim() const noexcept { return dim_; }
    /// Rank r: 1 for spheres, d for flat tori.
    [[nodiscard]] int rank() const noexcept { return kind_ == SpaceKind::Sphere ? 1 : dim_; }
    /// Length of a coordinate vector: d + 1 for spheres, d for tori.
    [[nodiscard]] int coord_dim() const noexcept { return kind_ == SpaceKind::Sphere ? dim_ + 1 : dim_; }
    [[nodiscard]] bool is_flat() const noexcept { return kind_ != SpaceKind::Sphere; }
    /// Gegenbauer parameter (d - 1) / 2 of the zonal functions on S^d.
    [[nodiscard]] double gegenbauer_lambda() const noexcept { return 0.5 * (dim_ - 1); }

    /// Canonical text form: "circle", "torus:<d>", "sphere:<d>".
    [[nodiscard]] std::string name() const;

    friend bool operator==(const Space&, const Space&) = default;

private:
    Space(SpaceKind kind, int dim) : kind_(kind), dim_(dim) {}

    SpaceKind kind_;
    int dim_;
};

/// Parses "circle", "torus:2", "sphere:3". Throws ConfigError.
Space parse_space(std::string_view text);

/// One spherical representation: its label, Casimir eigenvalue and dimension.
struct SpectralIndex {
    /// n in Z^d for tori, {l} for spheres.
    std::vector<int> label;
    double casimir = 0.0;
    std::int64_t multiplicity = 1;

    [[nodiscard]] bool is_trivial() const noexcept;
    /// Polynomial degree: l on spheres, max |n_i| on tori.
    [[nodiscard]] int degree() const noexcept;
    /// "2" for spheres, "1;-1" for tori.
    [[nodiscard]] std::string label_string() const;

    friend bool operator==(const SpectralIndex& a, const SpectralIndex& b) { return a.label == b.label; }
};

/// Deterministic spectrum order: Casimir first, then label lexicographically.
bool spectrum_less(const SpectralIndex& a, const SpectralIndex& b);

/// Builds the index for `label`, computing Casimir and multiplicity. Throws DomainError.
SpectralIndex make_index(const Space& space, std::vector<int> label);

/// Parses a label string as written by label_string().
SpectralIndex parse_index(const Space& space, std::string_view text);

/// True if `index` is a valid index of `space` with consistent Casimir/multiplicity.
bool belongs_to(const Space& space, const SpectralIndex& index);

struct Point {
    std::vector<double> coords;
};

/// p_0: north pole e_{d+1} for spheres, zero angles for tori.
Point origin(const Space& space);

/// Throws DomainError if the point violates the space's invariants.
void validate_point(const Space& space, const Point& point);

/// Reduces an angle to [0, 2*pi).
double wrap_angle(double theta) noexcept;

/// Angles for tori; for spheres, a point at polar angle theta in the (e_1, e_{d+1}) plane.
Point point_at(const Space& space, std::span<const double> coords);
Point sphere_point_at_polar(const Space& space, double polar_angle);

/// All indices with casimir <= casimir_max, in spectrum order.
std::vector<SpectralIndex> spectrum(const Space& space, double casimir_max);

/// Zonal spherical function phi_pi(point) with the conjugation-free convention
/// phi_n(theta) = exp(i n.theta) on tori.
std::complex<double> spherical(const Space& space, const SpectralIndex& index, const Point& point);

/// Moves along the geodesic leaving `from` with unit tangent `direction`.
Point geodesic_step(const Space& space, const Point& from, double distance,
                    std::span<const double> direction);

/// Geodesic distance from p_0.
double distance_to_origin(const Space& space, const Point& point);
double distance_to_origin(const Space& space, std::span<const double> coords);

/// Geodesic distance between two points.
double distance(const Space& space, std::span<const double> a, std::span<const double> b);

struct CensusRow {
    double threshold = 0.0;
    std::int64_t count_spherical = 0;
    std::int64_t count_weighted = 0;
};

/// Counts of spherical indices and of Laplacian eigenvalues (with multiplicity) below each threshold.
std::vector<CensusRow> weyl_census(const Space& space, std::span<const double> thresholds);

/// Gegenbauer polynomial C_n^lambda(x) / C_n^lambda(1), by the normalized three-term recurrence.
double gegenbauer_normalized(int n, double lambda, double x);

/// Fills out[k] = C_k^lambda(x) / C_k^lambda(1) for k = 0..out.size()-1.
void gegenbauer_normalized_all(double lambda, double x, std::span<double> out);

/**
 * Evaluates a fixed list of spherical functions at many points, sharing the
 * recurrence (spheres) or the per-axis powers of exp(i theta) (tori).
 */
class SphericalEvaluator {
public:
    SphericalEvaluator(Space space, std::span<const SpectralIndex> indices);

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }

    /// out[i] = phi_{indices[i]}(coords); out.size() must equal size().
    void evaluate(std::span<const double> coords, std::span<std::complex<double>> out) const;

private:
    Space space_;
    std::vector<std::vector<int>> labels_;
    int max_degree_ = 0;
};

}  // namespace decompound
