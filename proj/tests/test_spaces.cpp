#include "doctest.h"

#include "decompound/error.hpp"
#include "decompound/quadrature.hpp"
#include "decompound/rng.hpp"
#include "decompound/spaces.hpp"

#include <cmath>
#include <numbers>

using namespace decompound;
using std::numbers::pi;

namespace {

std::vector<std::vector<int>> labels_of(const std::vector<SpectralIndex>& idx)
{
    std::vector<std::vector<int>> out;
    for (const auto& i : idx) out.push_back(i.label);
    return out;
}

// C_n^lambda(x) / C_n^lambda(1) from the explicit finite sum, in long double with exact rising products.
double gegenbauer_explicit(int n, double lambda, double x)
{
    auto rising = [](long double a, int k) {
        long double p = 1.0L;
        for (int j = 0; j < k; ++j) p *= a + j;
        return p;
    };
    auto factorial = [](int k) {
        long double p = 1.0L;
        for (int j = 2; j <= k; ++j) p *= j;
        return p;
    };
    long double sum = 0.0L;
    for (int k = 0; 2 * k <= n; ++k) {
        const long double term = rising(lambda, n - k) / (factorial(k) * factorial(n - 2 * k));
        sum += (k % 2 ? -1.0L : 1.0L) * term * std::pow(2.0L * x, n - 2 * k);
    }
    const long double at_one = rising(2.0L * lambda, n) / factorial(n);
    return static_cast<double>(sum / at_one);
}

}  // namespace

TEST_CASE("space invariants")
{
    CHECK(Space::circle().dim() == 1);
    CHECK(Space::circle().rank() == 1);
    CHECK(Space::torus(3).rank() == 3);
    CHECK(Space::sphere(3).rank() == 1);
    CHECK(Space::sphere(3).coord_dim() == 4);
    CHECK(parse_space("sphere:2") == Space::sphere(2));
    CHECK(parse_space("torus:2") == Space::torus(2));
    CHECK(parse_space("circle") == Space::circle());
    CHECK_THROWS_AS(parse_space("sphere:1"), ConfigError);
    CHECK_THROWS_AS(parse_space("klein"), ConfigError);
    CHECK_THROWS_AS(parse_space("torus:0"), ConfigError);
}

TEST_CASE("spectrum examples")
{
    const auto s2 = spectrum(Space::sphere(2), 6.0);
    REQUIRE(s2.size() == 3);
    CHECK(s2[0].casimir == 0.0);
    CHECK(s2[1].casimir == 2.0);
    CHECK(s2[2].casimir == 6.0);
    CHECK(s2[0].multiplicity == 1);
    CHECK(s2[1].multiplicity == 3);
    CHECK(s2[2].multiplicity == 5);

    const auto c0 = spectrum(Space::circle(), 0.0);
    REQUIRE(c0.size() == 1);
    CHECK(c0[0].is_trivial());

    const auto t2 = spectrum(Space::torus(2), 2.0);
    CHECK(t2.size() == 9);
    const std::vector<std::vector<int>> expected{{0, 0},  {-1, 0}, {0, -1}, {0, 1},  {1, 0},
                                                 {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    CHECK(labels_of(t2) == expected);
}

TEST_CASE("sphere multiplicities")
{
    // S^3: (l + 1)^2; S^4: (l + 1)(l + 2)(2l + 3) / 6.
    for (int l = 0; l < 12; ++l) {
        CHECK(make_index(Space::sphere(3), {l}).multiplicity == (l + 1) * (l + 1));
        CHECK(make_index(Space::sphere(4), {l}).multiplicity == (l + 1) * (l + 2) * (2 * l + 3) / 6);
        CHECK(make_index(Space::sphere(3), {l}).casimir == l * (l + 2));
    }
    CHECK_THROWS_AS(make_index(Space::sphere(2), {-1}), DomainError);
    CHECK_THROWS_AS(make_index(Space::torus(2), {1}), DomainError);
}

TEST_CASE("spectrum is sorted and complete")
{
    for (const auto& space : {Space::circle(), Space::torus(2), Space::torus(3), Space::sphere(2), Space::sphere(3)}) {
        const auto idx = spectrum(space, 30.0);
        CHECK(idx.front().is_trivial());
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(spectrum_less(idx[i - 1], idx[i]));
        for (const auto& i : idx) {
            CHECK(i.casimir <= 30.0);
            CHECK(belongs_to(space, i));
            CHECK((i.casimir == 0.0) == i.is_trivial());
        }
    }
}

TEST_CASE("spherical function examples")
{
    const Space s2 = Space::sphere(2);
    CHECK(spherical(s2, make_index(s2, {2}), sphere_point_at_polar(s2, pi / 2)).real() == doctest::Approx(-0.5));
    const Space c = Space::circle();
    const std::vector<double> theta{pi};
    const auto v = spherical(c, make_index(c, {1}), point_at(c, theta));
    CHECK(v.real() == doctest::Approx(-1.0));
    CHECK(std::abs(v.imag()) < 1e-15);

    Rng rng(7);
    for (const auto& space : {Space::circle(), Space::torus(2), Space::sphere(2), Space::sphere(3)}) {
        const auto idx = spectrum(space, 60.0);
        const Point p0 = origin(space);
        for (const auto& i : idx) CHECK(spherical(space, i, p0) == std::complex<double>(1.0, 0.0));
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> raw(space.coord_dim());
            for (auto& x : raw) x = space.is_flat() ? 2.0 * pi * rng.uniform() : rng.normal();
            const Point p = point_at(space, raw);
            CHECK(spherical(space, idx.front(), p) == std::complex<double>(1.0, 0.0));
            for (const auto& i : idx) CHECK(std::abs(spherical(space, i, p)) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("evaluator matches pointwise spherical functions")
{
    Rng rng(11);
    for (const auto& space : {Space::circle(), Space::torus(2), Space::sphere(2), Space::sphere(4)}) {
        const auto idx = spectrum(space, 400.0);
        const SphericalEvaluator eval(space, idx);
        std::vector<std::complex<double>> out(idx.size());
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> raw(space.coord_dim());
            for (auto& x : raw) x = space.is_flat() ? 2.0 * pi * rng.uniform() : rng.normal();
            const Point p = point_at(space, raw);
            eval.evaluate(p.coords, out);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                CHECK(std::abs(out[i] - spherical(space, idx[i], p)) < 1e-11);
            }
        }
    }
}

TEST_CASE("gegenbauer recurrence against the explicit sum")
{
    for (double lambda : {0.5, 1.0, 1.5, 2.0}) {
        for (int n = 0; n <= 10; ++n) {
            for (double x = -1.0; x <= 1.0; x += 0.125) {
                CHECK(std::abs(gegenbauer_normalized(n, lambda, x) - gegenbauer_explicit(n, lambda, x)) < 1e-12);
            }
        }
    }
    std::vector<double> all(11);
    gegenbauer_normalized_all(0.5, 0.3, all);
    for (int n = 0; n <= 10; ++n) CHECK(all[n] == gegenbauer_normalized(n, 0.5, 0.3));
    // Stability at high degree: |P_l| <= 1 on [-1, 1].
    for (double x = -1.0; x <= 1.0; x += 0.01) CHECK(std::abs(gegenbauer_normalized(1000, 0.5, x)) <= 1.0 + 1e-12);
}

TEST_CASE("orthonormality on the circle and on S^2")
{
    const int max_deg = 10;
    const int nodes = 4 * max_deg;

    // Circle: integral of e^{i(n - n')theta} d(theta) / 2pi. Gauss-Legendre is not exact for
    // trigonometric polynomials, so the circle uses the equispaced rule with the same node count.
    const Space c = Space::circle();
    const auto cidx = spectrum(c, max_deg * max_deg);
    double worst_circle = 0.0;
    for (const auto& a : cidx) {
        for (const auto& b : cidx) {
            std::complex<double> sum = 0.0;
            for (int k = 0; k < nodes; ++k) {
                const Point p = point_at(c, std::vector<double>{2.0 * pi * k / nodes});
                sum += spherical(c, a, p) * std::conj(spherical(c, b, p)) / static_cast<double>(nodes);
            }
            const double expect = a.label == b.label ? 1.0 : 0.0;
            worst_circle = std::max(worst_circle, std::abs(sum - expect));
        }
    }
    CHECK(worst_circle < 1e-9);

    // S^2: zonal integrals against sin(theta) / 2, i.e. dx / 2 in x = cos(theta).
    const auto xr = gauss_legendre(nodes);
    const Space s2 = Space::sphere(2);
    const auto sidx = spectrum(s2, max_deg * (max_deg + 1));
    for (const auto& a : sidx) {
        for (const auto& b : sidx) {
            double sum = 0.0;
            for (std::size_t k = 0; k < xr.nodes.size(); ++k) {
                const Point p = sphere_point_at_polar(s2, std::acos(xr.nodes[k]));
                sum += 0.5 * xr.weights[k] * (spherical(s2, a, p) * std::conj(spherical(s2, b, p))).real();
            }
            const double expect = a.label == b.label ? 1.0 / static_cast<double>(a.multiplicity) : 0.0;
            CHECK(std::abs(sum - expect) < 1e-9);
        }
    }
}

TEST_CASE("geodesic steps")
{
    const Space s2 = Space::sphere(2);
    const Point north = origin(s2);
    const std::vector<double> e1{1.0, 0.0, 0.0};
    const Point q = geodesic_step(s2, north, pi / 2, e1);
    CHECK(q.coords[0] == doctest::Approx(1.0));
    CHECK(std::abs(q.coords[1]) < 1e-15);
    CHECK(std::abs(q.coords[2]) < 1e-15);

    const Point same = geodesic_step(s2, north, 0.0, e1);
    CHECK(same.coords == north.coords);

    const Space c = Space::circle();
    const Point c0 = origin(c);
    const Point c1 = geodesic_step(c, c0, 3.0 * pi, std::vector<double>{1.0});
    CHECK(c1.coords[0] == doctest::Approx(pi));
    CHECK(geodesic_step(c, c0, 0.0, std::vector<double>{1.0}).coords == c0.coords);

    const std::vector<double> slanted{1.0, 0.0, 0.1};
    CHECK_THROWS_AS(geodesic_step(s2, north, 0.3, slanted), DomainError);

    // Distance travelled equals the step length below pi.
    for (double dist : {0.1, 1.0, 2.5}) {
        const Point r = geodesic_step(s2, north, dist, std::vector<double>{0.0, 1.0, 0.0});
        CHECK(distance(s2, north.coords, r.coords) == doctest::Approx(dist).epsilon(1e-12));
    }
}

TEST_CASE("distance to the origin")
{
    const Space s2 = Space::sphere(2);
    CHECK(distance_to_origin(s2, point_at(s2, std::vector<double>{0.0, 0.0, -1.0})) == doctest::Approx(pi));
    const Space t2 = Space::torus(2);
    CHECK(distance_to_origin(t2, point_at(t2, std::vector<double>{pi / 2, 0.0})) == doctest::Approx(pi / 2));
    const Space c = Space::circle();
    CHECK(distance_to_origin(c, point_at(c, std::vector<double>{1.5 * pi})) == doctest::Approx(pi / 2));
    CHECK(distance_to_origin(s2, origin(s2)) == 0.0);
}

TEST_CASE("weyl census examples")
{
    const Space s2 = Space::sphere(2);
    std::vector<double> ts;
    for (int L = 1; L <= 30; ++L) ts.push_back(L * (L + 1.0));
    const auto rows = weyl_census(s2, ts);
    for (int L = 1; L <= 30; ++L) {
        CHECK(rows[L - 1].count_spherical == L + 1);
        CHECK(rows[L - 1].count_weighted == (L + 1) * (L + 1));
    }
    const std::vector<double> t25{25.0};
    const auto c = weyl_census(Space::circle(), t25);
    CHECK(c[0].count_spherical == 11);
    CHECK(c[0].count_weighted == 11);
}

TEST_CASE("index labels round-trip")
{
    const Space t2 = Space::torus(2);
    for (const auto& i : spectrum(t2, 10.0)) {
        const auto back = parse_index(t2, i.label_string());
        CHECK(back.label == i.label);
        CHECK(back.casimir == i.casimir);
    }
    CHECK_THROWS_AS(parse_index(t2, "1"), ConfigError);
    CHECK_THROWS_AS(parse_index(Space::sphere(2), "x"), ConfigError);
}
