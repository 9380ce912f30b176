#include "finsler/errors.hpp"
#include "finsler/holonomy_rank.hpp"
#include "finsler/transport.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace finsler;

namespace {

using V3 = std::array<double, 3>;

// Inverse stereographic chart of the unit sphere: g = 4 delta / (1 + |x|^2)^2.
V3 sphere_point(const std::vector<double>& x)
{
    const double s = x[0] * x[0] + x[1] * x[1];
    return {2 * x[0] / (1 + s), 2 * x[1] / (1 + s), (1 - s) / (1 + s)};
}

// Chart velocity whose image under the chart differential is w (w tangent at x).
std::vector<double> pull_back(const std::vector<double>& x, const V3& w)
{
    const double s = x[0] * x[0] + x[1] * x[1];
    double J[3][2];
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            J[i][j] = 2.0 * (i == j) / (1 + s) - 4.0 * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] / ((1 + s) * (1 + s));
        }
        J[2][j] = -4.0 * x[static_cast<std::size_t>(j)] / ((1 + s) * (1 + s));
    }
    const double lam2 = 4.0 / ((1 + s) * (1 + s));
    std::vector<double> v(2, 0.0);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(j)] += J[i][j] * w[static_cast<std::size_t>(i)];
        v[static_cast<std::size_t>(j)] /= lam2;
    }
    return v;
}

double dot3(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

V3 cross3(const V3& a, const V3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

} // namespace

TEST_SUITE("transport") {

TEST_CASE("euclidean transport is the identity")
{
    const auto spec = MetricSpec::euclidean(3);
    const std::vector<double> y0{0.3, -1.0, 2.0};
    const auto res = parallel_transport(spec, CurvePath::coordinate_square({1, 2, 3}, 0, 2, 0.7), y0);
    CHECK(res.y_end == y0);
    CHECK(res.norm_drift == 0.0);
}

TEST_CASE("euclidean geodesics are straight lines")
{
    const auto traj = integrate_geodesic(MetricSpec::euclidean(2), {0.1, 0.2}, {1.0, -0.5}, 2.0, 100);
    CHECK_FALSE(traj.left_domain);
    REQUIRE(traj.samples.size() == 101);
    CHECK(traj.samples.back().x[0] == doctest::Approx(2.1).epsilon(1e-14));
    CHECK(traj.samples.back().x[1] == doctest::Approx(-0.8).epsilon(1e-14));
}

TEST_CASE("property: Funk geodesics are collinear with their initial velocity")
{
    std::mt19937 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x0 = oracle::ball_point(rng, 2, 0.5);
        const auto y0 = oracle::unit_vector(rng, 2);
        const auto traj = integrate_geodesic(MetricSpec::funk(2), x0, y0, 1.0, 2000);
        for (const auto& s : traj.samples) {
            const double dx = s.x[0] - x0[0], dy = s.x[1] - x0[1];
            CHECK(std::abs(dx * y0[1] - dy * y0[0]) < 1e-9);
        }
        // Constant speed.
        const double F0 = funk_norm_value(x0, y0);
        CHECK(std::abs(funk_norm_value(traj.samples.back().x, traj.samples.back().v) - F0) < 1e-9);
    }
}

TEST_CASE("sign calibration on the round sphere")
{
    CHECK(kLoopDefectSign == 1.0);
    const auto spec = MetricSpec::round_sphere(2);
    const std::vector<double> x{0.3, 0.1};
    const auto y0 = normalize_to_indicatrix(spec, x, {1, 0});
    const auto d = loop_holonomy_defect(spec, x, 0, 1, 0.025, y0);
    double aligned = 0, opposite = 0;
    for (int i = 0; i < 2; ++i) {
        aligned += std::pow(d.scaled[static_cast<std::size_t>(i)] - d.curvature[static_cast<std::size_t>(i)], 2);
        opposite += std::pow(d.scaled[static_cast<std::size_t>(i)] + d.curvature[static_cast<std::size_t>(i)], 2);
    }
    CHECK(std::sqrt(aligned) < 0.05);
    CHECK(std::sqrt(opposite) > 3.0);
}

TEST_CASE("Gauss-Bonnet on a small geodesic triangle of the sphere")
{
    const auto spec = MetricSpec::round_sphere(2);
    const double r = 0.0707;
    const std::vector<double> O{0, 0}, P{r, 0}, Q{0, r};
    const V3 a = sphere_point(O), b = sphere_point(P), c = sphere_point(Q);
    const double theta = std::acos(dot3(b, c));
    V3 w{c[0] - dot3(b, c) * b[0], c[1] - dot3(b, c) * b[1], c[2] - dot3(b, c) * b[2]};
    const double wn = std::sqrt(dot3(w, w));
    for (auto& v : w) v *= theta / wn;
    const GeodesicArc arc{P, pull_back(P, w), 1.0};

    const auto side = integrate_geodesic(spec, arc.start, arc.velocity, 1.0, 1000);
    CHECK(std::abs(side.samples.back().x[0] - Q[0]) < 1e-8);
    CHECK(std::abs(side.samples.back().x[1] - Q[1]) < 1e-8);

    const double area = 2.0 * std::atan(std::abs(dot3(a, cross3(b, c))) / (1 + dot3(a, b) + dot3(b, c) + dot3(c, a)));
    CHECK(area == doctest::Approx(1e-2).epsilon(0.01));

    CurvePath loop;
    loop.segments = {LineSegment{O, P}, arc, LineSegment{Q, O}};
    const std::vector<double> y0{0.5, 0.0};
    const auto res = parallel_transport(spec, loop, y0);
    const double angle = std::atan2(y0[0] * res.y_end[1] - y0[1] * res.y_end[0], y0[0] * res.y_end[0] + y0[1] * res.y_end[1]);
    CHECK(angle == doctest::Approx(area).epsilon(1e-6));

    loop.orientation = -1;
    const auto back = parallel_transport(spec, loop, y0);
    const double back_angle = std::atan2(y0[0] * back.y_end[1] - y0[1] * back.y_end[0], y0[0] * back.y_end[0] + y0[1] * back.y_end[1]);
    CHECK(back_angle == doctest::Approx(-area).epsilon(1e-6));
}

TEST_CASE("a path followed by its reverse returns the vector")
{
    const auto spec = MetricSpec::funk(2);
    CurvePath path;
    path.segments = {LineSegment{{0, 0}, {0.2, 0.1}}, GeodesicArc{{0.2, 0.1}, {-0.1, 0.3}, 0.5}};
    const std::vector<double> y0{0.6, 0.2};
    const auto there = parallel_transport(spec, path, y0);
    CurvePath reverse = path;
    reverse.orientation = -1;
    const auto back = parallel_transport(spec, reverse, there.y_end);
    CHECK(std::abs(back.y_end[0] - y0[0]) < 1e-10);
    CHECK(std::abs(back.y_end[1] - y0[1]) < 1e-10);
}

TEST_CASE("loop defect converges linearly to the curvature")
{
    const auto spec = MetricSpec::funk(2);
    const auto y0 = normalize_to_indicatrix(spec, {0, 0}, {1, 0});
    double previous = 0;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto d = loop_holonomy_defect(spec, {0, 0}, 0, 1, eps, y0);
        CHECK(d.transport.norm_drift < 1e-12);
        if (previous > 0) {
            const double ratio = previous / d.comparison;
            CHECK(ratio > 1.5);
            CHECK(ratio < 2.5);
        }
        previous = d.comparison;
    }
}

TEST_CASE("recorded samples and errors")
{
    const auto spec = MetricSpec::funk(2);
    TransportOptions opt;
    opt.record = true;
    opt.steps_per_unit = 100;
    const auto res = parallel_transport(spec, CurvePath::coordinate_square({0, 0}, 0, 1, 0.1), {1, 0}, opt);
    CHECK(res.samples.size() == static_cast<std::size_t>(res.steps) + 1);
    CHECK(res.samples.front().s == 0.0);
    CHECK(res.samples.back().s == doctest::Approx(4.0));

    CHECK_THROWS_AS(CurvePath::coordinate_square({0, 0}, 0, 0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(parallel_transport(spec, CurvePath::coordinate_square({0.8, 0}, 0, 1, 0.3), {1, 0}), DomainError);
    CurvePath broken;
    broken.segments = {LineSegment{{0, 0}, {0.1, 0}}, LineSegment{{0.2, 0}, {0.3, 0}}};
    CHECK_THROWS_AS(parallel_transport(spec, broken, {1, 0}), InvalidArgument);

    TransportOptions strict;
    strict.steps_per_unit = 1;
    strict.drift_tolerance = 1e-15;
    CHECK_THROWS_AS(loop_holonomy_defect(MetricSpec::round_sphere(2), {0.3, 0.2}, 0, 1, 0.5, {1, 0}, strict), AccuracyError);
}

}
