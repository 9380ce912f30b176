#pragma once

#include "finsler/metric.hpp"

#include <string>
#include <variant>
#include <vector>

namespace finsler {

// Straight segment in the chart, c(s) = from + s (to - from), s in [0, 1].
struct LineSegment {
    std::vector<double> from;
    std::vector<double> to;
};

// Geodesic with initial point and velocity, integrated for `duration`.
struct GeodesicArc {
    std::vector<double> start;
    std::vector<double> velocity;
    double duration = 1.0;
};

using PathSegment = std::variant<LineSegment, GeodesicArc>;

struct CurvePath {
    std::vector<PathSegment> segments;
    int orientation = +1; // -1 traverses the path backwards

    // Square loop x -> x + eps e_i -> x + eps (e_i + e_j) -> x + eps e_j -> x.
    static CurvePath coordinate_square(const std::vector<double>& x, int i, int j, double eps);
};

struct TrajectorySample {
    double s = 0.0;
    std::vector<double> x;
    std::vector<double> v;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    bool left_domain = false;
};

// x'' + 2 G(x, x') = 0 by classical RK4 with `steps` fixed steps.
// Integration stops early (left_domain = true) when the metric's domain is left.
Trajectory integrate_geodesic(const MetricSpec& spec, const std::vector<double>& x0, const std::vector<double>& y0,
                              double length, int steps);

struct TransportSample {
    double s = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    double F = 0.0;
};

struct TransportOptions {
    int steps_per_unit = 1000;
    double drift_tolerance = 1e-6;
    bool record = false;
};

struct TransportResult {
    std::vector<double> y_end;
    double norm_drift = 0.0; // max |F(c(s), y(s)) - F(c(0), y0)|
    int steps = 0;
    std::vector<TransportSample> samples; // filled when options.record
};

// Integrates the horizontal lift y'^i = -G^i_j(c, y) c'^j. The norm is not
// re-projected; drift above options.drift_tolerance raises AccuracyError.
TransportResult parallel_transport(const MetricSpec& spec, const CurvePath& path, const std::vector<double>& y0,
                                   const TransportOptions& options = {});

// Orientation of the square-loop defect relative to R^i_jk, fixed by the
// round-sphere calibration: defect / eps^2 -> kLoopDefectSign * R_ij(x, y0).
inline constexpr double kLoopDefectSign = 1.0;

struct LoopDefect {
    std::vector<double> defect;    // y_end - y0
    std::vector<double> scaled;    // defect / eps^2
    std::vector<double> curvature; // R^.(i, j) at (x, y0)
    double comparison = 0.0;       // |scaled - sign * curvature|
    TransportResult transport;
};

LoopDefect loop_holonomy_defect(const MetricSpec& spec, const std::vector<double>& x, int i, int j, double eps,
                                const std::vector<double>& y0, const TransportOptions& options = {});

} // namespace finsler
