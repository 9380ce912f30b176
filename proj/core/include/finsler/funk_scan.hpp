#pragma once

#include "finsler/holonomy_rank.hpp"
#include "finsler/metric.hpp"

#include <limits>
#include <string>
#include <vector>

namespace finsler {

// Either an arithmetic grid t_min, t_min + step, ..., t_max or an explicit list.
struct TGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    double step = 0.05;
    std::vector<double> explicit_values;

    std::vector<double> values() const;
    // "min:max:step" or "t1,t2,...".
    static TGrid parse(const std::string& text);
};

struct ScanConfig {
    MetricSpec base = MetricSpec::euclidean(2);
    BumpParams bump;
    std::vector<double> x{0.0, 0.0};
    std::vector<double> y0{1.0, 0.0};
    int k = 3;
    int d = 3;
    int b = 0;
    TGrid t_grid;
    double tol = 1e-9;
    bool track_det = true;
    int workers = 1;

    void validate() const;
    RankOptions rank_options() const;
};

struct ScanRow {
    double t = 0.0;
    int rank = 0;
    bool generating = false;
    double min_kept_singular = 0.0;
    double gap_ratio = std::numeric_limits<double>::infinity();
    double det_Pt = std::numeric_limits<double>::quiet_NaN();
    bool valid = true; // false when F_t fails strong convexity at (x, y0)
};

struct ExceptionalInterval {
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::string reason;
};

struct DeterminantTrack {
    std::vector<int> pivot_rows;      // rows of the jet matrix frozen at t = 1
    std::vector<double> t;
    std::vector<double> det;
    std::vector<ExceptionalInterval> candidates;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::vector<int> pivot_rows;
    std::vector<ExceptionalInterval> candidates;
};

// F_t for the configured base, bump and t.
MetricSpec perturbed_metric(const ScanConfig& cfg, double t);

// Rows of the t = 1 jet matrix spanning the jet space, chosen by column
// pivoted QR of the row-normalized transpose. Throws InvalidArgument when
// the t = 1 matrix is not of full rank.
std::vector<int> select_pivot_rows(const ScanConfig& cfg);

// One row per grid value, in grid order; det_Pt filled when cfg.track_det.
// Rows are independent and computed on cfg.workers threads; the output does
// not depend on the worker count.
std::vector<ScanRow> scan_perturbation(const ScanConfig& cfg);

// det of the frozen l x l submatrix along the grid, with candidate
// exceptional intervals from sign changes and dips.
DeterminantTrack track_determinant(const ScanConfig& cfg, const std::vector<int>& pivot_rows);
DeterminantTrack track_determinant(const ScanConfig& cfg);

// Candidate intervals from rank drops, invalid rows, det sign changes and
// det dips, merged where they overlap. Rows need not be sorted.
std::vector<ExceptionalInterval> exceptional_intervals(const std::vector<ScanRow>& rows);

ScanResult run_scan(const ScanConfig& cfg);

} // namespace finsler
