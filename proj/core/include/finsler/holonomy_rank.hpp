#pragma once

#include "finsler/berwald.hpp"
#include "finsler/indicatrix.hpp"
#include "finsler/metric.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

namespace finsler {

struct RankOptions {
    int k = 3;           // jet order on the indicatrix
    int d = 3;           // covariant derivative depth
    int b = 0;           // bracket nesting depth
    double tol = 1e-9;   // singular values below tol * sigma_max count as zero
    std::optional<int> jet_order; // energy jet order; default k + d + b + 5
    std::optional<int> eliminate; // forced graph coordinate of the chart

    int energy_order() const { return jet_order.value_or(JetBudget::energy_order(k, d, b)); }
};

// Generators of the infinitesimal holonomy algebra, all pushed through one
// chart: R_ij (i < j), then nabla_{p1..ps} R_ij by depth s, pair and word,
// then nested brackets.
struct SpanningSet {
    std::vector<ChartField> fields;
    int deriv_depth = 0;
    int bracket_depth = 0;
    IndicatrixChart chart;
};

// Curvature fields and their covariant derivatives as jets over (x, y);
// brackets (b >= 1) are taken fiberwise and come back frozen at the base x.
std::vector<VerticalFieldJet> holonomy_field_jets(const BerwaldData& data, int d, int b);

// y0 is normalized onto the indicatrix first.
SpanningSet generate_spanning_set(const MetricSpec& spec, const std::vector<double>& x,
                                  const std::vector<double>& y0, const RankOptions& options);

// Row i is jet_vector(fields[i], k).
Eigen::MatrixXd jet_matrix(const SpanningSet& set, int k);

struct NumericalRank {
    int rank = 0;
    std::vector<double> singular_values; // descending
    double gap_ratio = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
    int kept_rows = 0;
};

// Rows are scaled to unit max-norm; rows whose max-norm is below 1e-12 of
// the largest row are treated as zero and dropped. rank counts singular
// values above tol * sigma_max, gap_ratio = sigma_rank / sigma_{rank+1}
// (infinite when nothing follows), and a gap below 10 marks the result
// ambiguous.
NumericalRank numerical_rank(const Eigen::MatrixXd& m, double tol);

inline constexpr double kAmbiguousGap = 10.0;
inline constexpr double kZeroRowFloor = 1e-12;

struct RankReport {
    int matrix_rows = 0;
    int matrix_cols = 0;
    std::vector<double> singular_values;
    int rank = 0;
    int target_dim = 0;
    bool generating = false;
    double gap_ratio = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
};

RankReport make_rank_report(const Eigen::MatrixXd& m, int target_dim, double tol);

// Full pipeline: chart, spanning set, jet matrix, numerical rank.
RankReport is_k_jet_generating(const MetricSpec& spec, const std::vector<double>& x,
                               const std::vector<double>& y0, const RankOptions& options = {});

// y / F(x, y).
std::vector<double> normalize_to_indicatrix(const MetricSpec& spec, const std::vector<double>& x,
                                            const std::vector<double>& y);

} // namespace finsler
