#pragma once

#include "finsler/berwald.hpp"
#include "finsler/metric.hpp"
#include "finsler/taylor_jet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finsler {

// Graph coordinates on the indicatrix {y : F(x, y) = 1} near y0. The fiber
// coordinate y_e with the largest |dF/dy_e| is solved for as a function of
// the remaining n - 1 coordinates u (y_i = y0_i + u_j for i != e).
struct IndicatrixChart {
    std::vector<double> base_x;
    std::vector<double> y0;
    int eliminated = 0;
    int order = 0;
    TaylorJet graph{1, 0};             // y_e(u), over n - 1 variables
    std::vector<TaylorJet> embedding;  // gamma(u): all n fiber coordinates
    std::vector<TaylorJet> norm_gradient; // dF/dy_i along gamma(u)

    int dim() const noexcept { return static_cast<int>(y0.size()); }
    // Chart variable of fiber coordinate i (i != eliminated).
    int chart_var(int i) const noexcept { return i < eliminated ? i : i - 1; }
};

// A vertical field pushed into chart coordinates.
struct ChartField {
    std::vector<TaylorJet> components; // n - 1 jets over the chart variables
    std::string label;
    TaylorJet eliminated_component{1, 0}; // xi^e along gamma(u), implied by tangency
    double tangency_residual = 0.0;

    int order() const { return components.front().order(); }
};

// y0 must satisfy F(x, y0) = 1 within 1e-9; `eliminate` forces the graph
// coordinate (it must be admissible, i.e. |dF/dy_e| not tiny).
IndicatrixChart build_chart(const MetricSpec& spec, const std::vector<double>& x, const std::vector<double>& y0,
                            int order, std::optional<int> eliminate = std::nullopt);

// Restricts xi to the indicatrix through the chart. Throws AccuracyError when
// xi is not tangent to the indicatrix: residual above 1e-6 relative to
// max(|xi|, reference_scale). A family of fields passes its largest
// magnitude as reference_scale so members that cancel to rounding noise
// are not judged on their own scale.
ChartField restrict_field(const IndicatrixChart& chart, const VerticalFieldJet& xi, double reference_scale = 0.0);

// All Taylor coefficients of degree <= k, component-major, JetLayout order
// within a component. Length (n - 1) * C(n - 1 + k, k).
std::vector<double> jet_vector(const ChartField& field, int k);

std::size_t jet_space_dim(int dim, int k);

} // namespace finsler
