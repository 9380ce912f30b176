#include "finsler/indicatrix.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kDegenerateGradient = 1e-8;
constexpr double kNewtonTolerance = 1e-13;
constexpr double kTangencyTolerance = 1e-6;
constexpr int kMaxNewtonIterations = 60;

} // namespace

std::size_t jet_space_dim(int dim, int k)
{
    return static_cast<std::size_t>(dim - 1) * monomial_count(dim - 1, k);
}

IndicatrixChart build_chart(const MetricSpec& spec, const std::vector<double>& x, const std::vector<double>& y0,
                            int order, std::optional<int> eliminate)
{
    const int n = spec.dim;
    if (order < 0) {
        throw InvalidArgument("build_chart: negative order");
    }
    const double f0 = norm_value(spec, x, y0);
    if (std::abs(f0 - 1.0) > kUnitTolerance) {
        throw InvalidArgument("build_chart: y0 is not on the indicatrix (F = " + std::to_string(f0) + ")");
    }

    IndicatrixChart chart;
    chart.base_x = x;
    chart.order = order;
    chart.y0.resize(y0.size());
    std::transform(y0.begin(), y0.end(), chart.y0.begin(), [f0](double v) { return v / f0; });

    // Energy as a jet in y alone, one order longer so dE/dy_e keeps `order`
    // (and at least 2, which the energy jet needs).
    std::vector<int> fiber_vars;
    for (int i = 0; i < n; ++i) {
        fiber_vars.push_back(y_var(n, i));
    }
    const TaylorJet fiber_energy =
        restrict_vars(energy_jet(spec, BasePoint{x, chart.y0}, std::max(order + 1, 2)), fiber_vars);
    const TaylorJet fiber_norm = sqrt(fiber_energy * 2.0);

    std::vector<double> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grad[static_cast<std::size_t>(i)] = fiber_norm[1 + static_cast<std::size_t>(i)];
    }
    const auto best = std::max_element(grad.begin(), grad.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double best_abs = std::abs(*best);
    if (best_abs < kDegenerateGradient) {
        throw SingularError("build_chart: fiber gradient of F vanishes, no graph chart exists");
    }
    int e = static_cast<int>(best - grad.begin());
    if (eliminate) {
        if (*eliminate < 0 || *eliminate >= n) {
            throw InvalidArgument("build_chart: eliminated index out of range");
        }
        if (std::abs(grad[static_cast<std::size_t>(*eliminate)]) < 1e-3 * best_abs) {
            throw InvalidArgument("build_chart: coordinate " + std::to_string(*eliminate) +
                                  " is not admissible as a graph coordinate at y0");
        }
        e = *eliminate;
    }
    chart.eliminated = e;

    const int m = n - 1;
    const double ye = chart.y0[static_cast<std::size_t>(e)];
    auto assemble = [&](const TaylorJet& h) {
        std::vector<TaylorJet> g;
        for (int i = 0; i < n; ++i) {
            if (i == e) {
                g.push_back(h);
            } else {
                g.push_back(TaylorJet::variable(chart.chart_var(i), chart.y0[static_cast<std::size_t>(i)], m, order));
            }
        }
        return g;
    };

    const TaylorJet dE_e = partial(fiber_energy, e);
    const TaylorJet energy_o = fiber_energy.truncated(order);
    TaylorJet h = TaylorJet::constant(ye, m, order);
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
        const auto g = assemble(h);
        const TaylorJet phi = compose(energy_o, chart.y0, g) - 0.5;
        const TaylorJet dphi = compose(dE_e, chart.y0, g);
        const TaylorJet step = phi * reciprocal(dphi);
        // The constant term is pinned by normalizing y0.
        std::vector<double> c(step.coeffs().begin(), step.coeffs().end());
        c[0] = 0.0;
        const TaylorJet correction(step.layout_ptr(), std::move(c));
        h = h - correction;
        if (correction.max_abs() <= kNewtonTolerance * (1.0 + h.max_abs()) && it > 0) {
            break;
        }
    }
    chart.graph = h;
    chart.embedding = assemble(h);

    for (int i = 0; i < n; ++i) {
        chart.norm_gradient.push_back(compose(partial(fiber_norm, i), chart.y0, chart.embedding));
    }
    return chart;
}

ChartField restrict_field(const IndicatrixChart& chart, const VerticalFieldJet& xi, double reference_scale)
{
    const int n = chart.dim();
    if (xi.dim() != n) {
        throw InvalidArgument("restrict_field: field dimension does not match the chart");
    }
    const VerticalFieldJet fiber = freeze_base(xi);
    const int order = std::min(fiber.order(), chart.order);

    std::vector<TaylorJet> emb;
    for (const auto& g : chart.embedding) {
        emb.push_back(g.truncated(order));
    }

    ChartField out;
    out.label = xi.label;
    std::vector<TaylorJet> composed;
    for (int i = 0; i < n; ++i) {
        composed.push_back(compose(fiber.xi[static_cast<std::size_t>(i)], chart.y0, emb));
    }

    TaylorJet residual(n - 1, order);
    double grad_scale = 0.0;
    double field_scale = 0.0;
    for (int i = 0; i < n; ++i) {
        const TaylorJet gi = chart.norm_gradient[static_cast<std::size_t>(i)].truncated(order);
        residual = mul_add(residual, gi, composed[static_cast<std::size_t>(i)]);
        grad_scale = std::max(grad_scale, gi.max_abs());
        field_scale = std::max(field_scale, composed[static_cast<std::size_t>(i)].max_abs());
    }
    out.tangency_residual = residual.max_abs();
    field_scale = std::max(field_scale, reference_scale);
    if (field_scale > 0.0 && out.tangency_residual > kTangencyTolerance * field_scale * grad_scale) {
        throw AccuracyError("restrict_field: field " + xi.label + " is not tangent to the indicatrix (residual " +
                            std::to_string(out.tangency_residual) + ")");
    }

    for (int i = 0; i < n; ++i) {
        if (i == chart.eliminated) {
            out.eliminated_component = composed[static_cast<std::size_t>(i)];
        } else {
            out.components.push_back(std::move(composed[static_cast<std::size_t>(i)]));
        }
    }
    return out;
}

std::vector<double> jet_vector(const ChartField& field, int k)
{
    if (k < 0) {
        throw InvalidArgument("jet_vector: negative k");
    }
    if (field.order() < k) {
        throw BudgetError("jet_vector: field " + field.label + " has order " + std::to_string(field.order()) +
                              " < k = " + std::to_string(k),
                          k);
    }
    std::vector<double> v;
    for (const auto& c : field.components) {
        const std::size_t count = c.layout().prefix_size(k);
        v.insert(v.end(), c.coeffs().begin(), c.coeffs().begin() + static_cast<std::ptrdiff_t>(count));
    }
    return v;
}

} // namespace finsler
