#pragma once

#include "finsler/metric.hpp"
#include "finsler/taylor_jet.hpp"

#include <span>
#include <string>
#include <vector>

namespace finsler {

// Orders of the energy jet consumed by each stage. A spray coefficient needs
// the 3-jet of E, a curvature component the 5-jet, and every covariant
// derivative or bracket one more.
struct JetBudget {
    static constexpr int spray_cost = 3;
    static constexpr int curvature_cost = 5;
    static constexpr int per_derivative_cost = 1;

    // Energy order that leaves k orders of every field with `derivs`
    // covariant derivatives and `brackets` nested brackets.
    static constexpr int energy_order(int k, int derivs, int brackets = 0) noexcept
    {
        return k + derivs * per_derivative_cost + brackets * per_derivative_cost + curvature_cost;
    }
};

// g_ij = d^2E / dy_i dy_j and its inverse, as n x n matrices of jets
// (row-major), of order E.order() - 2.
struct FundamentalTensor {
    int dim = 0;
    BasePoint at;
    std::vector<TaylorJet> g;
    std::vector<TaylorJet> g_inv;

    const TaylorJet& metric(int i, int j) const { return g[static_cast<std::size_t>(i * dim + j)]; }
    const TaylorJet& inverse(int i, int j) const { return g_inv[static_cast<std::size_t>(i * dim + j)]; }
};

// Geodesic coefficients G^i, nonlinear connection G^i_j = dG^i/dy_j and
// Berwald coefficients G^i_jk = dG^i_j/dy_k. When the energy jet is too short
// for the derivatives, the corresponding vectors are left empty.
struct SprayJets {
    int dim = 0;
    BasePoint at;
    std::vector<TaylorJet> G;
    std::vector<TaylorJet> Gi;
    std::vector<TaylorJet> Gijk;

    const TaylorJet& coeff(int i) const { return G[static_cast<std::size_t>(i)]; }
    const TaylorJet& connection(int i, int j) const { return Gi[static_cast<std::size_t>(i * dim + j)]; }
    const TaylorJet& berwald(int i, int j, int k) const
    {
        return Gijk[static_cast<std::size_t>((i * dim + j) * dim + k)];
    }
};

// R^i_jk, stored at (i * n + j) * n + k.
struct CurvatureJets {
    int dim = 0;
    std::vector<TaylorJet> R;

    const TaylorJet& component(int i, int j, int k) const
    {
        return R[static_cast<std::size_t>((i * dim + j) * dim + k)];
    }
};

// Vertical vector field xi^i d/dy_i, components as jets over (x, y) in 2n
// variables, or over y alone (n variables) once the base point is frozen.
struct VerticalFieldJet {
    std::vector<TaylorJet> xi;
    std::string label;

    int dim() const noexcept { return static_cast<int>(xi.size()); }
    int order() const { return xi.front().order(); }
    bool has_base_variables() const { return xi.front().num_vars() == 2 * dim(); }
    bool is_zero() const;
    double max_abs() const;
};

FundamentalTensor fundamental_tensor(const TaylorJet& energy, const BasePoint& at);

// G^i = 1/4 g^il (2 dg_jl/dx_k - dg_jk/dx_l) y_j y_k.
SprayJets spray(const TaylorJet& energy, const FundamentalTensor& tensor);

// R^i_jk = dG^i_j/dx_k - dG^i_k/dx_j + G^m_j G^i_km - G^m_k G^i_jm.
CurvatureJets curvature(const SprayJets& spray);

// The field R(delta_j, delta_k); zero when j == k.
VerticalFieldJet curvature_field(const CurvatureJets& curv, int j, int k);

// Horizontal Berwald covariant derivative along d/dx_j:
// (nabla_j xi)^i = dxi^i/dx_j - G^k_j dxi^i/dy_k + G^i_jk xi^k.
VerticalFieldJet covariant_derivative(const SprayJets& spray, const VerticalFieldJet& xi, int j);

// Fiberwise Lie bracket [a, b]^i = a^j db^i/dy_j - b^j da^i/dy_j.
VerticalFieldJet vertical_bracket(const VerticalFieldJet& a, const VerticalFieldJet& b);

// Drops the x-dependence: components become jets over y at the base x.
VerticalFieldJet freeze_base(const VerticalFieldJet& xi);

// Max coefficient of sum_i (dF/dy_i) xi^i, the infinitesimal change of F
// along xi. Zero for fields that preserve the norm.
double tangency_residual(const TaylorJet& energy, const VerticalFieldJet& xi);

// Max coefficient of sum_i y_i df/dy_i - degree * f for a jet over (x, y)
// expanded at `at`; zero for fiberwise homogeneous f of that degree.
double homogeneity_defect(const TaylorJet& f, const BasePoint& at, int degree);

// Everything up to curvature in one pass.
struct BerwaldData {
    BasePoint at;
    TaylorJet energy;
    FundamentalTensor tensor;
    SprayJets spray;
    CurvatureJets curvature;
};

BerwaldData compute_berwald(const MetricSpec& spec, const BasePoint& at, int energy_order);

// Point values of G^i and G^i_j (row-major) at (x, y).
struct SprayValues {
    std::vector<double> G;
    std::vector<double> Gi;
};

SprayValues spray_at(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

} // namespace finsler
