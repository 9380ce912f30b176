#include "finsler/berwald.hpp"

#include "finsler/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

using Matrix = std::vector<TaylorJet>;

int dim_of(const TaylorJet& energy, const BasePoint& at)
{
    const int n = static_cast<int>(at.x.size());
    if (energy.num_vars() != 2 * n || static_cast<int>(at.y.size()) != n) {
        throw InvalidArgument("energy jet variables do not match the base point dimension");
    }
    return n;
}

Matrix matmul(const Matrix& a, const Matrix& b, int n)
{
    Matrix c;
    c.reserve(a.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            TaylorJet sum(a[0].num_vars(), a[0].order());
            for (int k = 0; k < n; ++k) {
                sum = mul_add(sum, a[static_cast<std::size_t>(i * n + k)], b[static_cast<std::size_t>(k * n + j)]);
            }
            c.push_back(std::move(sum));
        }
    }
    return c;
}

std::string index_label(int j, int k)
{
    return std::to_string(j + 1) + std::to_string(k + 1);
}

void require_order(const TaylorJet& jet, int needed, const std::string& what, int energy_needed)
{
    if (jet.order() < needed) {
        throw BudgetError(what + ": jet order exhausted (have " + std::to_string(jet.order()) + ", need " +
                              std::to_string(needed) + ")",
                          energy_needed);
    }
}

} // namespace

bool VerticalFieldJet::is_zero() const
{
    return std::all_of(xi.begin(), xi.end(), [](const TaylorJet& c) { return c.is_zero(); });
}

double VerticalFieldJet::max_abs() const
{
    double m = 0.0;
    for (const auto& c : xi) {
        m = std::max(m, c.max_abs());
    }
    return m;
}

FundamentalTensor fundamental_tensor(const TaylorJet& energy, const BasePoint& at)
{
    const int n = dim_of(energy, at);
    if (energy.order() < 2) {
        throw BudgetError("fundamental_tensor: energy jet order must be >= 2", 2);
    }
    FundamentalTensor ft;
    ft.dim = n;
    ft.at = at;
    std::vector<TaylorJet> dE;
    dE.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        dE.push_back(partial(energy, y_var(n, i)));
    }
    ft.g.assign(static_cast<std::size_t>(n * n), TaylorJet(2 * n, energy.order() - 2));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            TaylorJet gij = partial(dE[static_cast<std::size_t>(i)], y_var(n, j));
            ft.g[static_cast<std::size_t>(j * n + i)] = gij;
            ft.g[static_cast<std::size_t>(i * n + j)] = std::move(gij);
        }
    }

    Eigen::MatrixXd g0(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            g0(i, j) = ft.metric(i, j).value();
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g0);
    if (!lu.isInvertible()) {
        throw SingularError("fundamental_tensor: g_ij is singular at the base point");
    }
    const Eigen::MatrixXd inv0 = lu.inverse();
    const int order = energy.order() - 2;
    Matrix x;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            x.push_back(TaylorJet::constant(inv0(i, j), 2 * n, order));
        }
    }
    if (order > 0) {
        // X <- X + X (I - g X), seeded with the inverse of the constant matrix.
        const int iterations = static_cast<int>(std::ceil(std::log2(order + 1.0))) + 1;
        for (int it = 0; it < iterations; ++it) {
            Matrix residual = matmul(ft.g, x, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    auto& r = residual[static_cast<std::size_t>(i * n + j)];
                    r = (i == j ? 1.0 - r : -r);
                }
            }
            const Matrix step = matmul(x, residual, n);
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] = x[k] + step[k];
            }
        }
    }
    ft.g_inv = std::move(x);
    return ft;
}

SprayJets spray(const TaylorJet& energy, const FundamentalTensor& tensor)
{
    const int n = tensor.dim;
    if (energy.order() < JetBudget::spray_cost) {
        throw BudgetError("spray: energy jet order " + std::to_string(energy.order()) + " < 3",
                          JetBudget::spray_cost);
    }
    const int order = energy.order() - JetBudget::spray_cost;
    const auto nn = static_cast<std::size_t>(n);

    std::vector<TaylorJet> y;
    for (int j = 0; j < n; ++j) {
        y.push_back(TaylorJet::variable(y_var(n, j), tensor.at.y[static_cast<std::size_t>(j)], 2 * n, order));
    }
    // dg[(k * n + j) * n + l] = d g_jl / dx_k
    std::vector<TaylorJet> dg;
    dg.reserve(nn * nn * nn);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) {
                dg.push_back(partial(tensor.metric(j, l), x_var(k)));
            }
        }
    }
    auto dgx = [&](int k, int j, int l) -> const TaylorJet& {
        return dg[static_cast<std::size_t>((k * n + j) * n + l)];
    };

    // B_l = sum_j y_j (2 sum_k dg_jl/dx_k y_k - sum_k dg_jk/dx_l y_k)
    std::vector<TaylorJet> B;
    for (int l = 0; l < n; ++l) {
        TaylorJet bl(2 * n, order);
        for (int j = 0; j < n; ++j) {
            TaylorJet inner(2 * n, order);
            for (int k = 0; k < n; ++k) {
                inner = mul_add(inner, y[static_cast<std::size_t>(k)], dgx(k, j, l), 2.0);
                inner = mul_add(inner, y[static_cast<std::size_t>(k)], dgx(l, j, k), -1.0);
            }
            bl = mul_add(bl, y[static_cast<std::size_t>(j)], inner);
        }
        B.push_back(std::move(bl));
    }

    SprayJets s;
    s.dim = n;
    s.at = tensor.at;
    for (int i = 0; i < n; ++i) {
        TaylorJet gi(2 * n, order);
        for (int l = 0; l < n; ++l) {
            gi = mul_add(gi, tensor.inverse(i, l).truncated(order), B[static_cast<std::size_t>(l)], 0.25);
        }
        s.G.push_back(std::move(gi));
    }
    if (order >= 1) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                s.Gi.push_back(partial(s.G[static_cast<std::size_t>(i)], y_var(n, j)));
            }
        }
    }
    if (order >= 2) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    s.Gijk.push_back(partial(s.connection(i, j), y_var(n, k)));
                }
            }
        }
    }
    return s;
}

CurvatureJets curvature(const SprayJets& sp)
{
    const int n = sp.dim;
    if (sp.Gijk.empty() || sp.Gi.front().order() < 1) {
        throw BudgetError("curvature: spray jets too short, energy jet order must be >= 5",
                          JetBudget::curvature_cost);
    }
    const int order = sp.Gi.front().order() - 1;
    std::vector<TaylorJet> gi_low;
    for (const auto& g : sp.Gi) {
        gi_low.push_back(g.truncated(order));
    }
    auto Gl = [&](int i, int j) -> const TaylorJet& { return gi_low[static_cast<std::size_t>(i * n + j)]; };

    CurvatureJets c;
    c.dim = n;
    c.R.assign(static_cast<std::size_t>(n * n * n), TaylorJet(2 * n, order));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                TaylorJet r = partial(sp.connection(i, j), x_var(k)) - partial(sp.connection(i, k), x_var(j));
                for (int m = 0; m < n; ++m) {
                    r = mul_add(r, Gl(m, j), sp.berwald(i, k, m));
                    r = mul_add(r, Gl(m, k), sp.berwald(i, j, m), -1.0);
                }
                c.R[static_cast<std::size_t>((i * n + k) * n + j)] = -r;
                c.R[static_cast<std::size_t>((i * n + j) * n + k)] = std::move(r);
            }
        }
    }
    return c;
}

VerticalFieldJet curvature_field(const CurvatureJets& curv, int j, int k)
{
    const int n = curv.dim;
    if (j < 0 || j >= n || k < 0 || k >= n) {
        throw InvalidArgument("curvature_field: index out of range");
    }
    VerticalFieldJet f;
    f.label = "R_{" + index_label(j, k) + "}";
    for (int i = 0; i < n; ++i) {
        f.xi.push_back(curv.component(i, j, k));
    }
    return f;
}

VerticalFieldJet covariant_derivative(const SprayJets& sp, const VerticalFieldJet& xi, int j)
{
    const int n = sp.dim;
    if (j < 0 || j >= n) {
        throw InvalidArgument("covariant_derivative: direction index out of range");
    }
    if (xi.dim() != n || !xi.has_base_variables()) {
        throw InvalidArgument("covariant_derivative: field must be a jet over (x, y) of matching dimension");
    }
    const int p = xi.order();
    require_order(xi.xi.front(), 1, "covariant_derivative", p + 1);
    const int order = p - 1;
    if (sp.Gijk.empty() || sp.Gijk.front().order() < order) {
        throw BudgetError("covariant_derivative: spray jets shorter than the field", order + JetBudget::curvature_cost);
    }

    std::vector<TaylorJet> dy; // dy[i * n + k] = d xi^i / dy_k
    std::vector<TaylorJet> low; // xi^k truncated
    for (int i = 0; i < n; ++i) {
        low.push_back(xi.xi[static_cast<std::size_t>(i)].truncated(order));
        for (int k = 0; k < n; ++k) {
            dy.push_back(partial(xi.xi[static_cast<std::size_t>(i)], y_var(n, k)));
        }
    }
    std::vector<TaylorJet> conn; // G^k_j
    for (int k = 0; k < n; ++k) {
        conn.push_back(sp.connection(k, j).truncated(order));
    }

    VerticalFieldJet out;
    out.label = "∇_" + std::to_string(j + 1) + xi.label;
    for (int i = 0; i < n; ++i) {
        TaylorJet r = partial(xi.xi[static_cast<std::size_t>(i)], x_var(j));
        for (int k = 0; k < n; ++k) {
            r = mul_add(r, conn[static_cast<std::size_t>(k)], dy[static_cast<std::size_t>(i * n + k)], -1.0);
            r = mul_add(r, sp.berwald(i, j, k).truncated(order), low[static_cast<std::size_t>(k)]);
        }
        out.xi.push_back(std::move(r));
    }
    return out;
}

VerticalFieldJet vertical_bracket(const VerticalFieldJet& a, const VerticalFieldJet& b)
{
    const int n = a.dim();
    if (b.dim() != n || !a.xi.front().compatible(b.xi.front())) {
        throw InvalidArgument("vertical_bracket: incompatible fields");
    }
    const int p = a.order();
    require_order(a.xi.front(), 1, "vertical_bracket", p + 1);
    const int offset = a.has_base_variables() ? n : 0;

    VerticalFieldJet out;
    out.label = "[" + a.label + "," + b.label + "]";
    std::vector<TaylorJet> al, bl;
    for (int j = 0; j < n; ++j) {
        al.push_back(a.xi[static_cast<std::size_t>(j)].truncated(p - 1));
        bl.push_back(b.xi[static_cast<std::size_t>(j)].truncated(p - 1));
    }
    for (int i = 0; i < n; ++i) {
        TaylorJet r(a.xi.front().num_vars(), p - 1);
        for (int j = 0; j < n; ++j) {
            r = mul_add(r, al[static_cast<std::size_t>(j)], partial(b.xi[static_cast<std::size_t>(i)], offset + j));
            r = mul_add(r, bl[static_cast<std::size_t>(j)], partial(a.xi[static_cast<std::size_t>(i)], offset + j), -1.0);
        }
        out.xi.push_back(std::move(r));
    }
    return out;
}

VerticalFieldJet freeze_base(const VerticalFieldJet& xi)
{
    if (!xi.has_base_variables()) {
        return xi;
    }
    const int n = xi.dim();
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        keep.push_back(y_var(n, i));
    }
    VerticalFieldJet out;
    out.label = xi.label;
    for (const auto& c : xi.xi) {
        out.xi.push_back(restrict_vars(c, keep));
    }
    return out;
}

double tangency_residual(const TaylorJet& energy, const VerticalFieldJet& xi)
{
    const int n = xi.dim();
    if (energy.num_vars() != 2 * n) {
        throw InvalidArgument("tangency_residual: energy jet must be over (x, y)");
    }
    if (!xi.has_base_variables()) {
        throw InvalidArgument("tangency_residual: field must be a jet over (x, y)");
    }
    const TaylorJet F = norm_jet(energy);
    const int order = std::min(F.order() - 1, xi.order());
    TaylorJet sum(2 * n, order);
    for (int i = 0; i < n; ++i) {
        sum = mul_add(sum, partial(F, y_var(n, i)).truncated(order), xi.xi[static_cast<std::size_t>(i)].truncated(order));
    }
    return sum.max_abs();
}

double homogeneity_defect(const TaylorJet& f, const BasePoint& at, int degree)
{
    const int n = static_cast<int>(at.y.size());
    if (f.num_vars() != 2 * n) {
        throw InvalidArgument("homogeneity_defect: jet must be over (x, y)");
    }
    const int order = f.order() - 1;
    TaylorJet euler = f.truncated(order) * static_cast<double>(-degree);
    for (int i = 0; i < n; ++i) {
        const TaylorJet yi = TaylorJet::variable(y_var(n, i), at.y[static_cast<std::size_t>(i)], 2 * n, order);
        euler = mul_add(euler, yi, partial(f, y_var(n, i)));
    }
    return euler.max_abs();
}

BerwaldData compute_berwald(const MetricSpec& spec, const BasePoint& at, int energy_order)
{
    if (energy_order < JetBudget::curvature_cost) {
        throw BudgetError("compute_berwald: curvature needs energy order >= 5", JetBudget::curvature_cost);
    }
    TaylorJet energy = energy_jet(spec, at, energy_order);
    FundamentalTensor tensor = fundamental_tensor(energy, at);
    SprayJets sp = spray(energy, tensor);
    CurvatureJets curv = curvature(sp);
    return BerwaldData{at, std::move(energy), std::move(tensor), std::move(sp), std::move(curv)};
}

SprayValues spray_at(const MetricSpec& spec, std::span<const double> x, std::span<const double> y)
{
    const BasePoint at{{x.begin(), x.end()}, {y.begin(), y.end()}};
    const TaylorJet energy = energy_jet(spec, at, JetBudget::spray_cost + 1);
    const FundamentalTensor tensor = fundamental_tensor(energy, at);
    const SprayJets sp = spray(energy, tensor);
    SprayValues v;
    for (const auto& g : sp.G) {
        v.G.push_back(g.value());
    }
    for (const auto& g : sp.Gi) {
        v.Gi.push_back(g.value());
    }
    return v;
}

} // namespace finsler
