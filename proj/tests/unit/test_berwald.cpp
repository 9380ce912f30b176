#include "finsler/berwald.hpp"
#include "finsler/errors.hpp"
#include "finsler/metric.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace finsler;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

VerticalFieldJet random_fiber_field(std::mt19937& rng, int n, int order)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto layout = JetLayout::get(n, order);
    VerticalFieldJet f;
    for (int i = 0; i < n; ++i) {
        std::vector<double> c(layout->size(), 0.0);
        for (std::size_t r = 0; r < layout->prefix_size(3); ++r) {
            c[r] = u(rng);
        }
        f.xi.emplace_back(layout, c);
    }
    return f;
}

VerticalFieldJet truncate(VerticalFieldJet f, int order)
{
    for (auto& c : f.xi) c = c.truncated(order);
    return f;
}

double field_diff(const VerticalFieldJet& a, const VerticalFieldJet& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.xi.size(); ++i) m = std::max(m, max_abs_diff(a.xi[i], b.xi[i]));
    return m;
}

MetricSpec sample_diagonal()
{
    return MetricSpec::diagonal({{{1.0, {0, 0}}, {0.4, {2, 0}}, {0.2, {1, 1}}},
                                 {{1.5, {0, 0}}, {0.3, {0, 2}}, {-0.2, {1, 0}}}});
}

std::vector<long double> diagonal_metric(const std::vector<long double>& x)
{
    return {1.0L + 0.4L * x[0] * x[0] + 0.2L * x[0] * x[1], 0, 0, 1.5L + 0.3L * x[1] * x[1] - 0.2L * x[0]};
}

} // namespace

TEST_SUITE("berwald") {

TEST_CASE("euclidean: identity tensor, zero spray, curvature and fields")
{
    const auto data = compute_berwald(MetricSpec::euclidean(3), BasePoint{{0.1, 0.2, 0.3}, {1, 0, 0}}, 8);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(max_abs_diff(data.tensor.metric(i, j), TaylorJet::constant(i == j, 6, 6)) == 0.0);
            CHECK(max_abs_diff(data.tensor.inverse(i, j), TaylorJet::constant(i == j, 6, 6)) == 0.0);
        }
        CHECK(data.spray.coeff(i).is_zero());
    }
    for (const auto& r : data.curvature.R) CHECK(r.is_zero());
    const auto f = curvature_field(data.curvature, 0, 1);
    CHECK(f.is_zero());
    CHECK(covariant_derivative(data.spray, f, 2).is_zero());
    CHECK(f.label == "R_{12}");

    // Constant field: nabla_j xi = 0.
    VerticalFieldJet c;
    for (int i = 0; i < 3; ++i) c.xi.push_back(TaylorJet::constant(i + 1.0, 6, 3));
    CHECK(covariant_derivative(data.spray, c, 1).is_zero());
}

TEST_CASE("riemannian: g depends on x only")
{
    const auto data = compute_berwald(MetricSpec::round_sphere(2), BasePoint{{0.2, -0.1}, {1, 0.5}}, 6);
    for (const auto& g : data.tensor.g) {
        for (std::size_t r = 0; r < g.layout().size(); ++r) {
            const auto& m = g.layout().index(r);
            if (m[2] + m[3] > 0) CHECK(g[r] == 0.0);
        }
    }
}

TEST_CASE("property: g g^-1 = I and g against finite differences")
{
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = trial == 0 ? oracle::Vec{0.3, 0.0} : oracle::ball_point(rng, 2, 0.8);
        const auto y = trial == 0 ? oracle::Vec{1.0, 0.2} : oracle::unit_vector(rng, 2);
        const BasePoint p{x, y};
        const auto tensor = fundamental_tensor(energy_jet(MetricSpec::funk(2), p, 6), p);
        for (int i = 0; i < 2; ++i) {
            for (int k = 0; k < 2; ++k) {
                TaylorJet s(tensor.g.front().layout_ptr(), std::vector<double>(tensor.g.front().layout().size(), 0.0));
                for (int j = 0; j < 2; ++j) s = s + tensor.metric(i, j) * tensor.inverse(j, k);
                CHECK(max_abs_diff(s, TaylorJet::constant(i == k, 4, 4)) < 1e-10);

                std::vector<long double> z = oracle::widen(x);
                z.insert(z.end(), y.begin(), y.end());
                std::vector<int> m(4, 0);
                ++m[static_cast<std::size_t>(2 + i)];
                ++m[static_cast<std::size_t>(2 + k)];
                const double fd = static_cast<double>(oracle::central_derivative(oracle::funk_E, z, m, 1e-4L));
                CHECK(rel_err(tensor.metric(i, k).value(), fd) < 1e-7);
            }
        }
    }
}

TEST_CASE("Riemannian spray and curvature against the Christoffel oracle")
{
    std::mt19937 rng(10);
    const struct {
        MetricSpec spec;
        oracle::ChristoffelOracle oracle;
    } cases[] = {{MetricSpec::round_sphere(2), {oracle::round_sphere_metric, 2}},
                 {MetricSpec::round_sphere(3), {oracle::round_sphere_metric, 3}},
                 {sample_diagonal(), {diagonal_metric, 2}}};
    for (const auto& c : cases) {
        const int n = c.spec.dim;
        for (int trial = 0; trial < 5; ++trial) {
            const auto x = oracle::ball_point(rng, n, 0.7);
            const auto y = oracle::unit_vector(rng, n);
            const auto data = compute_berwald(c.spec, BasePoint{x, y}, 5);
            const auto G = c.oracle.spray(x, y);
            for (int i = 0; i < n; ++i) {
                CHECK(std::abs(data.spray.coeff(i).value() - G[static_cast<std::size_t>(i)]) < 1e-9);
            }
            const auto R = c.oracle.spray_curvature(x, y);
            for (std::size_t e = 0; e < R.size(); ++e) {
                CHECK(std::abs(data.curvature.R[e].value() - R[e]) < 1e-5);
            }
        }
    }
}

TEST_CASE("round sphere: sectional curvature 1 from the curvature jets")
{
    // y^j R^i_jk = K (F^2 delta^i_k - g_kl y^l y^i) with K = 1.
    const oracle::Vec x{0.3, -0.2}, y{0.6, 0.9};
    const auto data = compute_berwald(MetricSpec::round_sphere(2), BasePoint{x, y}, 5);
    const double lam = 4.0 / std::pow(1.0 + 0.13, 2);
    const double F2 = lam * (0.36 + 0.81);
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
            double s = 0;
            for (int j = 0; j < 2; ++j) s += y[static_cast<std::size_t>(j)] * data.curvature.component(i, j, k).value();
            const double expect = F2 * (i == k) - lam * y[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(i)];
            CHECK(s == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: Funk spray is F y / 2")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 2;
        const auto x = oracle::ball_point(rng, n, 0.9);
        auto y = oracle::unit_vector(rng, n);
        const double F = funk_norm_value(x, y);
        const auto s = spray_at(MetricSpec::funk(n), x, y);
        for (int i = 0; i < n; ++i) {
            const double expect = 0.5 * F * y[static_cast<std::size_t>(i)];
            CHECK(std::abs(s.G[static_cast<std::size_t>(i)] - expect) <= 1e-8 * std::max(1.0, F * F));
        }
    }
}

TEST_CASE("Funk curvature against the constant flag curvature oracle")
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + trial % 2;
        const auto x = trial < 2 ? oracle::Vec(static_cast<std::size_t>(n), 0.0) : oracle::ball_point(rng, n, 0.6);
        const auto y = oracle::unit_vector(rng, n);
        const auto data = compute_berwald(MetricSpec::funk(n), BasePoint{x, y}, 5);
        const auto R = oracle::funk_curvature(x, y);
        for (std::size_t e = 0; e < R.size(); ++e) {
            CHECK(std::abs(data.curvature.R[e].value() - R[e]) < 1e-5 * std::max(1.0, std::abs(R[e])));
        }
        // Oracle self-check: y^j R^i_jk = -1/4 (F^2 delta_ik - F F_{y_k} y^i).
        const double F = funk_norm_value(x, y);
        std::vector<long double> z = oracle::widen(x);
        z.insert(z.end(), y.begin(), y.end());
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                double c = 0;
                for (int j = 0; j < n; ++j) c += y[static_cast<std::size_t>(j)] * R[static_cast<std::size_t>((i * n + j) * n + k)];
                std::vector<int> m(static_cast<std::size_t>(2 * n), 0);
                m[static_cast<std::size_t>(n + k)] = 1;
                const double Fk = static_cast<double>(oracle::central_derivative(oracle::funk_F, z, m, 1e-6L));
                CHECK(std::abs(c + 0.25 * (F * F * (i == k) - F * Fk * y[static_cast<std::size_t>(i)])) < 1e-5);
            }
        }
    }
}

TEST_CASE("Funk covariant derivative against finite differences")
{
    const int n = 2;
    const oracle::Vec x{0.2, -0.1}, y{0.8, 0.5};
    const auto spec = MetricSpec::funk(n);
    const auto data = compute_berwald(spec, BasePoint{x, y}, 7);
    const auto R12 = curvature_field(data.curvature, 0, 1);
    const double h = 1e-4;
    auto xi = [&](oracle::Vec xx, oracle::Vec yy) {
        const auto d = compute_berwald(spec, BasePoint{xx, yy}, 5);
        return std::vector<double>{d.curvature.component(0, 0, 1).value(), d.curvature.component(1, 0, 1).value()};
    };
    // Closed-form Funk connection from G^i = F y^i / 2.
    std::vector<long double> z = oracle::widen(x);
    z.insert(z.end(), y.begin(), y.end());
    auto Fd = [&](std::vector<int> m) { return static_cast<double>(oracle::central_derivative(oracle::funk_F, z, m, 1e-4L)); };
    const double F = static_cast<double>(oracle::funk_F(z));
    const double Fy[2] = {Fd({0, 0, 1, 0}), Fd({0, 0, 0, 1})};
    auto Fyy = [&](int a, int b) {
        std::vector<int> m{0, 0, 0, 0};
        ++m[static_cast<std::size_t>(2 + a)];
        ++m[static_cast<std::size_t>(2 + b)];
        return Fd(m);
    };
    auto Gij = [&](int i, int j) { return 0.5 * (Fy[j] * y[static_cast<std::size_t>(i)] + F * (i == j)); };
    auto Gijk = [&](int i, int j, int k) {
        return 0.5 * (Fyy(j, k) * y[static_cast<std::size_t>(i)] + Fy[j] * (i == k) + Fy[k] * (i == j));
    };
    for (int j = 0; j < n; ++j) {
        const auto nab = covariant_derivative(data.spray, R12, j);
        CHECK(nab.label == "∇_" + std::to_string(j + 1) + "R_{12}");
        CHECK(nab.order() == R12.order() - 1);
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(j)] += h;
        xm[static_cast<std::size_t>(j)] -= h;
        const auto dxp = xi(xp, y), dxm = xi(xm, y);
        const auto at = xi(x, y);
        for (int i = 0; i < n; ++i) {
            double v = (dxp[static_cast<std::size_t>(i)] - dxm[static_cast<std::size_t>(i)]) / (2 * h);
            for (int k = 0; k < n; ++k) {
                auto yp = y, ym = y;
                yp[static_cast<std::size_t>(k)] += h;
                ym[static_cast<std::size_t>(k)] -= h;
                const double dy = (xi(x, yp)[static_cast<std::size_t>(i)] - xi(x, ym)[static_cast<std::size_t>(i)]) / (2 * h);
                v += -Gij(k, j) * dy + Gijk(i, j, k) * at[static_cast<std::size_t>(k)];
            }
            CHECK(std::abs(nab.xi[static_cast<std::size_t>(i)].value() - v) < 1e-5);
        }
    }
}

TEST_CASE("property: homogeneity ladder, symmetry and antisymmetry")
{
    std::mt19937 rng(13);
    const MetricSpec specs[] = {MetricSpec::funk(2), MetricSpec::funk(3), MetricSpec::round_sphere(2),
                                MetricSpec::funk_perturbation(MetricSpec::euclidean(2), 0.5)};
    for (const auto& spec : specs) {
        const int n = spec.dim;
        for (int trial = 0; trial < 3; ++trial) {
            const BasePoint p{oracle::ball_point(rng, n, 0.7), oracle::unit_vector(rng, n)};
            const auto data = compute_berwald(spec, p, 7);
            for (int i = 0; i < n; ++i) {
                CHECK(homogeneity_defect(data.spray.coeff(i), p, 2) < 1e-9);
                for (int j = 0; j < n; ++j) {
                    CHECK(homogeneity_defect(data.spray.connection(i, j), p, 1) < 1e-9);
                    for (int k = 0; k < n; ++k) {
                        CHECK(homogeneity_defect(data.spray.berwald(i, j, k), p, 0) < 1e-9);
                        CHECK(max_abs_diff(data.spray.berwald(i, j, k), data.spray.berwald(i, k, j)) < 1e-10);
                        CHECK(homogeneity_defect(data.curvature.component(i, j, k), p, 1) < 1e-9);
                        CHECK(max_abs_diff(data.curvature.component(i, j, k), -data.curvature.component(i, k, j)) == 0.0);
                    }
                }
            }
            const auto f = curvature_field(data.curvature, 0, 1);
            CHECK(curvature_field(data.curvature, 1, 1).is_zero());
            CHECK(field_diff(curvature_field(data.curvature, 1, 0), [&] {
                      auto g = f;
                      for (auto& c : g.xi) c = -c;
                      return g;
                  }()) == 0.0);
            CHECK(tangency_residual(data.energy, f) < 1e-9);
            const auto nf = covariant_derivative(data.spray, f, n - 1);
            CHECK(tangency_residual(data.energy, nf) < 1e-9);
            CHECK(tangency_residual(data.energy, covariant_derivative(data.spray, nf, 0)) < 1e-9);
        }
    }
}

TEST_CASE("property: vertical bracket is a Lie bracket")
{
    std::mt19937 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 2;
        const auto a = random_fiber_field(rng, n, 4);
        const auto b = random_fiber_field(rng, n, 4);
        const auto c = random_fiber_field(rng, n, 4);
        CHECK(vertical_bracket(a, a).max_abs() < 1e-13);
        const auto ab = vertical_bracket(a, b);
        auto ba = vertical_bracket(b, a);
        for (auto& comp : ba.xi) comp = -comp;
        CHECK(field_diff(ab, ba) < 1e-12);

        VerticalFieldJet lin;
        for (int i = 0; i < n; ++i) lin.xi.push_back(2.0 * a.xi[static_cast<std::size_t>(i)] - 3.0 * c.xi[static_cast<std::size_t>(i)]);
        VerticalFieldJet expect;
        const auto ab2 = vertical_bracket(a, b), cb = vertical_bracket(c, b);
        for (int i = 0; i < n; ++i) expect.xi.push_back(2.0 * ab2.xi[static_cast<std::size_t>(i)] - 3.0 * cb.xi[static_cast<std::size_t>(i)]);
        CHECK(field_diff(vertical_bracket(lin, b), expect) < 1e-12);

        const auto j1 = vertical_bracket(truncate(a, 3), vertical_bracket(b, c));
        const auto j2 = vertical_bracket(truncate(b, 3), vertical_bracket(c, a));
        const auto j3 = vertical_bracket(truncate(c, 3), vertical_bracket(a, b));
        VerticalFieldJet sum;
        for (int i = 0; i < n; ++i) {
            sum.xi.push_back(j1.xi[static_cast<std::size_t>(i)] + j2.xi[static_cast<std::size_t>(i)] + j3.xi[static_cast<std::size_t>(i)]);
        }
        CHECK(sum.max_abs() < 1e-10);
    }
}

TEST_CASE("jet budget counts")
{
    CHECK(JetBudget::spray_cost == 3);
    CHECK(JetBudget::curvature_cost == 5);
    CHECK(JetBudget::energy_order(3, 3) == 11);
    const BasePoint p{{0.1, 0.1}, {1, 0}};
    const auto spec = MetricSpec::funk(2);
    CHECK_THROWS_AS(compute_berwald(spec, p, 4), BudgetError);
    CHECK_THROWS_AS(spray(energy_jet(spec, p, 2), fundamental_tensor(energy_jet(spec, p, 2), p)), BudgetError);

    const auto e5 = energy_jet(spec, p, 5);
    const auto sp = spray(e5, fundamental_tensor(e5, p));
    CHECK(sp.coeff(0).order() == 2);
    CHECK(sp.connection(0, 0).order() == 1);
    CHECK(sp.berwald(0, 0, 0).order() == 0);
    const auto data = compute_berwald(spec, p, 5);
    CHECK(data.curvature.R.front().order() == 0);
    const auto f = curvature_field(data.curvature, 0, 1);
    CHECK_THROWS_AS(covariant_derivative(data.spray, f, 0), BudgetError);
}

}
