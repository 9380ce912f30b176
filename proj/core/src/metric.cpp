#include "finsler/metric.hpp"

#include "finsler/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace finsler {

void BumpParams::validate() const
{
    if (!(0.0 < r1 && r1 < r2 && r2 < 1.0)) {
        throw InvalidArgument("bump parameters need 0 < r1 < r2 < 1");
    }
}

MetricSpec MetricSpec::euclidean(int dim)
{
    MetricSpec s;
    s.kind = MetricKind::euclidean;
    s.dim = dim;
    return s;
}

MetricSpec MetricSpec::round_sphere(int dim)
{
    MetricSpec s;
    s.kind = MetricKind::riemannian;
    s.dim = dim;
    s.riemannian = RiemannianCoeffs{RiemannianCatalog::round_sphere, {}};
    return s;
}

MetricSpec MetricSpec::diagonal(std::vector<std::vector<PolynomialTerm>> diagonal)
{
    MetricSpec s;
    s.kind = MetricKind::riemannian;
    s.dim = static_cast<int>(diagonal.size());
    s.riemannian = RiemannianCoeffs{RiemannianCatalog::diagonal_polynomial, std::move(diagonal)};
    return s;
}

MetricSpec MetricSpec::funk(int dim)
{
    MetricSpec s;
    s.kind = MetricKind::funk_standard;
    s.dim = dim;
    return s;
}

MetricSpec MetricSpec::funk_perturbation(const MetricSpec& base, double t, BumpParams bump)
{
    MetricSpec s;
    s.kind = MetricKind::funk_perturbation;
    s.dim = base.dim;
    s.perturbation = Perturbation{std::make_shared<const MetricSpec>(base), t, bump};
    s.validate();
    return s;
}

void MetricSpec::validate() const
{
    if (dim < 2) {
        throw InvalidArgument("metric dimension must be at least 2");
    }
    if (2 * dim > JetLayout::kMaxVars) {
        throw InvalidArgument("metric dimension too large for jet layouts");
    }
    switch (kind) {
    case MetricKind::euclidean:
    case MetricKind::funk_standard:
        break;
    case MetricKind::riemannian: {
        if (!riemannian) {
            throw InvalidArgument("riemannian metric needs a coefficient catalog entry");
        }
        if (riemannian->catalog == RiemannianCatalog::diagonal_polynomial) {
            if (static_cast<int>(riemannian->diagonal.size()) != dim) {
                throw InvalidArgument("diagonal metric needs one polynomial per dimension");
            }
            for (const auto& poly : riemannian->diagonal) {
                if (poly.empty()) {
                    throw InvalidArgument("diagonal metric entry has no terms");
                }
                for (const auto& term : poly) {
                    if (static_cast<int>(term.exponents.size()) != dim) {
                        throw InvalidArgument("polynomial term exponent count must equal the dimension");
                    }
                    for (int e : term.exponents) {
                        if (e < 0) {
                            throw InvalidArgument("polynomial term has a negative exponent");
                        }
                    }
                }
            }
        }
        break;
    }
    case MetricKind::funk_perturbation: {
        if (!perturbation || !perturbation->base) {
            throw InvalidArgument("funk_perturbation needs a base metric");
        }
        const MetricSpec& base = *perturbation->base;
        if (base.kind == MetricKind::funk_perturbation) {
            throw InvalidArgument("funk_perturbation base must not itself be a perturbation");
        }
        if (base.dim != dim) {
            throw InvalidArgument("funk_perturbation base has a different dimension");
        }
        base.validate();
        if (!(perturbation->t >= 0.0 && perturbation->t <= 1.0)) {
            throw InvalidArgument("perturbation parameter t must lie in [0, 1]");
        }
        perturbation->bump.validate();
        break;
    }
    }
}

bool MetricSpec::requires_unit_ball() const
{
    return kind == MetricKind::funk_standard || kind == MetricKind::funk_perturbation;
}

std::string MetricSpec::describe() const
{
    std::ostringstream os;
    switch (kind) {
    case MetricKind::euclidean:
        os << "euclidean";
        break;
    case MetricKind::riemannian:
        switch (riemannian ? riemannian->catalog : RiemannianCatalog::flat) {
        case RiemannianCatalog::flat:
            os << "riemannian(flat)";
            break;
        case RiemannianCatalog::round_sphere:
            os << "riemannian(round_sphere)";
            break;
        case RiemannianCatalog::diagonal_polynomial:
            os << "riemannian(diagonal)";
            break;
        }
        break;
    case MetricKind::funk_standard:
        os << "funk";
        break;
    case MetricKind::funk_perturbation:
        os << "funk_perturbation(base=" << perturbation->base->describe() << ", t=" << perturbation->t
           << ", r1=" << perturbation->bump.r1 << ", r2=" << perturbation->bump.r2 << ")";
        break;
    }
    os << ", n=" << dim;
    return os.str();
}

double funk_norm_value(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw InvalidArgument("funk_norm_value: x and y differ in dimension");
    }
    double xx = 0.0, xy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx += x[i] * x[i];
        xy += x[i] * y[i];
        yy += y[i] * y[i];
    }
    if (xx >= 1.0) {
        throw DomainError("Funk norm: |x| must be < 1");
    }
    if (yy == 0.0) {
        throw DomainError("Funk norm: y must be nonzero");
    }
    const double s = 1.0 - xx;
    return (std::sqrt(s * yy + xy * xy) + xy) / s;
}

void check_domain(const MetricSpec& spec, const BasePoint& p)
{
    if (static_cast<int>(p.x.size()) != spec.dim || static_cast<int>(p.y.size()) != spec.dim) {
        throw InvalidArgument("base point dimension does not match the metric dimension " +
                              std::to_string(spec.dim));
    }
    double xx = 0.0, yy = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
        xx += p.x[static_cast<std::size_t>(i)] * p.x[static_cast<std::size_t>(i)];
        yy += p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
    }
    if (yy == 0.0) {
        throw DomainError("tangent vector y must be nonzero");
    }
    if (spec.requires_unit_ball() && xx >= 1.0) {
        throw DomainError("Funk-type metrics need |x| < 1");
    }
}

namespace {

struct Seeds {
    std::vector<TaylorJet> x;
    std::vector<TaylorJet> y;
};

Seeds make_seeds(const BasePoint& p, int dim, int order)
{
    Seeds s;
    for (int i = 0; i < dim; ++i) {
        s.x.push_back(TaylorJet::variable(x_var(i), p.x[static_cast<std::size_t>(i)], 2 * dim, order));
        s.y.push_back(TaylorJet::variable(y_var(dim, i), p.y[static_cast<std::size_t>(i)], 2 * dim, order));
    }
    return s;
}

TaylorJet dot(const std::vector<TaylorJet>& a, const std::vector<TaylorJet>& b)
{
    TaylorJet sum(a[0].num_vars(), a[0].order());
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum = mul_add(sum, a[i], b[i]);
    }
    return sum;
}

TaylorJet funk_energy(const Seeds& s)
{
    const TaylorJet xx = dot(s.x, s.x);
    const TaylorJet xy = dot(s.x, s.y);
    const TaylorJet yy = dot(s.y, s.y);
    const TaylorJet denom = 1.0 - xx;
    const TaylorJet disc = mul_add(denom * yy, xy, xy);
    const TaylorJet F = (sqrt(disc) + xy) * reciprocal(denom);
    return F * F * 0.5;
}

TaylorJet polynomial_jet(const std::vector<PolynomialTerm>& poly, const Seeds& s)
{
    const int nv = s.x[0].num_vars();
    const int order = s.x[0].order();
    TaylorJet sum(nv, order);
    for (const auto& term : poly) {
        TaylorJet mono = TaylorJet::constant(term.coeff, nv, order);
        for (std::size_t i = 0; i < term.exponents.size(); ++i) {
            for (int k = 0; k < term.exponents[i]; ++k) {
                mono = mono * s.x[i];
            }
        }
        sum = sum + mono;
    }
    return sum;
}

TaylorJet riemannian_energy(const RiemannianCoeffs& coeffs, const Seeds& s)
{
    switch (coeffs.catalog) {
    case RiemannianCatalog::flat:
        return dot(s.y, s.y) * 0.5;
    case RiemannianCatalog::round_sphere: {
        const TaylorJet conformal = 1.0 + dot(s.x, s.x);
        const TaylorJet inv = reciprocal(conformal);
        return dot(s.y, s.y) * (inv * inv) * 2.0;
    }
    case RiemannianCatalog::diagonal_polynomial: {
        TaylorJet sum(s.x[0].num_vars(), s.x[0].order());
        for (std::size_t i = 0; i < coeffs.diagonal.size(); ++i) {
            sum = mul_add(sum, polynomial_jet(coeffs.diagonal[i], s), s.y[i] * s.y[i], 0.5);
        }
        if (!(sum.value() > 0.0)) {
            throw DomainError("diagonal metric is not positive at the base point");
        }
        return sum;
    }
    }
    throw InvalidArgument("unknown Riemannian catalog entry");
}

TaylorJet energy_from_seeds(const MetricSpec& spec, const BasePoint& p, const Seeds& s, int order)
{
    switch (spec.kind) {
    case MetricKind::euclidean:
        return dot(s.y, s.y) * 0.5;
    case MetricKind::riemannian:
        return riemannian_energy(*spec.riemannian, s);
    case MetricKind::funk_standard:
        return funk_energy(s);
    case MetricKind::funk_perturbation: {
        const Perturbation& pert = *spec.perturbation;
        const double t = pert.t;
        const TaylorJet base = energy_from_seeds(*pert.base, p, s, order);
        const TaylorJet funk = funk_energy(s);
        const TaylorJet psi = extend_vars(bump_psi_jet(pert.bump, p.x, order), 2 * spec.dim);
        // F_bar^2 = psi F_Funk^2 + (1 - psi) F^2, then F_t^2 = (1 - t) F^2 + t F_bar^2.
        const TaylorJet spliced = psi * funk + (1.0 - psi) * base;
        return base * (1.0 - t) + spliced * t;
    }
    }
    throw InvalidArgument("unknown metric kind");
}

double smooth_step_value(double s)
{
    if (s <= 0.0) {
        return 0.0;
    }
    if (s >= 1.0) {
        return 1.0;
    }
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

} // namespace

TaylorJet energy_jet(const MetricSpec& spec, const BasePoint& p, int order)
{
    spec.validate();
    if (order < 2) {
        throw BudgetError("energy_jet: order " + std::to_string(order) +
                              " is too small to define the fundamental tensor (need >= 2)",
                          2);
    }
    check_domain(spec, p);
    const Seeds s = make_seeds(p, spec.dim, order);
    return energy_from_seeds(spec, p, s, order);
}

TaylorJet norm_jet(const TaylorJet& energy)
{
    return sqrt(energy * 2.0);
}

double norm_value(const MetricSpec& spec, std::span<const double> x, std::span<const double> y)
{
    if (spec.kind == MetricKind::funk_standard) {
        return funk_norm_value(x, y);
    }
    spec.validate();
    BasePoint p{{x.begin(), x.end()}, {y.begin(), y.end()}};
    check_domain(spec, p);
    const Seeds s = make_seeds(p, spec.dim, 0);
    const double e = energy_from_seeds(spec, p, s, 0).value();
    if (!(e > 0.0)) {
        throw DomainError("energy is not positive at the requested point");
    }
    return std::sqrt(2.0 * e);
}

double bump_psi_value(const BumpParams& params, std::span<const double> x)
{
    params.validate();
    double xx = 0.0;
    for (double v : x) {
        xx += v * v;
    }
    const double r1s = params.r1 * params.r1;
    const double r2s = params.r2 * params.r2;
    return smooth_step_value((r2s - xx) / (r2s - r1s));
}

TaylorJet bump_psi_jet(const BumpParams& params, std::span<const double> x, int order)
{
    params.validate();
    const int n = static_cast<int>(x.size());
    double xx = 0.0;
    for (double v : x) {
        xx += v * v;
    }
    const double r1s = params.r1 * params.r1;
    const double r2s = params.r2 * params.r2;
    const double s0 = (r2s - xx) / (r2s - r1s);
    // Every derivative of the step vanishes on the plateau and outside the support.
    if (s0 >= 1.0) {
        return TaylorJet::constant(1.0, n, order);
    }
    if (s0 <= 0.0) {
        return TaylorJet(n, order);
    }
    TaylorJet norm2(n, order);
    for (int i = 0; i < n; ++i) {
        const TaylorJet xi = TaylorJet::variable(i, x[static_cast<std::size_t>(i)], n, order);
        norm2 = mul_add(norm2, xi, xi);
    }
    const TaylorJet s = (r2s - norm2) * (1.0 / (r2s - r1s));
    const TaylorJet a = exp(-reciprocal(s));
    const TaylorJet b = exp(-reciprocal(1.0 - s));
    return a * reciprocal(a + b);
}

ConvexityCheck check_strong_convexity(const MetricSpec& spec, const BasePoint& p)
{
    const int n = spec.dim;
    const TaylorJet e = energy_jet(spec, p, 2);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::vector<int> ex(static_cast<std::size_t>(2 * n), 0);
            ++ex[static_cast<std::size_t>(y_var(n, i))];
            ++ex[static_cast<std::size_t>(y_var(n, j))];
            g(i, j) = e.derivative(MultiIndex(ex));
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
    ConvexityCheck c;
    c.min_eigenvalue = solver.eigenvalues().minCoeff();
    c.positive_definite = c.min_eigenvalue > 0.0;
    return c;
}

} // namespace finsler
