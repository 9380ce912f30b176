#pragma once

#include "finsler/taylor_jet.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace finsler {

enum class MetricKind { euclidean, riemannian, funk_standard, funk_perturbation };

// Closed-form Riemannian metrics whose jets are computed without an
// expression parser.
enum class RiemannianCatalog {
    flat,                // g_ij = delta_ij
    round_sphere,        // stereographic chart, g_ij = 4 delta_ij / (1 + |x|^2)^2
    diagonal_polynomial, // g_ii(x) = polynomial, g_ij = 0 for i != j
};

struct PolynomialTerm {
    double coeff = 0.0;
    std::vector<int> exponents;
};

struct RiemannianCoeffs {
    RiemannianCatalog catalog = RiemannianCatalog::flat;
    // One polynomial per diagonal entry (diagonal_polynomial only).
    std::vector<std::vector<PolynomialTerm>> diagonal;
};

// Radial plateau function: 1 for |x| <= r1, 0 for |x| >= r2.
struct BumpParams {
    double r1 = 0.4;
    double r2 = 0.8;

    void validate() const;
};

struct MetricSpec;

struct Perturbation {
    std::shared_ptr<const MetricSpec> base;
    double t = 0.0;
    BumpParams bump;
};

// Declarative description of a Finsler metric on (a chart identified with)
// the unit ball or R^n.
struct MetricSpec {
    MetricKind kind = MetricKind::euclidean;
    int dim = 2;
    std::optional<RiemannianCoeffs> riemannian;
    std::optional<Perturbation> perturbation;

    static MetricSpec euclidean(int dim);
    static MetricSpec round_sphere(int dim);
    static MetricSpec diagonal(std::vector<std::vector<PolynomialTerm>> diagonal);
    static MetricSpec funk(int dim);
    static MetricSpec funk_perturbation(const MetricSpec& base, double t, BumpParams bump = {});

    // Throws InvalidArgument when the description is inconsistent.
    void validate() const;
    // Funk-type metrics only live on the open unit ball.
    bool requires_unit_ball() const;
    std::string describe() const;
};

// A point of the slit tangent bundle: manifold point x, nonzero vector y.
struct BasePoint {
    std::vector<double> x;
    std::vector<double> y;
};

// Variable numbering of jets over (x, y): x_i is variable i, y_i is n + i.
constexpr int x_var(int i) noexcept { return i; }
constexpr int y_var(int dim, int i) noexcept { return dim + i; }

// Norm of the Funk metric of the unit ball, from the closed form
// (sqrt((1-|x|^2)|y|^2 + <x,y>^2) + <x,y>) / (1 - |x|^2).
double funk_norm_value(std::span<const double> x, std::span<const double> y);

// Jet of the energy E = F^2 / 2 over the 2n variables (x, y), expanded at p.
TaylorJet energy_jet(const MetricSpec& spec, const BasePoint& p, int order);

// Jet of F = sqrt(2E); same variables and order as the energy jet.
TaylorJet norm_jet(const TaylorJet& energy);

// F(x, y) at a single point.
double norm_value(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

// Bump function psi(x) = S((r2^2 - |x|^2) / (r2^2 - r1^2)) with the smooth
// step S(s) = f(s) / (f(s) + f(1 - s)), f(s) = exp(-1/s) for s > 0.
TaylorJet bump_psi_jet(const BumpParams& params, std::span<const double> x, int order);
double bump_psi_value(const BumpParams& params, std::span<const double> x);

struct ConvexityCheck {
    bool positive_definite = false;
    double min_eigenvalue = 0.0;
};

// Eigenvalues of the fiber Hessian g_ij at p.
ConvexityCheck check_strong_convexity(const MetricSpec& spec, const BasePoint& p);

// Checks p against the metric's domain; throws DomainError.
void check_domain(const MetricSpec& spec, const BasePoint& p);

} // namespace finsler
