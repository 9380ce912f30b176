#pragma once

#include "finsler/multi_index.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace finsler {

// Truncated multivariate Taylor series about an (implicit) expansion point.
//
// Coefficients are Taylor coefficients, i.e. the partial derivative divided
// by the factorial of its multi-index, stored densely in JetLayout order.
// The constant coefficient is the function value at the expansion point.
// Two jets combine only if num_vars and order agree.
class TaylorJet {
public:
    TaylorJet(int num_vars, int order);
    TaylorJet(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs);

    static TaylorJet constant(double value, int num_vars, int order);
    static TaylorJet variable(int var_index, double value, int num_vars, int order);

    int num_vars() const noexcept { return layout_->num_vars(); }
    int order() const noexcept { return layout_->order(); }
    const JetLayout& layout() const noexcept { return *layout_; }
    const std::shared_ptr<const JetLayout>& layout_ptr() const noexcept { return layout_; }

    double value() const noexcept { return coeffs_[0]; }
    double coeff(const MultiIndex& m) const;
    double operator[](std::size_t rank) const { return coeffs_[rank]; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    // Partial derivative d^|m| f / dx^m at the expansion point.
    double derivative(const MultiIndex& m) const { return coeff(m) * m.factorial(); }

    bool compatible(const TaylorJet& other) const noexcept;
    bool is_zero() const noexcept;
    double max_abs() const noexcept;

    // Same series truncated to a lower order.
    TaylorJet truncated(int new_order) const;

    // Value of the truncated polynomial at the given displacement from the
    // expansion point.
    double evaluate(std::span<const double> displacement) const;

    TaylorJet operator-() const;
    friend TaylorJet operator+(const TaylorJet& a, const TaylorJet& b);
    friend TaylorJet operator-(const TaylorJet& a, const TaylorJet& b);
    friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b);
    friend TaylorJet operator/(const TaylorJet& a, const TaylorJet& b);

    friend TaylorJet operator+(const TaylorJet& a, double s);
    friend TaylorJet operator+(double s, const TaylorJet& a) { return a + s; }
    friend TaylorJet operator-(const TaylorJet& a, double s) { return a + (-s); }
    friend TaylorJet operator-(double s, const TaylorJet& a) { return (-a) + s; }
    friend TaylorJet operator*(const TaylorJet& a, double s);
    friend TaylorJet operator*(double s, const TaylorJet& a) { return a * s; }
    friend TaylorJet operator/(const TaylorJet& a, double s);

private:
    std::shared_ptr<const JetLayout> layout_;
    std::vector<double> coeffs_;
};

// acc + scale * a * b, without materializing the product.
TaylorJet mul_add(const TaylorJet& acc, const TaylorJet& a, const TaylorJet& b, double scale = 1.0);

// 1/a by truncated Newton iteration; throws SingularError on a zero constant term.
TaylorJet reciprocal(const TaylorJet& a);

// Square root by Newton iteration on the inverse square root; throws
// DomainError unless the constant term is strictly positive.
TaylorJet sqrt(const TaylorJet& a);

TaylorJet exp(const TaylorJet& a);

// f(a) for a univariate f given its derivatives f(c), f'(c), f''(c), ... at
// c = a.value(). Needs order + 1 entries.
TaylorJet apply_univariate(const TaylorJet& a, std::span<const double> derivatives);

// Derivative with respect to one variable; the result has order reduced by one.
TaylorJet partial(const TaylorJet& a, int var_index);

// Directional derivative sum_i v_i d/dx_i.
TaylorJet directional(const TaylorJet& a, std::span<const double> direction);

// outer(inner_1, ..., inner_m): outer is a jet over m variables expanded at
// `at`, each inner jet must have constant term equal to the matching
// coordinate of `at` (CompositionPointError otherwise). The result lives on
// the inner jets' variables, truncated to min(outer order, inner order).
TaylorJet compose(const TaylorJet& outer, std::span<const double> at,
                  std::span<const TaylorJet> inner, double point_tol = 1e-12);

// Reinterpret a jet over m variables as a jet over new_num_vars >= m
// variables that does not depend on the added trailing variables.
TaylorJet extend_vars(const TaylorJet& a, int new_num_vars);

// Restrict to the listed variables, setting the displacement of every other
// variable to zero. The result's variable j is a's variable keep[j].
TaylorJet restrict_vars(const TaylorJet& a, std::span<const int> keep);

// Max-abs coefficient of a - b.
double max_abs_diff(const TaylorJet& a, const TaylorJet& b);

} // namespace finsler
