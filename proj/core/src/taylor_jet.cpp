#include "finsler/taylor_jet.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace finsler {

namespace {

void require_compatible(const TaylorJet& a, const TaylorJet& b, const char* op)
{
    if (!a.compatible(b)) {
        throw InvalidArgument(std::string("TaylorJet ") + op + ": incompatible jets (num_vars " +
                              std::to_string(a.num_vars()) + "/" + std::to_string(b.num_vars()) +
                              ", order " + std::to_string(a.order()) + "/" +
                              std::to_string(b.order()) + ")");
    }
}

int newton_iterations(int order)
{
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(order) + 1.0))) + 1;
}

// c += scale * a * b over the layout's truncated Cauchy product.
void accumulate_product(std::vector<double>& c, const TaylorJet& a, const TaylorJet& b, double scale)
{
    const JetLayout& layout = a.layout();
    const auto ac = a.coeffs();
    const auto bc = b.coeffs();
    for (std::size_t i = 0; i < ac.size(); ++i) {
        const double ai = ac[i] * scale;
        if (ai == 0.0) {
            continue;
        }
        const auto targets = layout.mul_targets(i);
        const std::size_t count = targets.size();
        for (std::size_t j = 0; j < count; ++j) {
            c[targets[j]] += ai * bc[j];
        }
    }
}

} // namespace

TaylorJet::TaylorJet(int num_vars, int order)
    : layout_(JetLayout::get(num_vars, order)), coeffs_(layout_->size(), 0.0)
{
}

TaylorJet::TaylorJet(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs)
    : layout_(std::move(layout)), coeffs_(std::move(coeffs))
{
    if (coeffs_.size() != layout_->size()) {
        throw InvalidArgument("TaylorJet: coefficient count does not match layout");
    }
}

TaylorJet TaylorJet::constant(double value, int num_vars, int order)
{
    if (order < 0) {
        throw InvalidArgument("TaylorJet::constant: negative order");
    }
    TaylorJet j(num_vars, order);
    j.coeffs_[0] = value;
    return j;
}

TaylorJet TaylorJet::variable(int var_index, double value, int num_vars, int order)
{
    if (order < 0) {
        throw InvalidArgument("TaylorJet::variable: negative order");
    }
    if (var_index < 0 || var_index >= num_vars) {
        throw InvalidArgument("TaylorJet::variable: var_index " + std::to_string(var_index) +
                              " out of range for " + std::to_string(num_vars) + " variables");
    }
    TaylorJet j(num_vars, order);
    j.coeffs_[0] = value;
    if (order >= 1) {
        // Degree-one monomials follow the constant in variable order.
        j.coeffs_[1 + static_cast<std::size_t>(var_index)] = 1.0;
    }
    return j;
}

double TaylorJet::coeff(const MultiIndex& m) const
{
    auto r = layout_->find(m.exponents());
    if (!r) {
        if (m.num_vars() != num_vars()) {
            throw InvalidArgument("TaylorJet::coeff: multi-index has wrong number of variables");
        }
        return 0.0; // beyond the truncation order
    }
    return coeffs_[*r];
}

bool TaylorJet::compatible(const TaylorJet& other) const noexcept
{
    return layout_ == other.layout_;
}

bool TaylorJet::is_zero() const noexcept
{
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
}

double TaylorJet::max_abs() const noexcept
{
    double m = 0.0;
    for (double c : coeffs_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

TaylorJet TaylorJet::truncated(int new_order) const
{
    if (new_order > order() || new_order < 0) {
        throw InvalidArgument("TaylorJet::truncated: cannot truncate order " + std::to_string(order()) +
                              " to " + std::to_string(new_order));
    }
    if (new_order == order()) {
        return *this;
    }
    auto layout = JetLayout::get(num_vars(), new_order);
    std::vector<double> c(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(layout->size()));
    return TaylorJet(std::move(layout), std::move(c));
}

double TaylorJet::evaluate(std::span<const double> displacement) const
{
    if (static_cast<int>(displacement.size()) != num_vars()) {
        throw InvalidArgument("TaylorJet::evaluate: displacement has wrong dimension");
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < coeffs_.size(); ++r) {
        if (coeffs_[r] == 0.0) {
            continue;
        }
        double term = coeffs_[r];
        const auto e = layout_->index(r).exponents();
        for (std::size_t v = 0; v < e.size(); ++v) {
            for (int p = 0; p < e[v]; ++p) {
                term *= displacement[v];
            }
        }
        sum += term;
    }
    return sum;
}

TaylorJet TaylorJet::operator-() const
{
    std::vector<double> c(coeffs_.size());
    std::transform(coeffs_.begin(), coeffs_.end(), c.begin(), [](double v) { return -v; });
    return TaylorJet(layout_, std::move(c));
}

TaylorJet operator+(const TaylorJet& a, const TaylorJet& b)
{
    require_compatible(a, b, "add");
    std::vector<double> c(a.coeffs_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.coeffs_[i] + b.coeffs_[i];
    }
    return TaylorJet(a.layout_, std::move(c));
}

TaylorJet operator-(const TaylorJet& a, const TaylorJet& b)
{
    require_compatible(a, b, "sub");
    std::vector<double> c(a.coeffs_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.coeffs_[i] - b.coeffs_[i];
    }
    return TaylorJet(a.layout_, std::move(c));
}

TaylorJet operator*(const TaylorJet& a, const TaylorJet& b)
{
    require_compatible(a, b, "mul");
    std::vector<double> c(a.coeffs_.size(), 0.0);
    accumulate_product(c, a, b, 1.0);
    return TaylorJet(a.layout_, std::move(c));
}

TaylorJet operator/(const TaylorJet& a, const TaylorJet& b)
{
    require_compatible(a, b, "div");
    return a * reciprocal(b);
}

TaylorJet operator+(const TaylorJet& a, double s)
{
    TaylorJet r = a;
    r.coeffs_[0] += s;
    return r;
}

TaylorJet operator*(const TaylorJet& a, double s)
{
    std::vector<double> c(a.coeffs_.size());
    std::transform(a.coeffs_.begin(), a.coeffs_.end(), c.begin(), [s](double v) { return v * s; });
    return TaylorJet(a.layout_, std::move(c));
}

TaylorJet operator/(const TaylorJet& a, double s)
{
    if (s == 0.0) {
        throw SingularError("TaylorJet: division by zero scalar");
    }
    return a * (1.0 / s);
}

TaylorJet mul_add(const TaylorJet& acc, const TaylorJet& a, const TaylorJet& b, double scale)
{
    require_compatible(acc, a, "mul_add");
    require_compatible(a, b, "mul_add");
    std::vector<double> c(acc.coeffs().begin(), acc.coeffs().end());
    accumulate_product(c, a, b, scale);
    return TaylorJet(acc.layout_ptr(), std::move(c));
}

TaylorJet reciprocal(const TaylorJet& a)
{
    const double a0 = a.value();
    if (a0 == 0.0 || !std::isfinite(a0)) {
        throw SingularError("TaylorJet: division by a jet with zero constant term");
    }
    TaylorJet r = TaylorJet::constant(1.0 / a0, a.num_vars(), a.order());
    if (a.order() == 0) {
        return r;
    }
    // r <- r + r (1 - a r); the residual's lowest degree doubles each step.
    for (int it = newton_iterations(a.order()); it > 0; --it) {
        const TaylorJet residual = 1.0 - a * r;
        r = mul_add(r, r, residual);
    }
    return r;
}

TaylorJet sqrt(const TaylorJet& a)
{
    const double a0 = a.value();
    if (!(a0 > 0.0)) {
        throw DomainError("TaylorJet sqrt: constant term must be positive, got " + std::to_string(a0));
    }
    TaylorJet q = TaylorJet::constant(1.0 / std::sqrt(a0), a.num_vars(), a.order());
    if (a.order() > 0) {
        // Inverse square root: q <- q + q (1 - a q^2) / 2.
        for (int it = newton_iterations(a.order()); it > 0; --it) {
            const TaylorJet residual = 1.0 - a * (q * q);
            q = mul_add(q, q, residual, 0.5);
        }
    }
    return a * q;
}

TaylorJet apply_univariate(const TaylorJet& a, std::span<const double> derivatives)
{
    const int order = a.order();
    if (static_cast<int>(derivatives.size()) < order + 1) {
        throw InvalidArgument("apply_univariate: need order + 1 derivative values");
    }
    const TaylorJet delta = a - a.value();
    std::vector<double> taylor(static_cast<std::size_t>(order) + 1);
    double fact = 1.0;
    for (int m = 0; m <= order; ++m) {
        if (m > 0) {
            fact *= m;
        }
        taylor[static_cast<std::size_t>(m)] = derivatives[static_cast<std::size_t>(m)] / fact;
    }
    TaylorJet result = TaylorJet::constant(taylor[static_cast<std::size_t>(order)], a.num_vars(), order);
    for (int m = order - 1; m >= 0; --m) {
        result = result * delta + taylor[static_cast<std::size_t>(m)];
    }
    return result;
}

TaylorJet exp(const TaylorJet& a)
{
    const std::vector<double> d(static_cast<std::size_t>(a.order()) + 1, std::exp(a.value()));
    return apply_univariate(a, d);
}

TaylorJet partial(const TaylorJet& a, int var_index)
{
    if (var_index < 0 || var_index >= a.num_vars()) {
        throw InvalidArgument("partial: var_index " + std::to_string(var_index) + " out of range");
    }
    if (a.order() < 1) {
        throw BudgetError("partial: jet of order 0 has no derivative information", 1);
    }
    auto layout = JetLayout::get(a.num_vars(), a.order() - 1);
    const auto raise = a.layout().raise(var_index);
    std::vector<double> c(layout->size());
    for (std::size_t r = 0; r < c.size(); ++r) {
        c[r] = (layout->index(r)[var_index] + 1) * a[raise[r]];
    }
    return TaylorJet(std::move(layout), std::move(c));
}

TaylorJet directional(const TaylorJet& a, std::span<const double> direction)
{
    if (static_cast<int>(direction.size()) != a.num_vars()) {
        throw InvalidArgument("directional: direction has wrong dimension");
    }
    if (a.order() < 1) {
        throw BudgetError("directional: jet of order 0 has no derivative information", 1);
    }
    TaylorJet result(a.num_vars(), a.order() - 1);
    for (int v = 0; v < a.num_vars(); ++v) {
        if (direction[static_cast<std::size_t>(v)] != 0.0) {
            result = result + partial(a, v) * direction[static_cast<std::size_t>(v)];
        }
    }
    return result;
}

TaylorJet compose(const TaylorJet& outer, std::span<const double> at, std::span<const TaylorJet> inner,
                  double point_tol)
{
    const int m = outer.num_vars();
    if (static_cast<int>(inner.size()) != m || static_cast<int>(at.size()) != m) {
        throw InvalidArgument("compose: need one inner jet and one point coordinate per outer variable");
    }
    for (std::size_t i = 1; i < inner.size(); ++i) {
        require_compatible(inner[0], inner[i], "compose");
    }
    for (std::size_t i = 0; i < inner.size(); ++i) {
        const double diff = std::abs(inner[i].value() - at[i]);
        if (diff > point_tol * (1.0 + std::abs(at[i]))) {
            throw CompositionPointError("compose: inner jet " + std::to_string(i) + " has constant term " +
                                        std::to_string(inner[i].value()) + " but the outer point is " +
                                        std::to_string(at[i]));
        }
    }
    const int order = std::min(outer.order(), inner[0].order());
    const int p = inner[0].num_vars();

    std::vector<TaylorJet> delta;
    delta.reserve(inner.size());
    for (const auto& j : inner) {
        delta.push_back(j.truncated(order) - j.value());
    }

    const JetLayout& outer_layout = outer.layout();
    const std::size_t count = outer_layout.prefix_size(order);
    std::vector<TaylorJet> powers;
    powers.reserve(count);
    powers.push_back(TaylorJet::constant(1.0, p, order));
    TaylorJet result = TaylorJet::constant(outer[0], p, order);
    std::vector<int> lowered(static_cast<std::size_t>(m));
    for (std::size_t r = 1; r < count; ++r) {
        const auto e = outer_layout.index(r).exponents();
        int v = 0;
        while (e[static_cast<std::size_t>(v)] == 0) {
            ++v;
        }
        std::copy(e.begin(), e.end(), lowered.begin());
        --lowered[static_cast<std::size_t>(v)];
        const std::size_t base = *outer_layout.find(lowered);
        powers.push_back(powers[base] * delta[static_cast<std::size_t>(v)]);
        if (outer[r] != 0.0) {
            result = result + powers.back() * outer[r];
        }
    }
    return result;
}

TaylorJet extend_vars(const TaylorJet& a, int new_num_vars)
{
    if (new_num_vars < a.num_vars()) {
        throw InvalidArgument("extend_vars: cannot shrink the variable count");
    }
    if (new_num_vars == a.num_vars()) {
        return a;
    }
    auto layout = JetLayout::get(new_num_vars, a.order());
    std::vector<double> c(layout->size(), 0.0);
    std::vector<int> e(static_cast<std::size_t>(new_num_vars), 0);
    for (std::size_t r = 0; r < a.coeffs().size(); ++r) {
        const auto src = a.layout().index(r).exponents();
        std::copy(src.begin(), src.end(), e.begin());
        c[*layout->find(e)] = a[r];
    }
    return TaylorJet(std::move(layout), std::move(c));
}

TaylorJet restrict_vars(const TaylorJet& a, std::span<const int> keep)
{
    if (keep.empty()) {
        throw InvalidArgument("restrict_vars: need at least one variable");
    }
    for (int v : keep) {
        if (v < 0 || v >= a.num_vars()) {
            throw InvalidArgument("restrict_vars: variable " + std::to_string(v) + " out of range");
        }
    }
    auto layout = JetLayout::get(static_cast<int>(keep.size()), a.order());
    std::vector<double> c(layout->size());
    std::vector<int> e(static_cast<std::size_t>(a.num_vars()), 0);
    for (std::size_t r = 0; r < c.size(); ++r) {
        const auto dst = layout->index(r).exponents();
        std::fill(e.begin(), e.end(), 0);
        for (std::size_t j = 0; j < keep.size(); ++j) {
            e[static_cast<std::size_t>(keep[j])] = dst[j];
        }
        c[r] = a[*a.layout().find(e)];
    }
    return TaylorJet(std::move(layout), std::move(c));
}

double max_abs_diff(const TaylorJet& a, const TaylorJet& b)
{
    require_compatible(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace finsler
