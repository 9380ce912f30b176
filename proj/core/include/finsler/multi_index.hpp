#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace finsler {

// Exponent vector of a monomial. Ordering is graded: lower degree first,
// and within one degree the exponent of the earliest variable decides
// (x0^2 precedes x0*x1 precedes x1^2). This is also the storage order of
// jet coefficients.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents)
        : MultiIndex(std::vector<int>(exponents)) {}

    static MultiIndex zero(int num_vars);
    static MultiIndex unit(int num_vars, int var);

    int num_vars() const noexcept { return static_cast<int>(exponents_.size()); }
    int degree() const noexcept { return degree_; }
    int operator[](int var) const { return exponents_[static_cast<std::size_t>(var)]; }
    std::span<const int> exponents() const noexcept { return exponents_; }

    // Product of factorials of the exponents.
    double factorial() const;
    std::string to_string() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

private:
    std::vector<int> exponents_;
    int degree_ = 0;
};

// Number of multi-indices of degree <= order in num_vars variables,
// i.e. C(num_vars + order, order).
std::size_t monomial_count(int num_vars, int order);

// Enumeration of all multi-indices up to a total degree, with the lookup
// tables jet arithmetic needs. Layouts are interned per (num_vars, order)
// and shared between jets; all tables are immutable once built.
class JetLayout {
public:
    static constexpr int kMaxVars = 10;
    static constexpr int kMaxOrder = 60;

    static std::shared_ptr<const JetLayout> get(int num_vars, int order);

    int num_vars() const noexcept { return num_vars_; }
    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return indices_.size(); }

    const MultiIndex& index(std::size_t rank) const { return indices_[rank]; }
    int degree(std::size_t rank) const { return degrees_[rank]; }
    std::optional<std::size_t> find(std::span<const int> exponents) const;
    std::size_t rank_of(const MultiIndex& m) const;

    // Monomials of degree <= d form the prefix [0, prefix_size(d)).
    std::size_t prefix_size(int d) const;

    // raise(v)[r] = rank of index(r) + e_v, defined for ranks of degree < order.
    std::span<const std::uint32_t> raise(int var) const;

    // For a-rank i, the product with b-rank j (j < prefix_size(order - degree(i)))
    // lands on rank mul_targets(i)[j].
    std::span<const std::uint32_t> mul_targets(std::size_t i) const;

    JetLayout(int num_vars, int order); // use get()

private:
    static std::uint64_t pack(std::span<const int> exponents);
    void build_mul_table() const;

    int num_vars_;
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<int> degrees_;
    std::vector<std::size_t> prefix_;
    std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
    std::vector<std::vector<std::uint32_t>> raise_;

    mutable std::once_flag mul_once_;
    mutable std::vector<std::uint32_t> mul_flat_;
    mutable std::vector<std::size_t> mul_offset_;
};

} // namespace finsler
