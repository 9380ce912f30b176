#include "finsler/multi_index.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace finsler {

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents))
{
    for (int e : exponents_) {
        if (e < 0) {
            throw InvalidArgument("MultiIndex: negative exponent");
        }
        degree_ += e;
    }
}

MultiIndex MultiIndex::zero(int num_vars)
{
    return MultiIndex(std::vector<int>(static_cast<std::size_t>(num_vars), 0));
}

MultiIndex MultiIndex::unit(int num_vars, int var)
{
    std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
    e.at(static_cast<std::size_t>(var)) = 1;
    return MultiIndex(std::move(e));
}

double MultiIndex::factorial() const
{
    double f = 1.0;
    for (int e : exponents_) {
        for (int k = 2; k <= e; ++k) {
            f *= k;
        }
    }
    return f;
}

std::string MultiIndex::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        os << (i ? "," : "") << exponents_[i];
    }
    os << ')';
    return os.str();
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b)
{
    if (auto c = a.degree_ <=> b.degree_; c != 0) {
        return c;
    }
    // Larger leading exponent comes first.
    return std::lexicographical_compare_three_way(
        b.exponents_.begin(), b.exponents_.end(), a.exponents_.begin(), a.exponents_.end());
}

std::size_t monomial_count(int num_vars, int order)
{
    if (order < 0) {
        return 0;
    }
    // C(num_vars + order, order), computed incrementally to stay exact.
    std::size_t c = 1;
    for (int i = 1; i <= order; ++i) {
        c = c * static_cast<std::size_t>(num_vars + i) / static_cast<std::size_t>(i);
    }
    return c;
}

namespace {

void enumerate_degree(int num_vars, int degree, int var, std::vector<int>& current,
                      std::vector<MultiIndex>& out)
{
    if (var == num_vars - 1) {
        current[static_cast<std::size_t>(var)] = degree;
        out.emplace_back(current);
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current[static_cast<std::size_t>(var)] = e;
        enumerate_degree(num_vars, degree - e, var + 1, current, out);
    }
    current[static_cast<std::size_t>(var)] = 0;
}

} // namespace

std::uint64_t JetLayout::pack(std::span<const int> exponents)
{
    std::uint64_t key = 0;
    for (int e : exponents) {
        key = (key << 6) | static_cast<std::uint64_t>(e);
    }
    return key;
}

JetLayout::JetLayout(int num_vars, int order) : num_vars_(num_vars), order_(order)
{
    if (num_vars < 1 || num_vars > kMaxVars) {
        throw InvalidArgument("JetLayout: num_vars must be in [1, " + std::to_string(kMaxVars) + "]");
    }
    if (order < 0 || order > kMaxOrder) {
        throw InvalidArgument("JetLayout: order must be in [0, " + std::to_string(kMaxOrder) + "]");
    }
    indices_.reserve(monomial_count(num_vars, order));
    prefix_.reserve(static_cast<std::size_t>(order) + 1);
    std::vector<int> current(static_cast<std::size_t>(num_vars), 0);
    for (int d = 0; d <= order; ++d) {
        enumerate_degree(num_vars, d, 0, current, indices_);
        prefix_.push_back(indices_.size());
    }
    degrees_.reserve(indices_.size());
    lookup_.reserve(indices_.size());
    for (std::size_t r = 0; r < indices_.size(); ++r) {
        degrees_.push_back(indices_[r].degree());
        lookup_.emplace(pack(indices_[r].exponents()), static_cast<std::uint32_t>(r));
    }

    raise_.resize(static_cast<std::size_t>(num_vars));
    const std::size_t lower = order > 0 ? prefix_[static_cast<std::size_t>(order - 1)] : 0;
    for (int v = 0; v < num_vars; ++v) {
        auto& table = raise_[static_cast<std::size_t>(v)];
        table.resize(lower);
        for (std::size_t r = 0; r < lower; ++r) {
            std::vector<int> e(indices_[r].exponents().begin(), indices_[r].exponents().end());
            ++e[static_cast<std::size_t>(v)];
            table[r] = lookup_.at(pack(e));
        }
    }
}

std::shared_ptr<const JetLayout> JetLayout::get(int num_vars, int order)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{num_vars, order}];
    if (!slot) {
        slot = std::make_shared<const JetLayout>(num_vars, order);
    }
    return slot;
}

std::optional<std::size_t> JetLayout::find(std::span<const int> exponents) const
{
    if (static_cast<int>(exponents.size()) != num_vars_) {
        return std::nullopt;
    }
    int degree = 0;
    for (int e : exponents) {
        if (e < 0) {
            return std::nullopt;
        }
        degree += e;
    }
    if (degree > order_) {
        return std::nullopt;
    }
    auto it = lookup_.find(pack(exponents));
    if (it == lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t JetLayout::rank_of(const MultiIndex& m) const
{
    auto r = find(m.exponents());
    if (!r) {
        throw InvalidArgument("JetLayout: multi-index " + m.to_string() + " not in layout");
    }
    return *r;
}

std::size_t JetLayout::prefix_size(int d) const
{
    if (d < 0) {
        return 0;
    }
    return prefix_[static_cast<std::size_t>(std::min(d, order_))];
}

std::span<const std::uint32_t> JetLayout::raise(int var) const
{
    return raise_.at(static_cast<std::size_t>(var));
}

void JetLayout::build_mul_table() const
{
    mul_offset_.resize(indices_.size() + 1);
    std::size_t total = 0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        mul_offset_[i] = total;
        total += prefix_size(order_ - degrees_[i]);
    }
    mul_offset_[indices_.size()] = total;
    mul_flat_.resize(total);

    std::vector<int> sum(static_cast<std::size_t>(num_vars_));
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const auto a = indices_[i].exponents();
        const std::size_t count = prefix_size(order_ - degrees_[i]);
        std::uint32_t* out = mul_flat_.data() + mul_offset_[i];
        for (std::size_t j = 0; j < count; ++j) {
            const auto b = indices_[j].exponents();
            for (std::size_t v = 0; v < sum.size(); ++v) {
                sum[v] = a[v] + b[v];
            }
            out[j] = lookup_.at(pack(sum));
        }
    }
}

std::span<const std::uint32_t> JetLayout::mul_targets(std::size_t i) const
{
    std::call_once(mul_once_, [this] { build_mul_table(); });
    return {mul_flat_.data() + mul_offset_[i], mul_offset_[i + 1] - mul_offset_[i]};
}

} // namespace finsler
