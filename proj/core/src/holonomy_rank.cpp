#include "finsler/holonomy_rank.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace finsler {

std::vector<double> normalize_to_indicatrix(const MetricSpec& spec, const std::vector<double>& x,
                                            const std::vector<double>& y)
{
    const double f = norm_value(spec, x, y);
    if (!(f > 0.0) || !std::isfinite(f)) {
        throw DomainError("normalize_to_indicatrix: F(x, y) is not positive");
    }
    std::vector<double> out(y.size());
    std::transform(y.begin(), y.end(), out.begin(), [f](double v) { return v / f; });
    return out;
}

std::vector<VerticalFieldJet> holonomy_field_jets(const BerwaldData& data, int d, int b)
{
    const int n = data.curvature.dim;
    if (d < 0 || b < 0) {
        throw InvalidArgument("holonomy_field_jets: depths must be non-negative");
    }
    const int available = data.curvature.R.front().order();
    if (available < d + b) {
        throw BudgetError("holonomy_field_jets: curvature jets of order " + std::to_string(available) +
                              " cannot absorb " + std::to_string(d) + " derivatives and " + std::to_string(b) +
                              " brackets",
                          JetBudget::energy_order(0, d, b));
    }

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }

    std::vector<VerticalFieldJet> fields;
    // words[pair][word] for the previous depth; a word lists p1..ps with p1 outermost.
    std::vector<std::map<std::vector<int>, VerticalFieldJet>> previous(pairs.size());
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        auto f = curvature_field(data.curvature, pairs[pi].first, pairs[pi].second);
        previous[pi].emplace(std::vector<int>{}, f);
        fields.push_back(std::move(f));
    }
    for (int s = 1; s <= d; ++s) {
        std::vector<std::map<std::vector<int>, VerticalFieldJet>> current(pairs.size());
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            for (int p1 = 0; p1 < n; ++p1) {
                for (const auto& [tail, field] : previous[pi]) {
                    std::vector<int> word{p1};
                    word.insert(word.end(), tail.begin(), tail.end());
                    current[pi].emplace(std::move(word), covariant_derivative(data.spray, field, p1));
                }
            }
            for (const auto& [word, field] : current[pi]) {
                fields.push_back(field);
            }
        }
        previous = std::move(current);
    }

    if (b == 0) {
        return fields;
    }

    std::vector<VerticalFieldJet> generators;
    for (const auto& f : fields) {
        generators.push_back(freeze_base(f));
    }
    auto bracket = [](const VerticalFieldJet& a, const VerticalFieldJet& c) {
        const int order = std::min(a.order(), c.order());
        VerticalFieldJet at = a, ct = c;
        for (auto& comp : at.xi) {
            comp = comp.truncated(order);
        }
        for (auto& comp : ct.xi) {
            comp = comp.truncated(order);
        }
        return vertical_bracket(at, ct);
    };

    std::vector<VerticalFieldJet> out = std::move(generators);
    const std::size_t gen_count = out.size();
    std::vector<VerticalFieldJet> level;
    for (std::size_t a = 0; a < gen_count; ++a) {
        for (std::size_t c = a + 1; c < gen_count; ++c) {
            level.push_back(bracket(out[a], out[c]));
        }
    }
    for (int depth = 2; depth <= b; ++depth) {
        std::vector<VerticalFieldJet> next;
        for (std::size_t a = 0; a < gen_count; ++a) {
            for (const auto& h : level) {
                next.push_back(bracket(out[a], h));
            }
        }
        out.insert(out.end(), level.begin(), level.end());
        level = std::move(next);
    }
    out.insert(out.end(), level.begin(), level.end());
    return out;
}

SpanningSet generate_spanning_set(const MetricSpec& spec, const std::vector<double>& x,
                                  const std::vector<double>& y0, const RankOptions& options)
{
    spec.validate();
    if (options.k < 0 || options.d < 0 || options.b < 0) {
        throw InvalidArgument("k, d and b must be non-negative");
    }
    const int needed = JetBudget::energy_order(options.k, options.d, options.b);
    const int order = options.energy_order();
    if (order < needed) {
        throw BudgetError("jet order " + std::to_string(order) + " too small for k = " + std::to_string(options.k) +
                              ", d = " + std::to_string(options.d) + ", b = " + std::to_string(options.b) +
                              " (need " + std::to_string(needed) + ")",
                          needed);
    }
    const std::vector<double> y = normalize_to_indicatrix(spec, x, y0);
    const BasePoint at{x, y};
    const BerwaldData data = compute_berwald(spec, at, order);

    SpanningSet set;
    set.deriv_depth = options.d;
    set.bracket_depth = options.b;
    set.chart = build_chart(spec, x, y, options.k, options.eliminate);
    const auto jets = holonomy_field_jets(data, options.d, options.b);
    double scale = 0.0;
    for (const auto& f : jets) {
        scale = std::max(scale, freeze_base(f).max_abs());
    }
    for (const auto& f : jets) {
        set.fields.push_back(restrict_field(set.chart, f, scale));
    }
    return set;
}

Eigen::MatrixXd jet_matrix(const SpanningSet& set, int k)
{
    const int n = set.chart.dim();
    const auto cols = static_cast<Eigen::Index>(jet_space_dim(n, k));
    Eigen::MatrixXd m(static_cast<Eigen::Index>(set.fields.size()), cols);
    for (std::size_t r = 0; r < set.fields.size(); ++r) {
        const auto v = jet_vector(set.fields[r], k);
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), c) = v[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

NumericalRank numerical_rank(const Eigen::MatrixXd& m, double tol)
{
    NumericalRank out;
    if (m.rows() == 0 || m.cols() == 0) {
        return out;
    }
    if (!m.allFinite()) {
        throw AccuracyError("numerical_rank: matrix has non-finite entries");
    }
    const Eigen::VectorXd row_max = m.cwiseAbs().rowwise().maxCoeff();
    const double global = row_max.maxCoeff();
    if (global == 0.0) {
        return out;
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (row_max(r) > kZeroRowFloor * global) {
            kept.push_back(r);
        }
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(kept.size()), m.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = m.row(kept[i]) / row_max(kept[i]);
    }
    out.kept_rows = static_cast<int>(kept.size());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = out.singular_values.front();
    for (double s : out.singular_values) {
        if (s > tol * smax) {
            ++out.rank;
        }
    }
    const auto r = static_cast<std::size_t>(out.rank);
    if (out.rank > 0 && r < out.singular_values.size() && out.singular_values[r] > 0.0) {
        out.gap_ratio = out.singular_values[r - 1] / out.singular_values[r];
    }
    out.ambiguous = out.gap_ratio < kAmbiguousGap;
    return out;
}

RankReport make_rank_report(const Eigen::MatrixXd& m, int target_dim, double tol)
{
    const NumericalRank nr = numerical_rank(m, tol);
    RankReport rep;
    rep.matrix_rows = static_cast<int>(m.rows());
    rep.matrix_cols = static_cast<int>(m.cols());
    rep.singular_values = nr.singular_values;
    rep.rank = nr.rank;
    rep.target_dim = target_dim;
    rep.generating = nr.rank == target_dim;
    rep.gap_ratio = nr.gap_ratio;
    rep.ambiguous = nr.ambiguous;
    return rep;
}

RankReport is_k_jet_generating(const MetricSpec& spec, const std::vector<double>& x,
                               const std::vector<double>& y0, const RankOptions& options)
{
    const SpanningSet set = generate_spanning_set(spec, x, y0, options);
    const Eigen::MatrixXd m = jet_matrix(set, options.k);
    return make_rank_report(m, static_cast<int>(jet_space_dim(spec.dim, options.k)), options.tol);
}

} // namespace finsler
