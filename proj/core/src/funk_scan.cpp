#include "finsler/funk_scan.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

namespace finsler {

namespace {

constexpr double kDetNearZero = 1e-8;
constexpr double kDetDip = 1e-2;

double parse_number(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("cannot parse number '" + s + "'");
    }
    if (used != s.size()) {
        throw InvalidArgument("trailing characters in number '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        parts.push_back(item);
    }
    return parts;
}

double frozen_determinant(const Eigen::MatrixXd& m, const std::vector<int>& pivots)
{
    const auto l = static_cast<Eigen::Index>(pivots.size());
    if (m.cols() != l) {
        throw InvalidArgument("frozen pivot rows do not form a square submatrix");
    }
    Eigen::MatrixXd sub(l, l);
    for (Eigen::Index r = 0; r < l; ++r) {
        if (pivots[static_cast<std::size_t>(r)] >= m.rows()) {
            throw InvalidArgument("pivot row index exceeds the jet matrix");
        }
        sub.row(r) = m.row(pivots[static_cast<std::size_t>(r)]);
    }
    return sub.fullPivLu().determinant();
}

Eigen::MatrixXd matrix_at(const ScanConfig& cfg, double t, std::vector<double>* y_out = nullptr)
{
    const MetricSpec spec = perturbed_metric(cfg, t);
    const std::vector<double> y = normalize_to_indicatrix(spec, cfg.x, cfg.y0);
    if (y_out) {
        *y_out = y;
    }
    const SpanningSet set = generate_spanning_set(spec, cfg.x, y, cfg.rank_options());
    return jet_matrix(set, cfg.k);
}

ScanRow compute_row(const ScanConfig& cfg, double t, const std::vector<int>& pivots)
{
    ScanRow row;
    row.t = t;
    const MetricSpec spec = perturbed_metric(cfg, t);
    const std::vector<double> y = normalize_to_indicatrix(spec, cfg.x, cfg.y0);
    if (!check_strong_convexity(spec, BasePoint{cfg.x, y}).positive_definite) {
        row.valid = false;
        row.rank = -1;
        row.min_kept_singular = std::numeric_limits<double>::quiet_NaN();
        row.gap_ratio = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    const SpanningSet set = generate_spanning_set(spec, cfg.x, y, cfg.rank_options());
    const Eigen::MatrixXd m = jet_matrix(set, cfg.k);
    const NumericalRank nr = numerical_rank(m, cfg.tol);
    row.rank = nr.rank;
    row.generating = nr.rank == static_cast<int>(jet_space_dim(cfg.base.dim, cfg.k));
    row.min_kept_singular = nr.rank > 0 ? nr.singular_values[static_cast<std::size_t>(nr.rank - 1)] : 0.0;
    row.gap_ratio = nr.gap_ratio;
    if (!pivots.empty()) {
        row.det_Pt = frozen_determinant(m, pivots);
    }
    return row;
}

std::vector<ScanRow> sweep(const ScanConfig& cfg, const std::vector<int>& pivots)
{
    const std::vector<double> ts = cfg.t_grid.values();
    std::vector<ScanRow> rows(ts.size());
    std::vector<std::exception_ptr> errors(ts.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < ts.size(); i = next++) {
            try {
                rows[i] = compute_row(cfg, ts[i], pivots);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(ts.size())));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    // Report the first failure in grid order so errors are schedule-independent.
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

} // namespace

std::vector<double> TGrid::values() const
{
    if (!explicit_values.empty()) {
        for (double t : explicit_values) {
            if (!(t >= 0.0 && t <= 1.0)) {
                throw InvalidArgument("t values must lie in [0, 1]");
            }
        }
        return explicit_values;
    }
    if (!(step > 0.0)) {
        throw InvalidArgument("t grid step must be positive");
    }
    if (!(t_min >= 0.0 && t_max <= 1.0 && t_min <= t_max)) {
        throw InvalidArgument("t grid must satisfy 0 <= t_min <= t_max <= 1");
    }
    const auto count = static_cast<std::size_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
    std::vector<double> ts(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts[i] = t_min + static_cast<double>(i) * step;
    }
    if (std::abs(ts.back() - t_max) <= 1e-9 * step) {
        ts.back() = t_max;
    }
    return ts;
}

TGrid TGrid::parse(const std::string& text)
{
    TGrid g;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) {
            throw InvalidArgument("t grid must look like min:max:step");
        }
        g.t_min = parse_number(parts[0]);
        g.t_max = parse_number(parts[1]);
        g.step = parse_number(parts[2]);
        g.values(); // validates
        return g;
    }
    for (const auto& p : split(text, ',')) {
        g.explicit_values.push_back(parse_number(p));
    }
    if (g.explicit_values.empty()) {
        throw InvalidArgument("empty t list");
    }
    g.values();
    return g;
}

void ScanConfig::validate() const
{
    base.validate();
    if (base.kind == MetricKind::funk_perturbation) {
        throw InvalidArgument("scan base must not itself be a Funk perturbation");
    }
    bump.validate();
    if (static_cast<int>(x.size()) != base.dim || static_cast<int>(y0.size()) != base.dim) {
        throw InvalidArgument("scan point dimension does not match the base metric");
    }
    if (workers < 1) {
        throw InvalidArgument("workers must be >= 1");
    }
    t_grid.values();
}

RankOptions ScanConfig::rank_options() const
{
    RankOptions o;
    o.k = k;
    o.d = d;
    o.b = b;
    o.tol = tol;
    return o;
}

MetricSpec perturbed_metric(const ScanConfig& cfg, double t)
{
    return MetricSpec::funk_perturbation(cfg.base, t, cfg.bump);
}

std::vector<int> select_pivot_rows(const ScanConfig& cfg)
{
    cfg.validate();
    const Eigen::MatrixXd m = matrix_at(cfg, 1.0);
    const auto l = m.cols();
    const NumericalRank nr = numerical_rank(m, cfg.tol);
    if (nr.rank < l) {
        throw InvalidArgument("no full-rank square submatrix at t = 1 (rank " + std::to_string(nr.rank) + " of " +
                              std::to_string(l) + "); the base point is probably outside the bump plateau");
    }
    Eigen::MatrixXd normalized = m;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double s = m.row(r).cwiseAbs().maxCoeff();
        if (s > 0.0) {
            normalized.row(r) /= s;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normalized.transpose());
    std::vector<int> pivots;
    for (Eigen::Index i = 0; i < l; ++i) {
        pivots.push_back(static_cast<int>(qr.colsPermutation().indices()(i)));
    }
    std::sort(pivots.begin(), pivots.end());
    return pivots;
}

std::vector<ScanRow> scan_perturbation(const ScanConfig& cfg)
{
    cfg.validate();
    return sweep(cfg, cfg.track_det ? select_pivot_rows(cfg) : std::vector<int>{});
}

DeterminantTrack track_determinant(const ScanConfig& cfg, const std::vector<int>& pivot_rows)
{
    cfg.validate();
    if (pivot_rows.empty()) {
        throw InvalidArgument("track_determinant: no pivot rows");
    }
    DeterminantTrack track;
    track.pivot_rows = pivot_rows;
    track.t = cfg.t_grid.values();
    track.det.resize(track.t.size());
    for (std::size_t i = 0; i < track.t.size(); ++i) {
        track.det[i] = frozen_determinant(matrix_at(cfg, track.t[i]), pivot_rows);
    }
    std::vector<ScanRow> rows(track.t.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].t = track.t[i];
        rows[i].det_Pt = track.det[i];
        rows[i].generating = true; // only the determinant speaks here
    }
    track.candidates = exceptional_intervals(rows);
    return track;
}

DeterminantTrack track_determinant(const ScanConfig& cfg)
{
    return track_determinant(cfg, select_pivot_rows(cfg));
}

std::vector<ExceptionalInterval> exceptional_intervals(const std::vector<ScanRow>& unsorted)
{
    std::vector<ScanRow> rows = unsorted;
    std::stable_sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.t < b.t; });
    const std::size_t n = rows.size();
    std::vector<ExceptionalInterval> raw;
    auto around = [&](std::size_t i, const std::string& why) {
        raw.push_back({rows[i > 0 ? i - 1 : i].t, rows[i + 1 < n ? i + 1 : i].t, why});
    };

    double det_max = 0.0;
    for (const auto& r : rows) {
        if (std::isfinite(r.det_Pt)) {
            det_max = std::max(det_max, std::abs(r.det_Pt));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].valid) {
            around(i, "invalid metric");
        } else if (!rows[i].generating) {
            around(i, "rank drop");
        }
        const double di = rows[i].det_Pt;
        if (!std::isfinite(di) || det_max == 0.0) {
            continue;
        }
        if (std::abs(di) <= kDetNearZero * det_max) {
            around(i, "det near zero");
        } else if (i > 0 && i + 1 < n && std::isfinite(rows[i - 1].det_Pt) && std::isfinite(rows[i + 1].det_Pt) &&
                   std::abs(di) < kDetDip * std::min(std::abs(rows[i - 1].det_Pt), std::abs(rows[i + 1].det_Pt))) {
            around(i, "det dip");
        }
        if (i + 1 < n && std::isfinite(rows[i + 1].det_Pt) && di * rows[i + 1].det_Pt < 0.0) {
            raw.push_back({rows[i].t, rows[i + 1].t, "det sign change"});
        }
    }

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        return a.t_lo < b.t_lo || (a.t_lo == b.t_lo && a.t_hi < b.t_hi);
    });
    std::vector<ExceptionalInterval> merged;
    for (const auto& iv : raw) {
        if (!merged.empty() && iv.t_lo <= merged.back().t_hi) {
            auto& m = merged.back();
            m.t_hi = std::max(m.t_hi, iv.t_hi);
            if (m.reason.find(iv.reason) == std::string::npos) {
                m.reason += "; " + iv.reason;
            }
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

ScanResult run_scan(const ScanConfig& cfg)
{
    cfg.validate();
    ScanResult result;
    if (cfg.track_det) {
        result.pivot_rows = select_pivot_rows(cfg);
    }
    result.rows = sweep(cfg, result.pivot_rows);
    result.candidates = exceptional_intervals(result.rows);
    return result;
}

} // namespace finsler
