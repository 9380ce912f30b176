#include "finsler/transport.hpp"

#include "finsler/berwald.hpp"
#include "finsler/errors.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

namespace {

using State = std::vector<double>; // x (n), v (n), y (n)

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double a : v) {
        s += a * a;
    }
    return std::sqrt(s);
}

bool in_domain(const MetricSpec& spec, std::span<const double> x)
{
    return !spec.requires_unit_ball() || norm2(x) < 1.0;
}

enum class Mode { line, geodesic, geodesic_only };

struct Rhs {
    const MetricSpec& spec;
    int n;
    Mode mode;
    std::vector<double> direction; // line segments only

    // Returns false when a stage leaves the domain.
    bool operator()(const State& s, State& out) const
    {
        const std::span<const double> x(s.data(), static_cast<std::size_t>(n));
        const std::span<const double> v(s.data() + n, static_cast<std::size_t>(n));
        const std::span<const double> y(s.data() + 2 * n, static_cast<std::size_t>(n));
        if (!in_domain(spec, x)) {
            return false;
        }
        out.assign(s.size(), 0.0);
        std::span<const double> vel = v;
        if (mode == Mode::line) {
            vel = direction;
        } else {
            const SprayValues g = spray_at(spec, x, v);
            for (int i = 0; i < n; ++i) {
                out[static_cast<std::size_t>(n + i)] = -2.0 * g.G[static_cast<std::size_t>(i)];
            }
        }
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = vel[static_cast<std::size_t>(i)];
        }
        if (mode != Mode::geodesic_only) {
            const SprayValues g = spray_at(spec, x, y);
            for (int i = 0; i < n; ++i) {
                double sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    sum += g.Gi[static_cast<std::size_t>(i * n + j)] * vel[static_cast<std::size_t>(j)];
                }
                out[static_cast<std::size_t>(2 * n + i)] = -sum;
            }
        }
        return true;
    }
};

// One classical RK4 step; false when a stage left the domain.
bool rk4_step(const Rhs& f, State& s, double h)
{
    const std::size_t m = s.size();
    State k1, k2, k3, k4, tmp(m);
    if (!f(s, k1)) {
        return false;
    }
    for (std::size_t i = 0; i < m; ++i) {
        tmp[i] = s[i] + 0.5 * h * k1[i];
    }
    if (!f(tmp, k2)) {
        return false;
    }
    for (std::size_t i = 0; i < m; ++i) {
        tmp[i] = s[i] + 0.5 * h * k2[i];
    }
    if (!f(tmp, k3)) {
        return false;
    }
    for (std::size_t i = 0; i < m; ++i) {
        tmp[i] = s[i] + h * k3[i];
    }
    if (!f(tmp, k4)) {
        return false;
    }
    for (std::size_t i = 0; i < m; ++i) {
        s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return true;
}

State pack(std::span<const double> x, std::span<const double> v, std::span<const double> y)
{
    State s(x.begin(), x.end());
    s.insert(s.end(), v.begin(), v.end());
    s.insert(s.end(), y.begin(), y.end());
    return s;
}

struct Transporter {
    const MetricSpec& spec;
    int n;
    const TransportOptions& options;
    double f0 = 0.0;
    double s_total = 0.0;
    TransportResult result;

    void observe(const State& s)
    {
        const std::span<const double> x(s.data(), static_cast<std::size_t>(n));
        const std::span<const double> y(s.data() + 2 * n, static_cast<std::size_t>(n));
        const double f = norm_value(spec, x, y);
        result.norm_drift = std::max(result.norm_drift, std::abs(f - f0));
        if (options.record) {
            result.samples.push_back({s_total, {x.begin(), x.end()}, {y.begin(), y.end()}, f});
        }
    }

    void run(Rhs rhs, State& s, double duration, int steps)
    {
        const double h = duration / steps;
        for (int k = 0; k < steps; ++k) {
            if (!rk4_step(rhs, s, h)) {
                throw DomainError("parallel_transport: path leaves the metric's domain");
            }
            s_total += std::abs(h);
            ++result.steps;
            observe(s);
        }
    }
};

int step_count(double length, int steps_per_unit)
{
    return std::max(4, static_cast<int>(std::ceil(length * steps_per_unit)));
}

std::vector<double> sub(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i] = a[i] - b[i];
    }
    return d;
}

} // namespace

CurvePath CurvePath::coordinate_square(const std::vector<double>& x, int i, int j, double eps)
{
    const int n = static_cast<int>(x.size());
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
        throw InvalidArgument("coordinate_square: need two distinct directions");
    }
    auto corner = [&](double a, double b) {
        std::vector<double> c = x;
        c[static_cast<std::size_t>(i)] += a;
        c[static_cast<std::size_t>(j)] += b;
        return c;
    };
    CurvePath p;
    p.segments = {LineSegment{corner(0, 0), corner(eps, 0)}, LineSegment{corner(eps, 0), corner(eps, eps)},
                  LineSegment{corner(eps, eps), corner(0, eps)}, LineSegment{corner(0, eps), corner(0, 0)}};
    return p;
}

Trajectory integrate_geodesic(const MetricSpec& spec, const std::vector<double>& x0, const std::vector<double>& y0,
                              double length, int steps)
{
    spec.validate();
    check_domain(spec, BasePoint{x0, y0});
    if (steps < 1) {
        throw InvalidArgument("integrate_geodesic: steps must be >= 1");
    }
    const int n = spec.dim;
    Rhs rhs{spec, n, Mode::geodesic_only, {}};
    State s = pack(x0, y0, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    Trajectory traj;
    traj.samples.push_back({0.0, x0, y0});
    const double h = length / steps;
    for (int k = 0; k < steps; ++k) {
        State next = s;
        if (!rk4_step(rhs, next, h) || !in_domain(spec, std::span<const double>(next.data(), static_cast<std::size_t>(n)))) {
            traj.left_domain = true;
            break;
        }
        s = std::move(next);
        traj.samples.push_back({(k + 1) * h, {s.begin(), s.begin() + n}, {s.begin() + n, s.begin() + 2 * n}});
    }
    return traj;
}

TransportResult parallel_transport(const MetricSpec& spec, const CurvePath& path, const std::vector<double>& y0,
                                   const TransportOptions& options)
{
    spec.validate();
    const int n = spec.dim;
    if (path.segments.empty()) {
        throw InvalidArgument("parallel_transport: empty path");
    }
    if (options.steps_per_unit < 1) {
        throw InvalidArgument("parallel_transport: steps_per_unit must be >= 1");
    }

    std::vector<PathSegment> segments = path.segments;
    if (path.orientation < 0) {
        std::reverse(segments.begin(), segments.end());
    }

    std::vector<double> start = std::visit(
        [&](const auto& seg) -> std::vector<double> {
            using T = std::decay_t<decltype(seg)>;
            if constexpr (std::is_same_v<T, LineSegment>) {
                return path.orientation < 0 ? seg.to : seg.from;
            } else {
                if (path.orientation < 0) {
                    Trajectory t = integrate_geodesic(spec, seg.start, seg.velocity, seg.duration,
                                                      step_count(norm2(seg.velocity) * seg.duration, options.steps_per_unit));
                    return t.samples.back().x;
                }
                return seg.start;
            }
        },
        segments.front());
    check_domain(spec, BasePoint{start, y0});

    Transporter tr{spec, n, options, 0.0, 0.0, {}};
    tr.f0 = norm_value(spec, start, y0);
    State s = pack(start, std::vector<double>(static_cast<std::size_t>(n), 0.0), y0);
    tr.observe(s);

    for (const auto& segment : segments) {
        const std::span<const double> here(s.data(), static_cast<std::size_t>(n));
        if (const auto* line = std::get_if<LineSegment>(&segment)) {
            const auto& from = path.orientation < 0 ? line->to : line->from;
            const auto& to = path.orientation < 0 ? line->from : line->to;
            if (norm2(sub(from, here)) > 1e-6) {
                throw InvalidArgument("parallel_transport: consecutive segments do not share endpoints");
            }
            Rhs rhs{spec, n, Mode::line, sub(to, from)};
            std::copy(from.begin(), from.end(), s.begin());
            tr.run(rhs, s, 1.0, step_count(norm2(rhs.direction), options.steps_per_unit));
        } else {
            const auto& arc = std::get<GeodesicArc>(segment);
            const int steps = step_count(norm2(arc.velocity) * arc.duration, options.steps_per_unit);
            Rhs rhs{spec, n, Mode::geodesic, {}};
            if (path.orientation < 0) {
                const Trajectory fwd = integrate_geodesic(spec, arc.start, arc.velocity, arc.duration, steps);
                if (fwd.left_domain) {
                    throw DomainError("parallel_transport: geodesic arc leaves the domain");
                }
                const auto& end = fwd.samples.back();
                if (norm2(sub(end.x, here)) > 1e-6) {
                    throw InvalidArgument("parallel_transport: consecutive segments do not share endpoints");
                }
                std::copy(end.x.begin(), end.x.end(), s.begin());
                std::copy(end.v.begin(), end.v.end(), s.begin() + n);
                tr.run(rhs, s, -arc.duration, steps);
            } else {
                if (norm2(sub(arc.start, here)) > 1e-6) {
                    throw InvalidArgument("parallel_transport: consecutive segments do not share endpoints");
                }
                std::copy(arc.start.begin(), arc.start.end(), s.begin());
                std::copy(arc.velocity.begin(), arc.velocity.end(), s.begin() + n);
                tr.run(rhs, s, arc.duration, steps);
            }
        }
    }

    tr.result.y_end.assign(s.begin() + 2 * n, s.end());
    if (tr.result.norm_drift > options.drift_tolerance) {
        throw AccuracyError("parallel_transport: norm drift " + std::to_string(tr.result.norm_drift) +
                            " exceeds tolerance; increase steps_per_unit");
    }
    return tr.result;
}

LoopDefect loop_holonomy_defect(const MetricSpec& spec, const std::vector<double>& x, int i, int j, double eps,
                                const std::vector<double>& y0, const TransportOptions& options)
{
    if (!(eps > 0.0)) {
        throw InvalidArgument("loop_holonomy_defect: eps must be positive");
    }
    const int n = spec.dim;
    LoopDefect out;
    out.transport = parallel_transport(spec, CurvePath::coordinate_square(x, i, j, eps), y0, options);
    const BerwaldData data = compute_berwald(spec, BasePoint{x, y0}, JetBudget::curvature_cost);
    double err = 0.0;
    for (int a = 0; a < n; ++a) {
        const double d = out.transport.y_end[static_cast<std::size_t>(a)] - y0[static_cast<std::size_t>(a)];
        const double r = data.curvature.component(a, i, j).value();
        out.defect.push_back(d);
        out.scaled.push_back(d / (eps * eps));
        out.curvature.push_back(r);
        const double e = out.scaled.back() - kLoopDefectSign * r;
        err += e * e;
    }
    out.comparison = std::sqrt(err);
    return out;
}

} // namespace finsler
