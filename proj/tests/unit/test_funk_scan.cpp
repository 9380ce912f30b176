#include "finsler/errors.hpp"
#include "finsler/funk_scan.hpp"
#include "finsler/report_io.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace finsler;

namespace {

ScanConfig flat_config()
{
    ScanConfig cfg;
    cfg.base = MetricSpec::euclidean(2);
    cfg.x = {0.0, 0.0};
    cfg.y0 = {1.0, 0.0};
    return cfg;
}

ScanRow row(double t, bool generating, double det)
{
    ScanRow r;
    r.t = t;
    r.generating = generating;
    r.rank = generating ? 4 : 3;
    r.det_Pt = det;
    return r;
}

} // namespace

TEST_SUITE("funk_scan") {

TEST_CASE("t grids")
{
    const auto g = TGrid::parse("0:1:0.05");
    const auto v = g.values();
    REQUIRE(v.size() == 21);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 1.0);
    CHECK(v[10] == doctest::Approx(0.5));
    CHECK(TGrid::parse("0.1:1:0.1").values().size() == 10);
    CHECK(TGrid::parse("0.25,0.5,1").values() == std::vector<double>{0.25, 0.5, 1.0});
    CHECK_THROWS_AS(TGrid::parse("1:0:0.1"), InvalidArgument);
    CHECK_THROWS_AS(TGrid::parse("0:1:0"), InvalidArgument);
    CHECK_THROWS_AS(TGrid::parse("0:2:0.5"), InvalidArgument);
    CHECK_THROWS_AS(TGrid::parse("0:a:0.5"), InvalidArgument);
}

TEST_CASE("flat base endpoints and the coarse grid")
{
    auto cfg = flat_config();
    cfg.t_grid = TGrid::parse("0,1");
    const auto rows = scan_perturbation(cfg);
    CHECK(rows[0].rank == 0);
    CHECK_FALSE(rows[0].generating);
    CHECK(rows[0].det_Pt == 0.0);
    CHECK(rows[1].rank == 4);
    CHECK(rows[1].generating);
    CHECK(std::abs(rows[1].det_Pt) > 0.0);

    cfg.t_grid = TGrid::parse("0.1:1:0.1");
    for (const auto& r : scan_perturbation(cfg)) {
        CHECK(r.generating);
        CHECK(r.valid);
    }
}

TEST_CASE("sphere base: t = 1 inside the plateau matches the Funk rank")
{
    ScanConfig cfg;
    cfg.base = MetricSpec::round_sphere(2);
    cfg.x = {0.1, -0.2};
    cfg.y0 = {0.3, 1.0};
    cfg.t_grid = TGrid::parse("0,1");
    const auto rows = scan_perturbation(cfg);
    CHECK(rows[0].rank == 1);
    CHECK(rows[1].rank == 4);
}

TEST_CASE("worker count does not change the rows")
{
    auto cfg = flat_config();
    cfg.t_grid = TGrid::parse("0:1:0.1");
    cfg.workers = 1;
    std::ostringstream one, four;
    write_scan_csv(one, scan_perturbation(cfg));
    cfg.workers = 4;
    write_scan_csv(four, scan_perturbation(cfg));
    CHECK(one.str() == four.str());
}

TEST_CASE("det P_t is continuous under grid refinement")
{
    auto cfg = flat_config();
    const auto pivots = select_pivot_rows(cfg);
    REQUIRE(pivots.size() == 4);
    double previous = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        cfg.t_grid = TGrid{};
        cfg.t_grid.explicit_values = {0.6, 0.6 + h};
        const auto track = track_determinant(cfg, pivots);
        const double jump = std::abs(track.det[1] - track.det[0]);
        if (previous > 0.0) {
            CHECK(jump < previous / 1.5);
        }
        previous = jump;
    }
}

TEST_CASE("pivot selection fails outside the bump support")
{
    auto cfg = flat_config();
    cfg.x = {0.85, 0.0};
    CHECK_THROWS_AS(select_pivot_rows(cfg), InvalidArgument);
}

TEST_CASE("candidate intervals from rank drops, sign changes and dips")
{
    const std::vector<ScanRow> rows{row(0.0, true, 1.0),   row(0.1, true, 0.5), row(0.2, true, -0.5),
                                    row(0.3, true, 0.9),   row(0.4, true, 0.9), row(0.5, true, 0.001),
                                    row(0.6, true, 1.0),   row(0.7, true, 1.0), row(0.8, false, 1.0),
                                    row(0.9, true, 1.0)};
    const auto c = exceptional_intervals(rows);
    REQUIRE(c.size() == 3);
    CHECK(c[0].t_lo == doctest::Approx(0.1));
    CHECK(c[0].t_hi == doctest::Approx(0.3));
    CHECK(c[0].reason == "det sign change");
    CHECK(c[1].t_lo == doctest::Approx(0.4));
    CHECK(c[1].t_hi == doctest::Approx(0.6));
    CHECK(c[1].reason == "det dip");
    CHECK(c[2].t_lo == doctest::Approx(0.7));
    CHECK(c[2].t_hi == doctest::Approx(0.9));
    CHECK(c[2].reason == "rank drop");
}

TEST_CASE("run_scan bundles pivots and candidates")
{
    auto cfg = flat_config();
    cfg.t_grid = TGrid::parse("0:1:0.25");
    const auto result = run_scan(cfg);
    CHECK(result.rows.size() == 5);
    CHECK(result.pivot_rows.size() == 4);
    REQUIRE_FALSE(result.candidates.empty());
    CHECK(result.candidates.front().t_lo == 0.0);

    cfg.track_det = false;
    const auto plain = run_scan(cfg);
    CHECK(plain.pivot_rows.empty());
    CHECK(std::isnan(plain.rows.back().det_Pt));
}

TEST_CASE("config validation")
{
    auto cfg = flat_config();
    cfg.base = MetricSpec::funk_perturbation(MetricSpec::euclidean(2), 0.5);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = flat_config();
    cfg.x = {0, 0, 0};
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = flat_config();
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

}
