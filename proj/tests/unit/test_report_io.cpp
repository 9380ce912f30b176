#include "finsler/errors.hpp"
#include "finsler/report_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

using namespace finsler;

TEST_SUITE("report_io") {

TEST_CASE("format_double round trips")
{
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
    const double v = 0.1 + 0.2;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("rank report json")
{
    RankReport r;
    r.matrix_rows = 15;
    r.matrix_cols = 4;
    r.singular_values = {2.0, 1.0, 0.5, 0.25};
    r.rank = 4;
    r.target_dim = 4;
    r.generating = true;
    const auto j = nlohmann::json::parse(rank_report_json(r));
    CHECK(j["matrix_rows"] == 15);
    CHECK(j["matrix_cols"] == 4);
    CHECK(j["singular_values"].size() == 4);
    CHECK(j["rank"] == 4);
    CHECK(j["target_dim"] == 4);
    CHECK(j["generating"] == true);
    CHECK(j["gap_ratio"] == "inf");
    CHECK(j["ambiguous"] == false);
}

TEST_CASE("scan csv")
{
    ScanRow a;
    a.t = 0.0;
    a.rank = 3;
    a.generating = false;
    a.min_kept_singular = 0.25;
    a.gap_ratio = 1e12;
    a.det_Pt = -0.5;
    ScanRow b = a;
    b.t = 1.0;
    b.rank = 4;
    b.generating = true;
    b.gap_ratio = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    write_scan_csv(os, {a, b});
    CHECK(os.str() == std::string(kScanCsvHeader) + "\n0,3,false,0.25,1000000000000,-0.5\n1,4,true,0.25,inf,-0.5\n");

    ScanResult res;
    res.rows = {a, b};
    res.pivot_rows = {0, 2};
    res.candidates = {{0.0, 1.0, "rank drop"}};
    const auto j = nlohmann::json::parse(scan_json(res));
    CHECK(j["rows"].size() == 2);
    CHECK(j["rows"][1]["gap_ratio"] == "inf");
    CHECK(j["pivot_rows"][1] == 2);
    CHECK(j["candidates"][0]["reason"] == "rank drop");
}

TEST_CASE("transport csv")
{
    TransportSample s{0.5, {0.1, 0.2}, {1.0, 0.0}, 1.25};
    std::ostringstream os;
    write_transport_csv(os, {s});
    CHECK(os.str() == "s,x1,x2,y1,y2,F\n0.5,0.10000000000000001,0.20000000000000001,1,0,1.25\n");
}

TEST_CASE("metric spec json round trip")
{
    const std::vector<MetricSpec> specs{
        MetricSpec::euclidean(3),
        MetricSpec::funk(2),
        MetricSpec::round_sphere(2),
        MetricSpec::diagonal({{{1.0, {0, 0}}, {0.5, {2, 0}}}, {{2.0, {0, 1}}, {1.0, {0, 0}}}}),
        MetricSpec::funk_perturbation(MetricSpec::round_sphere(2), 0.3, {0.3, 0.7}),
    };
    for (const auto& spec : specs) {
        const auto text = metric_spec_json(spec);
        const auto back = parse_metric_spec(text);
        CHECK(metric_spec_json(back) == text);
        CHECK(back.describe() == spec.describe());
    }
}

TEST_CASE("metric spec parse errors")
{
    CHECK_THROWS_AS(parse_metric_spec("not json"), InvalidArgument);
    CHECK_THROWS_AS(parse_metric_spec(R"({"kind": "hyperbolic", "dim": 2})"), InvalidArgument);
    CHECK_THROWS_AS(parse_metric_spec(R"({"kind": "funk", "dim": 0})"), InvalidArgument);
    CHECK_THROWS_AS(parse_metric_spec(R"({"kind": "funk_perturbation", "dim": 2, "t": 0.5, "bump": {"r1": 0.9, "r2": 0.5}, "base": {"kind": "euclidean", "dim": 2}})"), InvalidArgument);
    const auto s = parse_metric_spec(R"({"kind": "sphere", "dim": 3})");
    CHECK(s.kind == MetricKind::riemannian);
    CHECK(s.dim == 3);
}

}
