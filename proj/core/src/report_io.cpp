#include "finsler/report_io.hpp"

#include "finsler/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace finsler {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_tag(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

const char* kind_name(MetricKind k)
{
    switch (k) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::riemannian: return "riemannian";
    case MetricKind::funk_standard: return "funk_standard";
    case MetricKind::funk_perturbation: return "funk_perturbation";
    }
    return "?";
}

const char* catalog_name(RiemannianCatalog c)
{
    switch (c) {
    case RiemannianCatalog::flat: return "flat";
    case RiemannianCatalog::round_sphere: return "round_sphere";
    case RiemannianCatalog::diagonal_polynomial: return "diagonal_polynomial";
    }
    return "?";
}

ordered_json to_json(const MetricSpec& spec)
{
    ordered_json j;
    j["kind"] = kind_name(spec.kind);
    j["dim"] = spec.dim;
    if (spec.riemannian) {
        j["catalog"] = catalog_name(spec.riemannian->catalog);
        if (spec.riemannian->catalog == RiemannianCatalog::diagonal_polynomial) {
            ordered_json diag = ordered_json::array();
            for (const auto& poly : spec.riemannian->diagonal) {
                ordered_json terms = ordered_json::array();
                for (const auto& term : poly) {
                    terms.push_back({{"coeff", term.coeff}, {"exponents", term.exponents}});
                }
                diag.push_back(terms);
            }
            j["diagonal"] = diag;
        }
    }
    if (spec.perturbation) {
        j["t"] = spec.perturbation->t;
        j["bump"] = {{"r1", spec.perturbation->bump.r1}, {"r2", spec.perturbation->bump.r2}};
        j["base"] = to_json(*spec.perturbation->base);
    }
    return j;
}

MetricSpec from_json(const ordered_json& j)
{
    if (!j.is_object()) {
        throw InvalidArgument("metric: expected an object");
    }
    const std::string kind = j.value("kind", std::string("euclidean"));
    const int dim = j.value("dim", 2);
    MetricSpec spec;
    if (kind == "euclidean") {
        spec = MetricSpec::euclidean(dim);
    } else if (kind == "funk_standard" || kind == "funk") {
        spec = MetricSpec::funk(dim);
    } else if (kind == "riemannian" || kind == "sphere") {
        const std::string catalog = j.value("catalog", std::string(kind == "sphere" ? "round_sphere" : "flat"));
        if (catalog == "round_sphere") {
            spec = MetricSpec::round_sphere(dim);
        } else if (catalog == "flat") {
            spec = MetricSpec::euclidean(dim);
            spec.kind = MetricKind::riemannian;
            spec.riemannian = RiemannianCoeffs{};
        } else if (catalog == "diagonal_polynomial") {
            std::vector<std::vector<PolynomialTerm>> diag;
            for (const auto& poly : j.at("diagonal")) {
                std::vector<PolynomialTerm> terms;
                for (const auto& term : poly) {
                    terms.push_back({term.at("coeff").get<double>(), term.at("exponents").get<std::vector<int>>()});
                }
                diag.push_back(std::move(terms));
            }
            spec = MetricSpec::diagonal(std::move(diag));
        } else {
            throw InvalidArgument("metric: unknown catalog '" + catalog + "'");
        }
    } else if (kind == "funk_perturbation") {
        const MetricSpec base = j.contains("base") ? from_json(j.at("base")) : MetricSpec::euclidean(dim);
        BumpParams bump;
        if (j.contains("bump")) {
            bump.r1 = j.at("bump").value("r1", bump.r1);
            bump.r2 = j.at("bump").value("r2", bump.r2);
        }
        spec = MetricSpec::funk_perturbation(base, j.value("t", 0.0), bump);
    } else {
        throw InvalidArgument("metric: unknown kind '" + kind + "'");
    }
    spec.validate();
    return spec;
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string rank_report_json(const RankReport& report, int indent)
{
    ordered_json j;
    j["matrix_rows"] = report.matrix_rows;
    j["matrix_cols"] = report.matrix_cols;
    j["singular_values"] = report.singular_values;
    j["rank"] = report.rank;
    j["target_dim"] = report.target_dim;
    j["generating"] = report.generating;
    j["gap_ratio"] = number_or_tag(report.gap_ratio);
    j["ambiguous"] = report.ambiguous;
    return j.dump(indent);
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows)
{
    os << kScanCsvHeader << '\n';
    for (const auto& r : rows) {
        os << format_double(r.t) << ',' << r.rank << ',' << (r.generating ? "true" : "false") << ','
           << format_double(r.min_kept_singular) << ',' << format_double(r.gap_ratio) << ','
           << format_double(r.det_Pt) << '\n';
    }
}

std::string scan_json(const ScanResult& result, int indent)
{
    ordered_json rows = ordered_json::array();
    for (const auto& r : result.rows) {
        ordered_json row;
        row["t"] = r.t;
        row["rank"] = r.rank;
        row["generating"] = r.generating;
        row["min_kept_singular"] = number_or_tag(r.min_kept_singular);
        row["gap_ratio"] = number_or_tag(r.gap_ratio);
        row["det_Pt"] = number_or_tag(r.det_Pt);
        rows.push_back(row);
    }
    ordered_json cands = ordered_json::array();
    for (const auto& c : result.candidates) {
        cands.push_back({{"t_lo", c.t_lo}, {"t_hi", c.t_hi}, {"reason", c.reason}});
    }
    ordered_json j;
    j["rows"] = rows;
    j["pivot_rows"] = result.pivot_rows;
    j["candidates"] = cands;
    return j.dump(indent);
}

void write_transport_csv(std::ostream& os, const std::vector<TransportSample>& samples)
{
    const std::size_t n = samples.empty() ? 0 : samples.front().x.size();
    os << 's';
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",x" << i;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",y" << i;
    }
    os << ",F\n";
    for (const auto& s : samples) {
        os << format_double(s.s);
        for (double v : s.x) {
            os << ',' << format_double(v);
        }
        for (double v : s.y) {
            os << ',' << format_double(v);
        }
        os << ',' << format_double(s.F) << '\n';
    }
}

std::string metric_spec_json(const MetricSpec& spec, int indent)
{
    return to_json(spec).dump(indent);
}

MetricSpec parse_metric_spec(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw InvalidArgument(std::string("metric: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const ordered_json::exception& e) {
        throw InvalidArgument(std::string("metric: ") + e.what());
    }
}

} // namespace finsler
