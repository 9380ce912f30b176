#include "cli.hpp"

#include "finsler/berwald.hpp"
#include "finsler/errors.hpp"
#include "finsler/funk_scan.hpp"
#include "finsler/holonomy_rank.hpp"
#include "finsler/report_io.hpp"
#include "finsler/transport.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace finsler::cli {

using nlohmann::ordered_json;

namespace {

// Single source of every default. Printed by --show-defaults.
struct Defaults {
    static constexpr int k = 3;
    static constexpr int d = 3;
    static constexpr int b = 0;
    static constexpr double tol = 1e-9;
    static constexpr int steps_per_unit = 1000;
    static constexpr double eps = 0.1;
    static constexpr double length = 1.0;
    static constexpr double r1 = 0.4;
    static constexpr double r2 = 0.8;
    static constexpr int dim = 2;
    static constexpr const char* t_grid = "0:1:0.05";
    static constexpr const char* loop = "square";
    static constexpr const char* plane = "1,2";

    static int workers() { return std::max(1u, std::thread::hardware_concurrency()); }
};

void print_defaults(std::ostream& out)
{
    out << "k            " << Defaults::k << "\n"
        << "d            " << Defaults::d << "\n"
        << "b            " << Defaults::b << "\n"
        << "tol          " << Defaults::tol << "\n"
        << "jet_order    k + d + b + " << JetBudget::curvature_cost << " (" << JetBudget::energy_order(Defaults::k, Defaults::d, Defaults::b) << ")\n"
        << "dim          " << Defaults::dim << "\n"
        << "x            origin\n"
        << "y            e1\n"
        << "t            " << Defaults::t_grid << " (scan), 0 (single metric)\n"
        << "r1           " << Defaults::r1 << "\n"
        << "r2           " << Defaults::r2 << "\n"
        << "workers      " << Defaults::workers() << " (processors)\n"
        << "track_det    true\n"
        << "loop         " << Defaults::loop << "\n"
        << "plane        " << Defaults::plane << "\n"
        << "eps          " << Defaults::eps << "\n"
        << "length       " << Defaults::length << "\n"
        << "steps        " << Defaults::steps_per_unit << " per unit parameter\n"
        << "format       json (rank, curvature), csv (scan, transport)\n"
        << "seed         0\n"
        << "samples      0 (use --y)\n";
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw InvalidArgument("cannot parse number '" + item + "' in '" + text + "'");
        }
    }
    if (v.empty()) {
        throw InvalidArgument("empty list '" + text + "'");
    }
    return v;
}

ordered_json metric_doc_from_name(const std::string& name)
{
    if (name == "euclidean") return {{"kind", "euclidean"}};
    if (name == "riemannian") return {{"kind", "riemannian"}, {"catalog", "flat"}};
    if (name == "sphere" || name == "round_sphere") return {{"kind", "riemannian"}, {"catalog", "round_sphere"}};
    if (name == "funk" || name == "funk_standard") return {{"kind", "funk_standard"}};
    if (name == "funk_perturbation") return {{"kind", "funk_perturbation"}};
    throw InvalidArgument("unknown metric '" + name + "'");
}

// Metric documents may name a metric instead of spelling it out, also as
// the base of a perturbation.
ordered_json metric_doc(const ordered_json& j)
{
    if (j.is_string()) {
        return metric_doc_from_name(j.get<std::string>());
    }
    if (!j.is_object()) {
        throw InvalidArgument("metric: expected an object or a metric name");
    }
    ordered_json doc = j;
    if (doc.contains("base")) {
        doc["base"] = metric_doc(doc["base"]);
    }
    return doc;
}

struct Flags {
    std::string config;
    std::string metric, base, x, y, t, out, format, loop, plane;
    int dim = 0, k = 0, d = 0, b = 0, jet_order = 0, seed = 0, samples = 0, workers = 0, steps = 0;
    double tol = 0, r1 = 0, r2 = 0, eps = 0, length = 0;
    bool track_det = true;
    bool show_defaults = false;
};

std::vector<double> json_vector(const ordered_json& j, const char* what)
{
    if (j.is_string()) {
        return parse_list(j.get<std::string>());
    }
    if (!j.is_array()) {
        throw InvalidArgument(std::string(what) + ": expected a list of numbers");
    }
    return j.get<std::vector<double>>();
}

// The merged document: config file first, flags on top.
struct Run {
    std::string command;
    ordered_json cfg;

    int dim() const
    {
        if (cfg.contains("metric") && cfg["metric"].contains("dim")) {
            return cfg["metric"]["dim"].get<int>();
        }
        if (cfg.contains("point") && cfg["point"].contains("x")) {
            return static_cast<int>(json_vector(cfg["point"]["x"], "point.x").size());
        }
        return Defaults::dim;
    }

    template <class T>
    T get(std::initializer_list<const char*> path, T fallback) const
    {
        const ordered_json* node = &cfg;
        for (const char* key : path) {
            if (!node->is_object() || !node->contains(key) || (*node)[key].is_null()) {
                return fallback;
            }
            node = &(*node)[key];
        }
        return node->get<T>();
    }

    bool has(std::initializer_list<const char*> path) const
    {
        const ordered_json* node = &cfg;
        for (const char* key : path) {
            if (!node->is_object() || !node->contains(key) || (*node)[key].is_null()) {
                return false;
            }
            node = &(*node)[key];
        }
        return true;
    }

    MetricSpec metric_from(ordered_json doc) const
    {
        const int n = dim();
        if (!doc.contains("dim")) {
            doc["dim"] = n;
        }
        if (doc.value("kind", std::string()) == "funk_perturbation") {
            if (!doc.contains("base")) {
                doc["base"] = {{"kind", "euclidean"}};
            }
            if (!doc["base"].contains("dim")) {
                doc["base"]["dim"] = doc["dim"];
            }
        }
        return parse_metric_spec(doc.dump());
    }

    MetricSpec metric() const { return metric_from(cfg.value("metric", ordered_json{{"kind", "euclidean"}})); }

    std::vector<double> x() const
    {
        if (has({"point", "x"})) {
            return json_vector(cfg["point"]["x"], "point.x");
        }
        return std::vector<double>(static_cast<std::size_t>(dim()), 0.0);
    }

    std::vector<double> y() const
    {
        if (has({"point", "y0"})) {
            return json_vector(cfg["point"]["y0"], "point.y0");
        }
        std::vector<double> e(static_cast<std::size_t>(dim()), 0.0);
        e[0] = 1.0;
        return e;
    }

    RankOptions rank_options() const
    {
        RankOptions o;
        o.k = get({"orders", "k"}, Defaults::k);
        o.d = get({"orders", "d"}, Defaults::d);
        o.b = get({"orders", "b"}, Defaults::b);
        o.tol = get({"tol"}, Defaults::tol);
        if (has({"orders", "jet_order"})) {
            o.jet_order = get({"orders", "jet_order"}, 0);
        }
        if (o.k < 0 || o.d < 0 || o.b < 0) {
            throw InvalidArgument("orders k, d, b must be non-negative");
        }
        if (!(o.tol > 0.0 && o.tol < 1.0)) {
            throw InvalidArgument("tol must lie in (0, 1)");
        }
        return o;
    }

    std::string format(const char* fallback) const
    {
        const std::string f = get({"output", "format"}, std::string(fallback));
        if (f != "csv" && f != "json") {
            throw InvalidArgument("format must be csv or json");
        }
        return f;
    }
};

void apply_flags(Run& run, const Flags& f, const CLI::App& app)
{
    auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
    ordered_json& cfg = run.cfg;
    if (cfg.contains("metric")) {
        cfg["metric"] = metric_doc(cfg["metric"]);
    }
    if (cfg.contains("scan") && cfg["scan"].contains("base")) {
        cfg["scan"]["base"] = metric_doc(cfg["scan"]["base"]);
    }

    if (given("--metric")) {
        ordered_json doc = metric_doc_from_name(f.metric);
        // Keep a configured perturbation base / t when only the kind is restated.
        if (cfg.contains("metric") && cfg["metric"].value("kind", std::string()) == doc["kind"]) {
            doc = cfg["metric"];
            const ordered_json named = metric_doc_from_name(f.metric);
            for (auto it = named.begin(); it != named.end(); ++it) {
                doc[it.key()] = it.value();
            }
        }
        cfg["metric"] = doc;
    }
    if (given("--dim")) {
        cfg["metric"]["dim"] = f.dim;
        if (cfg["metric"].contains("base")) {
            cfg["metric"]["base"]["dim"] = f.dim;
        }
        if (cfg.contains("scan") && cfg["scan"].contains("base")) {
            cfg["scan"]["base"]["dim"] = f.dim;
        }
    }
    if (given("--base")) {
        ordered_json base = metric_doc_from_name(f.base);
        if (run.command == "scan") {
            cfg["scan"]["base"] = base;
        } else {
            if (!cfg.contains("metric") || cfg["metric"].value("kind", std::string()) != "funk_perturbation") {
                cfg["metric"] = {{"kind", "funk_perturbation"}};
            }
            cfg["metric"]["base"] = base;
        }
    }
    if (given("--t")) {
        if (run.command == "scan") {
            cfg["scan"]["t"] = f.t;
        } else {
            const std::vector<double> t = parse_list(f.t);
            if (t.size() != 1) {
                throw InvalidArgument("--t takes a single value outside scan");
            }
            cfg["metric"]["t"] = t[0];
        }
    }
    if (given("--r1")) {
        cfg["bump"]["r1"] = f.r1;
    }
    if (given("--r2")) {
        cfg["bump"]["r2"] = f.r2;
    }
    if (given("--x")) cfg["point"]["x"] = parse_list(f.x);
    if (given("--y")) cfg["point"]["y0"] = parse_list(f.y);
    if (given("--k")) cfg["orders"]["k"] = f.k;
    if (given("--d")) cfg["orders"]["d"] = f.d;
    if (given("--b")) cfg["orders"]["b"] = f.b;
    if (given("--jet-order")) cfg["orders"]["jet_order"] = f.jet_order;
    if (given("--tol")) cfg["tol"] = f.tol;
    if (given("--out")) cfg["output"]["path"] = f.out;
    if (given("--format")) cfg["output"]["format"] = f.format;
    if (given("--seed")) cfg["seed"] = f.seed;
    if (given("--samples")) cfg["samples"] = f.samples;
    if (given("--workers")) cfg["scan"]["workers"] = f.workers;
    if (given("--track-det")) cfg["scan"]["track_det"] = f.track_det;
    if (given("--loop")) cfg["transport"]["loop"] = f.loop;
    if (given("--eps")) cfg["transport"]["eps"] = f.eps;
    if (given("--steps")) cfg["transport"]["steps"] = f.steps;
    if (given("--plane")) cfg["transport"]["plane"] = f.plane;
    if (given("--length")) cfg["transport"]["length"] = f.length;

    // The bump lives on the perturbation metric and on the scan.
    if (cfg.contains("bump")) {
        if (cfg.contains("metric") && cfg["metric"].value("kind", std::string()) == "funk_perturbation") {
            for (auto it = cfg["bump"].begin(); it != cfg["bump"].end(); ++it) {
                cfg["metric"]["bump"][it.key()] = it.value();
            }
        }
    }
}

void emit(const Run& run, const std::string& body, std::ostream& out)
{
    if (run.has({"output", "path"})) {
        const std::string path = run.get({"output", "path"}, std::string());
        std::ofstream file(path, std::ios::binary);
        if (!file) {
            throw InvalidArgument("cannot open output file '" + path + "'");
        }
        file << body;
        if (!file) {
            throw InvalidArgument("failed writing '" + path + "'");
        }
    } else {
        out << body;
        if (!body.empty() && body.back() != '\n') {
            out << '\n';
        }
    }
}

std::string fmt_gap(double g)
{
    if (std::isinf(g)) {
        return "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", g);
    return buf;
}

std::string fmt_vec(const std::vector<double>& v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v[i]);
        s += (i ? ", " : "") + std::string(buf);
    }
    return s + ")";
}

std::vector<double> random_direction(std::mt19937& rng, int n)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (double& a : v) {
            a = normal(rng);
            norm += a * a;
        }
        norm = std::sqrt(norm);
    }
    for (double& a : v) {
        a /= norm;
    }
    return v;
}

int cmd_rank(const Run& run, std::ostream& out)
{
    const MetricSpec spec = run.metric();
    const std::vector<double> x = run.x();
    const RankOptions opt = run.rank_options();
    const int samples = run.get({"samples"}, 0);
    if (samples < 0) {
        throw InvalidArgument("samples must be non-negative");
    }

    std::vector<std::vector<double>> points;
    if (samples == 0) {
        points.push_back(run.y());
    } else {
        std::mt19937 rng(static_cast<std::mt19937::result_type>(run.get({"seed"}, 0)));
        for (int s = 0; s < samples; ++s) {
            points.push_back(random_direction(rng, spec.dim));
        }
    }

    std::vector<RankReport> reports;
    for (const auto& y : points) {
        reports.push_back(is_k_jet_generating(spec, x, y, opt));
    }

    const std::string format = run.format("json");
    std::string body;
    if (format == "json") {
        if (samples == 0) {
            body = rank_report_json(reports.front());
        } else {
            ordered_json arr = ordered_json::array();
            for (std::size_t s = 0; s < reports.size(); ++s) {
                ordered_json j = ordered_json::parse(rank_report_json(reports[s]));
                j["y0"] = points[s];
                arr.push_back(j);
            }
            body = arr.dump(2);
        }
    } else {
        std::ostringstream os;
        os << "sample,rank,target_dim,generating,gap_ratio,ambiguous,min_singular";
        for (int i = 1; i <= spec.dim; ++i) {
            os << ",y" << i;
        }
        os << '\n';
        for (std::size_t s = 0; s < reports.size(); ++s) {
            const auto& r = reports[s];
            const double smin = r.singular_values.empty() ? 0.0 : r.singular_values[static_cast<std::size_t>(std::max(r.rank, 1) - 1)];
            os << s << ',' << r.rank << ',' << r.target_dim << ',' << (r.generating ? "true" : "false") << ','
               << format_double(r.gap_ratio) << ',' << (r.ambiguous ? "true" : "false") << ',' << format_double(smin);
            for (double v : points[s]) {
                os << ',' << format_double(v);
            }
            os << '\n';
        }
        body = os.str();
    }
    emit(run, body, out);

    int generating = 0;
    bool ambiguous = false;
    int min_rank = reports.front().rank;
    double min_gap = reports.front().gap_ratio;
    for (const auto& r : reports) {
        generating += r.generating ? 1 : 0;
        ambiguous = ambiguous || r.ambiguous;
        min_rank = std::min(min_rank, r.rank);
        min_gap = std::min(min_gap, r.gap_ratio);
    }
    const int target = reports.front().target_dim;
    out << opt.k << "-jet generating: " << (generating == static_cast<int>(reports.size()) ? "YES" : "NO");
    if (samples > 0) {
        out << " at " << generating << "/" << reports.size() << " samples, min rank " << min_rank << "/" << target;
    } else {
        out << ", rank " << min_rank << "/" << target;
    }
    out << ", gap " << fmt_gap(min_gap) << (ambiguous ? " (ambiguous)" : "") << '\n';
    return ambiguous ? kAmbiguous : kOk;
}

int cmd_curvature(const Run& run, std::ostream& out)
{
    const MetricSpec spec = run.metric();
    const BasePoint p{run.x(), run.y()};
    const int order = run.get({"orders", "jet_order"}, JetBudget::curvature_cost);
    const BerwaldData data = compute_berwald(spec, p, order);
    const int n = spec.dim;

    double max_r = 0.0;
    std::ostringstream os;
    const std::string format = run.format("json");
    if (format == "csv") {
        os << "i,j,k,R\n";
    }
    ordered_json R = ordered_json::array();
    for (int i = 0; i < n; ++i) {
        ordered_json Ri = ordered_json::array();
        for (int j = 0; j < n; ++j) {
            std::vector<double> Rij;
            for (int k = 0; k < n; ++k) {
                const double v = data.curvature.component(i, j, k).value();
                max_r = std::max(max_r, std::abs(v));
                Rij.push_back(v);
                if (format == "csv") {
                    os << i + 1 << ',' << j + 1 << ',' << k + 1 << ',' << format_double(v) << '\n';
                }
            }
            Ri.push_back(Rij);
        }
        R.push_back(Ri);
    }
    if (format == "json") {
        ordered_json j;
        j["metric"] = ordered_json::parse(metric_spec_json(spec));
        j["x"] = p.x;
        j["y"] = p.y;
        std::vector<double> G;
        ordered_json Gij = ordered_json::array();
        for (int i = 0; i < n; ++i) {
            G.push_back(data.spray.coeff(i).value());
            std::vector<double> row;
            for (int k = 0; k < n; ++k) {
                row.push_back(data.spray.connection(i, k).value());
            }
            Gij.push_back(row);
        }
        j["G"] = G;
        j["G_ij"] = Gij;
        j["R"] = R;
        os << j.dump(2);
    }
    emit(run, os.str(), out);
    out << "curvature: max |R^i_jk| = " << format_double(max_r) << " at x = " << fmt_vec(p.x) << ", y = " << fmt_vec(p.y)
        << '\n';
    return kOk;
}

int cmd_scan(const Run& run, std::ostream& out)
{
    ScanConfig cfg;
    if (run.has({"scan", "base"})) {
        cfg.base = run.metric_from(run.cfg["scan"]["base"]);
    } else if (run.has({"metric"})) {
        const MetricSpec m = run.metric();
        cfg.base = m.perturbation ? *m.perturbation->base : m;
    } else {
        cfg.base = MetricSpec::euclidean(run.dim());
    }
    cfg.bump.r1 = run.get({"bump", "r1"}, run.get({"scan", "bump", "r1"}, Defaults::r1));
    cfg.bump.r2 = run.get({"bump", "r2"}, run.get({"scan", "bump", "r2"}, Defaults::r2));
    cfg.x = run.x();
    cfg.y0 = run.y();
    const RankOptions opt = run.rank_options();
    cfg.k = opt.k;
    cfg.d = opt.d;
    cfg.b = opt.b;
    cfg.tol = opt.tol;
    if (run.has({"scan", "t"})) {
        const ordered_json& t = run.cfg["scan"]["t"];
        if (t.is_array()) {
            cfg.t_grid.explicit_values = t.get<std::vector<double>>();
        } else {
            cfg.t_grid = TGrid::parse(t.get<std::string>());
        }
    } else {
        cfg.t_grid = TGrid::parse(Defaults::t_grid);
    }
    cfg.track_det = run.get({"scan", "track_det"}, true);
    cfg.workers = run.get({"scan", "workers"}, Defaults::workers());
    if (opt.jet_order) {
        throw InvalidArgument("scan: jet_order override is not supported; use k, d, b");
    }

    const ScanResult result = run_scan(cfg);
    const std::string format = run.format("csv");
    if (format == "csv") {
        std::ostringstream os;
        write_scan_csv(os, result.rows);
        emit(run, os.str(), out);
    } else {
        emit(run, scan_json(result), out);
    }

    int generating = 0;
    bool ambiguous = false;
    for (const auto& r : result.rows) {
        generating += r.generating ? 1 : 0;
        ambiguous = ambiguous || (r.valid && r.gap_ratio < kAmbiguousGap);
    }
    out << "scan: " << result.rows.size() << " rows, " << cfg.k << "-jet generating at " << generating << ", "
        << result.candidates.size() << " candidate exceptional interval(s)";
    for (const auto& c : result.candidates) {
        out << " [" << fmt_gap(c.t_lo) << ", " << fmt_gap(c.t_hi) << "]: " << c.reason << ";";
    }
    out << (ambiguous ? " (ambiguous rows)" : "") << '\n';
    return ambiguous ? kAmbiguous : kOk;
}

std::pair<int, int> parse_plane(const std::string& text, int n)
{
    const std::vector<double> v = parse_list(text);
    if (v.size() != 2) {
        throw InvalidArgument("plane takes two 1-based indices, e.g. 1,2");
    }
    const int i = static_cast<int>(v[0]) - 1;
    const int j = static_cast<int>(v[1]) - 1;
    if (i < 0 || j < 0 || i >= n || j >= n || i == j || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
        throw InvalidArgument("plane indices must be distinct integers in 1.." + std::to_string(n));
    }
    return {i, j};
}

int cmd_transport(const Run& run, std::ostream& out)
{
    const MetricSpec spec = run.metric();
    const std::vector<double> x = run.x();
    const std::vector<double> y = run.y();
    const std::string loop = run.get({"transport", "loop"}, std::string(Defaults::loop));
    const int steps = run.get({"transport", "steps"}, Defaults::steps_per_unit);
    const std::string format = run.format("csv");

    if (loop == "geodesic") {
        const double length = run.get({"transport", "length"}, Defaults::length);
        const int n_steps = std::max(1, static_cast<int>(std::ceil(steps * length)));
        const Trajectory traj = integrate_geodesic(spec, x, y, length, n_steps);
        std::vector<TransportSample> samples;
        for (const auto& s : traj.samples) {
            samples.push_back({s.s, s.x, s.v, norm_value(spec, s.x, s.v)});
        }
        double drift = 0.0;
        for (const auto& s : samples) {
            drift = std::max(drift, std::abs(s.F - samples.front().F));
        }
        std::ostringstream os;
        if (format == "csv") {
            write_transport_csv(os, samples);
        } else {
            ordered_json j;
            j["x_end"] = samples.back().x;
            j["v_end"] = samples.back().y;
            j["left_domain"] = traj.left_domain;
            j["norm_drift"] = drift;
            os << j.dump(2);
        }
        emit(run, os.str(), out);
        out << "geodesic: " << samples.size() - 1 << " steps, end x = " << fmt_vec(samples.back().x)
            << ", speed drift " << format_double(drift) << (traj.left_domain ? " (left domain)" : "") << '\n';
        return kOk;
    }
    if (loop != "square") {
        throw InvalidArgument("loop must be square or geodesic");
    }

    const auto [i, j] = parse_plane(run.get({"transport", "plane"}, std::string(Defaults::plane)), spec.dim);
    const double eps = run.get({"transport", "eps"}, Defaults::eps);
    TransportOptions opt;
    opt.steps_per_unit = steps;
    opt.record = format == "csv";
    const std::vector<double> y0 = normalize_to_indicatrix(spec, x, y);
    const LoopDefect def = loop_holonomy_defect(spec, x, i, j, eps, y0, opt);

    std::ostringstream os;
    if (format == "csv") {
        write_transport_csv(os, def.transport.samples);
    } else {
        ordered_json jd;
        jd["eps"] = eps;
        jd["y0"] = y0;
        jd["y_end"] = def.transport.y_end;
        jd["defect"] = def.defect;
        jd["scaled"] = def.scaled;
        jd["curvature"] = def.curvature;
        jd["sign"] = kLoopDefectSign;
        jd["comparison"] = def.comparison;
        jd["norm_drift"] = def.transport.norm_drift;
        jd["steps"] = def.transport.steps;
        os << jd.dump(2);
    }
    emit(run, os.str(), out);
    out << "loop defect/eps^2 = " << fmt_vec(def.scaled) << ", R_" << i + 1 << j + 1 << " = " << fmt_vec(def.curvature)
        << ", |diff| = " << format_double(def.comparison) << ", drift " << format_double(def.transport.norm_drift)
        << '\n';
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Holonomy and jet-generation experiments for Finsler metrics"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    Flags f;
    app.add_option("--config", f.config, "JSON run configuration; flags override its values");
    app.add_flag("--show-defaults", f.show_defaults, "Print the defaults table and exit");
    app.add_option("--metric", f.metric, "euclidean | riemannian | sphere | funk | funk_perturbation");
    app.add_option("--dim", f.dim, "Dimension n");
    app.add_option("--base", f.base, "Base metric of the Funk perturbation");
    app.add_option("--x", f.x, "Base point, comma separated");
    app.add_option("--y", f.y, "Fiber vector, comma separated");
    app.add_option("--t", f.t, "Scan grid min:max:step or list; single t for a perturbation metric");
    app.add_option("--k", f.k, "Jet order on the indicatrix");
    app.add_option("--d", f.d, "Covariant derivative depth");
    app.add_option("--b", f.b, "Bracket depth");
    app.add_option("--jet-order", f.jet_order, "Energy jet order override");
    app.add_option("--tol", f.tol, "Relative singular value threshold");
    app.add_option("--r1", f.r1, "Bump plateau radius");
    app.add_option("--r2", f.r2, "Bump support radius");
    app.add_option("--workers", f.workers, "Scan worker threads");
    app.add_option("--track-det", f.track_det, "Track det P_t during scans (true/false)");
    app.add_option("--loop", f.loop, "square | geodesic");
    app.add_option("--plane", f.plane, "Coordinate plane of the square loop, 1-based");
    app.add_option("--eps", f.eps, "Square loop side");
    app.add_option("--length", f.length, "Geodesic parameter length");
    app.add_option("--steps", f.steps, "RK4 steps per unit parameter");
    app.add_option("--out", f.out, "Output file");
    app.add_option("--format", f.format, "csv | json");
    app.add_option("--seed", f.seed, "Seed for sampled fiber directions");
    app.add_option("--samples", f.samples, "Number of random y samples (rank)");

    std::map<std::string, CLI::App*> commands;
    commands["curvature"] = app.add_subcommand("curvature", "Spray, connection and curvature at (x, y)");
    commands["rank"] = app.add_subcommand("rank", "k-jet generation verdict at (x, y)");
    commands["scan"] = app.add_subcommand("scan", "Rank and det P_t along the Funk perturbation parameter");
    commands["transport"] = app.add_subcommand("transport", "Parallel transport around a square loop or along a geodesic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidInput;
    }

    if (f.show_defaults) {
        print_defaults(out);
        return kOk;
    }

    Run run;
    for (const auto& [name, sub] : commands) {
        if (sub->parsed()) {
            run.command = name;
        }
    }

    try {
        if (!f.config.empty()) {
            std::ifstream in(f.config);
            if (!in) {
                throw InvalidArgument("cannot read config '" + f.config + "'");
            }
            try {
                run.cfg = ordered_json::parse(in);
            } catch (const ordered_json::exception& e) {
                throw InvalidArgument(std::string("config: ") + e.what());
            }
            if (!run.cfg.is_object()) {
                throw InvalidArgument("config: expected a JSON object");
            }
            if (run.command.empty()) {
                run.command = run.cfg.value("command", std::string());
            } else if (run.cfg.contains("command") && run.cfg["command"] != run.command) {
                throw InvalidArgument("config command '" + run.cfg["command"].get<std::string>() +
                                      "' conflicts with subcommand '" + run.command + "'");
            }
        }
        if (run.command.empty()) {
            err << app.help();
            return kInvalidInput;
        }
        apply_flags(run, f, app);

        if (run.command == "rank") return cmd_rank(run, out);
        if (run.command == "curvature") return cmd_curvature(run, out);
        if (run.command == "scan") return cmd_scan(run, out);
        if (run.command == "transport") return cmd_transport(run, out);
        throw InvalidArgument("unknown command '" + run.command + "'");
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const ordered_json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << " (needs energy order " << e.needed_order() << ")\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

} // namespace finsler::cli
