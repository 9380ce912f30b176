#pragma once

#include "finsler/funk_scan.hpp"
#include "finsler/holonomy_rank.hpp"
#include "finsler/metric.hpp"
#include "finsler/transport.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace finsler {

// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

// RankReport fields by name; an infinite gap_ratio is written as "inf".
std::string rank_report_json(const RankReport& report, int indent = 2);

inline constexpr const char* kScanCsvHeader = "t,rank,generating,min_kept_singular,gap_ratio,det_Pt";

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);
std::string scan_json(const ScanResult& result, int indent = 2);

// Columns s, x1..xn, y1..yn, F.
void write_transport_csv(std::ostream& os, const std::vector<TransportSample>& samples);

// {"kind": ..., "dim": ..., "catalog"/"diagonal"/"t"/"bump"/"base": ...}
std::string metric_spec_json(const MetricSpec& spec, int indent = 2);
MetricSpec parse_metric_spec(const std::string& text);

} // namespace finsler
