// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stsad/time_series.hpp"

namespace stsad {

// Parses the KPI CSV release format: header `timestamp,value,label,KPI ID`,
// comma-separated, epoch-second timestamps. Rows may interleave KPIs; output
// holds one LabeledSeries per distinct KPI ID (first-appearance order), rows
// sorted by timestamp, granularity inferred per KPI.
std::vector<LabeledSeries> parse_kpi_csv(std::istream& in);
std::vector<LabeledSeries> parse_kpi_csv_file(const std::string& path);

void write_kpi_csv(std::ostream& out, const std::vector<LabeledSeries>& dataset);

// Internal series interchange: {kpi_id, granularity_s, points: [[t, v, label]]}.
std::string series_to_json(const LabeledSeries& s);
LabeledSeries series_from_json(const std::string& text);

// Reads either format, dispatching on the first non-space byte ('{' = JSON).
std::vector<LabeledSeries> load_series_file(const std::string& path);

}  // namespace stsad
