// SPDX-License-Identifier: Apache-2.0
#include "stsad/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stsad/errors.hpp"

namespace stsad {

namespace {

const std::string kHeader = "timestamp,value,label,KPI ID";

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::int64_t parse_i64(const std::string& s, std::size_t line_no, const char* what) {
    std::int64_t v = 0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    }
    return v;
}

double parse_f64(const std::string& s, std::size_t line_no) {
    if (s.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": empty value");
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw DataError("line " + std::to_string(line_no) + ": bad value '" + s + "'");
    }
    return v;
}

struct RawPoint {
    std::int64_t t;
    double v;
    std::uint8_t label;
};

}  // namespace

std::vector<LabeledSeries> parse_kpi_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty input: missing CSV header");
    }
    if (strip_cr(line) != kHeader) {
        throw DataError("unexpected CSV header, want '" + kHeader + "'");
    }

    std::vector<std::string> order;
    std::map<std::string, std::vector<RawPoint>> groups;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            throw DataError("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                            std::to_string(fields.size()));
        }
        RawPoint p{};
        p.t = parse_i64(fields[0], line_no, "timestamp");
        p.v = parse_f64(fields[1], line_no);
        const std::int64_t label = parse_i64(fields[2], line_no, "label");
        if (label != 0 && label != 1) {
            throw DataError("line " + std::to_string(line_no) + ": non-binary label " +
                            std::to_string(label));
        }
        p.label = static_cast<std::uint8_t>(label);
        const std::string& kpi = fields[3];
        if (kpi.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": empty KPI ID");
        }
        auto it = groups.find(kpi);
        if (it == groups.end()) {
            order.push_back(kpi);
            it = groups.emplace(kpi, std::vector<RawPoint>{}).first;
        }
        it->second.push_back(p);
    }

    std::vector<LabeledSeries> out;
    out.reserve(order.size());
    for (const auto& kpi : order) {
        auto& pts = groups[kpi];
        std::stable_sort(pts.begin(), pts.end(),
                         [](const RawPoint& a, const RawPoint& b) { return a.t < b.t; });
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (pts[i].t == pts[i - 1].t) {
                throw DataError("duplicate timestamp " + std::to_string(pts[i].t) +
                                " within KPI " + kpi);
            }
        }
        LabeledSeries s;
        s.kpi_id = kpi;
        s.series.timestamps.reserve(pts.size());
        s.series.values.reserve(pts.size());
        s.labels.reserve(pts.size());
        for (const auto& p : pts) {
            s.series.timestamps.push_back(p.t);
            s.series.values.push_back(p.v);
            s.labels.push_back(p.label);
        }
        if (pts.size() >= 2) {
            s.series.granularity = infer_granularity(s.series.timestamps);
        } else {
            s.series.granularity = 1;
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSeries> parse_kpi_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return parse_kpi_csv(in);
}

void write_kpi_csv(std::ostream& out, const std::vector<LabeledSeries>& dataset) {
    out << kHeader << "\n";
    char buf[64];
    for (const auto& s : dataset) {
        for (std::size_t i = 0; i < s.series.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.series.values[i]);
            out << s.series.timestamps[i] << ',' << buf << ',' << int(s.labels[i]) << ','
                << s.kpi_id << "\n";
        }
    }
}

std::string series_to_json(const LabeledSeries& s) {
    nlohmann::ordered_json j;
    j["kpi_id"] = s.kpi_id;
    j["granularity_s"] = s.series.granularity;
    auto points = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.series.size(); ++i) {
        points.push_back({s.series.timestamps[i], s.series.values[i], int(s.labels[i])});
    }
    j["points"] = std::move(points);
    return j.dump();
}

LabeledSeries series_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad series JSON: ") + e.what());
    }
    LabeledSeries s;
    try {
        s.kpi_id = j.at("kpi_id").get<std::string>();
        s.series.granularity = j.at("granularity_s").get<std::int64_t>();
        for (const auto& p : j.at("points")) {
            s.series.timestamps.push_back(p.at(0).get<std::int64_t>());
            s.series.values.push_back(p.at(1).get<double>());
            s.labels.push_back(p.size() > 2 ? p.at(2).get<std::uint8_t>() : 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad series JSON: ") + e.what());
    }
    s.validate();
    return s;
}

std::vector<LabeledSeries> load_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    // Peek past whitespace to dispatch on format.
    char c = 0;
    while (in.get(c) && (c == ' ' || c == '\n' || c == '\t' || c == '\r')) {
    }
    in.seekg(0);
    if (c == '{') {
        std::ostringstream buf;
        buf << in.rdbuf();
        return {series_from_json(buf.str())};
    }
    return parse_kpi_csv(in);
}

}  // namespace stsad
