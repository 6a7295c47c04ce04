// src/harness/report.cpp
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ariadne/harness.hpp"
#include "ariadne/raster.hpp"

namespace ariadne::harness {
namespace {

using MetricMap = std::map<std::string, double>;

struct MetricsFile {
    std::string run_id;
    MetricMap values;
};

MetricsFile read_metrics(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const auto where = path.string();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(where + ": invalid JSON", e.byte);
    }
    if (!j.is_object()) throw DataError(where + ": metrics file must be a JSON object");
    MetricsFile out;
    const auto m = j.find("meta");
    if (m == j.end() || !m->is_object() || !m->contains("run_id") || !(*m)["run_id"].is_string())
        throw DataError(where + ": missing meta.run_id");
    out.run_id = (*m)["run_id"].get<std::string>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "meta") continue;
        if (!it->is_number()) throw DataError(where + ": metric `" + it.key() + "` is not a number");
        out.values[it.key()] = it->get<double>();
    }
    return out;
}

// Shortest text that reads back to the same double.
std::string number_text(double v) { return nlohmann::json(v).dump(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace

std::vector<ReportRow> merge_metrics(const std::vector<std::filesystem::path>& files) {
    if (files.empty()) throw ConfigError("report: at least one metrics file is required");
    std::map<std::string, std::pair<MetricMap, std::filesystem::path>> runs;
    for (const auto& f : files) {
        auto m = read_metrics(f);
        auto [it, fresh] = runs.try_emplace(m.run_id, m.values, f);
        if (!fresh && it->second.first != m.values)
            throw DataError("report: run id `" + m.run_id + "` appears in " + it->second.second.string() + " and " +
                            f.string() + " with different metrics");
    }
    std::vector<ReportRow> rows;
    for (const auto& [id, run] : runs)
        for (const auto& [metric, value] : run.first) rows.push_back({metric, id, value});
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return a.metric != b.metric ? a.metric < b.metric : a.run_id < b.run_id;
    });
    return rows;
}

void write_report(const std::vector<ReportRow>& rows, const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw DataError(out.string() + ": cannot create directory: " + ec.message());
    std::ostringstream csv, md;
    csv << "metric,run_id,value\n";
    md << "| metric | run | value |\n|---|---|---|\n";
    for (const auto& r : rows) {
        csv << r.metric << ',' << r.run_id << ',' << number_text(r.value) << '\n';
        md << "| " << r.metric << " | " << r.run_id << " | " << number_text(r.value) << " |\n";
    }
    write_text(out / "report.csv", csv.str());
    write_text(out / "report.md", md.str());
}

std::vector<ReportRow> cmd_report(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out) {
    auto rows = merge_metrics(files);
    write_report(rows, out);
    return rows;
}

}  // namespace ariadne::harness
