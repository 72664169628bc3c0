#include "rmdyn/record_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace rmdyn {

void ExperimentRecord::set(const std::string& key, SummaryValue value) {
    for (auto& [k, v] : summary)
        if (k == key) {
            v = std::move(value);
            return;
        }
    summary.emplace_back(key, std::move(value));
}

const SummaryValue* ExperimentRecord::find(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return &v;
    return nullptr;
}

double ExperimentRecord::real(const std::string& key) const {
    const SummaryValue* v = find(key);
    if (!v) return std::nan("");
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    if (const auto* b = std::get_if<bool>(v)) return *b ? 1.0 : 0.0;
    return std::nan("");
}

void ExperimentRecord::set_series(const std::string& key, std::vector<double> values) {
    for (auto& [k, v] : series)
        if (k == key) {
            v = std::move(values);
            return;
        }
    series.emplace_back(key, std::move(values));
}

const std::vector<double>* ExperimentRecord::find_series(const std::string& key) const {
    for (const auto& [k, v] : series)
        if (k == key) return &v;
    return nullptr;
}

namespace {

using json = nlohmann::ordered_json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json array(const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string summary_json(const ExperimentRecord& record) {
    json j;
    j["kind"] = record.kind;
    j["seed"] = record.seed;
    for (const auto& [k, v] : record.summary) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, double>) j[k] = number(x);
                else if constexpr (std::is_same_v<T, std::vector<double>>) j[k] = array(x);
                else j[k] = x;
            },
            v);
    }
    json s = json::object();
    for (const auto& [k, v] : record.series) s[k] = array(v);
    j["series"] = s;
    j["notes"] = record.notes;
    return j.dump(2) + "\n";
}

std::string trials_csv(const ExperimentRecord& record) {
    std::string out;
    for (std::size_t c = 0; c < record.columns.size(); ++c)
        out += (c ? "," : "") + record.columns[c].name;
    out += "\n";
    char buf[64];
    for (const auto& row : record.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            const double v = row[c];
            if (!std::isfinite(v))
                out += std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
            else if (c < record.columns.size() && record.columns[c].integer)
                out += std::to_string(std::llround(v));
            else {
                std::snprintf(buf, sizeof buf, "%.17e", v);
                out += buf;
            }
        }
        out += "\n";
    }
    return out;
}

void write_record(const ExperimentRecord& record, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    const fs::path base(dir);
    write_file(base / "summary.json", summary_json(record));
    write_file(base / "trials.csv", trials_csv(record));
    write_file(base / "config.snapshot", record.config_snapshot);
}

}  // namespace rmdyn
