#include "pathheat/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pathheat/errors.hpp"

#ifndef PATHHEAT_GIT_REV
#define PATHHEAT_GIT_REV "unknown"
#endif

namespace pathheat {

using nlohmann::json;

std::string version_stamp() { return std::string("pathheat 0.1.0 (") + PATHHEAT_GIT_REV + ")"; }

bool Report::passed() const {
    for (auto it = criteria.begin(); it != criteria.end(); ++it)
        if (!it.value().get<bool>()) return false;
    return true;
}

json Report::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = version_stamp();
    j["config"] = config;
    j["results"] = results;
    j["criteria"] = criteria;
    j["passed"] = passed();
    j["wall_time"] = wall_time;
    return j;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void CsvTable::add(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw ConfigError("csv row width does not match the header");
    std::vector<std::string> r;
    for (double v : row) r.push_back(format_number(v));
    rows_.push_back(std::move(r));
}

void CsvTable::add_text(const std::vector<std::string>& row) {
    if (row.size() != header_.size()) throw ConfigError("csv row width does not match the header");
    rows_.push_back(row);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < header_.size(); ++k) os << (k ? "," : "") << header_[k];
    os << '\n';
    for (const auto& r : rows_) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
        os << '\n';
    }
    return os.str();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + root_.string() + "'");
}

void OutputDir::write_text(const std::string& name, const std::string& text) {
    std::ofstream os(root_ / name);
    if (!os) throw ConfigError("cannot write '" + (root_ / name).string() + "'");
    os << text;
}

void OutputDir::write_json(const std::string& name, const json& j) {
    write_text(name, j.dump(2) + "\n");
    record(name, "json");
}

void OutputDir::write_csv(const std::string& name, const CsvTable& t) {
    write_text(name, t.str());
    record(name, "csv");
}

void OutputDir::record(const std::string& name, const std::string& kind) {
    auto path = root_ / "manifest.json";
    json m = {{"files", json::array()}};
    if (std::ifstream in(path); in) {
        try {
            m = json::parse(in);
        } catch (const json::exception&) {
        }
    }
    if (!m.contains("files") || !m["files"].is_array()) m["files"] = json::array();
    for (auto& f : m["files"])
        if (f.value("name", "") == name) return;
    m["files"].push_back({{"name", name}, {"kind", kind}});
    m["version"] = version_stamp();
    std::ofstream os(path);
    os << m.dump(2) << "\n";
}

}  // namespace pathheat
