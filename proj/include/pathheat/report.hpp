#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pathheat {

// Version string with the git revision the build was configured from.
std::string version_stamp();

struct Report {
    std::string command;
    nlohmann::json config;
    // Deterministic part: identical for identical config and seed.
    nlohmann::json results = nlohmann::json::object();
    // Per-criterion pass flags, keyed by name.
    nlohmann::json criteria = nlohmann::json::object();
    double wall_time = 0;

    bool passed() const;
    nlohmann::json to_json() const;
};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(const std::vector<double>& row);
    // Mixed rows: strings are written verbatim.
    void add_text(const std::vector<std::string>& row);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// 17 significant digits.
std::string format_number(double v);

// Output directory with a manifest.json listing every file written.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root);
    void write_json(const std::string& name, const nlohmann::json& j);
    void write_csv(const std::string& name, const CsvTable& t);
    void write_text(const std::string& name, const std::string& text);
    const std::filesystem::path& root() const { return root_; }

private:
    void record(const std::string& name, const std::string& kind);
    std::filesystem::path root_;
};

}  // namespace pathheat
