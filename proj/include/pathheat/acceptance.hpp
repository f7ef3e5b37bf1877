#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace pathheat {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string summary;
    // Deterministic numbers behind the verdict.
    nlohmann::json payload;
    double seconds = 0;
};

struct AcceptanceOptions {
    // desk: the documented sizes; quick: reduced sizes for smoke runs.
    std::string profile = "desk";
    std::uint64_t seed = 0;
    // Criteria to run; empty runs 1..11.
    std::vector<int> only;
    // Thread count for the main pass; criterion 11 reruns at another count.
    int threads = 0;
    std::ostream* log = nullptr;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

// Verdicts and payloads without timings.
nlohmann::json acceptance_payload(const std::vector<CriterionResult>& results);

// "PASS  3  title  summary" lines.
std::string format_result_line(const CriterionResult& r);

}  // namespace pathheat
