#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "indicator_value.hpp"

namespace resilience {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

struct Artifact {
    std::string name;   // "main", "samples", "trace"
    std::string media;  // "text/csv" or "application/json"
    std::string content;
};

struct Report {
    bool success = true;
    std::vector<Artifact> artifacts;
    json summary;
};

// Long-format table rendered as CSV or JSON. Cells are JSON scalars: numbers, strings or null.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    std::string to_csv(const json& config) const;
    json to_json() const;
};

// Number cell: finite doubles stay numeric, +-inf become "inf"/"-inf", NaN becomes null.
json number_cell(double v);
json indicator_cell(const IndicatorValue& v);

std::string csv_header(const json& config);

// Main or auxiliary artifact in the configured format.
Artifact render_table(const Table& t, const json& config, const std::string& name = "main");

// Fills defaults and rejects unknown keys or inconsistent settings; throws ConfigError
// carrying the key path.
json validate_config(const json& config);

// Validates and executes one command.
Report run(const json& config);

const std::vector<std::string>& indicator_names();

}  // namespace resilience
