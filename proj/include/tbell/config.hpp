#pragma once

#include <map>
#include <string>
#include <string_view>

#include "tbell/engine.hpp"
#include "tbell/search.hpp"

namespace tbell {

enum class ReportFormat { tabular, structured };

std::string_view format_name(ReportFormat f);
ReportFormat parse_format(std::string_view text);

/// Everything a CLI invocation needs. Defaults reproduce the sqrt(2)
/// configuration of lhs16: free quantum runs, 10^6 runs, seed 42.
struct ExperimentConfig {
    ProtocolConfig protocol = default_protocol();
    SearchConfig search;
    /// Spacing of the grid oracle run by `optimize`, radians.
    double grid_resolution = 0.017453292519943295;
    /// First local search starts at reference_configuration(objective).
    bool from_reference_point = false;
    double significance = kDefaultSignificance;
    ReportFormat format = ReportFormat::tabular;
    std::string out_dir;
    bool log_runs = false;

    static ProtocolConfig default_protocol();
    bool operator==(const ExperimentConfig&) const = default;
};

/// Raw `key = value` document. Keys are validated against the known set on
/// insertion; a direction given as angles replaces one given as xyz (and
/// vice versa).
class ConfigDocument {
public:
    static ConfigDocument parse(std::string_view text);
    static ConfigDocument load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Throws tbell::Error (parse or invalid_argument) on bad values or
/// contradictory keys.
ExperimentConfig build_config(const ConfigDocument& doc);

ExperimentConfig parse_config(std::string_view text);

/// Canonical document listing every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical document with presentation-only
/// fields (workers, format, output) reset, so it identifies the experiment.
std::string config_digest(const ExperimentConfig& config);

}  // namespace tbell
