#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "etmc/certify.hpp"
#include "etmc/config.hpp"

namespace etmc {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

nlohmann::json report_to_json(const CertificationReport& rep);
std::string report_summary(const CertificationReport& rep);

/// CSV file whose first line is "# config_hash=<hash>".
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& columns);
    CsvWriter& cell(double v);
    CsvWriter& cell(long v);
    CsvWriter& cell(const std::string& v);
    void end_row();

private:
    std::ofstream out_;
    bool first_ = true;
};

/// Reads the config hash from the first line of a CSV written by CsvWriter.
std::string csv_config_hash(const std::filesystem::path& path);

/**
 * @brief Claims an output directory for one config.
 *
 * Creates the directory if needed. Throws ConfigError when it already holds
 * a manifest or CSV files tagged with a different config hash.
 */
void claim_output_dir(const std::filesystem::path& dir, const std::string& hash);

void write_manifest(const std::filesystem::path& dir, const RunConfig& cfg, const nlohmann::json& extra);

}  // namespace etmc
