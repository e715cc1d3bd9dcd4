#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ordbayes {

/// Command-line entry point. Subcommands: ingest, explore, fit-mrf,
/// fit-grm, simulate, report. Exit codes: 0 success, 1 usage error,
/// 2 data error, 3 numerical failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

/// Merge one network run and/or one graded-response run over the same item
/// set into a single comparative document. Throws DataError when the item
/// sets differ (naming the symmetric difference) or when a directory holds
/// no reportable manifest.
nlohmann::json consolidate_report(
    const std::vector<std::filesystem::path>& run_dirs);

std::string render_report_text(const nlohmann::json& report);

} // namespace ordbayes
