#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hurricane/search_engine.hpp"
#include "hurricane/serialization.hpp"

namespace hurricane::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 runtime error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class ReportFormat { Text, Markdown, Csv };

ReportFormat parse_report_format(const std::string& name);
std::string render_report(const SearchReport& report, ReportFormat format);

/// Hash of an artifact document with its manifest's timestamp and hash removed.
std::string manifest_hash(const Json& document);

}  // namespace hurricane::cli
