#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "egopt/config.hpp"
#include "egopt/driver.hpp"
#include "egopt/search_space.hpp"

namespace egopt::io {

/// Shortest round-trip decimal formatting (and strict parsing) for every
/// number that crosses a file boundary.
std::string format_double(double v);
double parse_double(const std::string& text);

std::string history_header(const SearchSpace& space);
std::string history_row(const Observation& obs);

/// Writes the full history CSV (header + rows, LF endings).
void write_history_csv(std::ostream& out, const RunHistory& history, const SearchSpace& space);

/// Parses a history CSV produced by write_history_csv. Unit-cube coordinates
/// and internal responses are reconstructed from the raw values; a failed
/// status implies the imputed flag.
RunHistory parse_history_csv(std::istream& in, const SearchSpace& space,
                             bench::Direction direction);

std::string batch_record_line(const BatchRecord& record);
BatchRecord parse_batch_record_line(const std::string& line);

void write_meta_json(const std::filesystem::path& path, const RunConfig& config);
/// Throws if the file exists but does not match the config digest.
void check_meta_json(const std::filesystem::path& path, const RunConfig& config);

void write_summary_json(const std::filesystem::path& path, const RunConfig& config,
                        const RunHistory& history, const SearchSpace& space);

}  // namespace egopt::io
