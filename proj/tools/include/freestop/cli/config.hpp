#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "freestop/problem.hpp"

namespace freestop::cli {

/// Parses a JSON configuration file. Measure files are resolved relative to
/// the directory of `path`. Every problem found (missing keys, type
/// mismatches, unknown keys, unreadable measure files, off-grid measure
/// rows, CFL, support in the box, ...) is collected and thrown together as a
/// single ConfigError, one line per problem prefixed with its key path.
ProblemConfig parse_config(const std::filesystem::path& path);

/// Same as parse_config for an in-memory document.
ProblemConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace freestop::cli
