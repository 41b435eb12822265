#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sweep/pl_path.hpp"

namespace sweep {

// CSV layout: header "t,v0,...,v{d-1}", one row per node, 17 significant
// digits so round-trips are bit-faithful.
void write_path_csv(const PLPath& path, std::ostream& out);
PLPath read_path_csv(std::istream& in);

// File variants write to a temporary in the target directory and rename,
// so readers never observe partial files.
void write_path_csv_file(const PLPath& path, const std::filesystem::path& file);
PLPath read_path_csv_file(const std::filesystem::path& file);

// Atomic text write used by every report producer.
void write_text_file_atomic(const std::filesystem::path& file, const std::string& content);

}  // namespace sweep
