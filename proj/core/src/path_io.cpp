#include "sweep/path_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "sweep/errors.hpp"

namespace sweep {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_path_csv(const PLPath& path, std::ostream& out) {
  out << "t";
  for (int j = 0; j < path.dim(); ++j) out << ",v" << j;
  out << "\n";
  for (std::size_t k = 0; k < path.grid().num_nodes(); ++k) {
    out << format_double(path.grid().node(k));
    for (int j = 0; j < path.dim(); ++j)
      out << "," << format_double(path.node_value(k)(j));
    out << "\n";
  }
}

PLPath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("path csv: empty stream");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw ConfigError("path csv: header must start with 't'");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) throw ConfigError("path csv: no value columns");
  for (int j = 0; j < dim; ++j) {
    if (header[j + 1] != "v" + std::to_string(j))
      throw ConfigError("path csv: value columns must be named v0..v{d-1}");
  }
  std::vector<double> nodes;
  std::vector<Vec> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != dim + 1)
      throw ConfigError("path csv: row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(dim + 1));
    Vec v(dim);
    for (int j = 0; j <= dim; ++j) {
      double parsed = 0.0;
      const std::string& cell = cells[j];
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), parsed);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ConfigError("path csv: row " + std::to_string(row) +
                          ": cannot parse '" + cell + "'");
      if (j == 0) nodes.push_back(parsed);
      else v(j - 1) = parsed;
    }
    values.push_back(std::move(v));
  }
  return PLPath(TimeGrid(std::move(nodes)), std::move(values));
}

void write_text_file_atomic(const std::filesystem::path& file, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  fs::create_directories(dir);
  std::random_device rd;
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), ".tmp.%08" PRIx32, rd());
  const fs::path tmp = dir / (file.filename().string() + suffix);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SolverError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw SolverError("write failed for " + tmp.string());
  }
  fs::rename(tmp, file);
}

void write_path_csv_file(const PLPath& path, const std::filesystem::path& file) {
  std::ostringstream os;
  write_path_csv(path, os);
  write_text_file_atomic(file, os.str());
}

PLPath read_path_csv_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open path csv: " + file.string());
  return read_path_csv(in);
}

}  // namespace sweep
