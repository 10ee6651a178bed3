#include "qkf/dataset_io.hpp"

#include "qkf/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

namespace qkf {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t row, const std::string& what) {
  throw Error(ErrorCode::Parse, "row " + std::to_string(row) + ": " + what);
}

double parse_number(std::string_view cell, std::size_t row, std::string_view column) {
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last)
    parse_fail(row, "column " + std::string(column) + " is not numeric: '" +
                        std::string(cell) + "'");
  return v;
}

long long parse_integer(std::string_view cell, std::size_t row, std::string_view column) {
  long long v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    parse_fail(row, "column " + std::string(column) + " is not an integer: '" +
                        std::string(cell) + "'");
  return v;
}

// Reads the header and checks it against `expected`, reporting the first
// missing column by name.
void check_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line).empty())
    throw Error(ErrorCode::EmptyDataset, "input is empty");
  const auto got = split_row(trim_cr(line));
  const auto want = split_row(expected);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size() || got[i] != want[i])
      parse_fail(1, "missing or misplaced column '" + std::string(want[i]) +
                        "' (expected header: " + std::string(expected) + ")");
  }
  if (got.size() != want.size())
    parse_fail(1, "unexpected extra columns (expected header: " + std::string(expected) + ")");
}

// Groups rows by path id in order of first appearance; the increment column
// must strictly increase within each path.
template <typename Row>
struct PathGroups {
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> rows;
  std::map<std::string, long long> last_increment;

  void add(const std::string& id, long long increment, Row row, std::size_t line) {
    auto it = last_increment.find(id);
    if (it == last_increment.end()) {
      order.push_back(id);
    } else if (increment <= it->second) {
      parse_fail(line, "non-monotone increment index for path " + id);
    }
    last_increment[id] = increment;
    rows[id].push_back(std::move(row));
  }
};

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  return in;
}

}  // namespace

std::vector<LoadPath> read_paths_csv(std::istream& in) {
  static constexpr std::string_view cols[] = {"eps11", "eps22", "gam12",
                                              "sig11", "sig22", "sig12"};
  check_header(in, kPathsHeader);
  PathGroups<HomogenizedIncrement> groups;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cells = split_row(text);
    if (cells.size() != 8) parse_fail(row, "expected 8 columns");
    if (cells[0].empty()) parse_fail(row, "empty path_id");
    const auto increment = parse_integer(cells[1], row, "increment");
    HomogenizedIncrement inc;
    for (int c = 0; c < 3; ++c) {
      inc.eps[c] = parse_number(cells[2 + c], row, cols[c]);
      inc.sig[c] = parse_number(cells[5 + c], row, cols[3 + c]);
    }
    groups.add(std::string(cells[0]), increment, inc, row);
  }
  if (groups.order.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");

  std::vector<LoadPath> paths;
  for (const auto& id : groups.order) {
    LoadPath p{id, std::move(groups.rows[id]), std::nullopt};
    if (p.increments.size() < 2)
      throw Error(ErrorCode::Parse, "path " + id + " has fewer than 2 increments");
    paths.push_back(std::move(p));
  }
  return paths;
}

std::vector<LoadPath> read_paths_csv(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_paths_csv(in);
}

void write_paths_csv(std::ostream& out, const std::vector<LoadPath>& paths) {
  out << kPathsHeader << '\n';
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.increments.size(); ++i) {
      const auto& inc = p.increments[i];
      out << p.path_id << ',' << i;
      for (double v : inc.eps) out << ',' << format_double(v);
      for (double v : inc.sig) out << ',' << format_double(v);
      out << '\n';
    }
}

std::vector<LoadPath> read_raw_csv(std::istream& in, const PlateGeometry& geom,
                                   double eps_div) {
  static constexpr std::string_view cols[] = {"time", "U1", "U2", "U3", "U4",
                                              "F1",   "F2", "F3", "F4"};
  geom.validate();
  check_header(in, kRawHeader);
  PathGroups<RawIncrement> groups;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cells = split_row(text);
    if (cells.size() != 11) parse_fail(row, "expected 11 columns");
    if (cells[0].empty()) parse_fail(row, "empty path_id");
    const auto increment = parse_integer(cells[1], row, "increment");
    RawIncrement raw;
    raw.time = parse_number(cells[2], row, cols[0]);
    for (int k = 0; k < 4; ++k) {
      raw.u[k] = parse_number(cells[3 + k], row, cols[1 + k]);
      raw.f[k] = parse_number(cells[7 + k], row, cols[5 + k]);
    }
    groups.add(std::string(cells[0]), increment, raw, row);
  }
  if (groups.order.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");

  std::vector<LoadPath> paths;
  for (const auto& id : groups.order) {
    auto p = homogenize_path(id, groups.rows[id], geom, eps_div);
    if (p.increments.size() < 2)
      throw Error(ErrorCode::Parse, "path " + id + " has fewer than 2 increments");
    paths.push_back(std::move(p));
  }
  return paths;
}

std::vector<LoadPath> read_raw_csv(const std::filesystem::path& file,
                                   const PlateGeometry& geom, double eps_div) {
  auto in = open_input(file);
  return read_raw_csv(in, geom, eps_div);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  const bool provenance = ds.path_ids.size() == ds.samples.size() &&
                          ds.increments.size() == ds.samples.size();
  out << kDatasetHeader << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (provenance)
      out << ds.path_ids[i] << ',' << ds.increments[i];
    else
      out << "s" << i << ",0";
    for (double v : s.eps) out << ',' << format_double(v);
    out << ",,,," << s.y << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& file, const Dataset& ds) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  write_dataset_csv(out, ds);
}

Dataset read_dataset_csv(std::istream& in) {
  static constexpr std::string_view cols[] = {"eps11", "eps22", "gam12"};
  check_header(in, kDatasetHeader);
  Dataset ds;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto cells = split_row(text);
    if (cells.size() != 9) parse_fail(row, "expected 9 columns");
    LabeledSample s;
    for (int c = 0; c < 3; ++c) s.eps[c] = parse_number(cells[2 + c], row, cols[c]);
    const auto label = parse_integer(cells[8], row, "label");
    if (label != 1 && label != -1) parse_fail(row, "label must be +1 or -1");
    s.y = static_cast<int>(label);
    ds.samples.push_back(s);
    ds.path_ids.emplace_back(cells[0]);
    ds.increments.push_back(
        static_cast<std::size_t>(parse_integer(cells[1], row, "increment")));
  }
  if (ds.samples.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");
  return ds;
}

Dataset read_dataset_csv(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_dataset_csv(in);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace qkf
