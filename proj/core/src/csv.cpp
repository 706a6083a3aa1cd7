#include "cgp/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "cgp/error.hpp"

namespace cgp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void malformed(const std::string& source, std::size_t line, const std::string& msg) {
  fail(ErrorCode::kMalformedInput, source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split(view);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) malformed(source, lineno, "empty column name in header");
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      malformed(source, lineno, "expected " + std::to_string(table.header.size()) +
                                    " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      double v = 0.0;
      const char* first = f.data();
      if (!f.empty() && f.front() == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        malformed(source, lineno, "column '" + table.header[c] + "': cannot parse '" +
                                      std::string(f) + "' as a number");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) malformed(source, lineno == 0 ? 1 : lineno, "missing header row");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_csv(in, path);
}

Dataset dataset_from_table(const CsvTable& table, const std::string& source) {
  const std::size_t cols = table.header.size();
  if (cols < 2 || table.header.back() != "y") {
    malformed(source, 1, "header must list feature columns followed by a column named 'y'");
  }
  if (table.rows.empty()) malformed(source, 2, "no data rows");
  Dataset d;
  const auto n = static_cast<Index>(table.rows.size());
  const auto dim = static_cast<Index>(cols - 1);
  d.x.resize(n, dim);
  d.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < dim; ++l) d.x(i, l) = table.rows[i][l];
    d.y[i] = table.rows[i][dim];
  }
  return d;
}

Dataset read_dataset(const std::string& path) { return dataset_from_table(read_csv(path), path); }

Points inputs_from_table(const CsvTable& table, Index dim, const std::string& source) {
  const auto cols = static_cast<Index>(table.header.size());
  const bool trailing_y = cols == dim + 1 && table.header.back() == "y";
  if (cols != dim && !trailing_y) {
    fail(ErrorCode::kDimensionMismatch, source + ": expected " + std::to_string(dim) +
                                            " feature columns, found " + std::to_string(cols));
  }
  Points x(static_cast<Index>(table.rows.size()), dim);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < dim; ++l) x(i, l) = table.rows[i][l];
  }
  return x;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Index l = 0; l < data.dim(); ++l) out << 'x' << (l + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index l = 0; l < data.dim(); ++l) out << format_double(data.x(i, l)) << ',';
    out << format_double(data.y[i]) << '\n';
  }
}

}  // namespace cgp
