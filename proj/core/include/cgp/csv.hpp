#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cgp/dataset.hpp"

namespace cgp {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Comma-separated, header row required, '.' decimal separator. Errors are
/// kMalformedInput with the offending line number.
CsvTable parse_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);

/// Feature columns followed by a final column named `y`.
Dataset dataset_from_table(const CsvTable& table, const std::string& source = "<input>");
Dataset read_dataset(const std::string& path);

/// Feature matrix with `dim` columns; a trailing `y` column is ignored.
Points inputs_from_table(const CsvTable& table, Index dim, const std::string& source = "<input>");

/// Shortest-to-17-significant-digit decimal that reads back to the same double.
std::string format_double(double v);

void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace cgp
