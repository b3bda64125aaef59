#pragma once

// Comma-separated sample files: a header row naming the columns, then one
// row per observation. Cells are plain decimal reals with '.' as the decimal
// point. Columns not asked for are ignored. Where a command reads two
// columns of different lengths, blank cells are skipped.

#include <istream>
#include <string>
#include <vector>

namespace concert::cli {

struct SampleSet {
  std::string label;  // "<source>:<column>"
  std::vector<double> values;
};

/// One SampleSet per requested column, in the order requested. Throws
/// ParseError (with 1-based data row and column name where applicable) for a
/// missing column, a malformed cell or a file with no data rows.
std::vector<SampleSet> parse_samples(std::istream& in, const std::vector<std::string>& columns,
                                     const std::string& source, bool allow_blank = false);

std::vector<SampleSet> ingest_samples(const std::string& path,
                                      const std::vector<std::string>& columns,
                                      bool allow_blank = false);

}  // namespace concert::cli
