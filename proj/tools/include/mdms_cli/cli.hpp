#pragma once

#include "mdms/mdms.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mdms::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInfeasible = 3 };

// Runs one command line (args excludes the program name). Regular output
// goes to out unless a path flag redirects it; diagnostics go to err.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Number formats shared by the writers.
std::string format_significant(double v, int digits = 9);
std::string format_fixed(double v, int decimals = 9);
// Shortest text that parses back to the same double.
std::string format_roundtrip(double v);

void write_profile_csv(std::ostream &os, const LowerBoundMatrixProfile &profile);
void write_motifs_csv(std::ostream &os, const std::vector<MotifPair> &motifs);

// Rewrites the value field of every record of `text` with the matching entry
// of `series` (empty when missing), keeping a header line and any other
// fields as they were.
std::string rewrite_values(const std::string &text, const MissingValueSeries &series,
                           const CsvFormat &format);

} // namespace mdms::cli
