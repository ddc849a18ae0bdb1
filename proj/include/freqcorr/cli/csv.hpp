#pragma once

// Fringe data files.
//
//   # any number of comment lines; "# kind = counts|normalized" sets the
//   # weighting, other "# key = value" lines are kept as metadata
//   theta_deg,counts[,counts_err]
//   0,1021
//   ...

#include <string>
#include <utility>
#include <vector>

#include "freqcorr/fringe.hpp"

namespace freqcorr::cli
{

inline constexpr std::size_t kMinFringeRows = 8;

struct FringeTable
{
    std::vector<double> theta_deg;
    std::vector<double> counts;
    std::vector<double> counts_err; // empty when the column is absent
    fringe::CountKind kind = fringe::CountKind::poisson_counts;
    std::vector<std::pair<std::string, std::string>> metadata; // from comments

    fringe::FringeScan to_scan() const;
};

/// Throws InputError naming the offending line, IoError if unreadable.
FringeTable read_fringe_csv(const std::string& path);
FringeTable parse_fringe_csv(const std::string& text);

/// Throws IoError if the file cannot be written.
void write_fringe_csv(const std::string& path, const FringeTable& table,
                      const std::vector<std::string>& comments);
std::string format_fringe_csv(const FringeTable& table, const std::vector<std::string>& comments);

/// Writes text to path, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

/// Shortest decimal that round-trips.
std::string format_number(double v);

} // namespace freqcorr::cli
