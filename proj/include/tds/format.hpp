#pragma once

#include <string>
#include <vector>

#include "tds/types.hpp"

namespace tds {

/// Shortest decimal string that parses back to x exactly, capped at 12
/// significant digits ("inf"/"-inf"/"nan" for non-finite values).
std::string format_float(double x);

/// x rounded through its formatted form, so serialized numbers are stable.
double round_trip_12(double x);

/// Writes a CSV table: header row, then one row per matrix row, every cell
/// through format_float.
void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& data);

struct CsvTable {
    std::vector<std::string> header;
    Mat data;
};

CsvTable read_csv(const std::string& path);

}  // namespace tds
