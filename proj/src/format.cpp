#include "tds/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tds {

std::string format_float(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 12; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

double round_trip_12(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format_float(x).c_str(), nullptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& data) {
    if (static_cast<long>(header.size()) != data.cols())
        throw ModelError("CSV header width does not match the data");
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write file '" + path + "'");
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (long r = 0; r < data.rows(); ++r) {
        for (long c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            out << format_float(data(r, c));
        }
        out << '\n';
    }
    if (!out) throw ModelError("write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot read file '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ModelError("empty CSV file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw ModelError("non-numeric CSV cell '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.header.size())
            throw ModelError("ragged CSV row in '" + path + "'");
        rows.push_back(std::move(row));
    }
    t.data = Mat(static_cast<long>(rows.size()), static_cast<long>(t.header.size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c)
            t.data(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    return t;
}

}  // namespace tds
