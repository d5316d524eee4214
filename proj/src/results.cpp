#include "numsmooth/results.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace numsmooth {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_opt(std::string& out, const std::optional<double>& v) {
    out.push_back(',');
    if (v) out += format_double(*v);
}

std::optional<double> parse_opt(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return std::stod(field);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string to_csv_line(const ResultRow& row) {
    std::string out = row.experiment + "," + row.method + "," + row.param + "," +
                      format_double(row.estimate);
    append_opt(out, row.reference);
    append_opt(out, row.rel_error);
    append_opt(out, row.evals);
    append_opt(out, row.wall_s);
    append_opt(out, row.stat_err);
    append_opt(out, row.alpha);
    append_opt(out, row.beta);
    append_opt(out, row.gamma);
    append_opt(out, row.kurtosis_finest);
    return out;
}

ResultRow from_csv_line(const std::string& line) {
    const auto f = split_fields(line);
    if (f.size() != 13) throw std::invalid_argument("result row: expected 13 fields");
    ResultRow row;
    row.experiment = f[0];
    row.method = f[1];
    row.param = f[2];
    row.estimate = std::stod(f[3]);
    row.reference = parse_opt(f[4]);
    row.rel_error = parse_opt(f[5]);
    row.evals = parse_opt(f[6]);
    row.wall_s = parse_opt(f[7]);
    row.stat_err = parse_opt(f[8]);
    row.alpha = parse_opt(f[9]);
    row.beta = parse_opt(f[10]);
    row.gamma = parse_opt(f[11]);
    row.kurtosis_finest = parse_opt(f[12]);
    return row;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << kCsvVersionComment << "\n" << kCsvHeader << "\n";
    for (const auto& row : rows) out << to_csv_line(row) << "\n";
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("experiment,", 0) == 0) continue;
        rows.push_back(from_csv_line(line));
    }
    return rows;
}

} // namespace numsmooth
