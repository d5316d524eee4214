#pragma once

#include <optional>
#include <string>
#include <vector>

namespace numsmooth {

// One CSV output row of the experiment runner. Optional fields serialize as
// empty cells.
struct ResultRow {
    std::string experiment;
    std::string method;
    std::string param;
    double estimate = 0.0;
    std::optional<double> reference;
    std::optional<double> rel_error;
    std::optional<double> evals;
    std::optional<double> wall_s;
    std::optional<double> stat_err;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> kurtosis_finest;

    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvVersionComment = "# numsmooth-results v1";
inline constexpr const char* kCsvHeader =
    "experiment,method,param,estimate,reference,rel_error,evals,wall_s,stat_err,alpha,beta,gamma,"
    "kurtosis_L";

std::string to_csv_line(const ResultRow& row);
ResultRow from_csv_line(const std::string& line);

void write_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(const std::string& path);

} // namespace numsmooth
