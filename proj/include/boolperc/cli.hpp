// Experiment runner behind the boolperc executable.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boolperc/config.hpp"
#include "boolperc/stats.hpp"

namespace boolperc {

inline constexpr const char* kArtifactVersion = "0.1.0";

extern const std::vector<std::string> kCsvColumns;

// One line of the results CSV. Empty optional fields are written as blanks.
struct ResultRow {
    std::string run_id;
    std::string op;
    int d = 2;
    std::string measure;
    std::optional<double> delta, lambda, n, N, rho, scale;
    Estimate est;
    std::int64_t wall_ms = 0;
};

std::string format_rows(const std::vector<ResultRow>& rows);
// Header plus rows; throws SchemaMismatch on a foreign header.
std::vector<ResultRow> parse_rows(const std::string& csv);

// Rows agreeing on (op, d, measure, delta, lambda, n, N, rho, scale) are
// pooled through count / sum / sum of squares; the result does not depend
// on input order.
std::vector<ResultRow> merge_rows(const std::vector<std::vector<ResultRow>>& inputs);

// Write via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& content);

// Full command line entry point; returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace boolperc
