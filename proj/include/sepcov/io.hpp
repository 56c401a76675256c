#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepcov/bootstrap.hpp"
#include "sepcov/covariance.hpp"
#include "sepcov/simulate.hpp"

namespace sepcov {

enum class SampleFormat { Csv, Bin };

// .csv -> Csv, anything else -> Bin
SampleFormat format_from_path(const std::string& path);

// CSV layout:
//   S,T,N
//   spatial coordinates (S values)
//   temporal coordinates (T values)
//   N lines of S*T values, row-major (s * T + t)
// BIN layout: "FDS1", u64 S, u64 T, u64 N (little endian), then S + T + N*S*T
// IEEE doubles in the same order.
FunctionalSample read_sample(std::istream& in, SampleFormat format);
FunctionalSample read_sample(const std::string& path, SampleFormat format);
FunctionalSample read_sample(const std::string& path);
void write_sample(std::ostream& out, const FunctionalSample& sample, SampleFormat format);
void write_sample(const std::string& path, const FunctionalSample& sample, SampleFormat format);

// Every report carries the same key set; `wall_time_s` is the only
// run-dependent field.
nlohmann::json report_to_json(const TestReport& report);
nlohmann::json experiment_to_json(const ExperimentResult& result);

// Columns: S,N,c,rejection_rate,runs,r,l,seed
void write_table_header(std::ostream& out);
void write_table_row(std::ostream& out, const ExperimentResult& result);

}  // namespace sepcov
