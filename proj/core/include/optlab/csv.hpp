#pragma once

#include <string>
#include <vector>

#include "optlab/harness.hpp"

namespace optlab {

// Fixed header: scheme,variable,value,seed,metric,iterations,coverage,episode,failed,error
// Empty cells round-trip to absent optionals.
void emit_csv(const std::vector<ExperimentRecord>& records, const std::string& path);
std::vector<ExperimentRecord> load_csv(const std::string& path);

// Per (scheme, value) aggregation: scheme,variable,value,mean,stderr,count.
void emit_plot_data(const std::vector<ExperimentRecord>& records, const std::string& path);

std::string to_csv_string(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> from_csv_string(const std::string& text);

}  // namespace optlab
