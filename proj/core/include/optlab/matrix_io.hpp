#pragma once

#include <string>

#include "optlab/types.hpp"

namespace optlab {

// Plain-text dump: first line "rows cols", then row-major "re,im" pairs
// separated by spaces, one row per line.
void save_matrix(const CMat& m, const std::string& path);
CMat load_matrix(const std::string& path);

std::string matrix_to_string(const CMat& m);
CMat matrix_from_string(const std::string& text);

}  // namespace optlab
