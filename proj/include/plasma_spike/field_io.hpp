#pragma once

#include <string>

#include "plasma_spike/semilinear_solver.hpp"

namespace plasma_spike {

/// Raw field dump: the text line "plasma-field v1 res=<R> mu=<mu>\n" followed
/// by R³ little-endian float64 values, row-major over the cube (z fastest).
void write_field(const std::string& path, const GridField& field);
GridField read_field(const std::string& path);

std::string field_header(int resolution, double mu);

}  // namespace plasma_spike
