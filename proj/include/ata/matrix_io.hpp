#pragma once

// ATAM binary matrix files: "ATAM", then little-endian u64 rows, cols and
// scalar width (4 or 8), then the scalars row-major and little-endian.

#include <iosfwd>
#include <string>
#include <variant>

#include "ata/matrix.hpp"

namespace ata {

using AnyMatrix = std::variant<Matrix<float>, Matrix<double>>;

void write_matrix(std::ostream& out, ConstView<float> m);
void write_matrix(std::ostream& out, ConstView<double> m);
AnyMatrix read_matrix(std::istream& in);

void save_matrix(const std::string& path, const AnyMatrix& m);
AnyMatrix load_matrix(const std::string& path);

}  // namespace ata
