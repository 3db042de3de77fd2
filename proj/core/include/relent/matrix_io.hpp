#pragma once

// Matrix file format:
//   {"dim": n, "re": [[...], ...], "im": [[...], ...]}
// rows are row-major; "im" may be omitted for real matrices. Writers emit
// every number with 17 significant digits so files round-trip exactly.

#include <string>

#include "relent/operator.hpp"

namespace relent {

HermitianOperator parse_matrix_json(const std::string& text);
HermitianOperator read_matrix_file(const std::string& path);

std::string format_matrix_json(const HermitianOperator& a);
void write_matrix_file(const std::string& path, const HermitianOperator& a);

/// %.17g rendering used by every writer.
std::string format_double(double v);

/// Reads a whole file; throws InvalidArgument naming the path on failure.
std::string read_text_file(const std::string& path);

}  // namespace relent
