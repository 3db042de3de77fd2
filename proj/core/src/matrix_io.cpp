#include "relent/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relent/errors.hpp"

namespace relent {

namespace {

using nlohmann::json;

RealMatrix parse_block(const json& rows, Index n, const char* field) {
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n) {
    std::ostringstream os;
    os << "matrix file: field \"" << field << "\" must be an array of " << n << " rows";
    throw InvalidArgument(os.str());
  }
  RealMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) {
      std::ostringstream os;
      os << "matrix file: row " << i << " of \"" << field << "\" must have " << n << " entries";
      throw InvalidArgument(os.str());
    }
    for (Index j = 0; j < n; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) {
        std::ostringstream os;
        os << "matrix file: entry (" << i << "," << j << ") of \"" << field << "\" is not a number";
        throw InvalidArgument(os.str());
      }
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HermitianOperator parse_matrix_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("matrix file: JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("matrix file: top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "dim" && key != "re" && key != "im") {
      throw InvalidArgument("matrix file: unknown field \"" + key + "\"");
    }
  }
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 0) {
    throw InvalidArgument("matrix file: field \"dim\" must be a nonnegative integer");
  }
  if (!doc.contains("re")) throw InvalidArgument("matrix file: missing field \"re\"");
  const Index n = doc["dim"].get<Index>();
  Matrix m = parse_block(doc["re"], n, "re").cast<Complex>();
  if (doc.contains("im")) {
    m += Complex(0.0, 1.0) * parse_block(doc["im"], n, "im").cast<Complex>();
  }
  return HermitianOperator(m);
}

HermitianOperator read_matrix_file(const std::string& path) {
  try {
    return parse_matrix_json(read_text_file(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

std::string format_matrix_json(const HermitianOperator& a) {
  const Index n = a.dim();
  auto block = [&](bool imag) {
    std::string out = "[";
    for (Index i = 0; i < n; ++i) {
      out += i ? ",\n  [" : "\n  [";
      for (Index j = 0; j < n; ++j) {
        if (j) out += ", ";
        out += format_double(imag ? a.matrix()(i, j).imag() : a.matrix()(i, j).real());
      }
      out += "]";
    }
    out += n ? "\n ]" : "]";
    return out;
  };
  std::string out = "{\"dim\": " + std::to_string(n) + ",\n \"re\": " + block(false);
  if (!a.is_real()) out += ",\n \"im\": " + block(true);
  out += "}\n";
  return out;
}

void write_matrix_file(const std::string& path, const HermitianOperator& a) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write file: " + path);
  out << format_matrix_json(a);
}

}  // namespace relent
