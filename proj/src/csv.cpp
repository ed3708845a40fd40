#include "satlab/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace satlab {

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open CSV output: " + path);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::cells(const std::vector<Cell>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i].text;
  }
  out_ << '\n';
}

void export_field_csv(const std::string& path, const DiscreteManifold& m,
                      const std::vector<std::string>& names,
                      const std::vector<const ScalarField*>& fields) {
  if (names.size() != fields.size()) {
    throw std::invalid_argument("field export: name/field count mismatch");
  }
  CsvWriter csv(path);
  std::vector<std::string> header{"node"};
  for (int k = 0; k < m.dim; ++k) header.push_back("x" + std::to_string(k));
  for (const auto& n : names) header.push_back(csv_quote(n));
  csv.row(header);
  for (std::size_t p = 0; p < m.node_count(); ++p) {
    std::vector<std::string> row{std::to_string(p)};
    Eigen::VectorXd x = m.coords(p);
    for (int k = 0; k < m.dim; ++k) row.push_back(csv_number(x[k]));
    for (const auto* f : fields) row.push_back(csv_number((*f)[p]));
    csv.row(row);
  }
}

}  // namespace satlab
