#pragma once

#include <fstream>
#include <string>
#include <vector>

// CSV writer with RFC-4180-style quoting; numbers are printed with %.17g so
// re-runs are byte-identical and round-trip exactly.

namespace satlab {

std::string csv_number(double v);
std::string csv_quote(const std::string& field);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& fields);
  // convenience: strings pass through quoting, doubles through csv_number
  struct Cell {
    std::string text;
    Cell(const char* s) : text(csv_quote(s)) {}
    Cell(const std::string& s) : text(csv_quote(s)) {}
    Cell(double v) : text(csv_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
  };
  void cells(const std::vector<Cell>& fields);

 private:
  std::ofstream out_;
};

}  // namespace satlab

#include "satlab/grid.hpp"

namespace satlab {

// node-indexed field dump: node, coordinates, one column per named field
void export_field_csv(const std::string& path, const DiscreteManifold& m,
                      const std::vector<std::string>& names,
                      const std::vector<const ScalarField*>& fields);

}  // namespace satlab
