#pragma once

// CSV ingestion and emission for functional datasets.
//
// Data file (long format): subject_id,predictor_id,grid_point,value
// Response file:           subject_id,y
// Functional file (x):     predictor_id,grid_point,value
//
// Columns may appear in any order; extra columns are ignored. Every
// (subject, predictor) pair must be observed on the same grid.

#include "frr/design.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace frr {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;  ///< 1-based source line of each row

  /// Index of `name` in the header; throws ValidationError naming the column.
  std::size_t column(std::string_view name, std::string_view source) const;
};

/// RFC 4180 style: comma separated, optional double quotes, header required.
CsvTable parse_csv(std::string_view text, std::string_view source);

struct LabeledDataset {
  FunctionalDataset data;
  std::vector<std::string> subject_ids;
  std::vector<std::string> predictor_ids;
};

LabeledDataset parse_dataset(std::string_view data_csv, std::string_view response_csv,
                             std::string_view data_source = "data", std::string_view response_source = "response");
LabeledDataset load_dataset(const std::string& data_path, const std::string& response_path);

/// p x M matrix of x_j on `grid`; predictors absent from the file are zero.
Matrix parse_functional(std::string_view csv, const std::vector<std::string>& predictor_ids,
                        const std::vector<double>& grid, std::string_view source = "x");

struct DatasetCsv {
  std::string data;
  std::string response;
};

DatasetCsv format_dataset(const LabeledDataset& ds);

/// Shortest text with 17 significant digits ("%.17g").
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view context);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace frr
