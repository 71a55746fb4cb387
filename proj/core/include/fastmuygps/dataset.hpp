#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace fastmuygps {

/// Training data with responses detrended to zero mean. mean_offset is the
/// subtracted mean; prediction paths add it back when reporting.
struct TrainingSet {
  Eigen::MatrixXd X;  // n x d features
  Eigen::VectorXd Y;  // length n, detrended responses
  double mean_offset = 0.0;
};

/// Subtracts mean(raw_y) from the responses and stores it as mean_offset.
TrainingSet detrend(Eigen::MatrixXd X, const Eigen::VectorXd& raw_y);

/// Writes a comma-separated dataset: optional '#' comment lines, one header
/// row naming the feature columns and the response column, then one record
/// per sample. Doubles are printed with 17 significant digits so files are
/// byte-reproducible and round-trip exactly.
void write_dataset_csv(const std::filesystem::path& path,
                       const TrainingSet& data,
                       const std::vector<std::string>& feature_names,
                       const std::string& response_name,
                       const std::vector<std::string>& comments = {});

/// Reads a dataset written by write_dataset_csv. A "# mean_offset <v>"
/// comment, when present, restores the stored offset. Throws FormatError on
/// malformed content.
TrainingSet read_dataset_csv(const std::filesystem::path& path);

}  // namespace fastmuygps
