#include "fastmuygps/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fastmuygps/errors.hpp"

namespace fastmuygps {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainingSet detrend(Eigen::MatrixXd X, const Eigen::VectorXd& raw_y) {
  if (X.rows() != raw_y.size() || X.rows() < 1) {
    throw std::domain_error("detrend: features and responses disagree on n");
  }
  if (!raw_y.allFinite()) {
    throw std::domain_error("detrend: non-finite response");
  }
  TrainingSet out;
  out.mean_offset = raw_y.mean();
  out.Y = raw_y.array() - out.mean_offset;
  out.X = std::move(X);
  return out;
}

void write_dataset_csv(const std::filesystem::path& path,
                       const TrainingSet& data,
                       const std::vector<std::string>& feature_names,
                       const std::string& response_name,
                       const std::vector<std::string>& comments) {
  if (static_cast<Eigen::Index>(feature_names.size()) != data.X.cols()) {
    throw std::domain_error("write_dataset_csv: header width != feature dim");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  for (const auto& c : comments) {
    out << "# " << c << "\n";
  }
  out << "# mean_offset " << fmt_double(data.mean_offset) << "\n";
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    out << feature_names[j] << ",";
  }
  out << response_name << "\n";
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      out << fmt_double(data.X(i, j)) << ",";
    }
    out << fmt_double(data.Y(i)) << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

TrainingSet read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::string line;
  std::size_t offset = 0;
  double mean_offset = 0.0;
  bool have_header = false;
  Eigen::Index dims = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      if (key == "mean_offset") {
        ss >> mean_offset;
      }
      continue;
    }
    if (!have_header) {
      dims = static_cast<Eigen::Index>(
                 std::count(line.begin(), line.end(), ',')) ;
      if (dims < 1) {
        throw FormatError("dataset header needs at least two columns",
                          line_start);
      }
      have_header = true;
      continue;
    }
    std::vector<double> vals;
    vals.reserve(dims + 1);
    const char* p = line.c_str();
    char* end = nullptr;
    while (true) {
      double v = std::strtod(p, &end);
      if (end == p) {
        throw FormatError("malformed numeric field in dataset",
                          line_start + (p - line.c_str()));
      }
      vals.push_back(v);
      p = end;
      if (*p == ',') {
        ++p;
      } else {
        break;
      }
    }
    if (static_cast<Eigen::Index>(vals.size()) != dims + 1) {
      throw FormatError("dataset record has wrong column count", line_start);
    }
    rows.push_back(std::move(vals));
  }
  if (!have_header || rows.empty()) {
    throw FormatError("dataset has no records", offset);
  }
  TrainingSet data;
  data.mean_offset = mean_offset;
  data.X.resize(static_cast<Eigen::Index>(rows.size()), dims);
  data.Y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < dims; ++j) {
      data.X(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
    data.Y(static_cast<Eigen::Index>(i)) = rows[i][dims];
  }
  return data;
}

}  // namespace fastmuygps
