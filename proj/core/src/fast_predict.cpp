#include "fastmuygps/fast_predict.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fastmuygps/errors.hpp"
#include "fastmuygps/linalg.hpp"

namespace fastmuygps {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model file layout assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'M', 'G', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

struct Crc32Writer {
  std::ofstream out;
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;

  void write(const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    crc = crc32(crc, static_cast<const Bytef*>(data),
                static_cast<uInt>(size));
    offset += size;
  }
  template <typename T>
  void put(T v) {
    write(&v, sizeof(v));
  }
};

struct Crc32Reader {
  std::ifstream in;
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;

  void read(void* data, std::size_t size, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in.gcount()) != size) {
      throw FormatError(std::string("truncated model file while reading ") +
                            what,
                        offset + static_cast<std::size_t>(in.gcount()));
    }
    crc = crc32(crc, static_cast<const Bytef*>(data),
                static_cast<uInt>(size));
    offset += size;
  }
  template <typename T>
  T get(const char* what) {
    T v{};
    read(&v, sizeof(v), what);
    return v;
  }
};

}  // namespace

PrecomputedModel precompute(const TrainingSet& train,
                            const FittedParams& fitted,
                            const NeighborIndex& index, int k, int threads) {
  const int n = static_cast<int>(train.X.rows());
  if (k < 1 || k > n) {
    throw std::domain_error("precompute: k out of range");
  }
  if (index.size() != n) {
    throw std::domain_error(
        "precompute: index was not built on the training set");
  }
  NeighborTable table;
  table.S.resize(n, k);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C(
      n, k);

  auto do_rows = [&](int begin, int end) {
    Eigen::MatrixXd xs(k, train.X.cols());
    Eigen::VectorXd ys(k);
    for (int i = begin; i < end; ++i) {
      table.S(i, 0) = i;
      if (k > 1) {
        NeighborList nl =
            index.query_knn(train.X.row(i).transpose(), k - 1, i);
        for (int t = 0; t < k - 1; ++t) {
          table.S(i, t + 1) = nl.indices[t];
        }
      }
      for (int t = 0; t < k; ++t) {
        int j = table.S(i, t);
        xs.row(t) = train.X.row(j);
        ys(t) = train.Y(j);
      }
      Eigen::MatrixXd kss = cov_matrix_self(xs, fitted.kind, fitted.theta_hat);
      C.row(i) =
          solve_spd(kss, ys, "precompute row " + std::to_string(i))
              .transpose();
    }
  };

  if (threads <= 1 || n < 2 * threads) {
    do_rows(0, n);
  } else {
    std::vector<std::thread> workers;
    int chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      int begin = w * chunk;
      int end = std::min(n, begin + chunk);
      if (begin < end) {
        workers.emplace_back(do_rows, begin, end);
      }
    }
    for (auto& t : workers) {
      t.join();
    }
  }

  return PrecomputedModel{train.X,     std::move(table), std::move(C),
                          fitted.theta_hat, fitted.kind, train.mean_offset,
                          index};
}

double fast_predict_one(const PrecomputedModel& model,
                        const Eigen::VectorXd& z) {
  const int j = model.index.nearest_training_point(z);
  const int k = static_cast<int>(model.table.S.cols());
  double acc = 0.0;
  for (int t = 0; t < k; ++t) {
    // Distances go through the index's row-major point copy: one cache line
    // per neighbor instead of one per coordinate.
    double d = model.index.distance_to(z, model.table.S(j, t));
    acc += kernel_value(d, model.kind, model.params) * model.C(j, t);
  }
  return acc + model.mean_offset;
}

Eigen::VectorXd fast_predict_batch(const PrecomputedModel& model,
                                   const Eigen::MatrixXd& Z) {
  if (Z.cols() != model.X.cols()) {
    throw std::domain_error("fast_predict_batch: test dimension mismatch");
  }
  Eigen::VectorXd out(Z.rows());
  for (Eigen::Index t = 0; t < Z.rows(); ++t) {
    out(t) = fast_predict_one(model, Z.row(t).transpose());
  }
  return out;
}

void save_model(const PrecomputedModel& model,
                const std::filesystem::path& path) {
  Crc32Writer w;
  w.out.open(path, std::ios::binary);
  if (!w.out) {
    throw std::runtime_error("cannot open model file for writing: " +
                             path.string());
  }
  const auto n = static_cast<std::uint64_t>(model.X.rows());
  const auto d = static_cast<std::uint64_t>(model.X.cols());
  const auto k = static_cast<std::uint64_t>(model.table.S.cols());

  w.write(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint64_t>(n);
  w.put<std::uint64_t>(d);
  w.put<std::uint64_t>(k);
  w.put<double>(model.params.sigma());
  w.put<double>(model.params.rho());
  w.put<double>(model.params.nu());
  w.put<double>(model.params.tau());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.kind));
  // X is column-major in Eigen; emit row-major explicitly.
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      w.put<double>(model.X(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(j)));
    }
  }
  w.write(model.table.S.data(), n * k * sizeof(std::int32_t));
  w.write(model.C.data(), n * k * sizeof(double));
  w.put<double>(model.mean_offset);

  std::ostringstream index_blob;
  model.index.serialize(index_blob);
  std::string blob = std::move(index_blob).str();
  w.put<std::uint64_t>(blob.size());
  w.write(blob.data(), blob.size());

  std::uint32_t checksum = static_cast<std::uint32_t>(w.crc);
  w.out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!w.out) {
    throw std::runtime_error("model write failed: " + path.string());
  }
}

PrecomputedModel load_model(const std::filesystem::path& path) {
  Crc32Reader r;
  r.in.open(path, std::ios::binary);
  if (!r.in) {
    throw std::runtime_error("cannot open model file: " + path.string());
  }
  char magic[4];
  r.read(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("bad magic bytes; not a model file", 0);
  }
  auto version = r.get<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kFormatVersion) + ")",
                      sizeof(kMagic));
  }
  auto n = r.get<std::uint64_t>("n");
  auto d = r.get<std::uint64_t>("d");
  auto k = r.get<std::uint64_t>("k");
  if (n < 1 || d < 1 || k < 1 || k > n) {
    throw FormatError("implausible model dimensions", r.offset);
  }
  double sigma = r.get<double>("sigma");
  double rho = r.get<double>("rho");
  double nu = r.get<double>("nu");
  double tau = r.get<double>("tau");
  auto kind_tag = r.get<std::uint32_t>("kind");
  if (kind_tag > 1) {
    throw FormatError("unknown kernel kind tag", r.offset);
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          r.get<double>("X");
    }
  }
  NeighborTable table;
  table.S.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  r.read(table.S.data(), n * k * sizeof(std::int32_t), "S");
  for (std::uint64_t i = 0; i < n; ++i) {
    if (table.S(static_cast<Eigen::Index>(i), 0) !=
        static_cast<std::int32_t>(i)) {
      throw FormatError("neighbor table row does not start with its own index",
                        r.offset);
    }
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  r.read(C.data(), n * k * sizeof(double), "C");
  double mean_offset = r.get<double>("mean_offset");

  auto blob_size = r.get<std::uint64_t>("index blob size");
  std::string blob(blob_size, '\0');
  r.read(blob.data(), blob_size, "index blob");
  std::istringstream blob_stream(blob);
  NeighborIndex index = NeighborIndex::deserialize(blob_stream, X);

  std::uint32_t computed = static_cast<std::uint32_t>(r.crc);
  std::uint32_t stored;
  r.in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (static_cast<std::size_t>(r.in.gcount()) != sizeof(stored)) {
    throw FormatError("truncated model file while reading checksum", r.offset);
  }
  if (stored != computed) {
    throw FormatError("model file checksum mismatch", r.offset);
  }

  KernelParams params(sigma, rho, nu, tau);
  return PrecomputedModel{std::move(X),     std::move(table),
                          std::move(C),     params,
                          static_cast<KernelKind>(kind_tag), mean_offset,
                          std::move(index)};
}

}  // namespace fastmuygps
