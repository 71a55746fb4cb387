#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace fastmuygps {

/// Cholesky factorization with escalating diagonal jitter. Attempts a plain
/// LLT first, then retries with jitter 1e-10, 1e-8, 1e-6 added to the
/// diagonal. Throws NumericError naming `context` and the last attempted
/// jitter when all attempts fail. On success *applied_jitter (if non-null)
/// receives the jitter that made the factorization succeed (0 for none).
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(
    Eigen::MatrixXd K, std::string_view context,
    double* applied_jitter = nullptr);

/// Solves the symmetric positive definite system K x = B under the jitter
/// policy above.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B,
                          std::string_view context);

}  // namespace fastmuygps
