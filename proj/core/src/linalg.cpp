#include "fastmuygps/linalg.hpp"

#include <array>
#include <string>

#include "fastmuygps/errors.hpp"

namespace fastmuygps {

Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(Eigen::MatrixXd K,
                                                 std::string_view context,
                                                 double* applied_jitter) {
  constexpr std::array<double, 4> kJitters = {0.0, 1e-10, 1e-8, 1e-6};
  double previous = 0.0;
  for (double jitter : kJitters) {
    if (jitter > 0.0) {
      K.diagonal().array() += jitter - previous;
      previous = jitter;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() == Eigen::Success) {
      if (applied_jitter != nullptr) {
        *applied_jitter = jitter;
      }
      return llt;
    }
  }
  throw NumericError("Cholesky factorization failed in " +
                     std::string(context) +
                     " after jitter escalation up to 1e-6");
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& K, const Eigen::MatrixXd& B,
                          std::string_view context) {
  return cholesky_with_jitter(K, context).solve(B);
}

}  // namespace fastmuygps
