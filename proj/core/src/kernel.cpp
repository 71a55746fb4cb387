#include "fastmuygps/kernel.hpp"

#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fastmuygps/errors.hpp"

namespace fastmuygps {

KernelParams::KernelParams(double sigma, double rho, double nu, double tau)
    : sigma_(sigma), rho_(rho), nu_(nu), tau_(tau) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw std::domain_error("KernelParams: sigma must be positive and finite");
  }
  if (!(std::isfinite(rho) && rho > 0.0)) {
    throw std::domain_error("KernelParams: rho must be positive and finite");
  }
  if (!(std::isfinite(nu) && nu > 0.0)) {
    throw std::domain_error("KernelParams: nu must be positive and finite");
  }
  if (!(std::isfinite(tau) && tau >= 0.0)) {
    throw std::domain_error(
        "KernelParams: tau must be non-negative and finite");
  }
}

namespace {

void check_distance(double d) {
  if (!(std::isfinite(d) && d >= 0.0)) {
    throw std::domain_error("kernel distance must be finite and non-negative");
  }
}

// (2^{1-nu}/Gamma(nu)) x^nu K_nu(x) for general nu, in log space so that the
// huge K_nu and tiny x^nu factors at small x never overflow individually.
double matern_bracket_general(double nu, double x) {
  gsl_sf_result ln_k;
  int status = gsl_sf_bessel_lnKnu_e(nu, x, &ln_k);
  if (status != 0) {
    throw NumericError("gsl_sf_bessel_lnKnu failed for nu=" +
                       std::to_string(nu) + ", x=" + std::to_string(x));
  }
  double log_term =
      (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(x) +
      ln_k.val;
  return std::exp(log_term);
}

}  // namespace

double matern_value(double d, const KernelParams& p) {
  check_distance(d);
  double s2 = p.sigma() * p.sigma();
  if (d == 0.0) {
    return s2 * (1.0 + p.tau() * p.tau());
  }
  double nu = p.nu();
  double bracket;
  if (nu == 0.5) {
    bracket = std::exp(-d / p.rho());
  } else if (nu == 1.5) {
    double a = std::sqrt(3.0) * d / p.rho();
    bracket = (1.0 + a) * std::exp(-a);
  } else if (nu == 2.5) {
    double a = std::sqrt(5.0) * d / p.rho();
    bracket = (1.0 + a + a * a / 3.0) * std::exp(-a);
  } else {
    double x = std::sqrt(2.0 * nu) * d / p.rho();
    bracket = matern_bracket_general(nu, x);
  }
  return s2 * bracket;
}

double rbf_value(double d, const KernelParams& p) {
  check_distance(d);
  double s2 = p.sigma() * p.sigma();
  if (d == 0.0) {
    return s2 * (1.0 + p.tau() * p.tau());
  }
  double u = d / p.rho();
  return s2 * std::exp(-0.5 * u * u);
}

double kernel_value(double d, KernelKind kind, const KernelParams& p) {
  return kind == KernelKind::Matern ? matern_value(d, p) : rbf_value(d, p);
}

Eigen::MatrixXd cov_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           KernelKind kind, const KernelParams& p) {
  if (A.cols() != B.cols()) {
    throw std::domain_error("cov_matrix: point sets have mismatched dimension");
  }
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      K(i, j) = kernel_value((A.row(i) - B.row(j)).norm(), kind, p);
    }
  }
  return K;
}

Eigen::MatrixXd cov_matrix_self(const Eigen::MatrixXd& A, KernelKind kind,
                                const KernelParams& p) {
  Eigen::Index n = A.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = kernel_value(0.0, kind, p);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = kernel_value((A.row(i) - A.row(j)).norm(), kind, p);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

}  // namespace fastmuygps
