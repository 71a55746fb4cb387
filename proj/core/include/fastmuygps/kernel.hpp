#pragma once

#include <Eigen/Dense>

namespace fastmuygps {

enum class KernelKind { Matern, RBF };

/// Hyperparameters of a stationary isotropic kernel: process scale sigma,
/// length scale rho, Matern smoothness nu and nugget tau. Immutable once
/// constructed; the constructor rejects invalid values.
class KernelParams {
 public:
  KernelParams(double sigma, double rho, double nu, double tau);

  double sigma() const noexcept { return sigma_; }
  double rho() const noexcept { return rho_; }
  double nu() const noexcept { return nu_; }
  double tau() const noexcept { return tau_; }

  KernelParams with_rho(double rho) const { return {sigma_, rho, nu_, tau_}; }
  KernelParams with_nu(double nu) const { return {sigma_, rho_, nu, tau_}; }
  KernelParams with_tau(double tau) const { return {sigma_, rho_, nu_, tau}; }
  KernelParams with_sigma(double sigma) const {
    return {sigma, rho_, nu_, tau_};
  }

 private:
  double sigma_;
  double rho_;
  double nu_;
  double tau_;
};

/// Matern covariance at distance d. Half-integer smoothness values
/// (nu = 1/2, 3/2, 5/2) take closed-form paths; other nu go through the
/// modified Bessel function of the second kind, evaluated in log space.
/// The nugget tau^2 contributes only at d == 0 exactly.
double matern_value(double d, const KernelParams& p);

/// Squared-exponential covariance sigma^2 [exp(-d^2 / (2 rho^2)) + tau^2 1(d=0)].
/// Ignores nu.
double rbf_value(double d, const KernelParams& p);

double kernel_value(double d, KernelKind kind, const KernelParams& p);

/// Cross-covariance matrix between point sets A (a x d) and B (b x d),
/// entry (i, j) = kernel(||A_i - B_j||). The nugget indicator fires on exact
/// coordinate equality. Throws std::domain_error on dimension mismatch.
Eigen::MatrixXd cov_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           KernelKind kind, const KernelParams& p);

/// Self-covariance of one point set with an exactly symmetric fill.
Eigen::MatrixXd cov_matrix_self(const Eigen::MatrixXd& A, KernelKind kind,
                                const KernelParams& p);

}  // namespace fastmuygps
