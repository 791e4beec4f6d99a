#pragma once

// Fock-basis reference for single-mode Gaussian states. Independent of the
// covariance engine: states are built from truncated ladder operators and
// matrix exponentials, and fidelity is the Uhlmann trace formula.

#include <complex>

#include <Eigen/Dense>

namespace cvqec::testing {

using CMatrix = Eigen::MatrixXcd;

struct FockGaussian {
  double nbar = 0.0;                 // thermal occupation before squeezing
  double r = 0.0;                    // squeezing magnitude
  double theta = 0.0;                // squeezing angle
  std::complex<double> alpha{0, 0};  // displacement
};

/// rho = D(alpha) S(r e^{i theta}) rho_th S^dag D^dag in a space of `dim` levels.
CMatrix fock_density(const FockGaussian& p, int dim);

/// Leading cutoff x cutoff block, renormalized to unit trace.
CMatrix truncate(const CMatrix& rho, int cutoff);

/// <x>, <p> and symmetrized covariance with x = (a + a^dag)/sqrt(2).
void fock_moments(const CMatrix& rho, Eigen::Vector2d& mean, Eigen::Matrix2d& cov);

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fock_fidelity(const CMatrix& rho, const CMatrix& sigma);

}  // namespace cvqec::testing
