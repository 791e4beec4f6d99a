#include "cvqec/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "json.hpp"

namespace cvqec {
namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_mode(std::size_t n_modes, std::size_t mode, const char* what) {
  if (mode >= n_modes) {
    throw std::invalid_argument(std::string(what) + ": mode " + std::to_string(mode) + " out of range for " +
                                std::to_string(n_modes) + " modes");
  }
}

// Embeds a 2x2 single-mode block into an identity of size 2N.
Matrix embed_single(std::size_t n_modes, std::size_t mode, const Eigen::Matrix2d& block) {
  Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
  s.block<2, 2>(2 * mode, 2 * mode) = block;
  return s;
}

}  // namespace

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() == 0 || cov_.rows() % 2 != 0 || cov_.rows() != cov_.cols()) {
    throw std::invalid_argument("GaussianState: covariance must be a non-empty 2N x 2N matrix");
  }
  if (mean_.size() != cov_.rows()) {
    throw std::invalid_argument("GaussianState: mean length does not match covariance dimension");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw std::invalid_argument("GaussianState: non-finite entries");
  }
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    throw std::invalid_argument("GaussianState: covariance is not symmetric (defect " + std::to_string(asym) + ")");
  }
  cov_ = symmetrized(cov_);
  n_modes_ = static_cast<std::size_t>(cov_.rows() / 2);
}

SymplecticTransform::SymplecticTransform(Matrix matrix)
    : SymplecticTransform(matrix, Vector::Zero(matrix.rows())) {}

SymplecticTransform::SymplecticTransform(Matrix matrix, Vector displacement)
    : matrix_(std::move(matrix)), displacement_(std::move(displacement)) {
  if (matrix_.rows() == 0 || matrix_.rows() % 2 != 0 || matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("SymplecticTransform: matrix must be a non-empty 2N x 2N matrix");
  }
  if (displacement_.size() != matrix_.rows()) {
    throw std::invalid_argument("SymplecticTransform: displacement length mismatch");
  }
  // Rounding in S Omega S^T scales with the squared entry magnitude, which
  // matters only for strongly squeezing maps.
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if (symplectic_defect(matrix_) > kSymmetryTolerance * scale * scale) {
    throw std::invalid_argument("SymplecticTransform: matrix is not symplectic");
  }
}

SymplecticTransform SymplecticTransform::after(const SymplecticTransform& first) const {
  if (first.matrix_.rows() != matrix_.rows()) {
    throw std::invalid_argument("SymplecticTransform::after: dimension mismatch");
  }
  return SymplecticTransform(matrix_ * first.matrix_, matrix_ * first.displacement_ + displacement_);
}

SymplecticTransform SymplecticTransform::identity(std::size_t n_modes) {
  return SymplecticTransform(Matrix::Identity(2 * n_modes, 2 * n_modes));
}

Matrix symplectic_form(std::size_t n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

double symplectic_defect(const Matrix& s) {
  const Matrix omega = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
  return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
}

Matrix lift_passive(const Matrix& mode_matrix) {
  const Eigen::Index n = mode_matrix.rows();
  Matrix s = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(2 * i, 2 * j) = mode_matrix(i, j);
      s(2 * i + 1, 2 * j + 1) = mode_matrix(i, j);
    }
  }
  return s;
}

GaussianState vacuum_state(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("vacuum_state: need at least one mode");
  }
  return GaussianState(Vector::Zero(2 * n), kVacuumVariance * Matrix::Identity(2 * n, 2 * n));
}

GaussianState thermal_state(double quadrature_variance) {
  if (!(quadrature_variance >= 0.0)) {
    throw std::invalid_argument("thermal_state: variance must be non-negative");
  }
  return GaussianState(Vector::Zero(2), quadrature_variance * Matrix::Identity(2, 2));
}

GaussianState coherent_state(double x, double p) {
  Vector mean(2);
  mean << x, p;
  return GaussianState(mean, kVacuumVariance * Matrix::Identity(2, 2));
}

GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp) {
  check_mode(state.n_modes(), mode, "displace");
  Vector mean = state.mean();
  mean(2 * mode) += dx;
  mean(2 * mode + 1) += dp;
  return GaussianState(mean, state.cov());
}

SymplecticTransform beam_splitter(std::size_t n_modes, double transmissivity, std::size_t i, std::size_t j,
                                  BeamSplitterConvention convention) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw std::invalid_argument("beam_splitter: transmissivity must lie in [0, 1]");
  }
  check_mode(n_modes, i, "beam_splitter");
  check_mode(n_modes, j, "beam_splitter");
  if (i == j) {
    throw std::invalid_argument("beam_splitter: modes must differ");
  }
  const double t = std::sqrt(transmissivity);
  const double r = std::sqrt(1.0 - transmissivity);
  Matrix modes = Matrix::Identity(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(n_modes));
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  modes(ii, ii) = t;
  modes(ii, jj) = -r;
  if (convention == BeamSplitterConvention::Reflection) {
    modes(jj, ii) = -r;
    modes(jj, jj) = -t;
  } else {
    modes(jj, ii) = r;
    modes(jj, jj) = t;
  }
  return SymplecticTransform(lift_passive(modes));
}

SymplecticTransform phase_shift(std::size_t n_modes, double phi, std::size_t mode) {
  check_mode(n_modes, mode, "phase_shift");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  return SymplecticTransform(embed_single(n_modes, mode, rot));
}

SymplecticTransform squeeze(std::size_t n_modes, double r, double theta, std::size_t mode) {
  check_mode(n_modes, mode, "squeeze");
  if (!std::isfinite(r) || std::abs(r) > kMaxSqueezing) {
    throw std::invalid_argument("squeeze: |r| must be finite and at most 20");
  }
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const Eigen::Matrix2d diag = Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
  return SymplecticTransform(embed_single(n_modes, mode, rot * diag * rot.transpose()));
}

GaussianState two_mode_squeezed(double r) {
  GaussianState state = vacuum_state(2);
  state = apply(squeeze(2, r, 0.0, 0), state);
  state = apply(squeeze(2, -r, 0.0, 1), state);
  return apply(beam_splitter(2, 0.5, 0, 1), state);
}

GaussianState apply(const SymplecticTransform& t, const GaussianState& state) {
  if (t.matrix().rows() != state.cov().rows()) {
    throw std::invalid_argument("apply: transform acts on " + std::to_string(t.n_modes()) + " modes, state has " +
                                std::to_string(state.n_modes()));
  }
  const Matrix& s = t.matrix();
  return GaussianState(s * state.mean() + t.displacement(), symmetrized(s * state.cov() * s.transpose()));
}

GaussianState add_noise(const GaussianState& state, const Matrix& noise_cov) {
  if (noise_cov.rows() != state.cov().rows() || noise_cov.cols() != state.cov().cols()) {
    throw std::invalid_argument("add_noise: noise covariance dimension mismatch");
  }
  const double scale = std::max(1.0, noise_cov.cwiseAbs().maxCoeff());
  if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw std::invalid_argument("add_noise: noise covariance is not symmetric");
  }
  const Matrix sym = symmetrized(noise_cov);
  if (sym.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTolerance) {
      throw std::invalid_argument("add_noise: noise covariance is not positive semidefinite");
    }
  }
  return GaussianState(state.mean(), state.cov() + sym);
}

GaussianState partial_trace(const GaussianState& state, const std::vector<std::size_t>& keep) {
  if (keep.empty()) {
    throw std::invalid_argument("partial_trace: keep set is empty");
  }
  for (std::size_t m : keep) {
    check_mode(state.n_modes(), m, "partial_trace");
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  Vector mean(2 * k);
  Matrix cov(2 * k, 2 * k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto ma = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]);
    mean.segment<2>(2 * a) = state.mean().segment<2>(2 * ma);
    for (Eigen::Index b = 0; b < k; ++b) {
      const auto mb = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]);
      cov.block<2, 2>(2 * a, 2 * b) = state.cov().block<2, 2>(2 * ma, 2 * mb);
    }
  }
  return GaussianState(mean, cov);
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const Eigen::Index na = a.cov().rows();
  const Eigen::Index nb = b.cov().rows();
  Vector mean(na + nb);
  mean << a.mean(), b.mean();
  Matrix cov = Matrix::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  return GaussianState(mean, cov);
}

double quadrature_variance(const GaussianState& state, Quadrature q) {
  check_mode(state.n_modes(), q.mode, "quadrature_variance");
  const auto idx = static_cast<Eigen::Index>(q.index());
  return state.cov()(idx, idx);
}

double duan_simon(const GaussianState& state, std::size_t i, std::size_t j) {
  check_mode(state.n_modes(), i, "duan_simon");
  check_mode(state.n_modes(), j, "duan_simon");
  if (i == j) {
    throw std::invalid_argument("duan_simon: modes must differ");
  }
  const Matrix& c = state.cov();
  const auto xi = static_cast<Eigen::Index>(2 * i), pi = xi + 1;
  const auto xj = static_cast<Eigen::Index>(2 * j), pj = xj + 1;
  const double var_x_minus = c(xi, xi) + c(xj, xj) - 2.0 * c(xi, xj);
  const double var_p_plus = c(pi, pi) + c(pj, pj) + 2.0 * c(pi, pj);
  return var_x_minus + var_p_plus;
}

double fidelity(const GaussianState& a, const GaussianState& b) {
  if (a.n_modes() != 1 || b.n_modes() != 1) {
    throw UnsupportedError("fidelity: only single-mode states are supported");
  }
  // Closed form for single-mode Gaussian states; with vacuum variance 1/2 the
  // purity terms read 4 det(sigma) - 1.
  const Eigen::Matrix2d sa = a.cov();
  const Eigen::Matrix2d sb = b.cov();
  const Eigen::Matrix2d sum = sa + sb;
  const Eigen::Vector2d d = a.mean() - b.mean();
  const double big_delta = 4.0 * sum.determinant();
  const double small_delta = std::max(0.0, (4.0 * sa.determinant() - 1.0) * (4.0 * sb.determinant() - 1.0));
  const double denom = std::sqrt(big_delta + small_delta) - std::sqrt(small_delta);
  const double exponent = -0.5 * d.dot(sum.inverse() * d);
  return std::clamp(2.0 / denom * std::exp(exponent), 0.0, 1.0);
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  const Matrix m = symplectic_form(state.n_modes()) * state.cov();
  Eigen::EigenSolver<Matrix> eig(m, false);
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    mags.push_back(std::abs(eig.eigenvalues()(k)));
  }
  std::sort(mags.begin(), mags.end());
  // Eigenvalues of Omega*cov come in pairs +-i nu.
  std::vector<double> nu;
  nu.reserve(state.n_modes());
  for (std::size_t k = 0; k < mags.size(); k += 2) {
    nu.push_back(0.5 * (mags[k] + mags[k + 1]));
  }
  return nu;
}

PhysicalityReport physicality_check(const GaussianState& state) {
  const std::vector<double> nu = symplectic_eigenvalues(state);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(state.cov(), Eigen::EigenvaluesOnly);
  PhysicalityReport report{};
  report.min_symplectic_eigenvalue = nu.front();
  report.min_cov_eigenvalue = eig.eigenvalues().minCoeff();
  report.physical =
      report.min_cov_eigenvalue > 0.0 && report.min_symplectic_eigenvalue >= kVacuumVariance - kPhysicalityTolerance;
  return report;
}

std::string to_json(const GaussianState& state) {
  nlohmann::json j;
  j["n_modes"] = state.n_modes();
  j["mean"] = std::vector<double>(state.mean().data(), state.mean().data() + state.mean().size());
  std::vector<double> cov;
  cov.reserve(static_cast<std::size_t>(state.cov().size()));
  for (Eigen::Index r = 0; r < state.cov().rows(); ++r) {
    for (Eigen::Index c = 0; c < state.cov().cols(); ++c) {
      cov.push_back(state.cov()(r, c));
    }
  }
  j["cov"] = cov;
  return j.dump();
}

GaussianState state_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const auto n = j.at("n_modes").get<std::size_t>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto cov = j.at("cov").get<std::vector<double>>();
  if (n == 0 || mean.size() != 2 * n || cov.size() != 4 * n * n) {
    throw std::invalid_argument("state_from_json: inconsistent dimensions");
  }
  const auto dim = static_cast<Eigen::Index>(2 * n);
  Vector m = Eigen::Map<const Vector>(mean.data(), dim);
  Matrix c = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov.data(), dim, dim);
  return GaussianState(m, c);
}

}  // namespace cvqec
