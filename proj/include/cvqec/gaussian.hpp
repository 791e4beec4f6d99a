#pragma once

// Phase-space representation of multimode Gaussian states.
//
// Conventions used everywhere in this library:
//   * [x, p] = i, so the vacuum has variance 1/2 in each quadrature.
//     Reports in shot-noise units (SNU) divide by 1/2.
//   * Quadratures are interleaved per mode: (x_0, p_0, x_1, p_1, ...).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cvqec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-9;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kMaxSqueezing = 20.0;

/// Raised for operations outside the supported model (e.g. multimode fidelity).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class QuadratureKind { X, P };

struct Quadrature {
  QuadratureKind kind;
  std::size_t mode;

  [[nodiscard]] std::size_t index() const { return 2 * mode + (kind == QuadratureKind::P ? 1 : 0); }
};

/// Mean vector and covariance matrix of N bosonic modes.
///
/// Construction validates dimensions and symmetry only. Physicality is a
/// property that can be queried (see is_physical) because sub-vacuum test
/// inputs must be representable.
class GaussianState {
 public:
  GaussianState(Vector mean, Matrix cov);

  [[nodiscard]] std::size_t n_modes() const { return n_modes_; }
  [[nodiscard]] const Vector& mean() const { return mean_; }
  [[nodiscard]] const Matrix& cov() const { return cov_; }

 private:
  std::size_t n_modes_;
  Vector mean_;
  Matrix cov_;
};

/// Affine phase-space map x -> S x + d with S symplectic.
class SymplecticTransform {
 public:
  explicit SymplecticTransform(Matrix matrix);
  SymplecticTransform(Matrix matrix, Vector displacement);

  [[nodiscard]] std::size_t n_modes() const { return static_cast<std::size_t>(matrix_.rows() / 2); }
  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] const Vector& displacement() const { return displacement_; }

  /// Returns the transform equivalent to applying `first`, then *this.
  [[nodiscard]] SymplecticTransform after(const SymplecticTransform& first) const;

  static SymplecticTransform identity(std::size_t n_modes);

 private:
  Matrix matrix_;
  Vector displacement_;
};

/// Sign pattern of the two-mode beam splitter.
///
/// Reflection: (a1, a2) = ( sqrt(T) b1 - sqrt(1-T) b2, -sqrt(1-T) b1 - sqrt(T) b2 ),
///             a reflection (det -1) carrying a relative pi phase on the second
///             port. It is its own inverse.
/// Rotation:   (a1, a2) = ( sqrt(T) b1 - sqrt(1-T) b2,  sqrt(1-T) b1 + sqrt(T) b2 ).
enum class BeamSplitterConvention { Reflection, Rotation };

/// Standard symplectic form for the interleaved ordering.
Matrix symplectic_form(std::size_t n_modes);

/// Max-abs deviation of S Omega S^T from Omega.
double symplectic_defect(const Matrix& s);

/// Lifts a real N x N mode-amplitude matrix (acting identically on x and p)
/// to its 2N x 2N phase-space matrix.
Matrix lift_passive(const Matrix& mode_matrix);

GaussianState vacuum_state(std::size_t n);
GaussianState thermal_state(double quadrature_variance);
GaussianState coherent_state(double x, double p);

GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp);

SymplecticTransform beam_splitter(std::size_t n_modes, double transmissivity, std::size_t i, std::size_t j,
                                  BeamSplitterConvention convention = BeamSplitterConvention::Reflection);
SymplecticTransform phase_shift(std::size_t n_modes, double phi, std::size_t mode);
SymplecticTransform squeeze(std::size_t n_modes, double r, double theta, std::size_t mode);

/// Orthogonally squeezed pair interfered on a balanced reflection-convention beam
/// splitter. Var(x0 - x1) + Var(p0 + p1) = 2 exp(-2r).
GaussianState two_mode_squeezed(double r);

GaussianState apply(const SymplecticTransform& t, const GaussianState& state);
GaussianState add_noise(const GaussianState& state, const Matrix& noise_cov);
GaussianState partial_trace(const GaussianState& state, const std::vector<std::size_t>& keep);
GaussianState tensor(const GaussianState& a, const GaussianState& b);

double quadrature_variance(const GaussianState& state, Quadrature q);
inline double as_snu(double natural_variance) { return natural_variance / kVacuumVariance; }
inline double from_snu(double snu) { return snu * kVacuumVariance; }

/// Var(x_i - x_j) + Var(p_i + p_j); below 2 certifies entanglement.
double duan_simon(const GaussianState& state, std::size_t i, std::size_t j);

/// Uhlmann fidelity of two single-mode Gaussian states.
double fidelity(const GaussianState& a, const GaussianState& b);

/// Symplectic eigenvalues in ascending order (one per mode).
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

struct PhysicalityReport {
  bool physical;
  double min_symplectic_eigenvalue;
  double min_cov_eigenvalue;
};

PhysicalityReport physicality_check(const GaussianState& state);
inline bool is_physical(const GaussianState& state) { return physicality_check(state).physical; }

/// Debug JSON: {"n_modes":N,"mean":[...],"cov":[row-major...]}.
std::string to_json(const GaussianState& state);
GaussianState state_from_json(const std::string& text);

}  // namespace cvqec
