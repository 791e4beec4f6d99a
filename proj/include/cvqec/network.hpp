#pragma once

// N-channel generalization: find the channel-space direction that no noise
// source touches, and compile the encoder that maps the signal onto it into
// beam splitters and phase flips.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqec/gaussian.hpp"

namespace cvqec {

class NoProtectedSubspace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coupling vectors over N channels, one per independent classical source.
class NoisePatternSet {
 public:
  explicit NoisePatternSet(std::vector<std::vector<double>> patterns);

  [[nodiscard]] std::size_t n_channels() const { return n_channels_; }
  [[nodiscard]] const std::vector<std::vector<double>>& patterns() const { return patterns_; }

  /// One pattern per non-blank line, whitespace-separated; '#' starts a comment.
  static NoisePatternSet parse(const std::string& text);

 private:
  std::vector<std::vector<double>> patterns_;
  std::size_t n_channels_;
};

/// Unit vector orthogonal to every pattern. When several directions are free,
/// the first standard basis vector with a nonzero residual after projecting
/// out the patterns (taken in input order) wins, signed so its first nonzero
/// component is positive.
Vector null_space_encoder(const NoisePatternSet& patterns);

/// Orthogonal matrix whose first column is `first_column` (a Householder
/// reflection, or the identity when first_column is e_0).
Matrix complete_basis(const Vector& first_column);

struct NetworkElement {
  enum class Kind { BeamSplitter, PhaseShift };
  Kind kind;
  std::size_t i;
  std::size_t j;  // unused for phase shifts
  double value;   // transmissivity T or phase phi

  /// Beam splitters act as [[sqrt(T), -sqrt(1-T)], [sqrt(1-T), sqrt(T)]] on (i, j).
  static NetworkElement beam_splitter(std::size_t i, std::size_t j, double t) {
    return {Kind::BeamSplitter, i, j, t};
  }
  static NetworkElement phase_shift(std::size_t i, double phi) { return {Kind::PhaseShift, i, i, phi}; }
};

/// Elements in application order.
struct NetworkPlan {
  std::size_t n = 0;
  std::vector<NetworkElement> elements;
  std::uint64_t target_checksum = 0;

  [[nodiscard]] std::size_t beam_splitter_count() const;
};

std::uint64_t matrix_checksum(const Matrix& m);

/// Triangular Givens elimination of a real orthogonal matrix.
NetworkPlan decompose_network(const Matrix& u);

/// N x N real matrix the plan realizes; phase shifts must be multiples of pi.
Matrix recompose(const NetworkPlan& plan);

/// Reversed element order with each element inverted; realizes U^T.
NetworkPlan inverse_plan(const NetworkPlan& plan);

/// Text form: header lines `N <n>` and `CHECKSUM <hex>`, then one element per
/// line as `BS i j T` or `PS i phi`.
std::string serialize_plan(const NetworkPlan& plan);
NetworkPlan parse_plan(const std::string& text);

/// Applies the plan to state modes modes[0..n-1].
GaussianState apply_plan(const GaussianState& state, const NetworkPlan& plan, const std::vector<std::size_t>& modes);

struct NChannelOutput {
  GaussianState signal;
  Vector encoder;
  NetworkPlan encode_plan;
  NetworkPlan decode_plan;
};

/// Encodes a single-mode input into the protected direction across N lossy
/// channels, adds one classical source per pattern (variances in natural
/// units), and decodes with the inverse network.
NChannelOutput n_channel_protocol(const NoisePatternSet& patterns, double eta, const std::vector<double>& variances,
                                  const GaussianState& input, double mismatch = 0.0);

}  // namespace cvqec
