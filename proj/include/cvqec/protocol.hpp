#pragma once

#include <cstddef>
#include <vector>

#include "cvqec/channel.hpp"
#include "cvqec/gaussian.hpp"

namespace cvqec {

/// Which beam-splitter port the quoted transmissivity refers to.
///
/// Equation: the encoder keeps sqrt(T) of the signal in channel 1 and the
/// correlated noise cancels at T = g2 / (g1 + g2).
/// Complementary: the quoted number is 1 - T; the optimum then reads
/// g1 / (g1 + g2).
enum class PortLabel { Equation, Complementary };

double physical_transmissivity(double quoted, PortLabel ports);

struct ProtocolConfig {
  double t_encode = 0.5;
  double t_decode = 0.5;
  ChannelModel channel = ChannelModel::uniform(2, 1.0);
  PortLabel ports = PortLabel::Equation;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// g2 / (g1 + g2): the split that routes the correlated noise entirely into
/// the discarded decoder port.
double optimal_splitting(double g1, double g2);

/// Optimal encode/decode configuration for the two-channel correlated pair.
ProtocolConfig optimal_config(double g1, double g2, double eps_snu, double eta = 1.0, double mismatch = 0.0,
                              PortLabel ports = PortLabel::Equation);

GaussianState encode(const GaussianState& state, std::size_t signal_mode, std::size_t aux_mode, double t_encode,
                     PortLabel ports = PortLabel::Equation);
/// Output `signal_mode` carries b_out; `aux_mode` is the discarded port.
GaussianState decode(const GaussianState& state, std::size_t signal_mode, std::size_t aux_mode, double t_decode,
                     PortLabel ports = PortLabel::Equation);

struct ProtocolOutput {
  GaussianState full;       // input modes followed by the auxiliary port
  GaussianState signal;     // b_out alone
  GaussianState discarded;  // decoder noise port alone
  GaussianState ports;      // (b_out, noise port) jointly
};

/// Appends a vacuum auxiliary mode, then encode -> channel -> decode on the
/// pair (signal_mode, aux). Other input modes ride along untouched.
ProtocolOutput run_protocol(const ProtocolConfig& cfg, const GaussianState& input, std::size_t signal_mode = 0);

/// Single-mode affine Gaussian map: mean -> T mean + d, cov -> T cov T^T + N.
struct GaussianMap {
  Matrix transfer;
  Matrix added;
  Vector offset;

  [[nodiscard]] GaussianState apply(const GaussianState& state) const;
};

GaussianMap pure_loss_map(double eta);

/// End-to-end map seen by the signal mode under the protocol.
GaussianMap corrected_map(const ProtocolConfig& cfg);
GaussianState corrected_channel(const ProtocolConfig& cfg, const GaussianState& input);

/// Signal sent straight through channel 1 (T_e = T_d = 1).
ProtocolConfig uncorrected_config(const ProtocolConfig& base);

enum class FeedforwardGain {
  /// G = sqrt(g1/g2) scaled for the heterodyne split; independent of noise level.
  NoiseCancelling,
  /// G = C B^-1, the Gaussian conditional (Schur complement) estimate.
  Conditional,
};

struct IncoherentOutput {
  GaussianState signal;
  Matrix gain;  // 2x2, applied to the (x, p) heterodyne outcomes
};

/// Output covariance of s - G m for jointly Gaussian (s, m):
/// A - G C^T - C G^T + G B G^T.
Matrix feedforward_covariance(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& gain);
/// A - C B^-1 C^T.
Matrix conditional_covariance(const Matrix& a, const Matrix& c, const Matrix& b);

/// Signal through channel 1, channel 2 carries vacuum and is heterodyned;
/// the outcomes are fed forward as a displacement on channel 1.
IncoherentOutput incoherent_strategy(const ChannelModel& channel, const GaussianState& input,
                                     FeedforwardGain gain_kind = FeedforwardGain::NoiseCancelling);

}  // namespace cvqec
