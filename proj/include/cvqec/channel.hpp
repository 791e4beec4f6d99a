#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvqec/gaussian.hpp"

namespace cvqec {

/// A classical random displacement v_C shared by several channels.
///
/// Channel k receives amplitude coupling[k] * v_C in both quadratures, with
/// x and p drawn independently at the same variance.
struct NoiseSource {
  std::vector<double> coupling;
  double variance = 0.0;  // per quadrature, natural units
  std::string label;
};

/// Lossy channels with thermal background and correlated classical noise.
///
/// A mismatch fraction xi of every source's noise power fails to interfere at
/// later beam splitters. It is booked as noise that is independent between
/// channels, so the per-channel total is unchanged while the cross-channel
/// correlation shrinks by (1 - xi). Visibility V maps to xi = 1 - V^2.
class ChannelModel {
 public:
  ChannelModel(std::vector<double> eta, std::vector<double> thermal_occupation, std::vector<NoiseSource> sources,
               double mismatch = 0.0);

  /// Uniform loss, zero temperature.
  static ChannelModel uniform(std::size_t n_channels, double eta, std::vector<NoiseSource> sources = {},
                              double mismatch = 0.0);

  [[nodiscard]] std::size_t n_channels() const { return eta_.size(); }
  [[nodiscard]] const std::vector<double>& eta() const { return eta_; }
  [[nodiscard]] const std::vector<double>& thermal_occupation() const { return thermal_; }
  [[nodiscard]] const std::vector<NoiseSource>& sources() const { return sources_; }
  [[nodiscard]] double mismatch() const { return mismatch_; }

  /// Classical-noise covariance over channel quadratures (2 n_channels square).
  [[nodiscard]] Matrix classical_noise_cov() const;

 private:
  std::vector<double> eta_;
  std::vector<double> thermal_;
  std::vector<NoiseSource> sources_;
  double mismatch_;
};

ChannelModel with_mismatch(const ChannelModel& model, double xi);
inline double mismatch_from_visibility(double visibility) { return 1.0 - visibility * visibility; }

/// channel_map[k] is the state mode that travels through channel k.
GaussianState apply_channel(const GaussianState& state, const std::vector<std::size_t>& channel_map,
                            const ChannelModel& model);

/// Total classical excess noise at a channel output, in SNU.
double excess_noise_snu(const ChannelModel& model, std::size_t channel);

/// Two channels sharing one source with couplings (sqrt(g1), sqrt(g2)).
/// The source variance is chosen so channel 1 carries eps_snu of excess noise.
ChannelModel correlated_pair(double g1, double g2, double eps_snu, double eta = 1.0, double mismatch = 0.0);

/// Plain-text key/value description; see README for the keys.
std::string dump_channel_config(const ChannelModel& model);
ChannelModel parse_channel_config(const std::string& text);

}  // namespace cvqec
