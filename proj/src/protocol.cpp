#include "cvqec/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqec {

double physical_transmissivity(double quoted, PortLabel ports) {
  return ports == PortLabel::Equation ? quoted : 1.0 - quoted;
}

void ProtocolConfig::validate() const {
  if (!(t_encode >= 0.0 && t_encode <= 1.0) || !(t_decode >= 0.0 && t_decode <= 1.0)) {
    throw std::invalid_argument("ProtocolConfig: transmissivities must lie in [0, 1]");
  }
  if (channel.n_channels() < 2) {
    throw std::invalid_argument("ProtocolConfig: the protocol needs at least two channels");
  }
}

double optimal_splitting(double g1, double g2) {
  if (!(g1 > 0.0) || !(g2 > 0.0)) {
    throw std::invalid_argument("optimal_splitting: g1 and g2 must be positive");
  }
  return g2 / (g1 + g2);
}

ProtocolConfig optimal_config(double g1, double g2, double eps_snu, double eta, double mismatch, PortLabel ports) {
  const double t = physical_transmissivity(optimal_splitting(g1, g2), ports);
  return ProtocolConfig{t, t, correlated_pair(g1, g2, eps_snu, eta, mismatch), ports};
}

GaussianState encode(const GaussianState& state, std::size_t signal_mode, std::size_t aux_mode, double t_encode,
                     PortLabel ports) {
  return apply(beam_splitter(state.n_modes(), physical_transmissivity(t_encode, ports), signal_mode, aux_mode,
                             BeamSplitterConvention::Reflection),
               state);
}

GaussianState decode(const GaussianState& state, std::size_t signal_mode, std::size_t aux_mode, double t_decode,
                     PortLabel ports) {
  // The reflection-convention splitter is an involution, so the decoder is the
  // same element as the encoder.
  return apply(beam_splitter(state.n_modes(), physical_transmissivity(t_decode, ports), signal_mode, aux_mode,
                             BeamSplitterConvention::Reflection),
               state);
}

ProtocolOutput run_protocol(const ProtocolConfig& cfg, const GaussianState& input, std::size_t signal_mode) {
  cfg.validate();
  if (signal_mode >= input.n_modes()) {
    throw std::invalid_argument("run_protocol: signal mode out of range");
  }
  const std::size_t aux = input.n_modes();
  GaussianState state = tensor(input, vacuum_state(1));
  state = encode(state, signal_mode, aux, cfg.t_encode, cfg.ports);

  // Channels beyond the first two carry vacuum modes that are discarded.
  std::vector<std::size_t> channel_map{signal_mode, aux};
  for (std::size_t k = 2; k < cfg.channel.n_channels(); ++k) {
    channel_map.push_back(state.n_modes());
    state = tensor(state, vacuum_state(1));
  }
  state = apply_channel(state, channel_map, cfg.channel);
  if (state.n_modes() > aux + 1) {
    std::vector<std::size_t> keep(aux + 1);
    for (std::size_t k = 0; k <= aux; ++k) {
      keep[k] = k;
    }
    state = partial_trace(state, keep);
  }
  state = decode(state, signal_mode, aux, cfg.t_decode, cfg.ports);
  return ProtocolOutput{state, partial_trace(state, {signal_mode}), partial_trace(state, {aux}),
                        partial_trace(state, {signal_mode, aux})};
}

GaussianState GaussianMap::apply(const GaussianState& state) const {
  if (state.n_modes() != 1) {
    throw std::invalid_argument("GaussianMap::apply: single-mode input expected");
  }
  return GaussianState(transfer * state.mean() + offset, transfer * state.cov() * transfer.transpose() + added);
}

GaussianMap pure_loss_map(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("pure_loss_map: eta must lie in [0, 1]");
  }
  return GaussianMap{std::sqrt(eta) * Matrix::Identity(2, 2), (1.0 - eta) * kVacuumVariance * Matrix::Identity(2, 2),
                     Vector::Zero(2)};
}

GaussianMap corrected_map(const ProtocolConfig& cfg) {
  // The pipeline is affine in (mean, cov): probe it with the zero state to
  // read off N and d, and with unit means to read off T.
  const GaussianState zero(Vector::Zero(2), Matrix::Zero(2, 2));
  const GaussianState base = run_protocol(cfg, zero).signal;
  GaussianMap map{Matrix::Zero(2, 2), base.cov(), base.mean()};
  for (Eigen::Index k = 0; k < 2; ++k) {
    Vector e = Vector::Zero(2);
    e(k) = 1.0;
    const GaussianState probe = run_protocol(cfg, GaussianState(e, Matrix::Zero(2, 2))).signal;
    map.transfer.col(k) = probe.mean() - base.mean();
  }
  return map;
}

GaussianState corrected_channel(const ProtocolConfig& cfg, const GaussianState& input) {
  if (input.n_modes() != 1) {
    throw std::invalid_argument("corrected_channel: single-mode input expected");
  }
  return run_protocol(cfg, input).signal;
}

ProtocolConfig uncorrected_config(const ProtocolConfig& base) {
  const double t = physical_transmissivity(1.0, base.ports);
  return ProtocolConfig{t, t, base.channel, base.ports};
}

Matrix feedforward_covariance(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& gain) {
  const Matrix out = a - gain * c.transpose() - c * gain.transpose() + gain * b * gain.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix conditional_covariance(const Matrix& a, const Matrix& c, const Matrix& b) {
  const Matrix out = a - c * b.ldlt().solve(c.transpose());
  return 0.5 * (out + out.transpose());
}

IncoherentOutput incoherent_strategy(const ChannelModel& channel, const GaussianState& input,
                                     FeedforwardGain gain_kind) {
  if (channel.n_channels() != 2) {
    throw std::invalid_argument("incoherent_strategy: two-channel model expected");
  }
  if (input.n_modes() != 1) {
    throw std::invalid_argument("incoherent_strategy: single-mode input expected");
  }
  double cross = 0.0;
  double idle = 0.0;
  for (const NoiseSource& s : channel.sources()) {
    cross += s.coupling[0] * s.coupling[1];
    idle += s.coupling[1] * s.coupling[1];
  }
  if (!(idle > 0.0)) {
    throw std::invalid_argument("incoherent_strategy: no noise couples into the measured channel (g2 = 0)");
  }

  // Modes: 0 signal/channel 1, 1 channel 2 (vacuum in), 2 heterodyne ancilla.
  GaussianState state = tensor(input, vacuum_state(1));
  state = apply_channel(state, {0, 1}, channel);
  state = tensor(state, vacuum_state(1));
  state = apply(beam_splitter(3, 0.5, 1, 2, BeamSplitterConvention::Rotation), state);

  // Outcomes: x of port 1 and p of port 2; each carries channel 2 with weight 1/sqrt(2).
  const std::vector<Eigen::Index> measured{2, 5};
  const Matrix& cov = state.cov();
  const Matrix a = cov.block(0, 0, 2, 2);
  Matrix c(2, 2);
  Matrix b(2, 2);
  for (Eigen::Index u = 0; u < 2; ++u) {
    for (Eigen::Index v = 0; v < 2; ++v) {
      c(u, v) = cov(u, measured[static_cast<std::size_t>(v)]);
      b(u, v) = cov(measured[static_cast<std::size_t>(u)], measured[static_cast<std::size_t>(v)]);
    }
  }
  Vector measured_mean(2);
  measured_mean << state.mean()(measured[0]), state.mean()(measured[1]);

  Matrix gain;
  Matrix out_cov;
  if (gain_kind == FeedforwardGain::NoiseCancelling) {
    gain = std::sqrt(2.0) * (cross / idle) * Matrix::Identity(2, 2);
    out_cov = feedforward_covariance(a, c, b, gain);
  } else {
    gain = c * b.inverse();
    out_cov = conditional_covariance(a, c, b);
  }
  const Vector out_mean = state.mean().head(2) - gain * measured_mean;
  return IncoherentOutput{GaussianState(out_mean, out_cov), gain};
}

}  // namespace cvqec
