#include "cvqec/channel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cvqec/textio.hpp"

namespace cvqec {

ChannelModel::ChannelModel(std::vector<double> eta, std::vector<double> thermal_occupation,
                           std::vector<NoiseSource> sources, double mismatch)
    : eta_(std::move(eta)), thermal_(std::move(thermal_occupation)), sources_(std::move(sources)), mismatch_(mismatch) {
  if (eta_.empty()) {
    throw std::invalid_argument("ChannelModel: need at least one channel");
  }
  if (thermal_.size() != eta_.size()) {
    throw std::invalid_argument("ChannelModel: thermal occupation list length must equal channel count");
  }
  for (double e : eta_) {
    if (!(e > 0.0 && e <= 1.0)) {
      throw std::invalid_argument("ChannelModel: transmissivity must lie in (0, 1]");
    }
  }
  for (double n : thermal_) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("ChannelModel: thermal occupation must be finite and non-negative");
    }
  }
  if (!(mismatch_ >= 0.0 && mismatch_ < 1.0)) {
    throw std::invalid_argument("ChannelModel: mismatch must lie in [0, 1)");
  }
  for (const NoiseSource& s : sources_) {
    if (s.coupling.size() != eta_.size()) {
      throw std::invalid_argument("ChannelModel: source '" + s.label + "' coupling length must equal channel count");
    }
    if (!(s.variance >= 0.0) || !std::isfinite(s.variance)) {
      throw std::invalid_argument("ChannelModel: source '" + s.label + "' variance must be finite and non-negative");
    }
    for (double c : s.coupling) {
      if (!std::isfinite(c)) {
        throw std::invalid_argument("ChannelModel: source '" + s.label + "' has non-finite coupling");
      }
    }
  }
}

ChannelModel ChannelModel::uniform(std::size_t n_channels, double eta, std::vector<NoiseSource> sources,
                                   double mismatch) {
  return ChannelModel(std::vector<double>(n_channels, eta), std::vector<double>(n_channels, 0.0), std::move(sources),
                      mismatch);
}

Matrix ChannelModel::classical_noise_cov() const {
  const auto n = static_cast<Eigen::Index>(n_channels());
  Matrix amp = Matrix::Zero(n, n);
  for (const NoiseSource& s : sources_) {
    const Vector c = Eigen::Map<const Vector>(s.coupling.data(), n);
    amp += s.variance * (1.0 - mismatch_) * (c * c.transpose());
    amp.diagonal() += s.variance * mismatch_ * c.cwiseProduct(c);
  }
  return lift_passive(amp);
}

ChannelModel with_mismatch(const ChannelModel& model, double xi) {
  if (!(xi >= 0.0 && xi < 1.0)) {
    throw std::invalid_argument("with_mismatch: xi must lie in [0, 1)");
  }
  return ChannelModel(model.eta(), model.thermal_occupation(), model.sources(), xi);
}

GaussianState apply_channel(const GaussianState& state, const std::vector<std::size_t>& channel_map,
                            const ChannelModel& model) {
  if (channel_map.size() != model.n_channels()) {
    throw std::invalid_argument("apply_channel: channel map length must equal channel count");
  }
  const std::size_t n_modes = state.n_modes();
  std::vector<bool> used(n_modes, false);
  for (std::size_t m : channel_map) {
    if (m >= n_modes || used[m]) {
      throw std::invalid_argument("apply_channel: channel map must name distinct modes of the state");
    }
    used[m] = true;
  }

  // x -> K x with K = sqrt(eta) on channel modes; the environment adds
  // (1 - eta)(1/2 + n_th) per quadrature.
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  Vector scale = Vector::Ones(dim);
  Matrix added = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < channel_map.size(); ++k) {
    const auto m = static_cast<Eigen::Index>(channel_map[k]);
    const double eta = model.eta()[k];
    const double env = (1.0 - eta) * (kVacuumVariance + model.thermal_occupation()[k]);
    scale.segment<2>(2 * m).setConstant(std::sqrt(eta));
    added(2 * m, 2 * m) += env;
    added(2 * m + 1, 2 * m + 1) += env;
  }
  const Matrix classical = model.classical_noise_cov();
  for (std::size_t a = 0; a < channel_map.size(); ++a) {
    for (std::size_t b = 0; b < channel_map.size(); ++b) {
      const auto ma = static_cast<Eigen::Index>(channel_map[a]);
      const auto mb = static_cast<Eigen::Index>(channel_map[b]);
      added.block<2, 2>(2 * ma, 2 * mb) +=
          classical.block<2, 2>(2 * static_cast<Eigen::Index>(a), 2 * static_cast<Eigen::Index>(b));
    }
  }

  const Matrix cov = scale.asDiagonal() * state.cov() * scale.asDiagonal();
  const Vector mean = scale.cwiseProduct(state.mean());
  return add_noise(GaussianState(mean, cov), added);
}

double excess_noise_snu(const ChannelModel& model, std::size_t channel) {
  if (channel >= model.n_channels()) {
    throw std::invalid_argument("excess_noise_snu: channel out of range");
  }
  double v = 0.0;
  for (const NoiseSource& s : model.sources()) {
    v += s.variance * s.coupling[channel] * s.coupling[channel];
  }
  return as_snu(v);
}

ChannelModel correlated_pair(double g1, double g2, double eps_snu, double eta, double mismatch) {
  if (!(g1 > 0.0) || !(g2 >= 0.0)) {
    throw std::invalid_argument("correlated_pair: need g1 > 0 and g2 >= 0");
  }
  if (!(eps_snu >= 0.0)) {
    throw std::invalid_argument("correlated_pair: excess noise must be non-negative");
  }
  NoiseSource src{{std::sqrt(g1), std::sqrt(g2)}, from_snu(eps_snu) / g1, "correlated"};
  return ChannelModel::uniform(2, eta, {src}, mismatch);
}

std::string dump_channel_config(const ChannelModel& model) {
  std::ostringstream out;
  out << "# channel model\n";
  out << "n_channels = " << model.n_channels() << "\n";
  out << "eta = " << format_list(model.eta()) << "\n";
  out << "thermal = " << format_list(model.thermal_occupation()) << "\n";
  out << "mismatch = " << format_double(model.mismatch()) << "\n";
  for (const NoiseSource& s : model.sources()) {
    out << "\n[source]\n";
    out << "label = " << s.label << "\n";
    out << "coupling = " << format_list(s.coupling) << "\n";
    out << "variance = " << format_double(s.variance) << "\n";
  }
  return out.str();
}

ChannelModel parse_channel_config(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_channels = 0;
  std::vector<double> eta;
  std::vector<double> thermal;
  double mismatch = 0.0;
  std::vector<NoiseSource> sources;
  bool in_source = false;

  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("channel config line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(strip_comment(line));
    if (stripped.empty()) {
      continue;
    }
    if (stripped == "[source]") {
      sources.push_back(NoiseSource{});
      in_source = true;
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail("expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (in_source) {
        NoiseSource& s = sources.back();
        if (key == "label") {
          s.label = value;
        } else if (key == "coupling") {
          s.coupling = parse_list(value);
        } else if (key == "variance") {
          s.variance = parse_double(value);
        } else {
          fail("unknown source key '" + key + "'");
        }
      } else if (key == "n_channels") {
        n_channels = static_cast<std::size_t>(std::stoul(value));
      } else if (key == "eta") {
        eta = parse_list(value);
      } else if (key == "thermal") {
        thermal = parse_list(value);
      } else if (key == "mismatch") {
        mismatch = parse_double(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      fail("cannot parse value for '" + key + "'");
    }
  }
  if (n_channels == 0) {
    throw std::invalid_argument("channel config: n_channels missing or zero");
  }
  // Scalars broadcast over channels.
  if (eta.size() == 1) {
    eta.assign(n_channels, eta.front());
  }
  if (thermal.empty()) {
    thermal.assign(n_channels, 0.0);
  } else if (thermal.size() == 1) {
    thermal.assign(n_channels, thermal.front());
  }
  if (eta.size() != n_channels) {
    throw std::invalid_argument("channel config: eta must list one value or n_channels values");
  }
  return ChannelModel(eta, thermal, sources, mismatch);
}

}  // namespace cvqec
