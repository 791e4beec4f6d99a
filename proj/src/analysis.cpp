#include "cvqec/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqec/textio.hpp"

namespace cvqec {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ProtocolConfig corrected_config_for(const ChannelSettings& ch, double eps_snu) {
  return optimal_config(ch.g_ratio, 1.0, eps_snu, ch.eta, ch.xi, ch.ports);
}

// Signal through channel 2 only: physical T_e = T_d = 0.
ProtocolConfig channel2_config(const ProtocolConfig& base) {
  const double t = physical_transmissivity(0.0, base.ports);
  return ProtocolConfig{t, t, base.channel, base.ports};
}

GaussianState with_mean_of(const GaussianState& s, const GaussianState& reference) {
  return GaussianState(reference.mean(), s.cov());
}

void record_single(SeriesData& series, const GaussianState& out, const GaussianState& input) {
  series.var_x_snu.push_back(as_snu(quadrature_variance(out, {QuadratureKind::X, 0})));
  series.var_p_snu.push_back(as_snu(quadrature_variance(out, {QuadratureKind::P, 0})));
  series.fidelity.push_back(fidelity(out, input));
  series.fidelity_displacement_corrected.push_back(fidelity(with_mean_of(out, input), input));
  series.inseparability.push_back(kNaN);
}

void record_pair(SeriesData& series, const GaussianState& pair) {
  series.var_x_snu.push_back(as_snu(quadrature_variance(pair, {QuadratureKind::X, 1})));
  series.var_p_snu.push_back(as_snu(quadrature_variance(pair, {QuadratureKind::P, 1})));
  series.fidelity.push_back(kNaN);
  series.fidelity_displacement_corrected.push_back(kNaN);
  series.inseparability.push_back(duan_simon(pair, 0, 1));
}

void fill_nan(SeriesData& series, std::size_t n) {
  series.var_x_snu.assign(n, kNaN);
  series.var_p_snu.assign(n, kNaN);
  series.fidelity.assign(n, kNaN);
  series.fidelity_displacement_corrected.assign(n, kNaN);
  series.inseparability.assign(n, kNaN);
}

nlohmann::json conventions(const ChannelSettings& ch) {
  return {
      {"port_labeling", to_string(ch.ports)},
      {"optimal_transmissivity_quoted", physical_transmissivity(optimal_splitting(ch.g_ratio, 1.0), ch.ports)},
      {"snu", "variance / 0.5 (vacuum quadrature variance, [x,p]=i)"},
      {"noise_axis", "excess noise of channel 1 in SNU at the channel output, before detection"},
      {"g1", ch.g_ratio},
      {"g2", 1.0},
      {"uncorrected", "signal through channel 1 only (physical T_e = T_d = 1)"},
      {"uncorrected_alt", "signal through channel 2 only (physical T_e = T_d = 0)"},
      {"mismatch_model", "fraction xi of each source's power decorrelated between channels"},
      {"inseparability_threshold", 2.0},
  };
}

GaussianState pair_after(const ProtocolConfig& cfg, double r) {
  // Mode 0 is kept, mode 1 travels; the auxiliary port is traced out.
  return partial_trace(run_protocol(cfg, two_mode_squeezed(r), 1).full, {0, 1});
}

ProtocolConfig strategy_config(const ChannelSettings& ch, Strategy strategy, double eps_snu) {
  ProtocolConfig cfg = corrected_config_for(ch, eps_snu);
  return strategy == Strategy::Corrected ? cfg : uncorrected_config(cfg);
}

}  // namespace

std::vector<double> eps_grid(double eps_max, std::size_t steps) {
  if (steps == 0) {
    throw std::invalid_argument("eps_grid: need at least one point");
  }
  if (!(eps_max >= 0.0) || !std::isfinite(eps_max)) {
    throw std::invalid_argument("eps_grid: eps_max must be finite and non-negative");
  }
  std::vector<double> grid(steps, 0.0);
  for (std::size_t k = 1; k < steps; ++k) {
    grid[k] = eps_max * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  return grid;
}

void SeriesData::reserve(std::size_t n) {
  var_x_snu.reserve(n);
  var_p_snu.reserve(n);
  fidelity.reserve(n);
  fidelity_displacement_corrected.reserve(n);
  inseparability.reserve(n);
}

SweepResult coherent_sweep(const CoherentSweepParams& params) {
  if (params.eps.empty()) {
    throw std::invalid_argument("coherent_sweep: empty noise grid");
  }
  if (!std::isfinite(params.amplitude_x) || !std::isfinite(params.amplitude_p)) {
    throw std::invalid_argument("coherent_sweep: amplitudes must be finite");
  }
  const GaussianState input = coherent_state(params.amplitude_x, params.amplitude_p);
  SweepResult result;
  result.axis = params.eps;
  for (SeriesData* s : {&result.corrected, &result.uncorrected, &result.uncorrected_alt, &result.incoherent}) {
    s->reserve(params.eps.size());
  }
  for (double eps : params.eps) {
    const ProtocolConfig cfg = corrected_config_for(params.channel, eps);
    record_single(result.corrected, corrected_channel(cfg, input), input);
    record_single(result.uncorrected, corrected_channel(uncorrected_config(cfg), input), input);
    record_single(result.uncorrected_alt, corrected_channel(channel2_config(cfg), input), input);
    record_single(result.incoherent, incoherent_strategy(cfg.channel, input).signal, input);
  }
  result.metadata = {
      {"sweep", "coherent"},
      {"g_ratio", params.channel.g_ratio},
      {"eta", params.channel.eta},
      {"xi", params.channel.xi},
      {"amplitude", {params.amplitude_x, params.amplitude_p}},
      {"points", params.eps.size()},
      {"fidelity_reference", "original input coherent state, no gain rescaling"},
      {"incoherent_strategy", "heterodyne of channel 2, noise-cancelling feedforward onto channel 1"},
      {"conventions", conventions(params.channel)},
  };
  return result;
}

SweepResult entanglement_sweep(const EntanglementSweepParams& params) {
  if (params.eps.empty()) {
    throw std::invalid_argument("entanglement_sweep: empty noise grid");
  }
  SweepResult result;
  result.axis = params.eps;
  for (SeriesData* s : {&result.corrected, &result.uncorrected, &result.uncorrected_alt}) {
    s->reserve(params.eps.size());
  }
  for (double eps : params.eps) {
    const ProtocolConfig cfg = corrected_config_for(params.channel, eps);
    record_pair(result.corrected, pair_after(cfg, params.r));
    record_pair(result.uncorrected, pair_after(uncorrected_config(cfg), params.r));
    record_pair(result.uncorrected_alt, pair_after(channel2_config(cfg), params.r));
  }
  fill_nan(result.incoherent, params.eps.size());
  result.metadata = {
      {"sweep", "entanglement"},
      {"r", params.r},
      {"g_ratio", params.channel.g_ratio},
      {"eta", params.channel.eta},
      {"xi", params.channel.xi},
      {"points", params.eps.size()},
      {"inseparability", "Var(x_A - x_B) + Var(p_A + p_B), natural units; < 2 certifies entanglement"},
      {"conventions", conventions(params.channel)},
  };
  return result;
}

double min_inseparability(const BreakingPointParams& params, double eps_snu) {
  const ProtocolConfig cfg = strategy_config(params.channel, params.strategy, eps_snu);
  auto insep = [&](double r) { return duan_simon(pair_after(cfg, r), 0, 1); };
  const double r = golden_section_minimize(insep, 0.0, params.r_max, 1e-9);
  return insep(r);
}

double entanglement_breaking_point(const BreakingPointParams& params) {
  auto f = [&](double eps) { return min_inseparability(params, eps) - 2.0; };
  if (f(0.0) >= 0.0) {
    return 0.0;
  }
  if (f(params.eps_max) < 0.0) {
    return kNeverBreaks;
  }
  double lo = 0.0;
  double hi = params.eps_max;
  while (hi - lo > params.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double entanglement_breaking_point_scan(const BreakingPointParams& params, std::size_t points) {
  if (points < 2) {
    throw std::invalid_argument("entanglement_breaking_point_scan: need at least two points");
  }
  const std::vector<double> grid = eps_grid(params.eps_max, points);
  double prev = min_inseparability(params, grid[0]) - 2.0;
  if (prev >= 0.0) {
    return 0.0;
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = min_inseparability(params, grid[k]) - 2.0;
    if (cur >= 0.0) {
      return grid[k - 1] + (grid[k] - grid[k - 1]) * (-prev) / (cur - prev);
    }
    prev = cur;
  }
  return kNeverBreaks;
}

double calibrate_squeezing(const ChannelSettings& channel, double target) {
  const ProtocolConfig cfg = corrected_config_for(channel, 0.0);
  auto insep = [&](double r) { return duan_simon(pair_after(cfg, r), 0, 1); };
  const double r_best = golden_section_minimize(insep, 0.0, 10.0, 1e-10);
  if (insep(r_best) > target) {
    throw std::invalid_argument("calibrate_squeezing: target inseparability unreachable at this loss");
  }
  double lo = 0.0;
  double hi = r_best;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (insep(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double splitting_objective(const OptimizeParams& params, double t_encode, double t_decode) {
  const ProtocolConfig cfg{t_encode, t_decode,
                           correlated_pair(params.g1, params.g2, params.eps_snu, params.eta, params.xi), params.ports};
  const GaussianMap map = corrected_map(cfg);
  if (params.objective == Objective::NegativeFidelity) {
    const GaussianState probe = coherent_state(params.amplitude_x, params.amplitude_p);
    return -fidelity(map.apply(probe), probe);
  }
  const Matrix sigma = kVacuumVariance * Matrix::Identity(2, 2);
  const double root_eta = std::sqrt(params.eta);
  const Matrix cross = map.transfer * sigma;
  const Matrix err = map.transfer * sigma * map.transfer.transpose() + map.added -
                     root_eta * (cross + cross.transpose()) + params.eta * sigma;
  const double ideal = (1.0 - params.eta) * kVacuumVariance;
  return as_snu(0.5 * err.trace() - ideal);
}

OptimizeResult optimize_splitting(const OptimizeParams& params) {
  constexpr double kTol = 1e-10;
  auto inner = [&](double t_decode) {
    return golden_section_minimize([&](double te) { return splitting_objective(params, te, t_decode); }, 0.0, 1.0,
                                   kTol);
  };
  const double t_decode = golden_section_minimize(
      [&](double td) { return splitting_objective(params, inner(td), td); }, 0.0, 1.0, kTol);
  const double t_encode = inner(t_decode);
  return OptimizeResult{t_encode, t_decode, splitting_objective(params, t_encode, t_decode)};
}

OptimizeResult grid_scan_splitting(const OptimizeParams& params, std::size_t points) {
  if (points < 2) {
    throw std::invalid_argument("grid_scan_splitting: need at least two points per axis");
  }
  OptimizeResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  const double step = 1.0 / static_cast<double>(points - 1);
  for (std::size_t a = 0; a < points; ++a) {
    for (std::size_t b = 0; b < points; ++b) {
      const double te = static_cast<double>(a) * step;
      const double td = static_cast<double>(b) * step;
      const double v = splitting_objective(params, te, td);
      if (v < best.objective) {
        best = {te, td, v};
      }
    }
  }
  return best;
}

std::string sweep_to_csv(const SweepResult& r) {
  std::string out =
      "eps_snu,var_x_corr_snu,var_p_corr_snu,var_x_uncorr_snu,var_p_uncorr_snu,fid_corr,fid_uncorr,fid_incoh,"
      "insep_corr,insep_uncorr\n";
  for (std::size_t k = 0; k < r.axis.size(); ++k) {
    const double row[] = {r.axis[k],
                          r.corrected.var_x_snu[k],
                          r.corrected.var_p_snu[k],
                          r.uncorrected.var_x_snu[k],
                          r.uncorrected.var_p_snu[k],
                          r.corrected.fidelity[k],
                          r.uncorrected.fidelity[k],
                          r.incoherent.fidelity[k],
                          r.corrected.inseparability[k],
                          r.uncorrected.inseparability[k]};
    for (std::size_t c = 0; c < std::size(row); ++c) {
      if (c > 0) {
        out += ',';
      }
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string sweep_alt_to_csv(const SweepResult& r) {
  std::string out = "eps_snu,var_x_uncorr_alt_snu,var_p_uncorr_alt_snu,fid_uncorr_alt,insep_uncorr_alt\n";
  for (std::size_t k = 0; k < r.axis.size(); ++k) {
    out += format_double(r.axis[k]) + ',' + format_double(r.uncorrected_alt.var_x_snu[k]) + ',' +
           format_double(r.uncorrected_alt.var_p_snu[k]) + ',' + format_double(r.uncorrected_alt.fidelity[k]) + ',' +
           format_double(r.uncorrected_alt.inseparability[k]) + '\n';
  }
  return out;
}

const char* to_string(PortLabel ports) { return ports == PortLabel::Equation ? "equation" : "complementary"; }

const char* to_string(Objective objective) {
  return objective == Objective::ExcessVariance ? "excess" : "neg-fidelity";
}

}  // namespace cvqec
