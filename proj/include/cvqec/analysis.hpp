#pragma once

// Noise-sweep experiments: variance, fidelity and inseparability against the
// channel excess noise, the entanglement-breaking point, and numeric tuning of
// the splitter settings.

#include <limits>
#include <string>
#include <vector>

#include "cvqec/protocol.hpp"
#include "json.hpp"

namespace cvqec {

/// Evenly spaced points 0 .. eps_max inclusive (a single point is {0}).
std::vector<double> eps_grid(double eps_max, std::size_t steps);

struct SeriesData {
  std::vector<double> var_x_snu;
  std::vector<double> var_p_snu;
  std::vector<double> fidelity;
  std::vector<double> fidelity_displacement_corrected;
  std::vector<double> inseparability;

  void reserve(std::size_t n);
};

/// Series not produced by a sweep are filled with NaN so every series has the
/// axis length.
struct SweepResult {
  std::vector<double> axis;  // eps, SNU of channel 1 excess noise
  SeriesData corrected;
  SeriesData uncorrected;      // signal through channel 1 only
  SeriesData uncorrected_alt;  // signal through channel 2 only
  SeriesData incoherent;
  nlohmann::json metadata;
};

/// Describes the two-channel correlated pair: g1 = g_ratio, g2 = 1.
struct ChannelSettings {
  double g_ratio = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  PortLabel ports = PortLabel::Equation;
};

struct CoherentSweepParams {
  ChannelSettings channel;
  double amplitude_x = 2.0;
  double amplitude_p = 0.0;
  std::vector<double> eps;
};

SweepResult coherent_sweep(const CoherentSweepParams& params);

struct EntanglementSweepParams {
  ChannelSettings channel;
  double r = 0.5;
  std::vector<double> eps;
};

SweepResult entanglement_sweep(const EntanglementSweepParams& params);

enum class Strategy { Corrected, Uncorrected };

struct BreakingPointParams {
  ChannelSettings channel;
  Strategy strategy = Strategy::Uncorrected;
  double r_max = 10.0;
  double eps_max = 1000.0;  // search range; beyond it the channel "never breaks"
  double tolerance = 1e-6;
};

inline constexpr double kNeverBreaks = std::numeric_limits<double>::infinity();

/// Infimum over input squeezing r in [0, r_max] of the inseparability of a
/// two-mode squeezed state with one arm sent through the strategy.
double min_inseparability(const BreakingPointParams& params, double eps_snu);

/// Smallest eps at which min_inseparability >= 2, by bisection; kNeverBreaks
/// if it stays below 2 on [0, eps_max].
double entanglement_breaking_point(const BreakingPointParams& params);

/// Same location from an evenly spaced scan, interpolating linearly inside
/// the first cell that crosses 2.
double entanglement_breaking_point_scan(const BreakingPointParams& params, std::size_t points = 100);

/// Engine-calibrated squeezing so the corrected inseparability at eps = 0
/// equals `target`.
double calibrate_squeezing(const ChannelSettings& channel, double target);

enum class Objective {
  /// Var(out - sqrt(eta) in) for a vacuum probe, above its pure-loss value (SNU).
  ExcessVariance,
  /// Minus the fidelity of a coherent probe with itself after the channel.
  NegativeFidelity,
};

struct OptimizeParams {
  double g1 = 1.0;
  double g2 = 1.0;
  double eps_snu = 10.0;
  double eta = 1.0;
  double xi = 0.0;
  PortLabel ports = PortLabel::Equation;
  Objective objective = Objective::ExcessVariance;
  double amplitude_x = 2.0;
  double amplitude_p = 0.0;
};

struct OptimizeResult {
  double t_encode;
  double t_decode;
  double objective;
};

double splitting_objective(const OptimizeParams& params, double t_encode, double t_decode);

/// Nested golden-section search over (T_e, T_d) in [0, 1]^2.
OptimizeResult optimize_splitting(const OptimizeParams& params);

/// Best point of a points x points grid over [0, 1]^2.
OptimizeResult grid_scan_splitting(const OptimizeParams& params, std::size_t points = 200);

/// Golden-section minimizer on [lo, hi]; endpoints are also evaluated.
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol);

/// eps_snu,var_x_corr_snu,var_p_corr_snu,var_x_uncorr_snu,var_p_uncorr_snu,
/// fid_corr,fid_uncorr,fid_incoh,insep_corr,insep_uncorr
std::string sweep_to_csv(const SweepResult& result);
/// eps_snu,var_x_uncorr_alt_snu,var_p_uncorr_alt_snu,fid_uncorr_alt,insep_uncorr_alt
std::string sweep_alt_to_csv(const SweepResult& result);

const char* to_string(PortLabel ports);
const char* to_string(Objective objective);

}  // namespace cvqec

#include "cvqec/detail/golden_section.hpp"
