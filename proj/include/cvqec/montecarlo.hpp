#pragma once

// Shot-by-shot sampling of the encode / channel / decode amplitudes. Used to
// render quadrature time traces and to cross-check the covariance engine at
// the level of second moments.

#include <cstdint>
#include <string>
#include <vector>

#include "cvqec/gaussian.hpp"
#include "cvqec/protocol.hpp"

namespace cvqec {

/// Counter-based generator: output k of stream s under seed S is
/// splitmix64_mix(key(S, s) + (k + 1) * 0x9E3779B97F4A7C15), with
/// key(S, s) = splitmix64_mix(S ^ splitmix64_mix(s + 0x632BE59BD9B4E019)).
/// Normals come from Box-Muller on 53-bit uniforms in (0, 1).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();  // open interval (0, 1)
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Distribution of the classical noise variables; all have zero mean and the
/// configured variance.
enum class NoiseDistribution { Gaussian, Uniform, TwoPoint };

enum class Stage { Input, Channel1, Channel2, Corrected, Discarded };

const char* stage_name(Stage s);

struct TraceRecord {
  Stage stage;
  QuadratureKind quadrature;
  std::vector<double> samples;
  std::uint64_t seed;
  std::uint64_t dt_index;  // sample counter of samples[0]
};

struct SampleOptions {
  NoiseDistribution distribution = NoiseDistribution::Gaussian;
  /// Optional sinusoidal x-displacement of the input, for display runs.
  double modulation_amplitude = 0.0;
  double modulation_period = 1000.0;
};

/// One record per (stage, quadrature), stages in enum order, X before P.
std::vector<TraceRecord> sample_run(const ProtocolConfig& cfg, const GaussianState& input, std::size_t n,
                                    std::uint64_t seed, const SampleOptions& options = {});

const TraceRecord& find_record(const std::vector<TraceRecord>& records, Stage stage, QuadratureKind q);

struct EmpiricalCovariance {
  Matrix cov;             // unbiased sample covariance
  Matrix standard_error;  // per-entry standard error of cov
  Vector mean;
};

/// Treats each record as one variable; all records must have equal length >= 2.
EmpiricalCovariance empirical_covariance(const std::vector<const TraceRecord*>& records);
EmpiricalCovariance empirical_covariance(const std::vector<TraceRecord>& records);

/// Largest |empirical - analytic| / SE over all entries; entries with zero SE
/// must match to 1e-12 or the result is +inf.
double max_standardized_deviation(const EmpiricalCovariance& emp, const Matrix& analytic);

/// stage,quadrature,index,value with a header row and LF endings.
std::string traces_to_csv(const std::vector<TraceRecord>& records);

}  // namespace cvqec
