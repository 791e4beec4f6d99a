#include "cvqec/montecarlo.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cvqec/textio.hpp"

namespace cvqec {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(seed ^ splitmix64_mix(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double CounterRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Input:
      return "input";
    case Stage::Channel1:
      return "channel_1";
    case Stage::Channel2:
      return "channel_2";
    case Stage::Corrected:
      return "corrected";
    case Stage::Discarded:
      return "discarded";
  }
  return "?";
}

namespace {

constexpr std::array<Stage, 5> kStages{Stage::Input, Stage::Channel1, Stage::Channel2, Stage::Corrected,
                                       Stage::Discarded};

double draw_classical(CounterRng& rng, NoiseDistribution dist) {
  switch (dist) {
    case NoiseDistribution::Gaussian:
      return rng.normal();
    case NoiseDistribution::Uniform:
      return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case NoiseDistribution::TwoPoint:
      return (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
  }
  return 0.0;
}

// Reflection-convention splitter amplitudes for one quadrature.
std::array<double, 2> split(double t, double first, double second) {
  const double a = std::sqrt(t);
  const double b = std::sqrt(1.0 - t);
  return {a * first - b * second, -b * first - a * second};
}

}  // namespace

std::vector<TraceRecord> sample_run(const ProtocolConfig& cfg, const GaussianState& input, std::size_t n,
                                    std::uint64_t seed, const SampleOptions& options) {
  cfg.validate();
  if (n == 0) {
    throw std::invalid_argument("sample_run: need at least one shot");
  }
  if (input.n_modes() != 1) {
    throw std::invalid_argument("sample_run: single-mode input expected");
  }
  const ChannelModel& ch = cfg.channel;
  const double t_enc = physical_transmissivity(cfg.t_encode, cfg.ports);
  const double t_dec = physical_transmissivity(cfg.t_decode, cfg.ports);
  const Eigen::LLT<Eigen::Matrix2d> chol(Eigen::Matrix2d(input.cov()));
  if (chol.info() != Eigen::Success) {
    throw std::invalid_argument("sample_run: input covariance must be positive definite");
  }
  const Eigen::Matrix2d input_factor = chol.matrixL();
  const double xi = ch.mismatch();

  std::vector<TraceRecord> records;
  for (Stage s : kStages) {
    for (QuadratureKind q : {QuadratureKind::X, QuadratureKind::P}) {
      records.push_back(TraceRecord{s, q, std::vector<double>(n), seed, 0});
    }
  }

  const std::size_t n_src = ch.sources().size();
  std::vector<double> shared(n_src);
  for (std::size_t shot = 0; shot < n; ++shot) {
    CounterRng rng(seed, shot);
    Eigen::Vector2d in = input.mean();
    if (options.modulation_amplitude != 0.0) {
      in(0) += options.modulation_amplitude *
               std::sin(2.0 * std::numbers::pi * static_cast<double>(shot) / options.modulation_period);
    }
    in += input_factor * Eigen::Vector2d(rng.normal(), rng.normal());

    std::array<Eigen::Vector2d, 2> out_channel;
    std::array<Eigen::Vector2d, 2> decoded;
    for (int q = 0; q < 2; ++q) {
      const double aux = std::sqrt(kVacuumVariance) * rng.normal();
      const auto encoded = split(t_enc, in(q), aux);
      for (std::size_t s = 0; s < n_src; ++s) {
        shared[s] = std::sqrt(ch.sources()[s].variance) * draw_classical(rng, options.distribution);
      }
      for (std::size_t k = 0; k < 2; ++k) {
        const double eta = ch.eta()[k];
        const double env = std::sqrt(kVacuumVariance + ch.thermal_occupation()[k]) * rng.normal();
        double noise = 0.0;
        for (std::size_t s = 0; s < n_src; ++s) {
          const NoiseSource& src = ch.sources()[s];
          const double own = std::sqrt(src.variance) * draw_classical(rng, options.distribution);
          noise += src.coupling[k] * (std::sqrt(1.0 - xi) * shared[s] + std::sqrt(xi) * own);
        }
        out_channel[k](q) = std::sqrt(eta) * encoded[k] + std::sqrt(1.0 - eta) * env + noise;
      }
      const auto dec = split(t_dec, out_channel[0](q), out_channel[1](q));
      decoded[0](q) = dec[0];
      decoded[1](q) = dec[1];
    }
    const std::array<Eigen::Vector2d, 5> values{in, out_channel[0], out_channel[1], decoded[0], decoded[1]};
    for (std::size_t st = 0; st < kStages.size(); ++st) {
      records[2 * st].samples[shot] = values[st](0);
      records[2 * st + 1].samples[shot] = values[st](1);
    }
  }
  return records;
}

const TraceRecord& find_record(const std::vector<TraceRecord>& records, Stage stage, QuadratureKind q) {
  for (const TraceRecord& r : records) {
    if (r.stage == stage && r.quadrature == q) {
      return r;
    }
  }
  throw std::invalid_argument(std::string("find_record: no record for stage ") + stage_name(stage));
}

EmpiricalCovariance empirical_covariance(const std::vector<const TraceRecord*>& records) {
  if (records.empty()) {
    throw std::invalid_argument("empirical_covariance: no records");
  }
  const std::size_t n = records.front()->samples.size();
  for (const TraceRecord* r : records) {
    if (r->samples.size() != n) {
      throw std::invalid_argument("empirical_covariance: records differ in length");
    }
  }
  if (n < 2) {
    throw std::invalid_argument("empirical_covariance: need at least two samples");
  }
  const auto k = static_cast<Eigen::Index>(records.size());
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix data(rows, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    data.col(c) = Eigen::Map<const Vector>(records[static_cast<std::size_t>(c)]->samples.data(), rows);
  }
  EmpiricalCovariance out;
  out.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - out.mean.transpose();
  const double dn = static_cast<double>(n);
  out.cov = centered.transpose() * centered / (dn - 1.0);
  out.standard_error = Matrix::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const Vector prod = centered.col(a).cwiseProduct(centered.col(b));
      const double m = prod.mean();
      const double var = (prod.array() - m).square().sum() / (dn - 1.0);
      out.standard_error(a, b) = out.standard_error(b, a) = std::sqrt(var / dn);
    }
  }
  return out;
}

EmpiricalCovariance empirical_covariance(const std::vector<TraceRecord>& records) {
  std::vector<const TraceRecord*> ptrs;
  for (const TraceRecord& r : records) {
    ptrs.push_back(&r);
  }
  return empirical_covariance(ptrs);
}

double max_standardized_deviation(const EmpiricalCovariance& emp, const Matrix& analytic) {
  if (analytic.rows() != emp.cov.rows() || analytic.cols() != emp.cov.cols()) {
    throw std::invalid_argument("max_standardized_deviation: dimension mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index a = 0; a < analytic.rows(); ++a) {
    for (Eigen::Index b = 0; b < analytic.cols(); ++b) {
      const double diff = std::abs(emp.cov(a, b) - analytic(a, b));
      const double se = emp.standard_error(a, b);
      if (se > 0.0) {
        worst = std::max(worst, diff / se);
      } else if (diff > 1e-12) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return worst;
}

std::string traces_to_csv(const std::vector<TraceRecord>& records) {
  std::string out = "stage,quadrature,index,value\n";
  for (const TraceRecord& r : records) {
    const char* q = r.quadrature == QuadratureKind::X ? "x" : "p";
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      out += stage_name(r.stage);
      out += ',';
      out += q;
      out += ',';
      out += std::to_string(r.dt_index + k);
      out += ',';
      out += format_double(r.samples[k]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace cvqec
