#include "cvqec/network.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cvqec/channel.hpp"
#include "cvqec/textio.hpp"

namespace cvqec {
namespace {

constexpr double kRankTolerance = 1e-10;

// Folds an angle into (-pi, pi].
double wrap_angle(double phi) {
  double w = std::remainder(phi, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) {
    w += 2.0 * std::numbers::pi;
  }
  return w;
}

bool is_pi(double phi) { return std::abs(std::abs(wrap_angle(phi)) - std::numbers::pi) < 1e-12; }

// Collapses sign flips (PS by pi) by carrying them forward until an element
// that touches the same mode, and drops zero phases.
std::vector<NetworkElement> fold_flips(std::size_t n, const std::vector<NetworkElement>& in) {
  std::vector<NetworkElement> out;
  std::vector<bool> pending(n, false);
  auto flush = [&](std::size_t m) {
    if (pending[m]) {
      out.push_back(NetworkElement::phase_shift(m, std::numbers::pi));
      pending[m] = false;
    }
  };
  for (const NetworkElement& e : in) {
    if (e.kind == NetworkElement::Kind::PhaseShift) {
      if (is_pi(e.value)) {
        pending[e.i] = !pending[e.i];
      } else if (std::abs(wrap_angle(e.value)) > 0.0) {
        flush(e.i);
        out.push_back(e);
      }
    } else {
      flush(e.i);
      flush(e.j);
      out.push_back(e);
    }
  }
  for (std::size_t m = 0; m < n; ++m) {
    flush(m);
  }
  return out;
}

Matrix element_matrix(std::size_t n, const NetworkElement& e) {
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix m = Matrix::Identity(dim, dim);
  const auto i = static_cast<Eigen::Index>(e.i);
  if (e.kind == NetworkElement::Kind::PhaseShift) {
    if (std::abs(std::sin(e.value)) > 1e-12) {
      throw std::invalid_argument("recompose: phase " + format_double(e.value) + " has no real representation");
    }
    m(i, i) = std::cos(e.value) > 0.0 ? 1.0 : -1.0;
  } else {
    const auto j = static_cast<Eigen::Index>(e.j);
    const double t = std::sqrt(e.value);
    const double r = std::sqrt(1.0 - e.value);
    m(i, i) = t;
    m(i, j) = -r;
    m(j, i) = r;
    m(j, j) = t;
  }
  return m;
}

}  // namespace

NoisePatternSet::NoisePatternSet(std::vector<std::vector<double>> patterns) : patterns_(std::move(patterns)) {
  if (patterns_.empty()) {
    throw std::invalid_argument("NoisePatternSet: need at least one pattern");
  }
  n_channels_ = patterns_.front().size();
  if (n_channels_ == 0) {
    throw std::invalid_argument("NoisePatternSet: patterns must be non-empty vectors");
  }
  for (const auto& p : patterns_) {
    if (p.size() != n_channels_) {
      throw std::invalid_argument("NoisePatternSet: all patterns must have the same length");
    }
    for (double v : p) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("NoisePatternSet: non-finite pattern entry");
      }
    }
  }
}

NoisePatternSet NoisePatternSet::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> patterns;
  while (std::getline(in, line)) {
    const std::string stripped = trim(strip_comment(line));
    if (!stripped.empty()) {
      patterns.push_back(parse_list(stripped));
    }
  }
  return NoisePatternSet(std::move(patterns));
}

Vector null_space_encoder(const NoisePatternSet& patterns) {
  const auto n = static_cast<Eigen::Index>(patterns.n_channels());
  // Modified Gram-Schmidt over the patterns, with one reorthogonalization pass.
  std::vector<Vector> basis;
  for (const auto& p : patterns.patterns()) {
    Vector v = Eigen::Map<const Vector>(p.data(), n);
    const double norm0 = v.norm();
    if (norm0 == 0.0) {
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) {
        v -= q.dot(v) * q;
      }
    }
    if (v.norm() > kRankTolerance * norm0) {
      basis.push_back(v.normalized());
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector v = Vector::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) {
        v -= q.dot(v) * q;
      }
    }
    if (v.norm() > kRankTolerance) {
      v.normalize();
      for (Eigen::Index c = 0; c < n; ++c) {
        if (std::abs(v(c)) > kRankTolerance) {
          if (v(c) < 0.0) {
            v = -v;
          }
          break;
        }
      }
      return v;
    }
  }
  throw NoProtectedSubspace("noise patterns span all " + std::to_string(n) + " channels; no protected mode exists");
}

Matrix complete_basis(const Vector& first_column) {
  const Eigen::Index n = first_column.size();
  if (std::abs(first_column.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("complete_basis: vector must be unit-norm");
  }
  const Vector w = first_column - Vector::Unit(n, 0);
  const double w2 = w.squaredNorm();
  if (w2 < 1e-28) {
    return Matrix::Identity(n, n);
  }
  return Matrix::Identity(n, n) - 2.0 * w * w.transpose() / w2;
}

std::size_t NetworkPlan::beam_splitter_count() const {
  std::size_t count = 0;
  for (const auto& e : elements) {
    count += e.kind == NetworkElement::Kind::BeamSplitter ? 1 : 0;
  }
  return count;
}

std::uint64_t matrix_checksum(const Matrix& m) {
  std::string text;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      text += format_double(m(r, c));
      text += ' ';
    }
  }
  return fnv1a64(text);
}

NetworkPlan decompose_network(const Matrix& u) {
  const Eigen::Index n = u.rows();
  if (n == 0 || u.cols() != n) {
    throw std::invalid_argument("decompose_network: square matrix expected");
  }
  if ((u.transpose() * u - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("decompose_network: matrix is not orthogonal");
  }

  // G_k ... G_1 U = D with each G a rotation on adjacent rows (r-1, r) chosen
  // so cos >= 0, hence U = G_1^T ... G_k^T D.
  struct Rotation {
    Eigen::Index row;
    double c;
    double s;
  };
  std::vector<Rotation> rotations;
  Matrix a = u;
  for (Eigen::Index col = 0; col + 1 < n; ++col) {
    for (Eigen::Index row = n - 1; row > col; --row) {
      const double top = a(row - 1, col);
      const double bottom = a(row, col);
      if (std::abs(bottom) < 1e-15) {
        continue;
      }
      const double r = std::hypot(top, bottom) * (top < 0.0 ? -1.0 : 1.0);
      const double c = top / r;
      const double s = bottom / r;
      const Eigen::RowVectorXd upper = a.row(row - 1);
      const Eigen::RowVectorXd lower = a.row(row);
      a.row(row - 1) = c * upper + s * lower;
      a.row(row) = -s * upper + c * lower;
      a(row, col) = 0.0;
      rotations.push_back({row, c, s});
    }
  }

  std::vector<NetworkElement> raw;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (a(k, k) < 0.0) {
      raw.push_back(NetworkElement::phase_shift(static_cast<std::size_t>(k), std::numbers::pi));
    }
  }
  for (auto it = rotations.rbegin(); it != rotations.rend(); ++it) {
    // G^T = [[c, -s], [s, c]] is a beam splitter with T = c^2 when s >= 0;
    // otherwise conjugate by a flip of the second mode.
    const auto i = static_cast<std::size_t>(it->row - 1);
    const auto j = static_cast<std::size_t>(it->row);
    const double t = std::min(1.0, it->c * it->c);
    if (it->s < 0.0) {
      raw.push_back(NetworkElement::phase_shift(j, std::numbers::pi));
      raw.push_back(NetworkElement::beam_splitter(i, j, t));
      raw.push_back(NetworkElement::phase_shift(j, std::numbers::pi));
    } else {
      raw.push_back(NetworkElement::beam_splitter(i, j, t));
    }
  }
  NetworkPlan plan;
  plan.n = static_cast<std::size_t>(n);
  plan.elements = fold_flips(plan.n, raw);
  plan.target_checksum = matrix_checksum(u);
  return plan;
}

Matrix recompose(const NetworkPlan& plan) {
  const auto n = static_cast<Eigen::Index>(plan.n);
  Matrix m = Matrix::Identity(n, n);
  for (const NetworkElement& e : plan.elements) {
    m = element_matrix(plan.n, e) * m;
  }
  return m;
}

NetworkPlan inverse_plan(const NetworkPlan& plan) {
  std::vector<NetworkElement> raw;
  for (auto it = plan.elements.rbegin(); it != plan.elements.rend(); ++it) {
    if (it->kind == NetworkElement::Kind::PhaseShift) {
      raw.push_back(NetworkElement::phase_shift(it->i, wrap_angle(-it->value)));
    } else {
      raw.push_back(NetworkElement::phase_shift(it->j, std::numbers::pi));
      raw.push_back(*it);
      raw.push_back(NetworkElement::phase_shift(it->j, std::numbers::pi));
    }
  }
  NetworkPlan inv;
  inv.n = plan.n;
  inv.elements = fold_flips(plan.n, raw);
  inv.target_checksum = matrix_checksum(recompose(plan).transpose());
  return inv;
}

std::string serialize_plan(const NetworkPlan& plan) {
  std::ostringstream out;
  out << "# network plan\n";
  out << "N " << plan.n << "\n";
  out << "CHECKSUM " << hex64(plan.target_checksum) << "\n";
  for (const NetworkElement& e : plan.elements) {
    if (e.kind == NetworkElement::Kind::BeamSplitter) {
      out << "BS " << e.i << ' ' << e.j << ' ' << format_double(e.value) << "\n";
    } else {
      out << "PS " << e.i << ' ' << format_double(e.value) << "\n";
    }
  }
  return out.str();
}

NetworkPlan parse_plan(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  NetworkPlan plan;
  bool have_n = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(strip_comment(line));
    if (stripped.empty()) {
      continue;
    }
    std::istringstream fields(stripped);
    std::string tag;
    fields >> tag;
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("network plan line " + std::to_string(line_no) + ": " + msg);
    };
    auto index = [&]() {
      long long v = -1;
      if (!(fields >> v) || v < 0 || (have_n && static_cast<std::size_t>(v) >= plan.n)) {
        fail("bad mode index");
      }
      return static_cast<std::size_t>(v);
    };
    auto number = [&]() {
      std::string tok;
      if (!(fields >> tok)) {
        fail("missing value");
      }
      return parse_double(tok);
    };
    if (tag == "N") {
      long long v = 0;
      if (!(fields >> v) || v <= 0) {
        fail("bad N");
      }
      plan.n = static_cast<std::size_t>(v);
      have_n = true;
    } else if (tag == "CHECKSUM") {
      std::string hex;
      fields >> hex;
      plan.target_checksum = std::stoull(hex, nullptr, 16);
    } else if (tag == "BS" || tag == "PS") {
      if (!have_n) {
        fail("element before N header");
      }
      if (tag == "BS") {
        const std::size_t i = index();
        const std::size_t j = index();
        const double t = number();
        if (i == j || !(t >= 0.0 && t <= 1.0)) {
          fail("invalid beam splitter");
        }
        plan.elements.push_back(NetworkElement::beam_splitter(i, j, t));
      } else {
        const std::size_t i = index();
        plan.elements.push_back(NetworkElement::phase_shift(i, number()));
      }
    } else {
      fail("unknown tag '" + tag + "'");
    }
    std::string extra;
    if (fields >> extra) {
      fail("trailing tokens");
    }
  }
  if (!have_n) {
    throw std::invalid_argument("network plan: missing N header");
  }
  return plan;
}

GaussianState apply_plan(const GaussianState& state, const NetworkPlan& plan, const std::vector<std::size_t>& modes) {
  if (modes.size() != plan.n) {
    throw std::invalid_argument("apply_plan: mode list length must equal plan size");
  }
  GaussianState out = state;
  for (const NetworkElement& e : plan.elements) {
    if (e.kind == NetworkElement::Kind::BeamSplitter) {
      out = apply(beam_splitter(out.n_modes(), e.value, modes[e.i], modes[e.j], BeamSplitterConvention::Rotation),
                  out);
    } else {
      out = apply(phase_shift(out.n_modes(), e.value, modes[e.i]), out);
    }
  }
  return out;
}

NChannelOutput n_channel_protocol(const NoisePatternSet& patterns, double eta, const std::vector<double>& variances,
                                  const GaussianState& input, double mismatch) {
  if (input.n_modes() != 1) {
    throw std::invalid_argument("n_channel_protocol: single-mode input expected");
  }
  if (variances.size() != patterns.patterns().size()) {
    throw std::invalid_argument("n_channel_protocol: one variance per pattern expected");
  }
  const std::size_t n = patterns.n_channels();
  const Vector s = null_space_encoder(patterns);
  const NetworkPlan enc = decompose_network(complete_basis(s));
  const NetworkPlan dec = inverse_plan(enc);

  std::vector<NoiseSource> sources;
  for (std::size_t k = 0; k < variances.size(); ++k) {
    sources.push_back(NoiseSource{patterns.patterns()[k], variances[k], "pattern " + std::to_string(k)});
  }
  const ChannelModel channel = ChannelModel::uniform(n, eta, std::move(sources), mismatch);

  std::vector<std::size_t> modes(n);
  for (std::size_t k = 0; k < n; ++k) {
    modes[k] = k;
  }
  GaussianState state = n > 1 ? tensor(input, vacuum_state(n - 1)) : input;
  state = apply_plan(state, enc, modes);
  state = apply_channel(state, modes, channel);
  state = apply_plan(state, dec, modes);
  return NChannelOutput{partial_trace(state, {0}), s, enc, dec};
}

}  // namespace cvqec
