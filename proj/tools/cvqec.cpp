// cvqec: batch front end for the correlated-noise correction engine.
//
// Every command that writes files also writes <out>.manifest.json, which
// records the argument vector; `cvqec replay --manifest <file>` re-runs it.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cvqec/analysis.hpp"
#include "cvqec/channel.hpp"
#include "cvqec/montecarlo.hpp"
#include "cvqec/network.hpp"
#include "cvqec/protocol.hpp"
#include "cvqec/textio.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace cvqec;

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitIo = 4;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* const kConventions =
    "Conventions: [x,p] = i, so the vacuum quadrature variance is 1/2. Noise and\n"
    "variances are quoted in shot-noise units (SNU = variance / (1/2)). The noise\n"
    "axis eps is the classical excess noise of channel 1 at the channel output.\n"
    "Channel 2 couples to the same source with g2 = 1, channel 1 with g1 = g-ratio.\n"
    "Transmissivities follow --ports: 'equation' quotes T with optimum g2/(g1+g2),\n"
    "'complementary' quotes 1 - T. Exit codes: 0 ok, 2 usage, 3 domain, 4 I/O.";

json conventions_block(PortLabel ports) {
  return {
      {"port_labeling", to_string(ports)},
      {"snu", "variance / 0.5 (vacuum quadrature variance, [x,p]=i)"},
      {"noise_axis", "excess noise of channel 1 in SNU at the channel output"},
  };
}

struct Outputs {
  AtomicFileSet files;
  json parameters = json::object();
  std::optional<std::uint64_t> seed;
};

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// Finishes a run: adds the manifest next to `primary` and commits everything.
void commit_run(Outputs& out, const std::filesystem::path& primary, const std::string& command,
                const std::vector<std::string>& argv, PortLabel ports) {
  const std::filesystem::path manifest_path = primary.string() + ".manifest.json";
  std::vector<std::string> listed = out.files.paths();
  listed.push_back(manifest_path.string());
  json manifest = {
      {"tool", "cvqec"},
      {"version", kVersion},
      {"command", command},
      {"argv", argv},
      {"parameters", out.parameters},
      {"seed", out.seed ? json(*out.seed) : json(nullptr)},
      {"outputs", listed},
      {"conventions", conventions_block(ports)},
  };
  out.files.add(manifest_path, dump_json(manifest));
  try {
    out.files.commit();
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  std::filesystem::path p = path;
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + ext;
}

const CLI::Validator kAtLeastOne(
    [](std::string& input) -> std::string {
      try {
        if (std::stoll(input) >= 1) {
          return {};
        }
      } catch (const std::exception&) {
      }
      return "must be an integer >= 1, got " + input;
    },
    "INT>=1");

const std::map<std::string, PortLabel> kPorts{{"equation", PortLabel::Equation},
                                              {"complementary", PortLabel::Complementary}};

struct ChannelFlags {
  double g_ratio = 0.61;
  double eta = 1.0;
  double xi = 0.0;
  PortLabel ports = PortLabel::Equation;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--g-ratio", g_ratio, "coupling ratio g1/g2 of the shared noise source (g2 = 1)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--eta", eta, "transmission of each channel, in (0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--xi", xi, "mode-mismatch fraction of the noise power, in [0, 1)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ports", ports, "transmissivity labeling: equation | complementary")
        ->transform(CLI::CheckedTransformer(kPorts, CLI::ignore_case))
        ->capture_default_str();
  }

  [[nodiscard]] ChannelSettings settings() const { return ChannelSettings{g_ratio, eta, xi, ports}; }

  [[nodiscard]] json echo() const {
    return {{"g_ratio", g_ratio}, {"eta", eta}, {"xi", xi}, {"ports", to_string(ports)}};
  }
};

void check_domain(const ChannelFlags& ch) {
  if (ch.eta <= 0.0) {
    throw CLI::ValidationError("--eta", "must be greater than 0");
  }
  if (ch.xi >= 1.0) {
    throw CLI::ValidationError("--xi", "must be less than 1");
  }
}

// ---------------------------------------------------------------------------

struct SweepFlags {
  ChannelFlags channel;
  double amplitude = 2.0;
  double r = 0.5;
  double eps_max = 40.0;
  std::size_t eps_steps = 41;
  std::string out;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f) {
  f.channel.add_to(cmd);
  cmd->add_option("--eps-max", f.eps_max, "largest channel-1 excess noise, SNU")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--eps-steps", f.eps_steps, "number of noise points from 0 to --eps-max")
      ->check(kAtLeastOne)
      ->capture_default_str();
  cmd->add_option("--out", f.out, "CSV path; <stem>_alt.csv, <out>.meta.json and <out>.manifest.json go alongside")
      ->required();
}

int run_sweep_coherent(const SweepFlags& f, const std::vector<std::string>& argv) {
  check_domain(f.channel);
  CoherentSweepParams params;
  params.channel = f.channel.settings();
  params.amplitude_x = f.amplitude;
  params.eps = eps_grid(f.eps_max, f.eps_steps);
  const SweepResult result = coherent_sweep(params);

  Outputs out;
  out.parameters = f.channel.echo();
  out.parameters["amplitude"] = f.amplitude;
  out.parameters["eps_max"] = f.eps_max;
  out.parameters["eps_steps"] = f.eps_steps;
  out.files.add(f.out, sweep_to_csv(result));
  out.files.add(sibling(f.out, "_alt"), sweep_alt_to_csv(result));
  out.files.add(f.out + ".meta.json", dump_json({{"parameters", out.parameters}, {"metadata", result.metadata}}));
  commit_run(out, f.out, "sweep-coherent", argv, f.channel.ports);
  return kExitOk;
}

int run_sweep_entangle(const SweepFlags& f, const std::vector<std::string>& argv) {
  check_domain(f.channel);
  EntanglementSweepParams params;
  params.channel = f.channel.settings();
  params.r = f.r;
  params.eps = eps_grid(f.eps_max, f.eps_steps);
  const SweepResult result = entanglement_sweep(params);

  BreakingPointParams bp;
  bp.channel = params.channel;
  bp.strategy = Strategy::Uncorrected;
  const double eps_uncorrected = entanglement_breaking_point(bp);
  bp.strategy = Strategy::Corrected;
  const double eps_corrected = entanglement_breaking_point(bp);

  Outputs out;
  out.parameters = f.channel.echo();
  out.parameters["r"] = f.r;
  out.parameters["eps_max"] = f.eps_max;
  out.parameters["eps_steps"] = f.eps_steps;
  json meta = {{"parameters", out.parameters}, {"metadata", result.metadata}};
  // JSON has no infinity; the never-breaking case is written as null.
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  meta["breaking_point_snu"] = {{"uncorrected", finite_or_null(eps_uncorrected)},
                                {"corrected", finite_or_null(eps_corrected)},
                                {"r_max", bp.r_max},
                                {"search_max_snu", bp.eps_max}};
  out.files.add(f.out, sweep_to_csv(result));
  out.files.add(sibling(f.out, "_alt"), sweep_alt_to_csv(result));
  out.files.add(f.out + ".meta.json", dump_json(meta));
  commit_run(out, f.out, "sweep-entangle", argv, f.channel.ports);

  std::cout << "uncorrected_breaking_point_snu " << format_double(eps_uncorrected) << "\n";
  std::cout << "corrected_breaking_point_snu " << format_double(eps_corrected) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TraceFlags {
  ChannelFlags channel;
  double eps = 25.0;
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::string out;
  std::string distribution = "gaussian";
  double amplitude = 0.0;
  double modulation = 0.0;
  double period = 1000.0;
  std::string config;
  std::optional<double> t_encode;
  std::optional<double> t_decode;
};

int run_trace(const TraceFlags& f, const std::vector<std::string>& argv) {
  check_domain(f.channel);
  ProtocolConfig cfg = optimal_config(f.channel.g_ratio, 1.0, f.eps, f.channel.eta, f.channel.xi, f.channel.ports);
  if (!f.config.empty()) {
    cfg.channel = parse_channel_config(read_input(f.config));
  }
  if (f.t_encode) {
    cfg.t_encode = *f.t_encode;
  }
  if (f.t_decode) {
    cfg.t_decode = *f.t_decode;
  }
  cfg.validate();

  SampleOptions opts;
  static const std::map<std::string, NoiseDistribution> kDist{{"gaussian", NoiseDistribution::Gaussian},
                                                               {"uniform", NoiseDistribution::Uniform},
                                                               {"two-point", NoiseDistribution::TwoPoint}};
  opts.distribution = kDist.at(f.distribution);
  opts.modulation_amplitude = f.modulation;
  opts.modulation_period = f.period;
  const auto records = sample_run(cfg, coherent_state(f.amplitude, 0.0), f.n, f.seed, opts);

  Outputs out;
  out.seed = f.seed;
  out.parameters = f.channel.echo();
  out.parameters["eps"] = f.eps;
  out.parameters["n"] = f.n;
  out.parameters["distribution"] = f.distribution;
  out.parameters["amplitude"] = f.amplitude;
  out.parameters["modulation_amplitude"] = f.modulation;
  out.parameters["modulation_period"] = f.period;
  out.parameters["t_encode"] = cfg.t_encode;
  out.parameters["t_decode"] = cfg.t_decode;
  out.parameters["channel_config"] = dump_channel_config(cfg.channel);

  json stages = json::array();
  for (const TraceRecord& r : records) {
    const EmpiricalCovariance emp = empirical_covariance(std::vector<const TraceRecord*>{&r});
    stages.push_back({{"stage", stage_name(r.stage)},
                      {"quadrature", r.quadrature == QuadratureKind::X ? "x" : "p"},
                      {"mean", emp.mean(0)},
                      {"variance_snu", as_snu(emp.cov(0, 0))},
                      {"variance_snu_standard_error", as_snu(emp.standard_error(0, 0))}});
  }
  out.files.add(f.out, traces_to_csv(records));
  out.files.add(f.out + ".meta.json", dump_json({{"parameters", out.parameters},
                                                 {"seed", f.seed},
                                                 {"rng", "counter-based splitmix64, one stream per shot"},
                                                 {"stages", stages}}));
  commit_run(out, f.out, "trace", argv, f.channel.ports);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthFlags {
  std::string patterns;
  std::string out;
};

std::string short_list(const Vector& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    char buf[32];
    // Round away the last couple of bits so exact values print exactly.
    std::snprintf(buf, sizeof buf, "%.15g", v(k) == 0.0 ? 0.0 : v(k));
    if (k > 0) {
      s += ' ';
    }
    s += buf;
  }
  return s;
}

int run_synth(const SynthFlags& f, const std::vector<std::string>& argv) {
  const NoisePatternSet patterns = NoisePatternSet::parse(read_input(f.patterns));
  const Vector s = null_space_encoder(patterns);
  const Matrix encoder = complete_basis(s);
  const NetworkPlan plan = decompose_network(encoder);
  const NetworkPlan decoder = inverse_plan(plan);

  Outputs out;
  out.parameters = {{"patterns_file", f.patterns}, {"patterns", patterns.patterns()}};
  std::vector<double> signal(s.data(), s.data() + s.size());
  out.files.add(f.out, serialize_plan(plan));
  out.files.add(sibling(f.out, "_decode"), serialize_plan(decoder));
  out.files.add(f.out + ".meta.json",
                dump_json({{"parameters", out.parameters},
                           {"signal", signal},
                           {"beam_splitters", plan.beam_splitter_count()},
                           {"recomposition_error", (recompose(plan) - encoder).cwiseAbs().maxCoeff()},
                           {"element_convention", "BS i j T acts as [[sqrt(T), -sqrt(1-T)], [sqrt(1-T), sqrt(T)]]"}}));
  commit_run(out, f.out, "synth", argv, PortLabel::Equation);

  std::cout << "signal " << short_list(s) << "\n";
  std::cout << "beam_splitters " << plan.beam_splitter_count() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OptimizeFlags {
  double g1 = 1.0;
  double g2 = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double eps = 10.0;
  PortLabel ports = PortLabel::Equation;
  std::string objective = "excess";
  double amplitude = 2.0;
  std::string out;
};

int run_optimize(const OptimizeFlags& f, const std::vector<std::string>& argv) {
  if (f.eta <= 0.0) {
    throw CLI::ValidationError("--eta", "must be greater than 0");
  }
  if (f.xi >= 1.0) {
    throw CLI::ValidationError("--xi", "must be less than 1");
  }
  OptimizeParams p;
  p.g1 = f.g1;
  p.g2 = f.g2;
  p.eta = f.eta;
  p.xi = f.xi;
  p.eps_snu = f.eps;
  p.ports = f.ports;
  p.objective = f.objective == "excess" ? Objective::ExcessVariance : Objective::NegativeFidelity;
  p.amplitude_x = f.amplitude;
  const OptimizeResult r = optimize_splitting(p);
  const json result = {
      {"t_encode", r.t_encode},
      {"t_decode", r.t_decode},
      {"objective", r.objective},
      {"objective_name", to_string(p.objective)},
      {"analytic_optimum", physical_transmissivity(optimal_splitting(f.g1, f.g2), f.ports)},
      {"ports", to_string(f.ports)},
  };
  std::cout << result.dump() << "\n";
  if (!f.out.empty()) {
    Outputs out;
    out.parameters = {{"g1", f.g1}, {"g2", f.g2},        {"eta", f.eta},           {"xi", f.xi},
                      {"eps", f.eps}, {"amplitude", f.amplitude}, {"objective", f.objective}, {"ports", to_string(f.ports)}};
    out.files.add(f.out, dump_json(result));
    commit_run(out, f.out, "optimize", argv, f.ports);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ChannelCmdFlags {
  ChannelFlags channel;
  double eps = 10.0;
  std::string config;
  bool dump = false;
  std::string out;
};

int run_channel(const ChannelCmdFlags& f, const std::vector<std::string>& argv) {
  check_domain(f.channel);
  const ChannelModel model = f.config.empty()
                                 ? correlated_pair(f.channel.g_ratio, 1.0, f.eps, f.channel.eta, f.channel.xi)
                                 : parse_channel_config(read_input(f.config));
  const std::string text = dump_channel_config(model);
  if (f.dump) {
    std::cout << text;
  } else {
    for (std::size_t k = 0; k < model.n_channels(); ++k) {
      std::cout << "channel " << k << " eta " << format_double(model.eta()[k]) << " excess_snu "
                << format_double(excess_noise_snu(model, k)) << "\n";
    }
  }
  if (!f.out.empty()) {
    Outputs out;
    out.parameters = f.channel.echo();
    out.parameters["eps"] = f.eps;
    out.parameters["config"] = f.config;
    out.files.add(f.out, text);
    commit_run(out, f.out, "channel", argv, f.channel.ports);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& argv, int depth);

int run_replay(const std::string& manifest_path, int depth) {
  if (depth > 0) {
    throw CLI::ValidationError("--manifest", "a manifest cannot replay another replay");
  }
  json manifest;
  try {
    manifest = json::parse(read_input(manifest_path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    throw std::invalid_argument("manifest has no argv array");
  }
  return run(manifest["argv"].get<std::vector<std::string>>(), depth + 1);
}

int run(const std::vector<std::string>& argv, int depth) {
  CLI::App app{"Correction of correlated classical noise in parallel Gaussian channels.", "cvqec"};
  app.footer(kConventions);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SweepFlags coherent;
  CLI::App* sc = app.add_subcommand("sweep-coherent", "Fidelity and variance of a coherent state against the noise");
  add_sweep_flags(sc, coherent);
  sc->add_option("--amplitude", coherent.amplitude, "input mean of the x quadrature, natural units")
      ->capture_default_str();
  sc->footer(kConventions);

  SweepFlags entangle;
  entangle.eps_max = 10.0;
  entangle.eps_steps = 101;
  CLI::App* se = app.add_subcommand(
      "sweep-entangle", "Inseparability of a two-mode squeezed state with one arm sent through the channel");
  add_sweep_flags(se, entangle);
  se->add_option("--r", entangle.r, "two-mode squeezing parameter")
      ->check(CLI::Range(0.0, kMaxSqueezing))
      ->capture_default_str();
  se->footer(kConventions);

  TraceFlags trace;
  CLI::App* st = app.add_subcommand("trace", "Seeded Monte Carlo quadrature traces at every protocol stage");
  trace.channel.add_to(st);
  st->add_option("--eps", trace.eps, "channel-1 excess noise, SNU")->check(CLI::NonNegativeNumber)->capture_default_str();
  st->add_option("--n", trace.n, "number of shots")->check(kAtLeastOne)->capture_default_str();
  st->add_option("--seed", trace.seed, "master seed")->capture_default_str();
  st->add_option("--distribution", trace.distribution, "classical noise statistics")
      ->check(CLI::IsMember({"gaussian", "uniform", "two-point"}))
      ->capture_default_str();
  st->add_option("--amplitude", trace.amplitude, "input mean of the x quadrature, natural units")
      ->capture_default_str();
  st->add_option("--modulation", trace.modulation, "sinusoidal x modulation of the input, natural units")
      ->capture_default_str();
  st->add_option("--period", trace.period, "modulation period in shots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  st->add_option("--config", trace.config, "channel description file (replaces --g-ratio/--eps/--eta/--xi)");
  st->add_option("--t-encode", trace.t_encode, "encoder transmissivity (default: optimum for --g-ratio)")
      ->check(CLI::Range(0.0, 1.0));
  st->add_option("--t-decode", trace.t_decode, "decoder transmissivity (default: optimum for --g-ratio)")
      ->check(CLI::Range(0.0, 1.0));
  st->add_option("--out", trace.out, "CSV path (stage,quadrature,index,value)")->required();
  st->footer(kConventions);

  SynthFlags synth;
  CLI::App* sy = app.add_subcommand("synth", "Protected signal direction and beam-splitter network for N channels");
  sy->add_option("--patterns", synth.patterns, "noise pattern file: one coupling vector per line")->required();
  sy->add_option("--out", synth.out, "encoder plan path; <stem>_decode<ext> holds the decoder")->required();

  OptimizeFlags opt;
  CLI::App* so = app.add_subcommand("optimize", "Numerically tune the encoder and decoder transmissivities");
  so->add_option("--g1", opt.g1, "channel-1 coupling")->check(CLI::PositiveNumber)->capture_default_str();
  so->add_option("--g2", opt.g2, "channel-2 coupling")->check(CLI::PositiveNumber)->capture_default_str();
  so->add_option("--eta", opt.eta, "channel transmission")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  so->add_option("--xi", opt.xi, "mode-mismatch fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  so->add_option("--eps", opt.eps, "channel-1 excess noise, SNU")->check(CLI::NonNegativeNumber)->capture_default_str();
  so->add_option("--objective", opt.objective,
                 "excess: added variance above pure loss (SNU); neg-fidelity: minus the coherent-probe fidelity")
      ->check(CLI::IsMember({"excess", "neg-fidelity"}))
      ->capture_default_str();
  so->add_option("--amplitude", opt.amplitude, "coherent probe x mean for neg-fidelity")->capture_default_str();
  so->add_option("--ports", opt.ports, "transmissivity labeling: equation | complementary")
      ->transform(CLI::CheckedTransformer(kPorts, CLI::ignore_case));
  so->add_option("--out", opt.out, "also write the result JSON and a manifest here");
  so->footer(kConventions);

  ChannelCmdFlags chan;
  CLI::App* sch = app.add_subcommand("channel", "Inspect, validate or export a channel description");
  chan.channel.add_to(sch);
  sch->add_option("--eps", chan.eps, "channel-1 excess noise, SNU")->check(CLI::NonNegativeNumber)->capture_default_str();
  sch->add_option("--config", chan.config, "read the channel description from this file");
  sch->add_flag("--dump-config", chan.dump, "print the canonical channel description");
  sch->add_option("--out", chan.out, "write the canonical description and a manifest here");
  sch->footer(kConventions);

  std::string manifest;
  CLI::App* sr = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  sr->add_option("--manifest", manifest, "manifest JSON written by an earlier run")->required();

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "cvqec: " << e.what() << "\n";
    std::cerr << "Run with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (sc->parsed()) {
      return run_sweep_coherent(coherent, argv);
    }
    if (se->parsed()) {
      return run_sweep_entangle(entangle, argv);
    }
    if (st->parsed()) {
      return run_trace(trace, argv);
    }
    if (sy->parsed()) {
      return run_synth(synth, argv);
    }
    if (so->parsed()) {
      return run_optimize(opt, argv);
    }
    if (sch->parsed()) {
      return run_channel(chan, argv);
    }
    return run_replay(manifest, depth);
  } catch (const CLI::ParseError& e) {
    std::cerr << "cvqec: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc), 0);
  } catch (const IoError& e) {
    std::cerr << "cvqec: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NoProtectedSubspace& e) {
    std::cerr << "cvqec: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cvqec: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "cvqec: " << e.what() << "\n";
    return kExitDomain;
  }
}
