// Command-line front end: every subcommand writes CSV tables either to
// stdout or, with --out, into a fresh run directory with a manifest.

#include "tbswap/config.hpp"
#include "tbswap/csv.hpp"
#include "tbswap/errors.hpp"
#include "tbswap/figures.hpp"
#include "tbswap/metrics.hpp"
#include "tbswap/sweep.hpp"
#include "tbswap/timetags.hpp"
#include "tbswap/visibility.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

using namespace tbswap;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string format = "csv";
  std::string preset;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--out", c.out, "root directory for the run (stdout when omitted)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv"}));
  cmd->add_option("--preset", c.preset, "source preset: table_a, table_b, table_c, table_d or ideal");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config(nlohmann::json{{"schema_version", kConfigSchemaVersion}})
                                   : load_config(c.config);
  if (!c.preset.empty()) cfg.source = source_preset(c.preset);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.simulation.seed = *c.seed;
    if (cfg.sweep) cfg.sweep->seed = *c.seed;
  }
  if (c.workers) {
    cfg.workers = *c.workers;
    cfg.simulation.workers = *c.workers;
    if (cfg.sweep) cfg.sweep->workers = *c.workers;
  }
  return cfg;
}

// Collects the tables of one command and writes them out at the end.
class Emitter {
 public:
  Emitter(const Common& c, std::string command, const RunConfig& cfg) : common_(c), command_(std::move(command)) {
    if (!c.out.empty()) {
      run_.emplace(c.out, command_);
      run_->set_params(cfg.raw);
      run_->set_seed(cfg.seed);
    }
  }

  void table(const std::string& file, const CsvTable& t, const std::string& description) {
    if (run_) {
      run_->add_table(file, t, description);
    } else {
      if (printed_) std::cout << '\n';
      std::cout << t.str();
      printed_ = true;
    }
  }

  void text(const std::string& file, const std::string& body, const std::string& description) {
    if (run_) {
      run_->add_text(file, body, description);
    } else {
      std::cout << body;
      printed_ = true;
    }
  }

  void note(const std::string& key, nlohmann::json value) {
    if (run_) {
      run_->add_note(key, value);
    } else {
      std::cerr << key << " = " << value.dump() << '\n';
    }
  }

  void finish() {
    if (run_) {
      run_->finalize();
      std::cerr << "wrote " << run_->path().string() << '\n';
    }
  }

 private:
  const Common& common_;
  std::string command_;
  std::optional<RunDirectory> run_;
  bool printed_ = false;
};

CircuitModel circuit_from(const RunConfig& cfg, CircuitKind fallback) {
  switch (cfg.circuit.value_or(fallback)) {
    case CircuitKind::HOM: return build_hom_circuit(cfg.source, cfg.interference);
    case CircuitKind::SWAP: return build_swap_circuit(cfg.source, cfg.interference);
    case CircuitKind::PAIR_VIS:
      return build_pair_visibility_circuit(cfg.pair.mu, cfg.pair.eta_signal, cfg.pair.eta_idler,
                                           cfg.interference.tau_A, cfg.interference.tau_B, cfg.interference.theta_A);
  }
  throw ConfigError("unknown circuit kind");
}

struct AxisFlags {
  std::string param;
  std::optional<double> start;
  std::optional<double> stop;
  int points = 21;
  bool log = false;
};

void add_axis_flags(CLI::App* cmd, AxisFlags& a) {
  cmd->add_option("--param", a.param, "swept parameter (overrides the config sweep)");
  cmd->add_option("--start", a.start, "axis start");
  cmd->add_option("--stop", a.stop, "axis stop");
  cmd->add_option("--points", a.points, "axis points")->check(CLI::PositiveNumber);
  cmd->add_flag("--log", a.log, "log spacing");
}

SweepSpec sweep_from(const RunConfig& cfg, CircuitKind kind, const AxisFlags& a,
                     const std::vector<std::string>& default_outputs, const std::string& default_param) {
  SweepSpec s;
  if (cfg.sweep) s = *cfg.sweep;
  s.kind = kind;
  s.src = cfg.source;
  s.intf = cfg.interference;
  s.workers = cfg.workers;
  s.seed = cfg.seed;
  s.kappa = cfg.qkd.kappa;
  s.e_t = cfg.qkd.e_t;
  if (!a.param.empty() || s.axes.empty()) {
    Axis ax;
    ax.param = a.param.empty() ? default_param : a.param;
    ax.start = a.start.value_or(1e-4);
    ax.stop = a.stop.value_or(1.0);
    ax.points = a.points;
    ax.spacing = a.log ? Spacing::Log : Spacing::Linear;
    s.axes = {ax};
  }
  if (s.outputs.empty()) s.outputs = default_outputs;
  return s;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const LayoutError*>(&e)) return 2;
  if (dynamic_cast<const CapacityError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin entanglement swapping simulator"};
  app.require_subcommand(1);
  Common common;

  auto* hom_dip = app.add_subcommand("hom-dip", "HOM coincidences versus relative delay");
  add_common(hom_dip, common);

  AxisFlags hom_axis;
  auto* hom_sweep = app.add_subcommand("hom-sweep", "HOM visibilities over a parameter grid");
  add_common(hom_sweep, common);
  add_axis_flags(hom_sweep, hom_axis);

  int fringe_points = 73;
  auto* swap_fringe = app.add_subcommand("swap-fringe", "fourfold swap coincidences versus Alice's phase");
  add_common(swap_fringe, common);
  swap_fringe->add_option("--points", fringe_points, "phase points over [0, 2pi]")->check(CLI::PositiveNumber);

  AxisFlags swap_axis;
  auto* swap_sweep = app.add_subcommand("swap-sweep", "swap visibility over a parameter grid");
  add_common(swap_sweep, common);
  add_axis_flags(swap_sweep, swap_axis);

  int ent_points = 73;
  auto* ent = app.add_subcommand("ent-visibility", "pair-source entanglement fringe and visibility");
  add_common(ent, common);
  ent->add_option("--points", ent_points, "phase points over [0, 2pi]")->check(CLI::PositiveNumber);

  auto* qkd = app.add_subcommand("qkd-budget", "secret-key bracket with asymmetric uncertainty");
  add_common(qkd, common);

  std::optional<double> meas_v;
  std::optional<double> meas_sigma;
  std::string meas_kind;
  auto* infer = app.add_subcommand("infer-zeta", "indistinguishability from a measured visibility");
  add_common(infer, common);
  infer->add_option("--V", meas_v, "measured visibility");
  infer->add_option("--sigma", meas_sigma, "its standard deviation");
  infer->add_option("--kind", meas_kind, "HOM2, HOM3A, HOM3B, HOM4 or SWAP");

  std::optional<double> sim_duration;
  auto* sim = app.add_subcommand("simulate-tags", "time-tag streams drawn from the detection model");
  add_common(sim, common);
  sim->add_option("--duration", sim_duration, "simulated seconds");

  std::string tags_file;
  auto* count = app.add_subcommand("count", "windowed coincidence counts from a tag file");
  add_common(count, common);
  count->add_option("--tags", tags_file, "CSV of (detector, tag_ps)")->required();

  std::string figure;
  auto* repro = app.add_subcommand("reproduce", "emit the data behind a named model figure");
  add_common(repro, common);
  repro->add_option("figure", figure, "figure name; 'list' prints the names")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = load(common);
    CLI::App* cmd = app.get_subcommands().front();
    Emitter out(common, cmd->get_name(), cfg);

    if (cmd == hom_dip) {
      InterferenceParams far = cfg.interference;
      far.zeta = 0.0;
      const CircuitModel c0 = build_hom_circuit(cfg.source, far);
      const GaussianState s0 = evaluate(c0);
      const std::vector<std::string> pats = {"P21", "P521", "P217", "P5217"};
      std::vector<double> p0;
      for (const auto& p : pats) p0.push_back(pattern_probability(c0, s0, p));
      CsvTable t({"delta_t_ps", "zeta_sq", "P21", "P521", "P217", "P5217", "V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4"});
      for (int i = 0; i < cfg.dip.points; ++i) {
        const double dt = cfg.dip.start_ps + (cfg.dip.stop_ps - cfg.dip.start_ps) * i / (cfg.dip.points - 1);
        InterferenceParams p = cfg.interference;
        p.zeta = cfg.interference.zeta * delay_to_indistinguishability(dt, cfg.dip.sigma_ps);
        const CircuitModel c = build_hom_circuit(cfg.source, p);
        const GaussianState s = evaluate(c);
        std::vector<std::string> row = {format_double(dt), format_double(p.zeta * p.zeta)};
        std::vector<double> pr;
        for (const auto& name : pats) pr.push_back(pattern_probability(c, s, name));
        for (double v : pr) row.push_back(format_double(v));
        for (std::size_t k = 0; k < pats.size(); ++k) row.push_back(format_double(1.0 - pr[k] / p0[k]));
        t.add_row(std::move(row));
      }
      out.table("hom_dip.csv", t, "HOM coincidence probabilities versus delay");
    } else if (cmd == hom_sweep) {
      const SweepSpec s = sweep_from(cfg, CircuitKind::HOM, hom_axis, {"V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4"}, "mu");
      out.table("hom_sweep.csv", run_sweep(s), "HOM visibility sweep");
    } else if (cmd == swap_fringe) {
      const CircuitModel ref = build_swap_circuit(cfg.source, cfg.interference);
      std::vector<std::string> header = {"theta_A"};
      for (const auto& [name, p] : ref.patterns) header.push_back(name);
      CsvTable t(header);
      for (int i = 0; i < fringe_points; ++i) {
        InterferenceParams p = cfg.interference;
        p.theta_A = fringe_points == 1 ? cfg.interference.theta_A : 2.0 * std::numbers::pi * i / (fringe_points - 1);
        const CircuitModel c = build_swap_circuit(cfg.source, p);
        const GaussianState s = evaluate(c);
        PatternEvaluator ev(s, c.detectors);
        std::vector<std::string> row = {format_double(p.theta_A)};
        for (const auto& [name, pat] : c.patterns) row.push_back(format_double(ev.probability(pat)));
        t.add_row(std::move(row));
      }
      out.table("swap_fringe.csv", t, "fourfold probabilities per gate versus theta_A");
      out.note("V_swap", swap_visibility(cfg.source, cfg.interference).value);
    } else if (cmd == swap_sweep) {
      const SweepSpec s = sweep_from(cfg, CircuitKind::SWAP, swap_axis, {"V_swap", "V_err", "R_over_Rs"}, "mu");
      out.table("swap_sweep.csv", run_sweep(s), "swap visibility sweep");
    } else if (cmd == ent) {
      CsvTable t({"theta", "C11", "C12", "C21", "C22"});
      for (int i = 0; i < ent_points; ++i) {
        const double th = ent_points == 1 ? 0.0 : 2.0 * std::numbers::pi * i / (ent_points - 1);
        const CircuitModel c = build_pair_visibility_circuit(cfg.pair.mu, cfg.pair.eta_signal, cfg.pair.eta_idler,
                                                             cfg.interference.tau_A, cfg.interference.tau_B, th);
        const GaussianState s = evaluate(c);
        std::vector<std::string> row = {format_double(th)};
        for (const char* n : {"C11", "C12", "C21", "C22"}) row.push_back(format_double(pattern_probability(c, s, n)));
        t.add_row(std::move(row));
      }
      out.table("ent_fringe.csv", t, "pair coincidences versus phase");
      CsvTable v({"pattern", "V_ent", "F_ent"});
      for (const char* n : {"C11", "C12", "C21", "C22"}) {
        const double val = entanglement_visibility(cfg.pair.mu, cfg.pair.eta_signal, cfg.pair.eta_idler,
                                                   cfg.interference.tau_A, cfg.interference.tau_B, n).value;
        v.add_row({n, format_double(val), format_double(fidelity_from_visibility(std::abs(val)))});
      }
      out.table("ent_visibility.csv", v, "visibility per port pairing (sign marks the anti-phase pairings)");
    } else if (cmd == qkd) {
      double e_p = 0.0;
      std::string source = "config";
      if (cfg.qkd.e_p) {
        e_p = *cfg.qkd.e_p;
      } else {
        e_p = phase_error_from_visibility(std::max(0.0, swap_visibility(cfg.source, cfg.interference).value));
        source = "swap_model";
      }
      const QkdBudget b = qkd_budget(cfg.qkd.kappa, cfg.qkd.e_t, cfg.qkd.sigma_e_t, e_p, cfg.qkd.sigma_e_p);
      CsvTable t({"kappa", "e_t", "sigma_e_t", "e_p", "sigma_e_p", "e_p_source", "R_over_Rs", "plus", "minus"});
      t.add_row({format_double(b.kappa), format_double(b.e_t), format_double(cfg.qkd.sigma_e_t), format_double(b.e_p),
                 format_double(cfg.qkd.sigma_e_p), source, format_double(b.key_fraction), format_double(b.plus),
                 format_double(b.minus)});
      out.table("qkd_budget.csv", t, "key-rate bracket per sifted bit");
    } else if (cmd == infer) {
      MeasuredVisibility m = cfg.measured.value_or(MeasuredVisibility{});
      if (meas_v) m.value = *meas_v;
      if (meas_sigma) m.sigma = *meas_sigma;
      if (!meas_kind.empty()) m.kind = meas_kind;
      if (!cfg.measured && !meas_v) throw ConfigError("infer-zeta needs --V or a 'measured' config section");
      const VisKind kind = vis_kind_from_string(m.kind);
      const ZetaEstimate z = infer_zeta(m.value, m.sigma, kind, cfg.source, cfg.interference);
      CsvTable t({"kind", "V", "V_sigma", "zeta_sq", "zeta_sq_sigma", "V_max"});
      t.add_row({m.kind, format_double(m.value), format_double(m.sigma), format_double(z.zeta_sq),
                 format_double(z.uncertainty), format_double(z.v_max)});
      out.table("infer_zeta.csv", t, "indistinguishability estimate");
    } else if (cmd == sim) {
      TagSimConfig sc = cfg.simulation;
      if (sim_duration) sc.duration_s = *sim_duration;
      const CircuitModel c = circuit_from(cfg, CircuitKind::SWAP);
      const TagSimulator simulator(c, sc);
      const auto streams = simulator.simulate_all();
      out.text("tags.csv", tags_to_csv(streams), "time tags (detector channel, ps)");
      CsvTable summary({"channel", "tags", "rate_hz"});
      for (const auto& s : streams) {
        summary.add_row({s.channel, std::to_string(s.tags.size()),
                         format_double(static_cast<double>(s.tags.size()) / sc.duration_s)});
      }
      if (!common.out.empty()) out.table("tag_summary.csv", summary, "tags per channel");
    } else if (cmd == count) {
      std::ifstream f(tags_file);
      if (!f) throw ConfigError("cannot open tag file " + tags_file);
      std::stringstream ss;
      ss << f.rdbuf();
      const std::int64_t period = std::llround(1e12 / cfg.simulation.clock_hz);
      const auto streams = tags_from_csv(ss.str(), period);
      CoincidenceConfig cc = cfg.coincidence ? *cfg.coincidence
                                             : default_coincidence_config(circuit_from(cfg, CircuitKind::SWAP), 200,
                                                                          cfg.simulation.origin_ps, period);
      if (cfg.coincidence && cc.patterns.empty()) {
        throw ConfigError("coincidence section defines no patterns");
      }
      const auto counts = count_all(streams, cc);
      CsvTable t({"pattern", "counts", "sigma"});
      for (const auto& [name, r] : counts) t.add_row({name, std::to_string(r.counts), format_double(r.sigma)});
      out.table("counts.csv", t, "coincidence counts with Poisson uncertainty");
    } else if (cmd == repro) {
      if (figure == "list") {
        for (const auto& fi : list_figures()) std::cout << fi.name << "\t" << fi.description << '\n';
        return 0;
      }
      const FigureOutput fo = reproduce_figure(figure, cfg.workers);
      for (const auto& t : fo.tables) out.table(t.file, t.table, t.description);
      for (const auto& [k, v] : fo.notes.items()) out.note(k, v);
    }
    out.finish();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
