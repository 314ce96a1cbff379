#include "tbswap/figures.hpp"

#include "tbswap/errors.hpp"
#include "tbswap/metrics.hpp"
#include "tbswap/sweep.hpp"
#include "tbswap/visibility.hpp"

#include <cmath>
#include <numbers>

namespace tbswap {

namespace {

SourceParams ideal_source(double mu) { return {mu, mu, 1.0, 1.0, 1.0, 1.0}; }

InterferenceParams with_zeta_sq(double z2) {
  InterferenceParams p;
  p.zeta = std::sqrt(z2);
  return p;
}

SweepSpec spec_1d(CircuitKind kind, SourceParams src, InterferenceParams intf, Axis axis,
                  std::vector<std::string> outputs, int workers) {
  SweepSpec s;
  s.kind = kind;
  s.src = src;
  s.intf = intf;
  s.axes = {std::move(axis)};
  s.outputs = std::move(outputs);
  s.workers = workers;
  return s;
}

FigureOutput swap_vs_mu(int workers) {
  FigureOutput f{"swap-vs-mu", {}, {}};
  auto spec = spec_1d(CircuitKind::SWAP, ideal_source(1e-3), {}, {"mu", 1e-4, 1.0, 41, Spacing::Log},
                      {"V_swap", "V_swap_cf", "F_swap"}, workers);
  f.tables.push_back({"swap_vs_mu.csv", "swap visibility for equal sources, unit efficiency, full overlap",
                      run_sweep(spec)});
  return f;
}

FigureOutput swap_vs_mu_side(bool alice, int workers) {
  const double z2 = alice ? 0.69 : 0.64;
  const SourceParams src = alice ? table::swap_c(0.01) : table::swap_d(0.01);
  const std::string param = alice ? "mu_A" : "mu_B";
  FigureOutput f{alice ? "swap-vs-muA" : "swap-vs-muB", {}, {}};
  auto spec = spec_1d(CircuitKind::SWAP, src, with_zeta_sq(z2), {param, 1e-3, 1.0, 46, Spacing::Log},
                      {"V_swap", "F_swap"}, workers);
  f.tables.push_back({alice ? "swap_vs_muA.csv" : "swap_vs_muB.csv",
                      "swap visibility versus one source brightness at zeta^2 = " + format_double(z2),
                      run_sweep(spec)});
  f.notes["classical_bound_crossing_" + param] = swap_crossing(src, with_zeta_sq(z2), param, 1e-2, 1.0);
  return f;
}

FigureOutput swap_vs_zeta(int workers) {
  FigureOutput f{"swap-vs-zeta", {}, {}};
  auto spec = spec_1d(CircuitKind::SWAP, table::swap_b(), {}, {"zeta_sq", 0.0, 1.0, 51, Spacing::Linear},
                      {"V_swap", "F_swap", "V_err"}, workers);
  spec.sigma_zeta_sq = 0.06;
  f.tables.push_back({"swap_vs_zeta.csv", "swap visibility versus indistinguishability", run_sweep(spec)});
  const auto z = infer_zeta(0.831, 0.055, VisKind::SWAP, table::swap_b());
  f.notes["zeta_sq_for_V_0.831"] = z.zeta_sq;
  f.notes["zeta_sq_sigma"] = z.uncertainty;
  f.notes["V_swap_at_full_overlap"] = z.v_max;
  return f;
}

FigureOutput skr_vs_zeta(int workers) {
  FigureOutput f{"skr-vs-zeta", {}, {}};
  auto spec = spec_1d(CircuitKind::SWAP, table::swap_b(), {}, {"zeta_sq", 0.0, 1.0, 51, Spacing::Linear},
                      {"V_swap", "e_p", "R_over_Rs"}, workers);
  const CsvTable base = run_sweep(spec);
  std::vector<std::string> header = base.header();
  header.insert(header.end() - 1, "R_over_Rs_et0");
  CsvTable t(header);
  for (std::size_t r = 0; r < base.size(); ++r) {
    std::vector<std::string> row = base.rows()[r];
    std::string extra;
    if (!base.cell(r, "e_p").empty()) {
      extra = format_double(secret_key_fraction(1.22, 0.0, base.number(r, "e_p")).raw);
    }
    row.insert(row.end() - 1, extra);
    t.add_row(std::move(row));
  }
  f.tables.push_back({"skr_vs_zeta.csv",
                      "key-rate bracket with kappa = 1.22; R_over_Rs uses e_t = 0.011, R_over_Rs_et0 uses e_t = 0",
                      std::move(t)});
  return f;
}

const std::vector<std::string> kHomOutputs = {"V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4"};

FigureOutput hom_vs_mu(int workers) {
  FigureOutput f{"hom-vs-mu", {}, {}};
  auto outputs = kHomOutputs;
  outputs.insert(outputs.end(), {"V_HOM2_cf", "V_HOM3_cf", "V_HOM4_cf"});
  auto spec = spec_1d(CircuitKind::HOM, ideal_source(1e-3), {}, {"mu", 1e-4, 1.0, 41, Spacing::Log}, outputs,
                      workers);
  f.tables.push_back({"hom_vs_mu.csv", "HOM visibilities for equal sources, unit efficiency, full overlap",
                      run_sweep(spec)});
  return f;
}

FigureOutput hom_vs_zeta(int workers) {
  FigureOutput f{"hom-vs-zeta", {}, {}};
  auto spec = spec_1d(CircuitKind::HOM, table::hom_a(), {}, {"zeta_sq", 0.0, 1.0, 51, Spacing::Linear},
                      kHomOutputs, workers);
  f.tables.push_back({"hom_vs_zeta.csv", "HOM visibilities versus indistinguishability", run_sweep(spec)});
  return f;
}

FigureOutput hom_2d(int workers) {
  FigureOutput f{"hom-2d-sweeps", {}, {}};
  SweepSpec s;
  s.kind = CircuitKind::HOM;
  s.src = ideal_source(1e-3);
  s.axes = {{"mu_A", 1e-3, 1e-1, 21, Spacing::Log}, {"mu_B", 1e-3, 1e-1, 21, Spacing::Log}};
  auto outputs = kHomOutputs;
  outputs.insert(outputs.end(), {"V_HOM2_taylor", "V_HOM3A_taylor", "V_HOM3B_taylor", "V_HOM4_taylor"});
  s.outputs = outputs;
  s.workers = workers;
  f.tables.push_back({"hom_2d.csv", "HOM visibilities over (mu_A, mu_B), unit efficiency, full overlap",
                      run_sweep(s)});
  return f;
}

FigureOutput hom_dip(int) {
  FigureOutput f{"hom-dip", {}, {}};
  const SourceParams src = table::hom_a();
  const double sigma = 25.0;
  InterferenceParams far;
  far.zeta = 0.0;
  const CircuitModel c0 = build_hom_circuit(src, far);
  const double p0 = pattern_probability(c0, evaluate(c0), "P5217");
  CsvTable t({"delta_t_ps", "zeta_sq", "P5217", "V_HOM4"});
  for (int i = 0; i <= 40; ++i) {
    const double dt = -100.0 + 5.0 * i;
    InterferenceParams p;
    p.zeta = delay_to_indistinguishability(dt, sigma);
    const CircuitModel c = build_hom_circuit(src, p);
    const double pr = pattern_probability(c, evaluate(c), "P5217");
    t.add_row({format_double(dt), format_double(p.zeta * p.zeta), format_double(pr), format_double(1.0 - pr / p0)});
  }
  f.tables.push_back({"hom_dip.csv", "fourfold HOM probability versus relative delay, 25 ps pulses", std::move(t)});
  return f;
}

FigureOutput ent_fringe(int) {
  FigureOutput f{"ent-fringe", {}, {}};
  CsvTable t({"theta", "C11", "C12", "C21", "C22"});
  const SourceParams b = table::swap_b();
  for (int i = 0; i <= 72; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 72.0;
    const CircuitModel c = build_pair_visibility_circuit(b.mu_A, b.eta_As, b.eta_Ai, kBalanced, kBalanced, th);
    const GaussianState out = evaluate(c);
    std::vector<std::string> row = {format_double(th)};
    for (const char* n : {"C11", "C12", "C21", "C22"}) row.push_back(format_double(pattern_probability(c, out, n)));
    t.add_row(std::move(row));
  }
  f.tables.push_back({"ent_fringe.csv", "pair coincidences versus interferometer phase", std::move(t)});
  f.notes["V_ent"] = entanglement_visibility(b.mu_A, b.eta_As, b.eta_Ai).value;
  return f;
}

}  // namespace

const std::vector<FigureInfo>& list_figures() {
  static const std::vector<FigureInfo> figs = {
      {"swap-vs-mu", "swap visibility versus equal mean photon number"},
      {"swap-vs-muA", "swap visibility versus Alice's mean photon number"},
      {"swap-vs-muB", "swap visibility versus Bob's mean photon number"},
      {"swap-vs-zeta", "swap visibility versus indistinguishability"},
      {"skr-vs-zeta", "secret-key bracket versus indistinguishability"},
      {"hom-vs-mu", "HOM visibilities versus mean photon number"},
      {"hom-vs-zeta", "HOM visibilities versus indistinguishability"},
      {"hom-2d-sweeps", "HOM visibilities over both mean photon numbers"},
      {"hom-dip", "fourfold HOM dip versus delay"},
      {"ent-fringe", "entanglement fringe versus phase"},
  };
  return figs;
}

FigureOutput reproduce_figure(const std::string& name, int workers) {
  if (name == "swap-vs-mu") return swap_vs_mu(workers);
  if (name == "swap-vs-muA") return swap_vs_mu_side(true, workers);
  if (name == "swap-vs-muB") return swap_vs_mu_side(false, workers);
  if (name == "swap-vs-zeta") return swap_vs_zeta(workers);
  if (name == "skr-vs-zeta") return skr_vs_zeta(workers);
  if (name == "hom-vs-mu") return hom_vs_mu(workers);
  if (name == "hom-vs-zeta") return hom_vs_zeta(workers);
  if (name == "hom-2d-sweeps") return hom_2d(workers);
  if (name == "hom-dip") return hom_dip(workers);
  if (name == "ent-fringe") return ent_fringe(workers);
  std::string msg = "unknown figure '" + name + "'; available:";
  for (const auto& f : list_figures()) msg += " " + f.name;
  throw ConfigError(msg);
}

double swap_crossing(const SourceParams& src, const InterferenceParams& intf, const std::string& param, double lo,
                     double hi, double level) {
  if (!(lo > 0.0 && hi > lo)) throw DomainError("crossing search needs 0 < lo < hi");
  auto f = [&](double x) {
    SourceParams s = src;
    InterferenceParams i = intf;
    set_param(s, i, param, x);
    return swap_visibility(s, i).value - level;
  };
  double a = std::log(lo);
  double b = std::log(hi);
  double fa = f(lo);
  const double fb = f(hi);
  if ((fa < 0.0) == (fb < 0.0)) throw InfeasibleError("visibility does not cross the level in the interval", fa + level);
  while (b - a > 1e-9) {
    const double m = 0.5 * (a + b);
    const double fm = f(std::exp(m));
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace tbswap
