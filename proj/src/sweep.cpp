#include "tbswap/sweep.hpp"

#include "tbswap/errors.hpp"
#include "tbswap/metrics.hpp"
#include "tbswap/visibility.hpp"

#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace tbswap {

namespace {

const std::set<std::string>& known_params() {
  static const std::set<std::string> names = {"mu_A",  "mu_B",  "mu",    "eta_Ai", "eta_As",  "eta_Bs",
                                              "eta_Bi", "eta",  "zeta",  "zeta_sq", "tau_A", "tau_B",
                                              "tau_C", "theta_A", "theta_B"};
  return names;
}

bool known_output(const std::string& o) {
  static const std::set<std::string> names = {"V_HOM2", "V_HOM3A", "V_HOM3B", "V_HOM4",    "V_swap",
                                              "V_err",  "F_swap",  "e_p",     "R_over_Rs", "V_ent",
                                              "V_HOM2_cf", "V_HOM3_cf", "V_HOM4_cf", "V_swap_cf",
                                              "V_HOM2_taylor", "V_HOM3A_taylor", "V_HOM3B_taylor",
                                              "V_HOM4_taylor"};
  return names.count(o) > 0 || o.rfind("P:", 0) == 0;
}

}  // namespace

std::vector<double> Axis::values() const {
  validate();
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    v[i] = spacing == Spacing::Linear ? start + (stop - start) * f
                                      : std::exp(std::log(start) + (std::log(stop) - std::log(start)) * f);
  }
  if (points > 1) v.back() = stop;
  return v;
}

void Axis::validate() const {
  if (!known_params().count(param)) throw ConfigError("unknown sweep parameter " + param);
  if (points < 1) throw ConfigError("axis " + param + " needs at least one point");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("axis range must be finite");
  if (spacing == Spacing::Log && !(start > 0.0 && stop > 0.0)) {
    throw ConfigError("log-spaced axis " + param + " needs positive bounds");
  }
}

void SweepSpec::validate() const {
  if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep has one or two axes");
  for (const auto& a : axes) a.validate();
  if (axes.size() == 2 && axes[0].param == axes[1].param) throw ConfigError("sweep axes must differ");
  if (outputs.empty()) throw ConfigError("a sweep needs at least one output");
  for (const auto& o : outputs) {
    if (!known_output(o)) throw ConfigError("unknown sweep output " + o);
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!(sigma_zeta_sq >= 0.0)) throw ConfigError("sigma_zeta_sq must be >= 0");
}

void set_param(SourceParams& src, InterferenceParams& intf, const std::string& name, double value) {
  if (name == "mu_A") src.mu_A = value;
  else if (name == "mu_B") src.mu_B = value;
  else if (name == "mu") src.mu_A = src.mu_B = value;
  else if (name == "eta_Ai") src.eta_Ai = value;
  else if (name == "eta_As") src.eta_As = value;
  else if (name == "eta_Bs") src.eta_Bs = value;
  else if (name == "eta_Bi") src.eta_Bi = value;
  else if (name == "eta") src.eta_Ai = src.eta_As = src.eta_Bs = src.eta_Bi = value;
  else if (name == "zeta") intf.zeta = value;
  else if (name == "zeta_sq") {
    if (!(value >= 0.0)) throw DomainError("zeta_sq must be >= 0");
    intf.zeta = std::sqrt(value);
  } else if (name == "tau_A") intf.tau_A = value;
  else if (name == "tau_B") intf.tau_B = value;
  else if (name == "tau_C") intf.tau_C = value;
  else if (name == "theta_A") intf.theta_A = value;
  else if (name == "theta_B") intf.theta_B = value;
  else throw ConfigError("unknown parameter " + name);
}

namespace {

struct PointResult {
  std::vector<std::string> cells;
  std::string error;
};

double swap_vis(const SourceParams& s, const InterferenceParams& i) { return swap_visibility(s, i).value; }

PointResult evaluate_point(const SweepSpec& spec, const SourceParams& src, const InterferenceParams& intf) {
  PointResult r;
  r.cells.assign(spec.outputs.size(), "");
  try {
    src.validate();
    intf.validate();
    std::optional<double> v_swap;
    auto get_swap = [&] {
      if (!v_swap) v_swap = swap_vis(src, intf);
      return *v_swap;
    };
    std::optional<GaussianState> out;
    std::optional<CircuitModel> circuit;
    for (std::size_t k = 0; k < spec.outputs.size(); ++k) {
      const std::string& o = spec.outputs[k];
      double v = 0.0;
      if (o == "V_HOM2") v = hom_visibility(VisKind::HOM2, src, intf).value;
      else if (o == "V_HOM3A") v = hom_visibility(VisKind::HOM3A, src, intf).value;
      else if (o == "V_HOM3B") v = hom_visibility(VisKind::HOM3B, src, intf).value;
      else if (o == "V_HOM4") v = hom_visibility(VisKind::HOM4, src, intf).value;
      else if (o == "V_swap") v = get_swap();
      else if (o == "F_swap") v = fidelity_from_visibility(get_swap());
      else if (o == "e_p") v = phase_error_from_visibility(std::max(0.0, get_swap()));
      else if (o == "R_over_Rs") {
        v = secret_key_fraction(spec.kappa, spec.e_t, phase_error_from_visibility(std::max(0.0, get_swap()))).raw;
      } else if (o == "V_err") {
        // |dV/dzeta^2| sigma_zeta^2 from a central difference clipped to [0, 1].
        const double z2 = intf.zeta * intf.zeta;
        const double h = 1e-4;
        const double a = std::max(0.0, z2 - h);
        const double b = std::min(1.0, z2 + h);
        InterferenceParams ia = intf;
        InterferenceParams ib = intf;
        ia.zeta = std::sqrt(a);
        ib.zeta = std::sqrt(b);
        double slope = 0.0;
        if (spec.kind == CircuitKind::HOM) {
          slope = (hom_visibility(VisKind::HOM4, src, ib).value - hom_visibility(VisKind::HOM4, src, ia).value) / (b - a);
        } else {
          slope = (swap_vis(src, ib) - swap_vis(src, ia)) / (b - a);
        }
        v = std::abs(slope) * spec.sigma_zeta_sq;
      } else if (o == "V_ent") {
        v = entanglement_visibility(src.mu_A, src.eta_As, src.eta_Ai, intf.tau_A, intf.tau_B).value;
      } else if (o == "V_HOM2_cf") v = closed_form_visibility(ClosedFormKind::HOM2, src.mu_A, src.eta_As, intf.zeta);
      else if (o == "V_HOM3_cf") v = closed_form_visibility(ClosedFormKind::HOM3, src.mu_A, src.eta_As, intf.zeta);
      else if (o == "V_HOM4_cf") v = closed_form_visibility(ClosedFormKind::HOM4, src.mu_A, src.eta_As, intf.zeta);
      else if (o == "V_swap_cf") v = closed_form_visibility(ClosedFormKind::SWAP, src.mu_A, src.eta_As, intf.zeta);
      else if (o == "V_HOM2_taylor") v = taylor_visibility(VisKind::HOM2, src, intf.zeta);
      else if (o == "V_HOM3A_taylor") v = taylor_visibility(VisKind::HOM3A, src, intf.zeta);
      else if (o == "V_HOM3B_taylor") v = taylor_visibility(VisKind::HOM3B, src, intf.zeta);
      else if (o == "V_HOM4_taylor") v = taylor_visibility(VisKind::HOM4, src, intf.zeta);
      else if (o.rfind("P:", 0) == 0) {
        if (!circuit) {
          switch (spec.kind) {
            case CircuitKind::HOM: circuit = build_hom_circuit(src, intf); break;
            case CircuitKind::SWAP: circuit = build_swap_circuit(src, intf); break;
            case CircuitKind::PAIR_VIS:
              circuit = build_pair_visibility_circuit(src.mu_A, src.eta_As, src.eta_Ai, intf.tau_A, intf.tau_B,
                                                      intf.theta_A);
              break;
          }
          out = evaluate(*circuit);
        }
        v = pattern_probability(*circuit, *out, o.substr(2));
      }
      r.cells[k] = format_double(v);
    }
  } catch (const Error& e) {
    r.cells.assign(spec.outputs.size(), "");
    r.error = e.what();
  }
  return r;
}

}  // namespace

CsvTable run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> v0 = spec.axes[0].values();
  const std::vector<double> v1 = spec.axes.size() > 1 ? spec.axes[1].values() : std::vector<double>{0.0};
  const std::size_t n = v0.size() * v1.size();

  struct Point {
    SourceParams src;
    InterferenceParams intf;
    std::string error;
  };
  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < v0.size(); ++i) {
    for (std::size_t j = 0; j < v1.size(); ++j) {
      Point& p = pts[i * v1.size() + j];
      p.src = spec.src;
      p.intf = spec.intf;
      try {
        set_param(p.src, p.intf, spec.axes[0].param, v0[i]);
        if (spec.axes.size() > 1) set_param(p.src, p.intf, spec.axes[1].param, v1[j]);
      } catch (const Error& e) {
        p.error = e.what();
      }
    }
  }

  std::vector<PointResult> results(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      if (!pts[k].error.empty()) {
        results[k].cells.assign(spec.outputs.size(), "");
        results[k].error = pts[k].error;
      } else {
        results[k] = evaluate_point(spec, pts[k].src, pts[k].intf);
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(spec.workers, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<std::string> header = {"mu_A", "mu_B", "eta_Ai", "eta_As", "eta_Bs", "eta_Bi", "zeta_sq"};
  std::vector<std::string> extra;
  for (const auto& a : spec.axes) {
    if (a.param.rfind("tau_", 0) == 0 || a.param.rfind("theta_", 0) == 0) extra.push_back(a.param);
  }
  header.insert(header.end(), extra.begin(), extra.end());
  header.insert(header.end(), spec.outputs.begin(), spec.outputs.end());
  header.push_back("error");
  CsvTable table(header);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = pts[k].src;
    const auto& i = pts[k].intf;
    std::vector<std::string> row = {format_double(s.mu_A),   format_double(s.mu_B),   format_double(s.eta_Ai),
                                    format_double(s.eta_As), format_double(s.eta_Bs), format_double(s.eta_Bi),
                                    format_double(i.zeta * i.zeta)};
    for (const auto& e : extra) {
      double v = 0.0;
      if (e == "tau_A") v = i.tau_A;
      else if (e == "tau_B") v = i.tau_B;
      else if (e == "tau_C") v = i.tau_C;
      else if (e == "theta_A") v = i.theta_A;
      else v = i.theta_B;
      row.push_back(format_double(v));
    }
    row.insert(row.end(), results[k].cells.begin(), results[k].cells.end());
    row.push_back(results[k].error);
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace tbswap
