#include "tbswap/config.hpp"
#include "tbswap/detection.hpp"
#include "tbswap/errors.hpp"
#include "tbswap/experiments.hpp"
#include "tbswap/figures.hpp"
#include "tbswap/metrics.hpp"
#include "tbswap/sweep.hpp"
#include "tbswap/timetags.hpp"
#include "tbswap/visibility.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace tbswap;

namespace {

py::dict table_to_dict(const CsvTable& t) {
  py::dict out;
  for (const auto& h : t.header()) {
    py::list col;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const std::string& cell = t.cell(r, h);
      if (h == "error") {
        col.append(cell);
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size()) {
          col.append(v);
          continue;
        }
      } catch (const std::exception&) {
      }
      col.append(cell.empty() ? py::object(py::none()) : py::object(py::str(cell)));
    }
    out[py::str(h)] = col;
  }
  return out;
}

CircuitModel build(const std::string& kind, const SourceParams& src, const InterferenceParams& intf) {
  switch (circuit_kind_from_string(kind)) {
    case CircuitKind::HOM: return build_hom_circuit(src, intf);
    case CircuitKind::SWAP: return build_swap_circuit(src, intf);
    default: throw ConfigError("use entanglement_visibility for the pair circuit");
  }
}

}  // namespace

PYBIND11_MODULE(_tbswap, m) {
  m.doc() = "Gaussian model of two-photon interference and time-bin entanglement swapping";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<LayoutError>(m, "LayoutError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<TruncationError>(m, "TruncationError", base);
  py::register_exception<UnsupportedOpError>(m, "UnsupportedOpError", base);
  py::register_exception<ValidityError>(m, "ValidityError", base);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base);
  py::register_exception<FitError>(m, "FitError", base);

  py::class_<SourceParams>(m, "SourceParams")
      .def(py::init<>())
      .def(py::init([](double mu_A, double mu_B, double eta_Ai, double eta_As, double eta_Bs, double eta_Bi) {
             return SourceParams{mu_A, mu_B, eta_Ai, eta_As, eta_Bs, eta_Bi};
           }),
           py::arg("mu_A"), py::arg("mu_B"), py::arg("eta_Ai") = 1.0, py::arg("eta_As") = 1.0,
           py::arg("eta_Bs") = 1.0, py::arg("eta_Bi") = 1.0)
      .def_readwrite("mu_A", &SourceParams::mu_A)
      .def_readwrite("mu_B", &SourceParams::mu_B)
      .def_readwrite("eta_Ai", &SourceParams::eta_Ai)
      .def_readwrite("eta_As", &SourceParams::eta_As)
      .def_readwrite("eta_Bs", &SourceParams::eta_Bs)
      .def_readwrite("eta_Bi", &SourceParams::eta_Bi)
      .def("__repr__", [](const SourceParams& s) {
        return "SourceParams(mu_A=" + format_double(s.mu_A) + ", mu_B=" + format_double(s.mu_B) +
               ", eta_Ai=" + format_double(s.eta_Ai) + ", eta_As=" + format_double(s.eta_As) +
               ", eta_Bs=" + format_double(s.eta_Bs) + ", eta_Bi=" + format_double(s.eta_Bi) + ")";
      });

  py::class_<InterferenceParams>(m, "InterferenceParams")
      .def(py::init<>())
      .def(py::init([](double zeta, double theta_A, double theta_B) {
             InterferenceParams p;
             p.zeta = zeta;
             p.theta_A = theta_A;
             p.theta_B = theta_B;
             return p;
           }),
           py::arg("zeta") = 1.0, py::arg("theta_A") = 0.0, py::arg("theta_B") = 0.0)
      .def_readwrite("zeta", &InterferenceParams::zeta)
      .def_readwrite("tau_A", &InterferenceParams::tau_A)
      .def_readwrite("tau_B", &InterferenceParams::tau_B)
      .def_readwrite("tau_C", &InterferenceParams::tau_C)
      .def_readwrite("theta_A", &InterferenceParams::theta_A)
      .def_readwrite("theta_B", &InterferenceParams::theta_B)
      .def_readwrite("nu_map", &InterferenceParams::nu_map);

  m.def("source_preset", &source_preset, py::arg("name"));

  m.def("tmsv_covariance", &tmsv_covariance, py::arg("mu"));

  m.def(
      "pattern_probabilities",
      [](const std::string& kind, const SourceParams& src, const InterferenceParams& intf) {
        const CircuitModel c = build(kind, src, intf);
        const GaussianState out = evaluate(c);
        std::map<std::string, double> r;
        for (const auto& [name, pat] : c.patterns) r[name] = pattern_probability(c, out, name);
        return r;
      },
      py::arg("kind"), py::arg("src"), py::arg("intf") = InterferenceParams{});

  m.def(
      "hom_visibility",
      [](const std::string& order, const SourceParams& src, const InterferenceParams& intf) {
        return hom_visibility(vis_kind_from_string(order), src, intf).value;
      },
      py::arg("order"), py::arg("src"), py::arg("intf") = InterferenceParams{});
  m.def(
      "swap_visibility",
      [](const SourceParams& src, const InterferenceParams& intf, const std::string& pattern) {
        return swap_visibility(src, intf, pattern).value;
      },
      py::arg("src"), py::arg("intf") = InterferenceParams{}, py::arg("pattern") = "P1467");
  m.def(
      "entanglement_visibility",
      [](double mu, double es, double ei) { return entanglement_visibility(mu, es, ei).value; }, py::arg("mu"),
      py::arg("eta_signal") = 1.0, py::arg("eta_idler") = 1.0);
  m.def(
      "closed_form_visibility",
      [](const std::string& kind, double mu, double eta, double zeta) {
        static const std::map<std::string, ClosedFormKind> kinds = {{"HOM2", ClosedFormKind::HOM2},
                                                                    {"HOM3", ClosedFormKind::HOM3},
                                                                    {"HOM4", ClosedFormKind::HOM4},
                                                                    {"SWAP", ClosedFormKind::SWAP}};
        auto it = kinds.find(kind);
        if (it == kinds.end()) throw ConfigError("unknown closed form " + kind);
        return closed_form_visibility(it->second, mu, eta, zeta);
      },
      py::arg("kind"), py::arg("mu"), py::arg("eta"), py::arg("zeta"));
  m.def(
      "taylor_visibility",
      [](const std::string& kind, const SourceParams& src, double zeta) {
        return taylor_visibility(vis_kind_from_string(kind), src, zeta);
      },
      py::arg("kind"), py::arg("src"), py::arg("zeta"));
  m.def(
      "infer_zeta",
      [](double v, double sigma, const std::string& kind, const SourceParams& src) {
        const ZetaEstimate z = infer_zeta(v, sigma, vis_kind_from_string(kind), src);
        return py::dict(py::arg("zeta_sq") = z.zeta_sq, py::arg("uncertainty") = z.uncertainty,
                        py::arg("v_max") = z.v_max);
      },
      py::arg("visibility"), py::arg("sigma"), py::arg("kind"), py::arg("src"));

  m.def("fidelity_from_visibility", &fidelity_from_visibility, py::arg("v"));
  m.def("binary_entropy", &binary_entropy, py::arg("x"));
  m.def("phase_error_from_visibility", &phase_error_from_visibility, py::arg("v"));
  m.def(
      "secret_key_fraction",
      [](double kappa, double e_t, double e_p) { return secret_key_fraction(kappa, e_t, e_p).clamped; },
      py::arg("kappa"), py::arg("e_t"), py::arg("e_p"));
  m.def(
      "qkd_budget",
      [](double kappa, double e_t, double s_t, double e_p, double s_p) {
        const QkdBudget b = qkd_budget(kappa, e_t, s_t, e_p, s_p);
        return py::dict(py::arg("key_fraction") = b.key_fraction, py::arg("plus") = b.plus,
                        py::arg("minus") = b.minus);
      },
      py::arg("kappa"), py::arg("e_t"), py::arg("sigma_e_t"), py::arg("e_p"), py::arg("sigma_e_p"));
  m.def(
      "chsh_parameter",
      [](double v, double sigma) {
        const ChshResult r = chsh_parameter(v, sigma);
        return py::dict(py::arg("s") = r.s, py::arg("violation") = r.violation, py::arg("sigmas") = r.sigmas);
      },
      py::arg("v"), py::arg("sigma_v") = 0.0);

  m.def("swap_crossing", &swap_crossing, py::arg("src"), py::arg("intf"), py::arg("param"), py::arg("lo"),
        py::arg("hi"), py::arg("level") = 1.0 / 3.0);

  m.def(
      "run_sweep",
      [](const std::string& kind, const SourceParams& src, const InterferenceParams& intf,
         const std::vector<std::tuple<std::string, double, double, int, bool>>& axes,
         const std::vector<std::string>& outputs, int workers) {
        SweepSpec s;
        s.kind = circuit_kind_from_string(kind);
        s.src = src;
        s.intf = intf;
        for (const auto& [p, a, b, n, log] : axes) s.axes.push_back({p, a, b, n, log ? Spacing::Log : Spacing::Linear});
        s.outputs = outputs;
        s.workers = workers;
        py::gil_scoped_release release;
        CsvTable t = run_sweep(s);
        py::gil_scoped_acquire acquire;
        return table_to_dict(t);
      },
      py::arg("kind"), py::arg("src"), py::arg("intf"), py::arg("axes"), py::arg("outputs"), py::arg("workers") = 1,
      "axes: list of (param, start, stop, points, log_spacing); returns columns as lists");

  m.def("list_figures", [] {
    std::vector<std::string> names;
    for (const auto& f : list_figures()) names.push_back(f.name);
    return names;
  });

  m.def(
      "simulate_counts",
      [](const SourceParams& src, double duration_s, std::uint64_t seed) {
        const CircuitModel c = build_swap_circuit(src, {});
        TagSimConfig cfg;
        cfg.duration_s = duration_s;
        cfg.seed = seed;
        std::map<std::string, std::int64_t> out;
        {
          py::gil_scoped_release release;
          const TagSimulator sim(c, cfg);
          for (const auto& [name, r] : simulate_and_count(sim, default_coincidence_config(c))) out[name] = r.counts;
        }
        return out;
      },
      py::arg("src"), py::arg("duration_s"), py::arg("seed") = 0,
      "Fourfold counts per swap pattern from a simulated acquisition");
}
