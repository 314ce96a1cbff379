#include "tbswap/experiments.hpp"

#include "tbswap/errors.hpp"

#include <set>
#include <sstream>

namespace tbswap {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1], got " << v;
    throw DomainError(os.str());
  }
}

void check_mu(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    std::ostringstream os;
    os << name << " must be finite and >= 0, got " << v;
    throw DomainError(os.str());
  }
}

DetectorSpec det(std::string name, std::vector<int> modes) { return {std::move(name), std::move(modes), 0.0}; }

ClickPattern clicks(std::vector<std::string> names) { return {std::move(names), {}}; }

ModeLabel label(Party p, Channel c, TimeBin b, int port = 0) { return {p, c, b, port}; }

}  // namespace

void SourceParams::validate() const {
  check_mu(mu_A, "mu_A");
  check_mu(mu_B, "mu_B");
  check_unit(eta_Ai, "eta_Ai");
  check_unit(eta_As, "eta_As");
  check_unit(eta_Bs, "eta_Bs");
  check_unit(eta_Bi, "eta_Bi");
}

void InterferenceParams::validate() const {
  check_unit(zeta, "zeta");
  check_unit(tau_A, "tau_A");
  check_unit(tau_B, "tau_B");
  check_unit(tau_C, "tau_C");
  if (!std::isfinite(theta_A) || !std::isfinite(theta_B)) throw DomainError("phases must be finite");
  for (const auto& [name, nu] : nu_map) {
    if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("dark-count probability of " + name + " must lie in [0, 1)");
  }
}

namespace table {
SourceParams hom_a() { return {0.019, 0.015, 0.067, 0.10, 0.11, 0.072}; }
SourceParams swap_b() { return {0.0047, 0.0042, 0.017, 0.048, 0.066, 0.020}; }
SourceParams swap_c(double mu_A) { return {mu_A, 0.0046, 0.026, 0.072, 0.076, 0.022}; }
SourceParams swap_d(double mu_B) { return {0.0039, mu_B, 0.031, 0.078, 0.076, 0.022}; }
}  // namespace table

const char* to_string(CircuitKind kind) {
  switch (kind) {
    case CircuitKind::HOM: return "HOM";
    case CircuitKind::SWAP: return "SWAP";
    case CircuitKind::PAIR_VIS: return "PAIR_VIS";
  }
  return "?";
}

GaussianState CircuitModel::input_state() const {
  if (num_modes <= 0 || num_modes > kMaxModes) throw DomainError("circuit mode count out of range");
  Matrix e = Matrix::Zero(2 * num_modes, 2 * num_modes);
  std::set<int> used;
  for (const auto& s : sources) {
    check_mu(s.mu, "source mu");
    if (s.signal < 0 || s.signal >= num_modes || s.idler < 0 || s.idler >= num_modes || s.signal == s.idler) {
      throw DomainError("source refers to invalid modes");
    }
    if (!used.insert(s.signal).second || !used.insert(s.idler).second) {
      throw DomainError("two sources feed the same mode");
    }
    const double c = std::sqrt(s.mu * (s.mu + 1.0));
    const int a = 2 * s.signal;
    const int b = 2 * s.idler;
    e(a, a) = e(a + 1, a + 1) = e(b, b) = e(b + 1, b + 1) = s.mu;
    e(a, b) = e(b, a) = c;
    e(a + 1, b + 1) = e(b + 1, a + 1) = -c;
  }
  return make_state_from_excess(std::move(e), Vector::Zero(2 * num_modes));
}

const ClickPattern& CircuitModel::pattern(const std::string& name) const {
  auto it = patterns.find(name);
  if (it == patterns.end()) throw ConfigError("circuit has no pattern named " + name);
  return it->second;
}

CircuitModel build_hom_circuit(const SourceParams& src, const InterferenceParams& intf) {
  src.validate();
  intf.validate();
  constexpr int n = 6;
  CircuitModel c;
  c.kind = CircuitKind::HOM;
  c.num_modes = n;
  c.sources = {{0, 1, src.mu_A}, {2, 3, src.mu_B}};
  c.layout = ModeLayout({
      label(Party::Alice, Channel::Signal, TimeBin::Early),
      label(Party::Alice, Channel::Idler, TimeBin::Early),
      label(Party::Bob, Channel::Signal, TimeBin::Early),
      label(Party::Bob, Channel::Idler, TimeBin::Early),
      label(Party::Ancilla, Channel::DistinguishabilityAncilla, TimeBin::Early),
      label(Party::Ancilla, Channel::VacuumAncilla, TimeBin::Early),
  });
  c.ops = {
      LossOp{0, src.eta_As},
      LossOp{1, src.eta_Ai},
      LossOp{2, src.eta_Bs},
      LossOp{3, src.eta_Bi},
      // Split B's signal into the part matching A's mode and the rest.
      beamsplitter(intf.zeta, 2, 4, n),
      beamsplitter(intf.tau_C, 0, 2, n),
      // The mismatched part meets vacuum on a copy of Charlie's splitter,
      // oriented so that output 5 sits with 0 and output 4 with 2.
      beamsplitter(intf.tau_C, 5, 4, n),
  };
  c.detectors = DetectorRegistry({det("D5", {1}), det("D7", {3}), det("D1", {0, 5}), det("D2", {2, 4})})
                    .with_dark_counts(intf.nu_map);
  c.patterns = {
      {"P21", clicks({"D2", "D1"})},
      {"P521", clicks({"D5", "D2", "D1"})},
      {"P217", clicks({"D2", "D1", "D7"})},
      {"P5217", clicks({"D5", "D2", "D1", "D7"})},
  };
  for (const char* d : {"D1", "D2", "D5", "D7"}) c.timing[d] = {d, 0};
  return c;
}

CircuitModel build_swap_circuit(const SourceParams& src, const InterferenceParams& intf) {
  src.validate();
  intf.validate();
  constexpr int n = 12;
  CircuitModel c;
  c.kind = CircuitKind::SWAP;
  c.num_modes = n;
  c.sources = {{0, 1, src.mu_A}, {2, 3, src.mu_A}, {4, 5, src.mu_B}, {6, 7, src.mu_B}};
  std::vector<ModeLabel> labels;
  for (Party p : {Party::Alice, Party::Bob}) {
    for (TimeBin b : {TimeBin::Early, TimeBin::Late}) {
      labels.push_back(label(p, Channel::Signal, b));
      labels.push_back(label(p, Channel::Idler, b));
    }
  }
  for (TimeBin b : {TimeBin::Early, TimeBin::Late}) {
    labels.push_back(label(Party::Ancilla, Channel::DistinguishabilityAncilla, b));
    labels.push_back(label(Party::Ancilla, Channel::VacuumAncilla, b));
  }
  c.layout = ModeLayout(std::move(labels));

  for (int m : {0, 2}) c.ops.emplace_back(LossOp{m, src.eta_As});
  for (int m : {1, 3}) c.ops.emplace_back(LossOp{m, src.eta_Ai});
  for (int m : {4, 6}) c.ops.emplace_back(LossOp{m, src.eta_Bs});
  for (int m : {5, 7}) c.ops.emplace_back(LossOp{m, src.eta_Bi});
  // Charlie, one block per time bin: (A signal, B signal, mismatch, vacuum).
  const int bins[2][4] = {{0, 4, 8, 9}, {2, 6, 10, 11}};
  for (const auto& b : bins) {
    c.ops.emplace_back(beamsplitter(intf.zeta, b[1], b[2], n));
    c.ops.emplace_back(beamsplitter(intf.tau_C, b[0], b[1], n));
    c.ops.emplace_back(beamsplitter(intf.tau_C, b[3], b[2], n));
  }
  // Unbalanced interferometers acting on early/late idlers.
  c.ops.emplace_back(phase_shifter(intf.theta_A, 3, n));
  c.ops.emplace_back(beamsplitter(intf.tau_A, 1, 3, n));
  c.ops.emplace_back(phase_shifter(intf.theta_B, 7, n));
  c.ops.emplace_back(beamsplitter(intf.tau_B, 5, 7, n));

  c.detectors = DetectorRegistry({det("D4e", {0, 9}), det("D4l", {2, 11}), det("D6e", {4, 8}),
                                  det("D6l", {6, 10}), det("D1", {1}), det("D2", {3}), det("D5", {5}),
                                  det("D7", {7})})
                    .with_dark_counts(intf.nu_map);
  for (const char* a : {"1", "2"}) {
    for (const char* b : {"5", "7"}) {
      const std::string da = std::string("D") + a;
      const std::string db = std::string("D") + b;
      c.patterns[std::string("P") + a + "46" + b] = clicks({da, "D4e", "D6l", db});
      c.patterns[std::string("P") + a + "64" + b] = clicks({da, "D4l", "D6e", db});
    }
  }
  c.timing["D4e"] = {"D4", 0};
  c.timing["D4l"] = {"D4", kLateBinOffsetPs};
  c.timing["D6e"] = {"D6", 0};
  c.timing["D6l"] = {"D6", kLateBinOffsetPs};
  for (const char* d : {"D1", "D2", "D5", "D7"}) c.timing[d] = {d, kLateBinOffsetPs};
  return c;
}

CircuitModel build_pair_visibility_circuit(double mu, double eta_signal, double eta_idler, double tau_A,
                                           double tau_B, double theta) {
  check_mu(mu, "mu");
  check_unit(eta_signal, "eta_signal");
  check_unit(eta_idler, "eta_idler");
  check_unit(tau_A, "tau_A");
  check_unit(tau_B, "tau_B");
  if (!std::isfinite(theta)) throw DomainError("phase must be finite");
  constexpr int n = 4;
  CircuitModel c;
  c.kind = CircuitKind::PAIR_VIS;
  c.num_modes = n;
  c.sources = {{0, 1, mu}, {2, 3, mu}};
  c.layout = ModeLayout({
      label(Party::Alice, Channel::Signal, TimeBin::Early),
      label(Party::Bob, Channel::Idler, TimeBin::Early),
      label(Party::Alice, Channel::Signal, TimeBin::Late),
      label(Party::Bob, Channel::Idler, TimeBin::Late),
  });
  c.ops = {
      LossOp{0, eta_signal},
      LossOp{2, eta_signal},
      LossOp{1, eta_idler},
      LossOp{3, eta_idler},
      phase_shifter(theta, 2, n),
      beamsplitter(tau_A, 0, 2, n),
      beamsplitter(tau_B, 1, 3, n),
  };
  c.detectors = DetectorRegistry({det("DA1", {0}), det("DA2", {2}), det("DB1", {1}), det("DB2", {3})});
  c.patterns = {
      {"C11", clicks({"DA1", "DB1"})},
      {"C12", clicks({"DA1", "DB2"})},
      {"C21", clicks({"DA2", "DB1"})},
      {"C22", clicks({"DA2", "DB2"})},
  };
  for (const char* d : {"DA1", "DA2", "DB1", "DB2"}) c.timing[d] = {d, kLateBinOffsetPs};
  return c;
}

GaussianState evaluate(const CircuitModel& circuit, const GaussianState& input) {
  if (input.num_modes() != circuit.num_modes) throw ShapeError("input state does not match circuit");
  GaussianState state = input;
  for (const auto& op : circuit.ops) {
    if (const auto* s = std::get_if<SymplecticOp>(&op)) {
      state = apply_symplectic(state, *s);
    } else {
      const auto& l = std::get<LossOp>(op);
      state = apply_loss(state, l.mode, l.eta);
    }
  }
  return state;
}

GaussianState evaluate(const CircuitModel& circuit) { return evaluate(circuit, circuit.input_state()); }

double pattern_probability(const CircuitModel& circuit, const GaussianState& output, const std::string& name) {
  return click_pattern_probability(output, circuit.detectors, circuit.pattern(name));
}

double delay_to_indistinguishability(double delta_t_ps, double sigma_ps) {
  if (!(sigma_ps > 0.0) || !std::isfinite(sigma_ps)) throw DomainError("pulse duration must be positive");
  if (!std::isfinite(delta_t_ps)) throw DomainError("delay must be finite");
  return std::exp(-delta_t_ps * delta_t_ps / (4.0 * sigma_ps * sigma_ps));
}

}  // namespace tbswap
