#include "tbswap/fock_oracle.hpp"

#include "tbswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace tbswap {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Modes on which the op differs from the identity.
std::vector<int> op_support(const Matrix& s) {
  const int n = static_cast<int>(s.rows() / 2);
  std::vector<int> support;
  for (int k = 0; k < n; ++k) {
    bool trivial = true;
    for (int i = 0; i < 2 * n && trivial; ++i) {
      for (int q = 0; q < 2; ++q) {
        const double expect = (i == 2 * k + q) ? 1.0 : 0.0;
        if (s(i, 2 * k + q) != expect || s(2 * k + q, i) != expect) trivial = false;
      }
    }
    if (!trivial) support.push_back(k);
  }
  return support;
}

using SubOcc = std::vector<std::uint8_t>;
using Poly = std::map<SubOcc, Complex>;

// Expansion of prod_j (sum_k U_kj a_k^dag)^{n_j} / sqrt(n_j!) |0> into
// normalized output occupations on the support.
Poly expand(const SubOcc& in, const std::vector<std::vector<Complex>>& u) {
  const std::size_t k = in.size();
  Poly poly;
  poly[SubOcc(k, 0)] = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    for (int rep = 0; rep < in[j]; ++rep) {
      Poly next;
      for (const auto& [mono, c] : poly) {
        for (std::size_t out = 0; out < k; ++out) {
          if (u[out][j] == Complex(0.0)) continue;
          SubOcc m = mono;
          ++m[out];
          next[m] += c * u[out][j];
        }
      }
      poly.swap(next);
    }
    if (in[j] > 1) {
      const double f = 1.0 / std::sqrt(factorial(in[j]));
      for (auto& [mono, c] : poly) c *= f;
    }
  }
  for (auto& [mono, c] : poly) {
    double f = 1.0;
    for (auto m : mono) f *= factorial(m);
    c *= std::sqrt(f);
  }
  return poly;
}

}  // namespace

int Occupation::total() const { return std::accumulate(n.begin(), n.end(), 0); }

std::size_t OccupationHash::operator()(const Occupation& o) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : o.n) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

FockState::FockState(int num_modes, Amplitudes amplitudes, double truncation_bound)
    : num_modes_(num_modes), amplitudes_(std::move(amplitudes)), truncation_bound_(truncation_bound) {
  if (num_modes_ <= 0 || num_modes_ > kMaxModes) throw DomainError("Fock state mode count out of range");
}

FockState FockState::vacuum(int num_modes) {
  Amplitudes a;
  a[Occupation{}] = 1.0;
  return FockState(num_modes, std::move(a), 0.0);
}

Complex FockState::amplitude(const Occupation& occ) const {
  auto it = amplitudes_.find(occ);
  return it == amplitudes_.end() ? Complex(0.0) : it->second;
}

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [occ, a] : amplitudes_) s += std::norm(a);
  return s;
}

std::vector<double> FockState::photon_distribution(int mode) const {
  if (mode < 0 || mode >= num_modes_) throw DomainError("mode index out of range");
  std::vector<double> p;
  for (const auto& [occ, a] : amplitudes_) {
    const int n = occ.n[mode];
    if (static_cast<int>(p.size()) <= n) p.resize(n + 1, 0.0);
    p[n] += std::norm(a);
  }
  return p;
}

double tmsv_tail(double mu, int n_max) {
  if (!std::isfinite(mu) || mu < 0.0) throw DomainError("mean photon number must be finite and >= 0");
  if (mu == 0.0) return 0.0;
  return std::pow(mu / (1.0 + mu), n_max + 1);
}

int default_n_max(double mu) {
  int n = 1;
  while (tmsv_tail(mu, n) > kMaxTruncationBound) {
    ++n;
    if (n > 200) throw TruncationError("mean photon number too large for the Fock oracle");
  }
  return n;
}

FockState tmsv_fock(double mu, int n_max) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  const double tail = tmsv_tail(mu, n_max);
  if (tail > kMaxTruncationBound) {
    throw TruncationError("truncation tail " + std::to_string(tail) + " exceeds 1e-6; use n_max >= " +
                          std::to_string(default_n_max(mu)));
  }
  FockState::Amplitudes a;
  const double ratio = mu / (1.0 + mu);
  double weight = 1.0 / (1.0 + mu);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 255) break;
    Occupation occ;
    occ.n[0] = occ.n[1] = static_cast<std::uint8_t>(n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    if (weight > 0.0 || n == 0) a[occ] = sign * std::sqrt(weight);
    weight *= ratio;
  }
  return FockState(2, std::move(a), tail);
}

double pair_count_tail(std::span<const double> mus, int max_pairs) {
  if (max_pairs < 0) throw DomainError("max_pairs must be >= 0");
  // Distribution of the total by convolving geometric laws up to max_pairs.
  std::vector<double> dist(max_pairs + 1, 0.0);
  dist[0] = 1.0;
  for (double mu : mus) {
    if (!std::isfinite(mu) || mu < 0.0) throw DomainError("mean photon number must be finite and >= 0");
    std::vector<double> g(max_pairs + 1);
    const double ratio = mu / (1.0 + mu);
    double w = 1.0 / (1.0 + mu);
    for (int n = 0; n <= max_pairs; ++n) {
      g[n] = w;
      w *= ratio;
    }
    std::vector<double> next(max_pairs + 1, 0.0);
    for (int i = 0; i <= max_pairs; ++i) {
      for (int j = 0; i + j <= max_pairs; ++j) next[i + j] += dist[i] * g[j];
    }
    dist.swap(next);
  }
  const double kept = std::accumulate(dist.begin(), dist.end(), 0.0);
  return std::max(0.0, 1.0 - kept);
}

int pairs_for_tail(std::span<const double> mus, double target) {
  if (!(target > 0.0)) throw DomainError("target tail must be positive");
  int k = 0;
  while (pair_count_tail(mus, k) > target) {
    ++k;
    if (k > 60) throw TruncationError("sources too bright for the Fock oracle");
  }
  return k;
}

FockState tensor(const FockState& a, const FockState& b) {
  const int n = a.num_modes() + b.num_modes();
  if (n > kMaxModes) throw CapacityError("tensor product exceeds the mode limit");
  FockState::Amplitudes out;
  for (const auto& [oa, ca] : a.amplitudes()) {
    for (const auto& [ob, cb] : b.amplitudes()) {
      Occupation o = oa;
      for (int k = 0; k < b.num_modes(); ++k) o.n[a.num_modes() + k] = ob.n[k];
      out[o] = ca * cb;
    }
  }
  return FockState(n, std::move(out), a.truncation_bound() + b.truncation_bound());
}

FockState sources_fock(int num_modes, std::span<const TmsvSource> sources, int max_pairs) {
  if (num_modes <= 0 || num_modes > kMaxModes) throw DomainError("mode count out of range");
  std::vector<double> mus;
  for (const auto& s : sources) {
    if (s.signal < 0 || s.signal >= num_modes || s.idler < 0 || s.idler >= num_modes || s.signal == s.idler) {
      throw DomainError("source refers to invalid modes");
    }
    mus.push_back(s.mu);
  }
  if (max_pairs < 0) max_pairs = pairs_for_tail(mus, kMaxTruncationBound);
  const double tail = pair_count_tail(mus, max_pairs);
  if (tail > kMaxTruncationBound) {
    throw TruncationError("discarded weight " + std::to_string(tail) + " exceeds 1e-6; raise max_pairs");
  }
  if (max_pairs > 255) throw CapacityError("max_pairs too large");

  FockState::Amplitudes amps;
  amps[Occupation{}] = 1.0;
  for (const auto& s : sources) {
    const double ratio = s.mu / (1.0 + s.mu);
    FockState::Amplitudes next;
    for (const auto& [occ, c] : amps) {
      int used = 0;
      for (std::size_t q = 0; q < sources.size(); ++q) used += occ.n[sources[q].signal];
      double weight = 1.0 / (1.0 + s.mu);
      for (int n = 0; used + n <= max_pairs; ++n) {
        if (n > 0 && weight == 0.0) break;
        Occupation o = occ;
        if (o.n[s.signal] != 0 || o.n[s.idler] != 0) throw DomainError("two sources feed the same mode");
        o.n[s.signal] = o.n[s.idler] = static_cast<std::uint8_t>(n);
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        next[o] = c * sign * std::sqrt(weight);
        weight *= ratio;
      }
    }
    amps.swap(next);
  }
  return FockState(num_modes, std::move(amps), tail);
}

FockState apply_linear_optics_fock(const FockState& state, const SymplecticOp& op) {
  if (op.num_modes() != state.num_modes()) throw ShapeError("op and Fock state dimensions differ");
  if (!op.passive()) throw UnsupportedOpError("the Fock oracle supports passive optics only");
  // gamma' = S^T gamma S means quadratures evolve with M = S^T; the 2x2 block
  // (k, j) of a passive M is [[a, -b], [b, a]] with U_kj = a + i b.
  const Matrix m = op.matrix().transpose();
  const std::vector<int> support = op_support(op.matrix());
  if (support.empty()) return state;
  const std::size_t k = support.size();
  std::vector<std::vector<Complex>> u(k, std::vector<Complex>(k));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      u[r][c] = Complex(m(2 * support[r], 2 * support[c]), m(2 * support[r] + 1, 2 * support[c]));
    }
  }
  std::map<SubOcc, Poly> memo;
  FockState::Amplitudes out;
  out.reserve(state.size() * 2);
  for (const auto& [occ, c] : state.amplitudes()) {
    SubOcc sub(k);
    for (std::size_t j = 0; j < k; ++j) sub[j] = occ.n[support[j]];
    auto it = memo.find(sub);
    if (it == memo.end()) it = memo.emplace(sub, expand(sub, u)).first;
    for (const auto& [mono, coeff] : it->second) {
      Occupation o = occ;
      for (std::size_t j = 0; j < k; ++j) o.n[support[j]] = mono[j];
      out[o] += c * coeff;
    }
  }
  // Drop exact numerical zeros left by interference so the map stays small.
  for (auto it = out.begin(); it != out.end();) {
    if (std::norm(it->second) < 1e-32) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return FockState(state.num_modes(), std::move(out), state.truncation_bound());
}

FockState apply_loss_fock(const FockState& state, int mode, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss efficiency must lie in [0, 1]");
  if (mode < 0 || mode >= state.num_modes()) throw DomainError("mode index out of range");
  const int n = state.num_modes() + 1;
  if (n > kMaxModes) throw CapacityError("loss ancilla exceeds the mode limit");
  FockState widened(n, state.amplitudes(), state.truncation_bound());
  return apply_linear_optics_fock(widened, beamsplitter(std::sqrt(eta), mode, n - 1, n));
}

double oracle_click_probability(const FockState& state, const ClickPattern& pattern,
                                const DetectorRegistry& detectors, const DetectionLossMap& loss) {
  detectors.check_modes(state.num_modes());
  for (const auto& [m, eta] : loss) {
    if (m < 0 || m >= state.num_modes()) throw DomainError("detection loss refers to an invalid mode");
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("detection efficiency must lie in [0, 1]");
  }
  struct Term {
    std::vector<std::pair<int, double>> modes;  // (mode, 1 - eta)
    double dark = 0.0;
    bool click = false;
  };
  std::vector<Term> terms;
  auto add = [&](const std::string& name, bool click) {
    const auto& d = detectors[detectors.index_of(name)];
    Term t;
    t.click = click;
    t.dark = d.dark_count_prob;
    for (int m : d.modes) {
      auto it = loss.find(m);
      t.modes.emplace_back(m, it == loss.end() ? 0.0 : 1.0 - it->second);
    }
    terms.push_back(std::move(t));
  };
  for (const auto& n : pattern.must_click) add(n, true);
  for (const auto& n : pattern.must_not_click) add(n, false);

  // Direct photon-number sum: a detector stays silent with probability
  // (1 - nu) prod_m (1 - eta_m)^{n_m}.
  double p = 0.0;
  for (const auto& [occ, a] : state.amplitudes()) {
    double w = std::norm(a);
    for (const auto& t : terms) {
      double silent = 1.0 - t.dark;
      for (const auto& [m, miss] : t.modes) {
        if (occ.n[m] > 0) silent *= std::pow(miss, occ.n[m]);
      }
      w *= t.click ? (1.0 - silent) : silent;
      if (w == 0.0) break;
    }
    p += w;
  }
  return p;
}

FockState evaluate_fock(const CircuitModel& circuit, int max_pairs) {
  FockState state = sources_fock(circuit.num_modes, circuit.sources, max_pairs);
  int extra = 0;
  for (const auto& op : circuit.ops) {
    if (const auto* l = std::get_if<LossOp>(&op)) {
      if (l->eta < 1.0) {
        state = apply_loss_fock(state, l->mode, l->eta);
        ++extra;
      }
      continue;
    }
    const auto& s = std::get<SymplecticOp>(op);
    if (extra == 0) {
      state = apply_linear_optics_fock(state, s);
      continue;
    }
    // Widen the op with identity on the loss ancillas.
    const int n = state.num_modes();
    Matrix big = Matrix::Identity(2 * n, 2 * n);
    big.topLeftCorner(2 * circuit.num_modes, 2 * circuit.num_modes) = s.matrix();
    state = apply_linear_optics_fock(state, SymplecticOp::from_matrix(big));
  }
  return state;
}

}  // namespace tbswap
