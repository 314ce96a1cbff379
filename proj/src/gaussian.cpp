#include "tbswap/gaussian.hpp"

#include "tbswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tbswap {

namespace {

const char* party_name(Party p) {
  switch (p) {
    case Party::Alice: return "Alice";
    case Party::Bob: return "Bob";
    case Party::Charlie: return "Charlie";
    case Party::Ancilla: return "ancilla";
  }
  return "?";
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::Signal: return "signal";
    case Channel::Idler: return "idler";
    case Channel::VacuumAncilla: return "vacuum";
    case Channel::DistinguishabilityAncilla: return "mismatch";
  }
  return "?";
}

const char* bin_name(TimeBin b) {
  switch (b) {
    case TimeBin::Early: return "early";
    case TimeBin::Late: return "late";
    case TimeBin::None: return "none";
  }
  return "?";
}

void check_mode(int mode, int total, const char* what) {
  if (mode < 0 || mode >= total) {
    std::ostringstream os;
    os << what << ": mode index " << mode << " outside [0, " << total << ")";
    throw DomainError(os.str());
  }
}

void check_mode_count(int n) {
  if (n <= 0 || n > kMaxModes) {
    throw DomainError("number of modes must be in [1, " + std::to_string(kMaxModes) + "], got " +
                      std::to_string(n));
  }
}

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

std::vector<int> quadrature_indices(std::span<const int> modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

// log det(I + delta) from a Cholesky factorization that carries the
// diagonal excess e_j = K_jj - 1 - sum_k L_jk^2 explicitly. For states near
// vacuum this keeps relative precision in the (small) excess instead of
// rounding against 1.
long double log_det_identity_plus(const Matrix& delta) {
  // Extended precision: click probabilities are alternating sums of these
  // values, so rounding here is amplified by roughly 1 / (eta mu).
  using Ld = long double;
  const Eigen::Index n = delta.rows();
  Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic> lower =
      Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  Ld log_det = 0.0L;
  for (Eigen::Index j = 0; j < n; ++j) {
    Ld excess = delta(j, j);
    for (Eigen::Index k = 0; k < j; ++k) excess -= lower(j, k) * lower(j, k);
    const Ld pivot = 1.0L + excess;
    if (!(pivot > 0.0L) || !std::isfinite(pivot)) {
      throw NumericalError("I + gamma is not positive definite (unphysical state upstream)");
    }
    const Ld ljj = std::sqrt(pivot);
    lower(j, j) = ljj;
    log_det += std::log1p(excess);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Ld v = delta(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
      lower(i, j) = v / ljj;
    }
  }
  return log_det;
}

}  // namespace

std::string ModeLabel::str() const {
  std::ostringstream os;
  os << party_name(party) << '.' << channel_name(channel) << '.' << bin_name(time_bin) << '.'
     << port;
  return os.str();
}

ModeLayout::ModeLayout(std::vector<ModeLabel> labels) : labels_(std::move(labels)) {
  std::set<ModeLabel> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw LayoutError("duplicate mode descriptor " + l.str());
  }
}

int ModeLayout::index_of(const ModeLabel& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw LayoutError("mode " + label.str() + " not in layout");
  return static_cast<int>(it - labels_.begin());
}

ModeLayout ModeLayout::concat(std::span<const ModeLayout> parts) {
  std::vector<ModeLabel> all;
  for (const auto& p : parts) all.insert(all.end(), p.labels().begin(), p.labels().end());
  return ModeLayout(std::move(all));
}

GaussianState::GaussianState(Matrix excess, Vector displacement)
    : displacement_(std::move(displacement)), excess_(std::move(excess)) {}

GaussianState make_state_from_excess(Matrix excess, Vector displacement) {
  symmetrize(excess);
  return GaussianState(std::move(excess), std::move(displacement));
}

GaussianState GaussianState::vacuum(int num_modes) {
  check_mode_count(num_modes);
  return GaussianState(Matrix::Zero(2 * num_modes, 2 * num_modes), Vector::Zero(2 * num_modes));
}

GaussianState GaussianState::from_covariance(const Matrix& covariance, const Vector& displacement) {
  if (covariance.rows() != covariance.cols() || covariance.rows() % 2 != 0) {
    throw ShapeError("covariance must be a square 2N x 2N matrix");
  }
  const int n = static_cast<int>(covariance.rows() / 2);
  check_mode_count(n);
  Vector d = displacement.size() == 0 ? Vector::Zero(2 * n) : displacement;
  if (d.size() != 2 * n) throw ShapeError("displacement length must be 2N");
  if (!covariance.allFinite() || !d.allFinite()) throw DomainError("non-finite state entries");
  Matrix excess = 0.5 * (covariance - Matrix::Identity(2 * n, 2 * n));
  symmetrize(excess);
  GaussianState state(std::move(excess), std::move(d));
  Eigen::LLT<Matrix> llt(state.covariance());
  if (llt.info() != Eigen::Success) throw DomainError("covariance is not positive definite");
  if (!is_physical(state)) throw DomainError("covariance violates the uncertainty relation");
  return state;
}

Matrix GaussianState::covariance() const {
  const auto n = excess_.rows();
  return Matrix::Identity(n, n) + 2.0 * excess_;
}

bool GaussianState::has_zero_displacement() const {
  return displacement_.size() == 0 || displacement_.cwiseAbs().maxCoeff() == 0.0;
}

Matrix symplectic_form(int num_modes) {
  Matrix omega = Matrix::Zero(2 * num_modes, 2 * num_modes);
  for (int k = 0; k < num_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

double symplectic_defect(const Matrix& s) {
  const int n = static_cast<int>(s.rows() / 2);
  const Matrix omega = symplectic_form(n);
  return (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff();
}

SymplecticOp SymplecticOp::identity(int num_modes) {
  check_mode_count(num_modes);
  return SymplecticOp(Matrix::Identity(2 * num_modes, 2 * num_modes), true);
}

SymplecticOp SymplecticOp::from_matrix(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) throw ShapeError("symplectic matrix must be 2N x 2N");
  check_mode_count(static_cast<int>(s.rows() / 2));
  if (!s.allFinite()) throw DomainError("non-finite symplectic matrix");
  if (symplectic_defect(s) >= 1e-12) throw DomainError("matrix is not symplectic within 1e-12");
  const auto n = s.rows();
  const bool passive = (s.transpose() * s - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12;
  return SymplecticOp(s, passive);
}

SymplecticOp SymplecticOp::then(const SymplecticOp& next) const {
  if (next.num_modes() != num_modes()) throw ShapeError("composing ops of different sizes");
  // gamma'' = S2^T S1^T gamma S1 S2, so the combined matrix is S1 S2.
  return SymplecticOp(matrix_ * next.matrix_, passive_ && next.passive_);
}

Matrix tmsv_covariance(double mu) {
  if (!std::isfinite(mu) || mu < 0.0) throw DomainError("mean photon number must be finite and >= 0");
  const double a = 1.0 + 2.0 * mu;
  const double c = 2.0 * std::sqrt(mu * (mu + 1.0));
  Matrix g = Matrix::Zero(4, 4);
  g(0, 0) = g(1, 1) = g(2, 2) = g(3, 3) = a;
  g(0, 2) = g(2, 0) = c;
  g(1, 3) = g(3, 1) = -c;
  return g;
}

GaussianState tmsv_state(double mu) {
  if (!std::isfinite(mu) || mu < 0.0) throw DomainError("mean photon number must be finite and >= 0");
  // Built directly in excess form: diag mu, cross terms sqrt(mu (mu + 1)).
  const double s = std::sqrt(mu * (mu + 1.0));
  Matrix e = Matrix::Zero(4, 4);
  e(0, 0) = e(1, 1) = e(2, 2) = e(3, 3) = mu;
  e(0, 2) = e(2, 0) = s;
  e(1, 3) = e(3, 1) = -s;
  return make_state_from_excess(std::move(e), Vector::Zero(4));
}

GaussianState thermal_state(double mean_photons) {
  if (!std::isfinite(mean_photons) || mean_photons < 0.0) {
    throw DomainError("thermal mean photon number must be finite and >= 0");
  }
  Matrix e = mean_photons * Matrix::Identity(2, 2);
  return make_state_from_excess(std::move(e), Vector::Zero(2));
}

GaussianState direct_sum(std::span<const GaussianState> states) {
  if (states.empty()) throw DomainError("direct_sum of an empty list");
  int total = 0;
  for (const auto& s : states) total += s.num_modes();
  check_mode_count(total);
  Matrix e = Matrix::Zero(2 * total, 2 * total);
  Vector d = Vector::Zero(2 * total);
  int offset = 0;
  for (const auto& s : states) {
    const int k = 2 * s.num_modes();
    e.block(offset, offset, k, k) = s.excess();
    d.segment(offset, k) = s.displacement();
    offset += k;
  }
  return make_state_from_excess(std::move(e), std::move(d));
}

LayoutState direct_sum(std::span<const GaussianState> states, std::span<const ModeLayout> layouts) {
  if (states.size() != layouts.size()) throw ShapeError("states and layouts differ in length");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].num_modes() != layouts[i].size()) throw ShapeError("layout size does not match state");
  }
  ModeLayout merged = ModeLayout::concat(layouts);
  return {direct_sum(states), std::move(merged)};
}

SymplecticOp beamsplitter(double t, int mode_a, int mode_b, int total_modes) {
  check_mode_count(total_modes);
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("beamsplitter transmittance must lie in [0, 1]");
  check_mode(mode_a, total_modes, "beamsplitter");
  check_mode(mode_b, total_modes, "beamsplitter");
  if (mode_a == mode_b) throw DomainError("beamsplitter needs two distinct modes");
  const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
  Matrix s = Matrix::Identity(2 * total_modes, 2 * total_modes);
  const int a = 2 * mode_a;
  const int b = 2 * mode_b;
  s(a, a) = s(a + 1, a + 1) = t;
  s(b, b) = s(b + 1, b + 1) = t;
  // R = [[0, -r], [r, 0]] in both off-diagonal blocks.
  s(a, b + 1) = -r;
  s(a + 1, b) = r;
  s(b, a + 1) = -r;
  s(b + 1, a) = r;
  return SymplecticOp(std::move(s), true);
}

SymplecticOp phase_shifter(double theta, int mode, int total_modes) {
  check_mode_count(total_modes);
  if (!std::isfinite(theta)) throw DomainError("phase must be finite");
  check_mode(mode, total_modes, "phase_shifter");
  Matrix s = Matrix::Identity(2 * total_modes, 2 * total_modes);
  const int a = 2 * mode;
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  s(a, a) = c;
  s(a, a + 1) = -sn;
  s(a + 1, a) = sn;
  s(a + 1, a + 1) = c;
  return SymplecticOp(std::move(s), true);
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op) {
  if (op.num_modes() != state.num_modes()) throw ShapeError("op and state dimensions differ");
  const Matrix& s = op.matrix();
  Matrix e = s.transpose() * state.excess() * s;
  if (!op.passive()) {
    const auto n = s.rows();
    e += 0.5 * (s.transpose() * s - Matrix::Identity(n, n));
  }
  Vector d = s.transpose() * state.displacement();
  return make_state_from_excess(std::move(e), std::move(d));
}

GaussianState apply_loss(const GaussianState& state, int mode, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss efficiency must lie in [0, 1]");
  check_mode(mode, state.num_modes(), "apply_loss");
  // gamma_mode -> eta gamma_mode + (1 - eta) I is Delta_mode -> eta Delta_mode;
  // cross blocks and displacement scale by sqrt(eta).
  Matrix e = state.excess();
  Vector d = state.displacement();
  const double s = std::sqrt(eta);
  const int q = 2 * mode;
  e.middleRows(q, 2) *= s;
  e.middleCols(q, 2) *= s;
  d.segment(q, 2) *= s;
  return make_state_from_excess(std::move(e), std::move(d));
}

GaussianState apply_loss_via_ancilla(const GaussianState& state, int mode, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("loss efficiency must lie in [0, 1]");
  check_mode(mode, state.num_modes(), "apply_loss_via_ancilla");
  const int n = state.num_modes();
  const GaussianState parts[] = {state, GaussianState::vacuum(1)};
  GaussianState extended = direct_sum(parts);
  extended = apply_symplectic(extended, beamsplitter(std::sqrt(eta), mode, n, n + 1));
  std::vector<int> keep(n);
  for (int k = 0; k < n; ++k) keep[k] = k;
  return reduce(extended, keep);
}

GaussianState reduce(const GaussianState& state, std::vector<int> keep_modes) {
  if (keep_modes.empty()) throw DomainError("reduce: empty keep set");
  std::sort(keep_modes.begin(), keep_modes.end());
  keep_modes.erase(std::unique(keep_modes.begin(), keep_modes.end()), keep_modes.end());
  for (int m : keep_modes) check_mode(m, state.num_modes(), "reduce");
  const auto idx = quadrature_indices(keep_modes);
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix e(k, k);
  Vector d(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    d(i) = state.displacement()(idx[i]);
    for (Eigen::Index j = 0; j < k; ++j) e(i, j) = state.excess()(idx[i], idx[j]);
  }
  return make_state_from_excess(std::move(e), std::move(d));
}

long double log_vacuum_probability_extended(const GaussianState& state, std::span<const int> modes) {
  if (!state.has_zero_displacement()) {
    throw DomainError("vacuum_probability requires a zero-displacement state");
  }
  if (modes.empty()) return 0.0L;
  std::vector<int> sorted(modes.begin(), modes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("vacuum_probability: repeated mode index");
  }
  for (int m : sorted) check_mode(m, state.num_modes(), "vacuum_probability");
  const auto idx = quadrature_indices(sorted);
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = state.excess()(idx[i], idx[j]);
  }
  // 2^M / sqrt(det(I + gamma)) = 1 / sqrt(det(I + Delta)).
  return -0.5L * log_det_identity_plus(sub);
}

double log_vacuum_probability(const GaussianState& state, std::span<const int> modes) {
  return static_cast<double>(log_vacuum_probability_extended(state, modes));
}

double vacuum_probability(const GaussianState& state, std::span<const int> modes) {
  return std::exp(log_vacuum_probability(state, modes));
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  const int n = state.num_modes();
  const Matrix m = symplectic_form(n) * state.covariance();
  Eigen::EigenSolver<Matrix> solver(m, false);
  std::vector<double> mags;
  mags.reserve(2 * n);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    mags.push_back(std::abs(solver.eigenvalues()(i)));
  }
  std::sort(mags.begin(), mags.end());
  // Eigenvalues of Omega gamma come in pairs +-i nu.
  std::vector<double> nu(n);
  for (int k = 0; k < n; ++k) nu[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
  return nu;
}

bool is_physical(const GaussianState& state, double tol) {
  const auto nu = symplectic_eigenvalues(state);
  return std::all_of(nu.begin(), nu.end(), [tol](double v) { return v >= 1.0 - tol; });
}

double mean_photon_number(const GaussianState& state, int mode) {
  check_mode(mode, state.num_modes(), "mean_photon_number");
  const int q = 2 * mode;
  const auto& d = state.displacement();
  return 0.5 * (state.excess()(q, q) + state.excess()(q + 1, q + 1)) +
         0.25 * (d(q) * d(q) + d(q + 1) * d(q + 1));
}

}  // namespace tbswap
