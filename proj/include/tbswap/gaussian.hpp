#pragma once

// Phase-space representation of zero-mean Gaussian states of N bosonic
// modes and the linear-optics operations acting on them.
//
// Conventions:
//  * quadratures are interleaved, mode k owns rows/columns 2k (x) and 2k+1 (p);
//  * vacuum covariance is the identity;
//  * a symplectic matrix S maps gamma -> S^T gamma S and d -> S^T d.

#include <Eigen/Dense>

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace tbswap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kMaxModes = 32;

enum class Party { Alice, Bob, Charlie, Ancilla };
enum class Channel { Signal, Idler, VacuumAncilla, DistinguishabilityAncilla };
enum class TimeBin { Early, Late, None };

struct ModeLabel {
  Party party = Party::Ancilla;
  Channel channel = Channel::VacuumAncilla;
  TimeBin time_bin = TimeBin::None;
  int port = 0;

  auto operator<=>(const ModeLabel&) const = default;
  std::string str() const;
};

// Ordered, duplicate-free list of mode descriptors.
class ModeLayout {
 public:
  ModeLayout() = default;
  explicit ModeLayout(std::vector<ModeLabel> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<ModeLabel>& labels() const { return labels_; }
  const ModeLabel& operator[](int mode) const { return labels_.at(mode); }
  int index_of(const ModeLabel& label) const;

  static ModeLayout concat(std::span<const ModeLayout> parts);

 private:
  std::vector<ModeLabel> labels_;
};

class GaussianState {
 public:
  static GaussianState vacuum(int num_modes);
  // Symmetrizes and checks positivity and the uncertainty relation.
  static GaussianState from_covariance(const Matrix& covariance,
                                       const Vector& displacement = Vector());

  int num_modes() const { return static_cast<int>(displacement_.size() / 2); }
  Matrix covariance() const;
  const Vector& displacement() const { return displacement_; }
  // (gamma - I) / 2: covariance in excess of vacuum. All detection math is
  // done on this matrix so that small photon numbers keep full precision.
  const Matrix& excess() const { return excess_; }

  bool has_zero_displacement() const;

 private:
  friend GaussianState make_state_from_excess(Matrix excess, Vector displacement);
  GaussianState(Matrix excess, Vector displacement);

  Vector displacement_;
  Matrix excess_;
};

// Internal constructor for pipelines that already work in the excess form.
GaussianState make_state_from_excess(Matrix excess, Vector displacement);

class SymplecticOp {
 public:
  static SymplecticOp identity(int num_modes);
  // Checks S^T Omega S = Omega within 1e-12.
  static SymplecticOp from_matrix(const Matrix& s);

  int num_modes() const { return static_cast<int>(matrix_.rows() / 2); }
  const Matrix& matrix() const { return matrix_; }
  // Passive (orthogonal) ops conserve photon number; beamsplitters and
  // phase shifters are passive by construction.
  bool passive() const { return passive_; }

  // Apply *this first, then next.
  SymplecticOp then(const SymplecticOp& next) const;

 private:
  SymplecticOp(Matrix s, bool passive) : matrix_(std::move(s)), passive_(passive) {}
  friend SymplecticOp beamsplitter(double, int, int, int);
  friend SymplecticOp phase_shifter(double, int, int);

  Matrix matrix_;
  bool passive_ = false;
};

Matrix symplectic_form(int num_modes);
double symplectic_defect(const Matrix& s);

// 4x4 covariance [[A, B], [B, A]] of a two-mode squeezed vacuum with mean
// photon number mu per mode.
Matrix tmsv_covariance(double mu);
GaussianState tmsv_state(double mu);
GaussianState thermal_state(double mean_photons);

struct LayoutState {
  GaussianState state;
  ModeLayout layout;
};

LayoutState direct_sum(std::span<const GaussianState> states, std::span<const ModeLayout> layouts);
GaussianState direct_sum(std::span<const GaussianState> states);

SymplecticOp beamsplitter(double t, int mode_a, int mode_b, int total_modes);
SymplecticOp phase_shifter(double theta, int mode, int total_modes);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op);
// Single-mode pure-loss channel with transmission eta.
GaussianState apply_loss(const GaussianState& state, int mode, double eta);
// Same channel built explicitly: append a vacuum, mix with t = sqrt(eta),
// trace the ancilla. Kept as an independent route for tests.
GaussianState apply_loss_via_ancilla(const GaussianState& state, int mode, double eta);

GaussianState reduce(const GaussianState& state, std::vector<int> keep_modes);

// Tr[rho |0><0|^{M}] on the given modes: 2^M / sqrt(det(I + gamma_M)).
double vacuum_probability(const GaussianState& state, std::span<const int> modes);
// Natural log of the above, accurate for probabilities close to one.
double log_vacuum_probability(const GaussianState& state, std::span<const int> modes);
// Same value in long double, for callers that sum many of them with signs.
long double log_vacuum_probability_extended(const GaussianState& state, std::span<const int> modes);

std::vector<double> symplectic_eigenvalues(const GaussianState& state);
bool is_physical(const GaussianState& state, double tol = 1e-9);
double mean_photon_number(const GaussianState& state, int mode);

}  // namespace tbswap
