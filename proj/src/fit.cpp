#include "tbswap/fit.hpp"

#include "tbswap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace tbswap {

namespace {

using ModelFn = std::function<double(double, const Vector&, Vector*)>;

struct LmOutcome {
  Vector params;
  Matrix covariance;
  double chi2 = 0.0;
  int iterations = 0;
  bool ok = false;
};

double chi_square(std::span<const FitPoint> pts, const ModelFn& f, const Vector& p) {
  double s = 0.0;
  for (const auto& pt : pts) {
    const double r = (pt.counts - f(pt.x, p, nullptr)) / pt.sigma;
    s += r * r;
  }
  return s;
}

// Levenberg-Marquardt with Marquardt diagonal scaling; free[j] selects the
// parameters that move.
LmOutcome levenberg_marquardt(std::span<const FitPoint> pts, const ModelFn& f, Vector p,
                              const std::vector<bool>& free) {
  const int np = static_cast<int>(p.size());
  std::vector<int> idx;
  for (int j = 0; j < np; ++j) {
    if (free[j]) idx.push_back(j);
  }
  const int nf = static_cast<int>(idx.size());
  LmOutcome out;
  double chi2 = chi_square(pts, f, p);
  if (!std::isfinite(chi2)) return out;
  double lambda = 1e-3;
  Vector grad(np);
  Matrix jtj(nf, nf);
  Vector jtr(nf);
  auto build = [&](const Vector& q) {
    jtj.setZero();
    jtr.setZero();
    for (const auto& pt : pts) {
      const double r = (pt.counts - f(pt.x, q, &grad)) / pt.sigma;
      Vector row(nf);
      for (int a = 0; a < nf; ++a) row(a) = grad(idx[a]) / pt.sigma;
      jtj += row * row.transpose();
      jtr += row * r;
    }
  };
  int it = 0;
  for (; it < 500; ++it) {
    build(p);
    bool accepted = false;
    while (lambda < 1e12) {
      Matrix a = jtj;
      for (int d = 0; d < nf; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-300);
      const Vector step = a.ldlt().solve(jtr);
      Vector trial = p;
      for (int q = 0; q < nf; ++q) trial(idx[q]) += step(q);
      const double c2 = chi_square(pts, f, trial);
      if (std::isfinite(c2) && c2 <= chi2) {
        const double drop = chi2 - c2;
        const double rel_step = step.norm() / (1e-12 + p.norm());
        p = trial;
        chi2 = c2;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (drop <= 1e-13 * (1.0 + chi2) && rel_step < 1e-10) it = 1000;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;  // no downhill step left: at a minimum
  }
  build(p);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jtj);
  const Matrix inv = cod.pseudoInverse();
  out.covariance = Matrix::Zero(np, np);
  for (int a = 0; a < nf; ++a) {
    for (int b = 0; b < nf; ++b) out.covariance(idx[a], idx[b]) = inv(a, b);
  }
  out.params = p;
  out.chi2 = chi2;
  out.iterations = std::min(it, 500);
  out.ok = p.allFinite() && std::isfinite(chi2);
  return out;
}

void check_points(std::span<const FitPoint> pts, bool positive_counts) {
  if (pts.size() < 5) throw FitError("at least 5 points are required");
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.counts) || !(p.sigma > 0.0)) {
      throw FitError("points need finite coordinates and positive uncertainties");
    }
    if (positive_counts && !(p.counts > 0.0)) throw FitError("counts must be positive");
  }
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

// Iterated refits with variances taken from the current model curve.
LmOutcome reweight_by_model(std::span<const FitPoint> points, const ModelFn& f, LmOutcome best,
                            const std::vector<bool>& free) {
  std::vector<FitPoint> pts(points.begin(), points.end());
  for (int round = 0; round < 20; ++round) {
    for (auto& pt : pts) pt.sigma = std::sqrt(std::max(f(pt.x, best.params, nullptr), 1.0));
    LmOutcome next = levenberg_marquardt(pts, f, best.params, free);
    if (!next.ok) throw FitError("model-weighted refit did not converge");
    const double change = (next.params - best.params).cwiseAbs().maxCoeff();
    const double scale = 1.0 + best.params.cwiseAbs().maxCoeff();
    best = next;
    if (change <= 1e-10 * scale) return best;
  }
  throw FitError("model-weighted refit did not settle in 20 rounds");
}

}  // namespace

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return params(static_cast<Eigen::Index>(i));
  }
  throw DomainError("fit has no parameter " + name);
}

double FitResult::sigma(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      const auto k = static_cast<Eigen::Index>(i);
      return std::sqrt(std::max(0.0, covariance(k, k)));
    }
  }
  throw DomainError("fit has no parameter " + name);
}

std::vector<FitPoint> poisson_points(std::span<const double> x, std::span<const double> counts) {
  if (x.size() != counts.size()) throw ShapeError("x and counts differ in length");
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], counts[i], std::sqrt(std::max(counts[i], 1.0))});
  return pts;
}

double sinusoid_model(double x, double c, double v, double omega, double phi0) {
  return c * (1.0 + v * std::cos(2.0 * omega * x + phi0));
}

FitResult fit_sinusoid(std::span<const FitPoint> points, FitWeighting weighting) {
  check_points(points, true);
  const ModelFn f = [](double x, const Vector& p, Vector* g) {
    const double arg = 2.0 * p(2) * x + p(3);
    const double cs = std::cos(arg);
    const double sn = std::sin(arg);
    if (g) {
      (*g)(0) = 1.0 + p(1) * cs;
      (*g)(1) = p(0) * cs;
      (*g)(2) = -p(0) * p(1) * sn * 2.0 * x;
      (*g)(3) = -p(0) * p(1) * sn;
    }
    return p(0) * (1.0 + p(1) * cs);
  };

  double lo = points.front().counts;
  double hi = lo;
  double mean = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.counts);
    hi = std::max(hi, p.counts);
    mean += p.counts;
  }
  mean /= static_cast<double>(points.size());
  const double c0 = 0.5 * (hi + lo);
  const double v0 = std::clamp((hi - lo) / (hi + lo), 0.01, 1.0);

  // Dominant angular frequency of the mean-subtracted data, scanned between
  // half a period over the span and the sampling limit.
  std::vector<double> xs;
  for (const auto& p : points) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  const double span = xs.back() - xs.front();
  if (!(span > 0.0)) throw FitError("points must span a range of x");
  double min_dx = span;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1]) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);
  }
  const double k_lo = std::numbers::pi / span;
  const double k_hi = std::numbers::pi / min_dx;
  struct Peak {
    double k;
    double power;
  };
  std::vector<Peak> spectrum;
  const int nscan = 4000;
  for (int s = 0; s < nscan; ++s) {
    const double k = k_lo + (k_hi - k_lo) * s / (nscan - 1);
    double re = 0.0;
    double im = 0.0;
    for (const auto& p : points) {
      const double w = (p.counts - mean) / (p.sigma * p.sigma);
      re += w * std::cos(k * p.x);
      im += w * std::sin(k * p.x);
    }
    spectrum.push_back({k, re * re + im * im});
  }
  // Local maxima, strongest first.
  std::vector<Peak> peaks;
  for (int s = 0; s < nscan; ++s) {
    const bool left = s == 0 || spectrum[s].power >= spectrum[s - 1].power;
    const bool right = s == nscan - 1 || spectrum[s].power >= spectrum[s + 1].power;
    if (left && right) peaks.push_back(spectrum[s]);
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.power > b.power; });
  if (peaks.size() > 3) peaks.resize(3);

  LmOutcome best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (const auto& peak : peaks) {
    const double omega0 = 0.5 * peak.k;
    // 8-point phase scan for the seed with the lowest chi-square.
    std::vector<std::pair<double, double>> seeds;
    for (int q = 0; q < 8; ++q) {
      Vector p(4);
      p << c0, v0, omega0, -std::numbers::pi + q * std::numbers::pi / 4.0;
      seeds.emplace_back(chi_square(points, f, p), p(3));
    }
    std::sort(seeds.begin(), seeds.end());
    for (int q = 0; q < 2; ++q) {
      Vector p(4);
      p << c0, v0, omega0, seeds[q].second;
      LmOutcome r = levenberg_marquardt(points, f, p, {true, true, true, true});
      if (r.ok && r.chi2 < best.chi2) best = r;
    }
  }
  if (!best.ok) throw FitError("sinusoid fit did not converge from any seed");
  if (weighting == FitWeighting::PoissonModel) best = reweight_by_model(points, f, best, {true, true, true, true});

  Vector p = best.params;
  Matrix cov = best.covariance;
  if (p(1) < 0.0) {
    p(1) = -p(1);
    p(3) += std::numbers::pi;
    cov.row(1) *= -1.0;
    cov.col(1) *= -1.0;
  }
  if (p(2) < 0.0) {
    p(2) = -p(2);
    p(3) = -p(3);
    for (int j : {2, 3}) {
      cov.row(j) *= -1.0;
      cov.col(j) *= -1.0;
    }
  }
  p(3) = wrap_phase(p(3));

  FitResult res;
  res.names = {"C", "V", "omega", "phi0"};
  res.params = p;
  res.covariance = cov;
  res.chi2 = best.chi2;
  res.dof = static_cast<int>(points.size()) - 4;
  res.iterations = best.iterations;
  res.visibility = p(1);
  res.visibility_sigma = res.sigma("V");
  return res;
}

double dip_model(double x, double c, double v, double sigma, double t0) {
  const double u = (x - t0) / sigma;
  return c * (1.0 - v * std::exp(-0.5 * u * u));
}

FitResult fit_hom_dip(std::span<const FitPoint> points, std::optional<double> fixed_sigma,
                      FitWeighting weighting) {
  check_points(points, false);
  if (fixed_sigma && !(*fixed_sigma > 0.0)) throw FitError("fixed sigma must be positive");
  const ModelFn f = [](double x, const Vector& p, Vector* g) {
    const double u = (x - p(3)) / p(2);
    const double e = std::exp(-0.5 * u * u);
    if (g) {
      (*g)(0) = 1.0 - p(1) * e;
      (*g)(1) = -p(0) * e;
      (*g)(2) = -p(0) * p(1) * e * u * u / p(2);
      (*g)(3) = -p(0) * p(1) * e * u / p(2);
    }
    return p(0) * (1.0 - p(1) * e);
  };

  std::vector<FitPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });
  const double span = sorted.back().x - sorted.front().x;
  if (!(span > 0.0)) throw FitError("points must span a range of delays");
  const auto min_it = std::min_element(sorted.begin(), sorted.end(),
                                       [](const FitPoint& a, const FitPoint& b) { return a.counts < b.counts; });
  // Baseline from the outer quarter of the scan on each side.
  double base = 0.0;
  int nb = 0;
  const std::size_t q = std::max<std::size_t>(1, sorted.size() / 4);
  for (std::size_t i = 0; i < q; ++i) {
    base += sorted[i].counts + sorted[sorted.size() - 1 - i].counts;
    nb += 2;
  }
  base = std::max(base / nb, 1e-12);
  const double t0 = min_it->x;
  const double v0 = std::clamp(1.0 - min_it->counts / base, 0.0, 1.0);

  std::vector<double> sigma_seeds;
  if (fixed_sigma) {
    sigma_seeds = {*fixed_sigma};
  } else {
    sigma_seeds = {span / 10.0, span / 5.0, span / 20.0, span / 3.0};
  }
  const std::vector<bool> free = {true, true, !fixed_sigma.has_value(), true};
  LmOutcome best;
  best.chi2 = std::numeric_limits<double>::infinity();
  for (double s0 : sigma_seeds) {
    Vector p(4);
    p << base, v0, s0, t0;
    LmOutcome r = levenberg_marquardt(points, f, p, free);
    if (r.ok && r.chi2 < best.chi2) best = r;
  }
  if (!best.ok) throw FitError("dip fit did not converge from any seed");
  if (weighting == FitWeighting::PoissonModel) best = reweight_by_model(points, f, best, free);
  Vector p = best.params;
  if (p(2) < 0.0) {
    p(2) = -p(2);
    best.covariance.row(2) *= -1.0;
    best.covariance.col(2) *= -1.0;
  }

  FitResult res;
  res.names = {"C", "V", "sigma", "t0"};
  res.params = p;
  res.covariance = best.covariance;
  res.chi2 = best.chi2;
  res.dof = static_cast<int>(points.size()) - (fixed_sigma ? 3 : 4);
  res.iterations = best.iterations;
  res.visibility = p(1);
  res.visibility_sigma = res.sigma("V");
  return res;
}

}  // namespace tbswap
