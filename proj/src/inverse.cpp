#include "qpreduce/inverse.hpp"

#include <cmath>
#include <sstream>

namespace qpr {

void ZNNConfig::validate() const {
  if (!(gamma > 0.0)) throw ValidationError("znn: gamma must be positive");
  if (!(step > 0.0)) throw ValidationError("znn: step must be positive");
  if (gamma * step > 0.1 + 1e-12)
    throw ValidationError("znn: gamma*step must not exceed 0.1");
  if (grid.size() < 2) throw ValidationError("znn: output grid needs at least two times");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ValidationError("znn: output grid must be strictly increasing");
}

Eigen::MatrixXd SampledInverse::interp(double t) const {
  if (times.empty()) throw GridError("sampled inverse: empty grid");
  if (t <= times.front()) return W.front();
  if (t >= times.back()) return W.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double a = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - a) * W[lo] + a * W[hi];
}

double SampledInverse::max_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, r);
  return m;
}

SampledInverse invert_direct(const LPTransform& lp, const std::vector<double>& grid) {
  SampledInverse out;
  const int n = lp.n;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  out.times = grid;
  out.W.reserve(grid.size());
  out.residuals.reserve(grid.size());
  for (double t : grid) {
    Eigen::MatrixXd Qt = lp.eval(t);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Qt);
    double rc = lu.rcond();
    if (!(rc > 1e-12)) {
      std::ostringstream os;
      os << "invert_direct: transform is singular at t = " << t;
      throw SingularSampleError(os.str(), t);
    }
    Eigen::MatrixXd W = lu.solve(I);
    out.W.push_back(W);
    out.residuals.push_back((Qt * W - I).cwiseAbs().maxCoeff());
  }
  return out;
}

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& E, Activation act) {
  if (act == Activation::Linear) return E;
  // power-sigmoid: odd cubic outside the unit interval, scaled sigmoid inside
  constexpr double xi = 4.0;
  constexpr double p = 3.0;
  const double gain = (1.0 + std::exp(-xi)) / (1.0 - std::exp(-xi));
  Eigen::MatrixXd out = E;
  for (int i = 0; i < E.rows(); ++i) {
    for (int j = 0; j < E.cols(); ++j) {
      double e = E(i, j);
      if (std::abs(e) >= 1.0)
        out(i, j) = std::pow(e, p);
      else
        out(i, j) = gain * (1.0 - std::exp(-xi * e)) / (1.0 + std::exp(-xi * e));
    }
  }
  return out;
}

}  // namespace

SampledInverse znn_integrate(const MatrixFn& Q, const MatrixFn& Qdot,
                             Eigen::MatrixXd W0, const ZNNConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(W0.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  auto deriv = [&](double t, const Eigen::MatrixXd& W) {
    Eigen::MatrixXd Qt = Q(t);
    Eigen::MatrixXd rhs = -Qdot(t) * W - cfg.gamma * activate(Qt * W - I, cfg.activation);
    return Eigen::MatrixXd(Qt.partialPivLu().solve(rhs));
  };

  SampledInverse out;
  out.times = cfg.grid;
  out.W.reserve(cfg.grid.size());
  out.residuals.reserve(cfg.grid.size());

  double t = cfg.grid.front();
  Eigen::MatrixXd W = std::move(W0);
  std::size_t next = 0;
  auto record_at = [&](double tq, const Eigen::MatrixXd& Wlo, const Eigen::MatrixXd& Whi,
                       double tlo, double thi) {
    double a = thi > tlo ? (tq - tlo) / (thi - tlo) : 0.0;
    Eigen::MatrixXd Wq = (1.0 - a) * Wlo + a * Whi;
    out.W.push_back(Wq);
    out.residuals.push_back((Q(tq) * Wq - I).cwiseAbs().maxCoeff());
  };
  while (next < cfg.grid.size() && cfg.grid[next] <= t + 1e-15) {
    record_at(cfg.grid[next], W, W, t, t);
    ++next;
  }

  const double h = cfg.step;
  const double t_end = cfg.grid.back();
  while (next < cfg.grid.size()) {
    double t1 = std::min(t + h, t_end);
    double dt = t1 - t;
    Eigen::MatrixXd k1 = deriv(t, W);
    Eigen::MatrixXd k2 = deriv(t + 0.5 * dt, W + 0.5 * dt * k1);
    Eigen::MatrixXd k3 = deriv(t + 0.5 * dt, W + 0.5 * dt * k2);
    Eigen::MatrixXd k4 = deriv(t + dt, W + dt * k3);
    Eigen::MatrixXd Wn = W + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!Wn.allFinite())
      throw DivergenceError("znn: state became non-finite during integration");
    while (next < cfg.grid.size() && cfg.grid[next] <= t1 + 1e-12) {
      record_at(cfg.grid[next], W, Wn, t, t1);
      ++next;
    }
    W = std::move(Wn);
    t = t1;
  }
  return out;
}

SampledInverse invert_znn(const LPTransform& lp, const ZNNConfig& cfg) {
  const int n = lp.n;
  auto dq = std::make_shared<std::vector<std::vector<QPSeries>>>();
  dq->assign(n, std::vector<QPSeries>());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) (*dq)[i].push_back(series_ddt(lp.Q[i][j]));
  MatrixFn Q = [&lp](double t) { return lp.eval(t); };
  MatrixFn Qdot = [dq, n](double t) {
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = (*dq)[i][j].eval(t).real();
    return out;
  };
  return znn_integrate(Q, Qdot, Eigen::MatrixXd::Identity(n, n), cfg);
}

}  // namespace qpr
