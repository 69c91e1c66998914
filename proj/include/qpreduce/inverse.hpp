#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qpreduce/lp_transform.hpp"

namespace qpr {

enum class Activation { Linear, PowerSigmoid };

struct ZNNConfig {
  double gamma = 100.0;
  Activation activation = Activation::Linear;
  double step = 5e-4;
  std::vector<double> grid;  // output sample times, ascending, grid[0] == start

  // gamma > 0, step > 0 and gamma*step <= 0.1 (explicit integration of the
  // error dynamics is unstable beyond that product).
  void validate() const;
};

struct SampledInverse {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> W;
  std::vector<double> residuals;  // ||Q(t_i) W(t_i) - I||_inf

  Eigen::MatrixXd interp(double t) const;  // piecewise linear
  double max_residual() const;
};

// Dense per-sample solves Q(t_i) W(t_i) = I. A sample whose condition number
// exceeds 1e12 raises SingularSampleError carrying the offending time.
SampledInverse invert_direct(const LPTransform& lp, const std::vector<double>& grid);

SampledInverse invert_znn(const LPTransform& lp, const ZNNConfig& cfg);

// Core recurrent integration, exposed for tests: integrates
// Q(t) Wdot = -Qdot(t) W - gamma F(Q(t) W - I) from W(grid[0]) = W0.
using MatrixFn = std::function<Eigen::MatrixXd(double)>;
SampledInverse znn_integrate(const MatrixFn& Q, const MatrixFn& Qdot,
                             Eigen::MatrixXd W0, const ZNNConfig& cfg);

}  // namespace qpr
