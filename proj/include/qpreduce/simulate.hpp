#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "qpreduce/errors.hpp"

namespace qpr {

struct TrajectoryMeta {
  std::string system_id;
  std::string integrator = "rk4";
  double step = 0.0;
};

// Uniformly sampled real trajectory; rows are samples.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;
  TrajectoryMeta meta;

  int state_dim() const { return static_cast<int>(states.cols()); }
  std::size_t size() const { return times.size(); }
  std::vector<double> column(int j) const;
};

struct ComplexTrajectory {
  std::vector<double> times;
  Eigen::MatrixXcd states;
  TrajectoryMeta meta;
};

using RealRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
using ComplexRhs =
    std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

// Classical fixed-step RK4. Non-finite states raise BlowUpError at the
// offending time.
Trajectory integrate(const RealRhs& rhs, const Eigen::VectorXd& x0, double t0,
                     double t1, double step, const std::string& system_id);
ComplexTrajectory integrate(const ComplexRhs& rhs, const Eigen::VectorXcd& z0,
                            double t0, double t1, double step,
                            const std::string& system_id);

double rms(const Eigen::VectorXd& a);
// Per-state root-mean-square difference over the shared grid.
Eigen::VectorXd rms_difference(const Trajectory& a, const Trajectory& b);

}  // namespace qpr
