#include "qpreduce/simulate.hpp"

#include <cmath>
#include <sstream>

namespace qpr {

std::vector<double> Trajectory::column(int j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = states(static_cast<int>(i), j);
  return out;
}

namespace {

template <typename Vec, typename Rhs>
void rk4_run(const Rhs& rhs, Vec x, double t0, double t1, double step,
             std::vector<double>& times, std::vector<Vec>& samples) {
  if (!(step > 0.0)) throw ValidationError("integrate: step must be positive");
  if (!(t1 > t0)) throw ValidationError("integrate: empty time span");
  const long nsteps = static_cast<long>(std::llround((t1 - t0) / step));
  times.reserve(nsteps + 1);
  samples.reserve(nsteps + 1);
  times.push_back(t0);
  samples.push_back(x);
  Vec k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size());
  double t = t0;
  for (long i = 0; i < nsteps; ++i) {
    rhs(t, x, k1);
    rhs(t + 0.5 * step, x + 0.5 * step * k1, k2);
    rhs(t + 0.5 * step, x + 0.5 * step * k2, k3);
    rhs(t + step, x + step * k3, k4);
    x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + (i + 1) * step;
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "integration blew up at t = " << t;
      throw BlowUpError(os.str(), t);
    }
    times.push_back(t);
    samples.push_back(x);
  }
}

}  // namespace

Trajectory integrate(const RealRhs& rhs, const Eigen::VectorXd& x0, double t0,
                     double t1, double step, const std::string& system_id) {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> samples;
  rk4_run(rhs, x0, t0, t1, step, times, samples);
  Trajectory traj;
  traj.times = std::move(times);
  traj.states.resize(static_cast<int>(samples.size()), x0.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    traj.states.row(static_cast<int>(i)) = samples[i].transpose();
  traj.meta = {system_id, "rk4", step};
  return traj;
}

ComplexTrajectory integrate(const ComplexRhs& rhs, const Eigen::VectorXcd& z0,
                            double t0, double t1, double step,
                            const std::string& system_id) {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> samples;
  rk4_run(rhs, z0, t0, t1, step, times, samples);
  ComplexTrajectory traj;
  traj.times = std::move(times);
  traj.states.resize(static_cast<int>(samples.size()), z0.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    traj.states.row(static_cast<int>(i)) = samples[i].transpose();
  traj.meta = {system_id, "rk4", step};
  return traj;
}

double rms(const Eigen::VectorXd& a) {
  if (a.size() == 0) return 0.0;
  return std::sqrt(a.squaredNorm() / static_cast<double>(a.size()));
}

Eigen::VectorXd rms_difference(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || a.state_dim() != b.state_dim())
    throw GridError("rms_difference: trajectories use different grids");
  Eigen::VectorXd out(a.state_dim());
  for (int j = 0; j < a.state_dim(); ++j)
    out(j) = rms(a.states.col(j) - b.states.col(j));
  return out;
}

}  // namespace qpr
