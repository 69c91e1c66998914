#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qpreduce/reduction.hpp"

namespace qpr {

struct SolverSettings {
  int trunc_order = 5;
  int max_degree = 5;
  int normal_form_order = 4;
  double normal_form_tol_scale = 1e-6;
  double manifold_tol_scale = 1e-4;
  int manifold_eps_order = 2;
  bool keep_transients = true;
  double incommensurability_tol = 1e-6;
  double gamma = 100.0;
  double znn_step = 5e-4;
  double integrator_step = 1e-3;
  double t0 = 0.0;
  double t1 = 100.0;
  std::vector<double> initial_state;
  double inverse_t1 = 50.0;
  int inverse_samples = 1000;
  double fit_span = 100.0;
  double fit_step = 0.01;
  double compare_sample_step = 0.01;
  int psd_segment = 4096;
  double psd_overlap = 0.5;
};

struct LabeledFrequency {
  std::string label;
  double value = 0.0;
};

struct ConfigParametricTerm {
  int row = 0, col = 0;
  double amplitude = 0.0;
  std::string frequency;
  PhaseKind kind = PhaseKind::Cos;
};

struct ConfigNonlinearTerm {
  int target = 0;
  std::vector<int> exponents;
  double coefficient = 0.0;
};

struct ConfigForcingTerm {
  int target = 0;
  double amplitude = 0.0;
  std::string frequency;
  PhaseKind kind = PhaseKind::Cos;
};

// Declarative system description; round-trips through JSON with stable key
// ordering. Validation reports the first failing path.
struct SystemConfig {
  int version = 1;
  std::string name;
  int dimension = 0;
  std::vector<std::vector<double>> B0;
  std::vector<LabeledFrequency> frequencies;          // parametric
  std::vector<LabeledFrequency> forcing_frequencies;  // external excitation
  std::vector<ConfigParametricTerm> parametric_terms;
  std::vector<ConfigNonlinearTerm> nonlinear_terms;
  std::vector<ConfigForcingTerm> forcing_terms;
  std::vector<int> master_indices;  // empty: pick the pair nearest the forcing
  SolverSettings solver;

  static SystemConfig from_json(const nlohmann::json& j);
  static SystemConfig from_json_text(const std::string& text);
  nlohmann::ordered_json to_json() const;
  std::string canonical_text() const;
  std::string hash() const;  // FNV-1a 64 over the canonical text

  void validate() const;  // throws ValidationError naming the failing path

  // builders for the computation layers
  QPLinearSystem linear_system() const;
  std::vector<NonlinearMonomial> nonlinear_monomials() const;
  std::vector<double> forcing_values() const;
  std::vector<std::string> forcing_labels() const;
  std::vector<ForcingHarmonic> forcing_harmonics() const;
  Eigen::VectorXd initial_state() const;
};

}  // namespace qpr
