#include "qpreduce/config.hpp"

#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace qpr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ValidationError("config." + path + ": " + why);
}

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path.empty() ? key : path + "." + key, "wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

PhaseKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "cos") return PhaseKind::Cos;
  if (s == "sin") return PhaseKind::Sin;
  fail(path, "kind must be 'cos' or 'sin'");
}

const char* kind_name(PhaseKind k) { return k == PhaseKind::Cos ? "cos" : "sin"; }

}  // namespace

SystemConfig SystemConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

SystemConfig SystemConfig::from_json(const json& j) {
  SystemConfig cfg;
  if (!j.is_object()) fail("", "top level must be an object");
  cfg.version = get_or<int>(j, "version", 1);
  if (cfg.version != 1) fail("version", "unsupported config version");
  cfg.name = get_or<std::string>(j, "name", "");
  cfg.dimension = get_field<int>(j, "", "dimension");
  cfg.B0 = get_field<std::vector<std::vector<double>>>(j, "", "B0");

  auto read_freqs = [&](const char* key, std::vector<LabeledFrequency>& out,
                        bool required) {
    if (!j.contains(key)) {
      if (required) fail(key, "missing field");
      return;
    }
    if (!j.at(key).is_array()) fail(key, "must be an array");
    int i = 0;
    for (const auto& e : j.at(key)) {
      std::string path = std::string(key) + "[" + std::to_string(i) + "]";
      LabeledFrequency f;
      f.label = get_field<std::string>(e, path, "label");
      f.value = get_field<double>(e, path, "value");
      out.push_back(f);
      ++i;
    }
  };
  read_freqs("frequencies", cfg.frequencies, false);
  read_freqs("forcing_frequencies", cfg.forcing_frequencies, false);

  if (j.contains("parametric_terms")) {
    int i = 0;
    for (const auto& e : j.at("parametric_terms")) {
      std::string path = "parametric_terms[" + std::to_string(i) + "]";
      ConfigParametricTerm t;
      t.row = get_field<int>(e, path, "row");
      t.col = get_field<int>(e, path, "col");
      t.amplitude = get_field<double>(e, path, "amplitude");
      t.frequency = get_field<std::string>(e, path, "frequency");
      t.kind = parse_kind(get_or<std::string>(e, "kind", "cos"), path + ".kind");
      cfg.parametric_terms.push_back(t);
      ++i;
    }
  }
  if (j.contains("nonlinear_terms")) {
    int i = 0;
    for (const auto& e : j.at("nonlinear_terms")) {
      std::string path = "nonlinear_terms[" + std::to_string(i) + "]";
      ConfigNonlinearTerm t;
      t.target = get_field<int>(e, path, "target");
      t.exponents = get_field<std::vector<int>>(e, path, "exponents");
      t.coefficient = get_field<double>(e, path, "coefficient");
      cfg.nonlinear_terms.push_back(t);
      ++i;
    }
  }
  if (j.contains("forcing_terms")) {
    int i = 0;
    for (const auto& e : j.at("forcing_terms")) {
      std::string path = "forcing_terms[" + std::to_string(i) + "]";
      ConfigForcingTerm t;
      t.target = get_field<int>(e, path, "target");
      t.amplitude = get_field<double>(e, path, "amplitude");
      t.frequency = get_field<std::string>(e, path, "frequency");
      t.kind = parse_kind(get_or<std::string>(e, "kind", "cos"), path + ".kind");
      cfg.forcing_terms.push_back(t);
      ++i;
    }
  }
  cfg.master_indices = get_or<std::vector<int>>(j, "master_indices", {});

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    SolverSettings& sv = cfg.solver;
    sv.trunc_order = get_or<int>(s, "trunc_order", sv.trunc_order);
    sv.max_degree = get_or<int>(s, "max_degree", sv.max_degree);
    sv.normal_form_order = get_or<int>(s, "normal_form_order", sv.normal_form_order);
    sv.normal_form_tol_scale =
        get_or<double>(s, "normal_form_tol_scale", sv.normal_form_tol_scale);
    sv.manifold_tol_scale =
        get_or<double>(s, "manifold_tol_scale", sv.manifold_tol_scale);
    sv.manifold_eps_order = get_or<int>(s, "manifold_eps_order", sv.manifold_eps_order);
    sv.keep_transients = get_or<bool>(s, "keep_transients", sv.keep_transients);
    sv.incommensurability_tol =
        get_or<double>(s, "incommensurability_tol", sv.incommensurability_tol);
    sv.gamma = get_or<double>(s, "gamma", sv.gamma);
    sv.znn_step = get_or<double>(s, "znn_step", sv.znn_step);
    sv.integrator_step = get_or<double>(s, "integrator_step", sv.integrator_step);
    if (s.contains("t_span")) {
      auto span = s.at("t_span").get<std::vector<double>>();
      if (span.size() != 2) fail("solver.t_span", "expected [t0, t1]");
      sv.t0 = span[0];
      sv.t1 = span[1];
    }
    sv.initial_state = get_or<std::vector<double>>(s, "initial_state", {});
    sv.inverse_t1 = get_or<double>(s, "inverse_t1", sv.inverse_t1);
    sv.inverse_samples = get_or<int>(s, "inverse_samples", sv.inverse_samples);
    sv.fit_span = get_or<double>(s, "fit_span", sv.fit_span);
    sv.fit_step = get_or<double>(s, "fit_step", sv.fit_step);
    sv.compare_sample_step =
        get_or<double>(s, "compare_sample_step", sv.compare_sample_step);
    sv.psd_segment = get_or<int>(s, "psd_segment", sv.psd_segment);
    sv.psd_overlap = get_or<double>(s, "psd_overlap", sv.psd_overlap);
  }
  return cfg;
}

ordered_json SystemConfig::to_json() const {
  ordered_json j;
  j["version"] = version;
  if (!name.empty()) j["name"] = name;
  j["dimension"] = dimension;
  j["B0"] = B0;
  j["frequencies"] = ordered_json::array();
  for (const auto& f : frequencies)
    j["frequencies"].push_back({{"label", f.label}, {"value", f.value}});
  j["forcing_frequencies"] = ordered_json::array();
  for (const auto& f : forcing_frequencies)
    j["forcing_frequencies"].push_back({{"label", f.label}, {"value", f.value}});
  j["parametric_terms"] = ordered_json::array();
  for (const auto& t : parametric_terms)
    j["parametric_terms"].push_back({{"row", t.row},
                                     {"col", t.col},
                                     {"amplitude", t.amplitude},
                                     {"frequency", t.frequency},
                                     {"kind", kind_name(t.kind)}});
  j["nonlinear_terms"] = ordered_json::array();
  for (const auto& t : nonlinear_terms)
    j["nonlinear_terms"].push_back({{"target", t.target},
                                    {"exponents", t.exponents},
                                    {"coefficient", t.coefficient}});
  j["forcing_terms"] = ordered_json::array();
  for (const auto& t : forcing_terms)
    j["forcing_terms"].push_back({{"target", t.target},
                                  {"amplitude", t.amplitude},
                                  {"frequency", t.frequency},
                                  {"kind", kind_name(t.kind)}});
  j["master_indices"] = master_indices;
  ordered_json s;
  s["trunc_order"] = solver.trunc_order;
  s["max_degree"] = solver.max_degree;
  s["normal_form_order"] = solver.normal_form_order;
  s["normal_form_tol_scale"] = solver.normal_form_tol_scale;
  s["manifold_tol_scale"] = solver.manifold_tol_scale;
  s["manifold_eps_order"] = solver.manifold_eps_order;
  s["keep_transients"] = solver.keep_transients;
  s["incommensurability_tol"] = solver.incommensurability_tol;
  s["gamma"] = solver.gamma;
  s["znn_step"] = solver.znn_step;
  s["integrator_step"] = solver.integrator_step;
  s["t_span"] = {solver.t0, solver.t1};
  s["initial_state"] = solver.initial_state;
  s["inverse_t1"] = solver.inverse_t1;
  s["inverse_samples"] = solver.inverse_samples;
  s["fit_span"] = solver.fit_span;
  s["fit_step"] = solver.fit_step;
  s["compare_sample_step"] = solver.compare_sample_step;
  s["psd_segment"] = solver.psd_segment;
  s["psd_overlap"] = solver.psd_overlap;
  j["solver"] = s;
  return j;
}

std::string SystemConfig::canonical_text() const { return to_json().dump(); }

std::string SystemConfig::hash() const {
  std::string text = canonical_text();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void SystemConfig::validate() const {
  if (dimension <= 0) fail("dimension", "must be positive");
  if (static_cast<int>(B0.size()) != dimension)
    fail("B0", "row count does not match dimension");
  for (std::size_t r = 0; r < B0.size(); ++r)
    if (static_cast<int>(B0[r].size()) != dimension)
      fail("B0[" + std::to_string(r) + "]", "column count does not match dimension");

  std::set<std::string> labels;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const auto& f = frequencies[i];
    std::string path = "frequencies[" + std::to_string(i) + "]";
    if (!(f.value > 0.0)) fail(path + ".value", "must be positive");
    if (!labels.insert(f.label).second)
      fail(path + ".label", "duplicate frequency label '" + f.label + "'");
  }
  for (std::size_t i = 0; i < forcing_frequencies.size(); ++i) {
    const auto& f = forcing_frequencies[i];
    std::string path = "forcing_frequencies[" + std::to_string(i) + "]";
    if (!(f.value > 0.0)) fail(path + ".value", "must be positive");
    if (!labels.insert(f.label).second)
      fail(path + ".label", "duplicate frequency label '" + f.label + "'");
  }

  auto check_target = [&](int t, const std::string& path) {
    if (t < 0 || t >= dimension) fail(path, "state index out of range");
  };
  for (std::size_t i = 0; i < parametric_terms.size(); ++i) {
    const auto& t = parametric_terms[i];
    std::string path = "parametric_terms[" + std::to_string(i) + "]";
    check_target(t.row, path + ".row");
    check_target(t.col, path + ".col");
    bool known = false;
    for (const auto& f : frequencies) known = known || f.label == t.frequency;
    if (!known) fail(path + ".frequency", "unknown frequency label '" + t.frequency + "'");
  }
  for (std::size_t i = 0; i < nonlinear_terms.size(); ++i) {
    const auto& t = nonlinear_terms[i];
    std::string path = "nonlinear_terms[" + std::to_string(i) + "]";
    check_target(t.target, path + ".target");
    if (static_cast<int>(t.exponents.size()) != dimension)
      fail(path + ".exponents", "length does not match dimension");
    int deg = 0;
    for (std::size_t e = 0; e < t.exponents.size(); ++e) {
      if (t.exponents[e] < 0)
        fail(path + ".exponents[" + std::to_string(e) + "]", "must be non-negative");
      deg += t.exponents[e];
    }
    if (deg < 2) fail(path + ".exponents", "monomial degree must be at least 2");
  }
  for (std::size_t i = 0; i < forcing_terms.size(); ++i) {
    const auto& t = forcing_terms[i];
    std::string path = "forcing_terms[" + std::to_string(i) + "]";
    check_target(t.target, path + ".target");
    bool known = false;
    for (const auto& f : forcing_frequencies) known = known || f.label == t.frequency;
    if (!known) fail(path + ".frequency", "unknown frequency label '" + t.frequency + "'");
  }
  for (std::size_t i = 0; i < master_indices.size(); ++i)
    if (master_indices[i] < 0 || master_indices[i] >= dimension)
      fail("master_indices[" + std::to_string(i) + "]", "index out of range");

  if (!solver.initial_state.empty() &&
      static_cast<int>(solver.initial_state.size()) != dimension)
    fail("solver.initial_state", "length does not match dimension");
  if (!(solver.integrator_step > 0.0)) fail("solver.integrator_step", "must be positive");
  if (!(solver.t1 > solver.t0)) fail("solver.t_span", "t1 must exceed t0");
  if (!(solver.gamma > 0.0)) fail("solver.gamma", "must be positive");
  if (!(solver.znn_step > 0.0)) fail("solver.znn_step", "must be positive");
  if (solver.gamma * solver.znn_step > 0.1 + 1e-12)
    fail("solver.znn_step", "gamma * znn_step must not exceed 0.1");
  if (solver.trunc_order < 1) fail("solver.trunc_order", "must be at least 1");
  if (solver.max_degree < 2) fail("solver.max_degree", "must be at least 2");
  if (solver.normal_form_order < 2) fail("solver.normal_form_order", "must be at least 2");
  if (solver.manifold_eps_order < 0 || solver.manifold_eps_order > 2)
    fail("solver.manifold_eps_order", "supported orders are 0, 1 and 2");
  if (solver.psd_segment < 4) fail("solver.psd_segment", "too short");
  if (solver.psd_overlap < 0.0 || solver.psd_overlap >= 1.0)
    fail("solver.psd_overlap", "must lie in [0, 1)");

  // incommensurability of the parametric basis (construction checks pairs)
  std::vector<double> vals;
  std::vector<std::string> labs;
  for (const auto& f : frequencies) {
    vals.push_back(f.value);
    labs.push_back(f.label);
  }
  FrequencyBasis::create(vals, labs, solver.incommensurability_tol);
}

QPLinearSystem SystemConfig::linear_system() const {
  QPLinearSystem sys;
  std::vector<double> vals;
  std::vector<std::string> labs;
  for (const auto& f : frequencies) {
    vals.push_back(f.value);
    labs.push_back(f.label);
  }
  sys.basis = FrequencyBasis::create(vals, labs, solver.incommensurability_tol);
  sys.B0.resize(dimension, dimension);
  for (int r = 0; r < dimension; ++r)
    for (int c = 0; c < dimension; ++c) sys.B0(r, c) = B0[r][c];
  for (const auto& t : parametric_terms) {
    int slot = sys.basis->find_label(t.frequency);
    sys.terms.push_back({t.row, t.col, t.amplitude, slot, t.kind});
  }
  return sys;
}

std::vector<NonlinearMonomial> SystemConfig::nonlinear_monomials() const {
  std::vector<NonlinearMonomial> out;
  for (const auto& t : nonlinear_terms) out.push_back({t.target, t.exponents, t.coefficient});
  return out;
}

std::vector<double> SystemConfig::forcing_values() const {
  std::vector<double> out;
  for (const auto& f : forcing_frequencies) out.push_back(f.value);
  return out;
}

std::vector<std::string> SystemConfig::forcing_labels() const {
  std::vector<std::string> out;
  for (const auto& f : forcing_frequencies) out.push_back(f.label);
  return out;
}

std::vector<ForcingHarmonic> SystemConfig::forcing_harmonics() const {
  std::vector<ForcingHarmonic> out;
  for (const auto& t : forcing_terms) {
    int slot = -1;
    for (std::size_t i = 0; i < forcing_frequencies.size(); ++i)
      if (forcing_frequencies[i].label == t.frequency) slot = static_cast<int>(i);
    out.push_back({t.target, t.amplitude, slot, t.kind});
  }
  return out;
}

Eigen::VectorXd SystemConfig::initial_state() const {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dimension);
  for (std::size_t i = 0; i < solver.initial_state.size(); ++i)
    x0(static_cast<int>(i)) = solver.initial_state[i];
  return x0;
}

}  // namespace qpr
