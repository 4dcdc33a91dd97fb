#include "noisecal/app/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "noisecal/csv.hpp"
#include "noisecal/error.hpp"

namespace noisecal::app {

using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <class T>
  void get(const char* key, T& out) {
    if (const json* v = find(key)) out = convert<T>(*v, key);
  }

  template <class T>
  void get_optional(const char* key, std::optional<T>& out) {
    if (const json* v = find(key)) out = convert<T>(*v, key);
  }

  std::string child(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
    }
  }

  template <class T>
  T convert(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(child(key) + ": expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(child(key) + ": expected a boolean");
        return v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(child(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
            throw ConfigError(child(key) + ": expected a non-negative integer");
        }
        return v.get<T>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(child(key) + ": " + e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vector vector_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from(j[r], path);
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(path + ": ragged matrix");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

ScenarioConfig parse_scenario(const json& j) {
  ObjectReader r(j, "scenario");
  ScenarioConfig s;
  r.get("k", s.k);
  r.get("d", s.d);
  r.get("n", s.n);
  r.get("n_test", s.n_test);
  r.get("separation", s.separation);
  r.get("validation_fraction", s.validation_fraction);
  if (const json* p = r.find("priors")) {
    const Vector v = vector_from(*p, r.child("priors"));
    s.priors.assign(v.data(), v.data() + v.size());
  }
  if (const json* cs = r.find("classes")) {
    if (!cs->is_array()) throw ConfigError("scenario.classes: expected an array");
    for (std::size_t i = 0; i < cs->size(); ++i) {
      const std::string path = "scenario.classes[" + std::to_string(i) + "]";
      ObjectReader cr((*cs)[i], path);
      ClassSpec spec;
      const json* mean = cr.find("mean");
      const json* cov = cr.find("cov");
      if (!mean || !cov) throw ConfigError(path + ": needs mean and cov");
      spec.mean = vector_from(*mean, path + ".mean");
      spec.cov = matrix_from(*cov, path + ".cov");
      cr.finish();
      s.classes.push_back(std::move(spec));
    }
  }
  r.finish();
  return s;
}

ClassNoiseConfig parse_class_noise(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ClassNoiseConfig c;
  r.get("kind", c.kind);
  r.get("epsilon", c.epsilon);
  if (const json* pairs = r.find("pairs")) {
    if (!pairs->is_array()) throw ConfigError(path + ".pairs: expected [[from, to], ...]");
    for (const auto& p : *pairs) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
        throw ConfigError(path + ".pairs: expected [[from, to], ...]");
      c.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  }
  if (const json* m = r.find("matrix")) c.matrix = matrix_from(*m, path + ".matrix");
  r.finish();
  return c;
}

NoiseConfig parse_noise(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  NoiseConfig n;
  std::string type = "none";
  r.get("pmd_type", type);
  n.pmd_type = noisegen::parse_pmd_type(type);
  r.get("target_level", n.target_level);
  r.get_optional("scale_factor", n.scale_factor);
  if (const json* cm = r.find("class_matrix")) n.class_matrix = parse_class_noise(*cm, path + ".class_matrix");
  if (const json* pc = r.find("pmd_constants")) {
    ObjectReader pr(*pc, path + ".pmd_constants");
    noisegen::PmdConstants constants;
    pr.get("t0", constants.t0);
    pr.get("c1", constants.c1);
    pr.get("c2", constants.c2);
    pr.finish();
    n.pmd_constants = constants;
  }
  r.finish();
  return n;
}

trainer::TrainConfig parse_train(const json& j) {
  ObjectReader r(j, "train");
  trainer::TrainConfig t;
  r.get("t_max", t.t_max);
  r.get("t_w", t.t_w);
  r.get("lr_main", t.lr_main);
  r.get("lr_sampled", t.lr_sampled);
  r.get("batch_size", t.batch_size);
  r.get("seed", t.seed);
  r.get("fixpoint_cap", t.fixpoint_cap);
  if (const json* c = r.find("calibration")) {
    ObjectReader cr(*c, "train.calibration");
    std::string method = calibrate::to_string(t.calibration.method);
    std::string mean_cov = calibrate::to_string(t.calibration.mean_cov);
    cr.get("method", method);
    cr.get("alpha", t.calibration.alpha);
    cr.get("lambda", t.calibration.lambda);
    cr.get("C", t.calibration.c);
    cr.get("mean_cov", mean_cov);
    cr.finish();
    t.calibration.method = calibrate::parse_method(method);
    t.calibration.mean_cov = calibrate::parse_mean_covariance(mean_cov);
  }
  if (const json* s = r.find("schedule")) {
    ObjectReader sr(*s, "train.schedule");
    sr.get("tau0", t.schedule.tau0);
    sr.get("decay", t.schedule.decay);
    sr.get("tau_min", t.schedule.tau_min);
    sr.finish();
  }
  r.finish();
  return t;
}

SweepConfig parse_sweep(const json& j) {
  ObjectReader r(j, "sweep");
  SweepConfig s;
  r.get("methods", s.methods);
  r.get("alpha_grid", s.alpha_grid);
  r.get("lambda_grid", s.lambda_grid);
  r.get("seeds", s.seeds);
  if (const json* grid = r.find("noise_grid")) {
    if (!grid->is_array()) throw ConfigError("sweep.noise_grid: expected an array");
    for (std::size_t i = 0; i < grid->size(); ++i)
      s.noise_grid.push_back(parse_noise((*grid)[i], "sweep.noise_grid[" + std::to_string(i) + "]"));
  }
  r.finish();
  return s;
}

json noise_json(const NoiseConfig& n) {
  json j;
  j["pmd_type"] = noisegen::to_string(n.pmd_type);
  j["target_level"] = n.target_level;
  j["scale_factor"] = n.scale_factor ? json(*n.scale_factor) : json(nullptr);
  if (n.class_matrix) {
    const ClassNoiseConfig& c = *n.class_matrix;
    json cm;
    cm["kind"] = c.kind;
    cm["epsilon"] = c.epsilon;
    json pairs = json::array();
    for (const auto& [from, to] : c.pairs) pairs.push_back({from, to});
    cm["pairs"] = pairs;
    cm["matrix"] = c.matrix ? matrix_json(*c.matrix) : json(nullptr);
    j["class_matrix"] = cm;
  } else {
    j["class_matrix"] = nullptr;
  }
  if (n.pmd_constants) {
    j["pmd_constants"] = {{"t0", n.pmd_constants->t0}, {"c1", n.pmd_constants->c1}, {"c2", n.pmd_constants->c2}};
  } else {
    j["pmd_constants"] = nullptr;
  }
  return j;
}

void validate_noise(const NoiseConfig& n, int k, const std::string& path) {
  if (!(n.target_level >= 0.0 && n.target_level <= 0.95))
    throw ConfigError(path + ".target_level must lie in [0, 0.95]");
  if (n.pmd_type == noisegen::PmdType::None && n.target_level != 0.0)
    throw ConfigError(path + ": target_level set but pmd_type is none");
  if (n.scale_factor && !(*n.scale_factor >= 0.0)) throw ConfigError(path + ".scale_factor must be >= 0");
  if (n.class_matrix) {
    try {
      build_class_matrix(n, k);
    } catch (const NumericError& e) {
      throw ConfigError(path + ".class_matrix: " + e.what());
    }
  }
}

const std::set<std::string> kMethods{"mean_based", "cov_based", "correction_only", "standard"};

}  // namespace

void ExperimentConfig::validate() const {
  const ScenarioConfig& s = scenario;
  if (s.k < 2) throw ConfigError("scenario.k must be >= 2");
  if (s.d < 1) throw ConfigError("scenario.d must be >= 1");
  if (s.n < 10 * static_cast<std::size_t>(s.k)) throw ConfigError("scenario.n must be >= 10 * k");
  if (s.n_test < 1) throw ConfigError("scenario.n_test must be >= 1");
  if (!(s.validation_fraction >= 0.0 && s.validation_fraction < 1.0))
    throw ConfigError("scenario.validation_fraction must lie in [0, 1)");
  if (!s.priors.empty() && static_cast<int>(s.priors.size()) != s.k)
    throw ConfigError("scenario.priors must have k entries");
  if (s.classes.empty()) {
    if (s.k > s.d) throw ConfigError("scenario: simplex shorthand needs k <= d");
    if (!(s.separation > 0.0)) throw ConfigError("scenario.separation must be positive");
  } else if (static_cast<int>(s.classes.size()) != s.k) {
    throw ConfigError("scenario.classes must have k entries");
  }
  build_oracle(s);

  validate_noise(noise, s.k, "noise");
  for (std::size_t i = 0; i < sweep.noise_grid.size(); ++i)
    validate_noise(sweep.noise_grid[i], s.k, "sweep.noise_grid[" + std::to_string(i) + "]");

  train.validate();

  if (sweep.methods.empty() || sweep.alpha_grid.empty() || sweep.lambda_grid.empty() || sweep.seeds.empty())
    throw ConfigError("sweep: methods, alpha_grid, lambda_grid and seeds must be non-empty");
  for (const auto& m : sweep.methods)
    if (!kMethods.count(m)) throw ConfigError("sweep.methods: unknown method '" + m + "'");
  for (double a : sweep.alpha_grid)
    if (!(a >= 0.0)) throw ConfigError("sweep.alpha_grid entries must be >= 0");
  for (double l : sweep.lambda_grid)
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("sweep.lambda_grid entries must lie in [0, 1]");
  if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
}

ExperimentConfig parse_config(const json& j) {
  ObjectReader r(j, "config");
  ExperimentConfig c;
  if (const json* s = r.find("scenario")) c.scenario = parse_scenario(*s);
  if (const json* n = r.find("noise")) c.noise = parse_noise(*n, "noise");
  if (const json* t = r.find("train")) c.train = parse_train(*t);
  if (const json* s = r.find("sweep")) c.sweep = parse_sweep(*s);
  r.get("output_dir", c.output_dir);
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) { return parse_config_text(io::read_text(path)); }

json to_json(const ExperimentConfig& c) {
  json j;
  const ScenarioConfig& s = c.scenario;
  json scenario = {{"k", s.k},
                   {"d", s.d},
                   {"n", s.n},
                   {"n_test", s.n_test},
                   {"separation", s.separation},
                   {"validation_fraction", s.validation_fraction},
                   {"priors", s.priors}};
  json classes = json::array();
  for (const auto& cls : s.classes) classes.push_back({{"mean", vector_json(cls.mean)}, {"cov", matrix_json(cls.cov)}});
  scenario["classes"] = classes;
  j["scenario"] = scenario;
  j["noise"] = noise_json(c.noise);

  const trainer::TrainConfig& t = c.train;
  j["train"] = {{"t_max", t.t_max},
                {"t_w", t.t_w},
                {"lr_main", t.lr_main},
                {"lr_sampled", t.lr_sampled},
                {"batch_size", t.batch_size},
                {"seed", t.seed},
                {"fixpoint_cap", t.fixpoint_cap},
                {"calibration",
                 {{"method", calibrate::to_string(t.calibration.method)},
                  {"alpha", t.calibration.alpha},
                  {"lambda", t.calibration.lambda},
                  {"C", t.calibration.c},
                  {"mean_cov", calibrate::to_string(t.calibration.mean_cov)}}},
                {"schedule", {{"tau0", t.schedule.tau0}, {"decay", t.schedule.decay}, {"tau_min", t.schedule.tau_min}}}};

  json grid = json::array();
  for (const auto& n : c.sweep.noise_grid) grid.push_back(noise_json(n));
  j["sweep"] = {{"methods", c.sweep.methods},
                {"alpha_grid", c.sweep.alpha_grid},
                {"lambda_grid", c.sweep.lambda_grid},
                {"seeds", c.sweep.seeds},
                {"noise_grid", grid}};
  j["output_dir"] = c.output_dir;
  return j;
}

noisegen::MixtureOracle build_oracle(const ScenarioConfig& s) {
  try {
    if (s.classes.empty()) return noisegen::simplex_oracle(s.k, s.d, s.separation, s.priors);
    std::vector<GaussianClassModel> models;
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
      const ClassSpec& spec = s.classes[c];
      if (spec.mean.size() != s.d || spec.cov.rows() != s.d || spec.cov.cols() != s.d)
        throw ConfigError("scenario.classes[" + std::to_string(c) + "]: dimension does not match d");
      models.push_back({static_cast<int>(c), spec.mean, spec.cov, 1});
    }
    std::vector<double> priors = s.priors;
    if (priors.empty()) priors.assign(s.classes.size(), 1.0 / static_cast<double>(s.classes.size()));
    return noisegen::MixtureOracle(std::move(models), std::move(priors));
  } catch (const NumericError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

std::optional<Matrix> build_class_matrix(const NoiseConfig& noise, int k) {
  if (!noise.class_matrix) return std::nullopt;
  const ClassNoiseConfig& c = *noise.class_matrix;
  if (c.kind == "symmetric") return noisegen::class_transition_matrix(noisegen::TransitionKind::Symmetric, k, c.epsilon);
  if (c.kind == "asymmetric")
    return noisegen::class_transition_matrix(noisegen::TransitionKind::Asymmetric, k, c.epsilon, c.pairs);
  if (c.kind == "matrix") {
    if (!c.matrix) throw NumericError("kind 'matrix' needs a matrix field");
    const Matrix& m = *c.matrix;
    if (m.rows() != k || m.cols() != k) throw NumericError("matrix must be k x k");
    for (Eigen::Index r = 0; r < k; ++r) {
      if ((m.row(r).array() < 0.0).any()) throw NumericError("matrix has negative entries");
      if (std::abs(m.row(r).sum() - 1.0) > 1e-12) throw NumericError("matrix rows must sum to 1");
    }
    return m;
  }
  throw NumericError("unknown kind '" + c.kind + "' (expected symmetric, asymmetric, matrix)");
}

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string noise_label(const NoiseConfig& noise) {
  std::string label = noise.pmd_type == noisegen::PmdType::None
                          ? std::string("none")
                          : noisegen::to_string(noise.pmd_type) + "@" + short_number(noise.target_level);
  if (noise.class_matrix) {
    const ClassNoiseConfig& c = *noise.class_matrix;
    const std::string kind = c.kind == "symmetric" ? "sym" : c.kind == "asymmetric" ? "asym" : "matrix";
    label += "+" + kind + (c.kind == "matrix" ? std::string() : short_number(c.epsilon));
  }
  return label;
}

trainer::TrainConfig cell_train_config(const trainer::TrainConfig& base, const std::string& method, double alpha,
                                       double lambda, std::uint64_t seed) {
  trainer::TrainConfig t = base;
  t.seed = seed;
  t.calibration.alpha = alpha;
  t.calibration.lambda = lambda;
  if (method == "mean_based" || method == "cov_based") {
    t.calibration.method = calibrate::parse_method(method);
  } else if (method == "correction_only") {
    t.calibration.lambda = 0.0;
  } else if (method == "standard") {
    t.t_max = t.t_w;
  } else {
    throw ConfigError("unknown sweep method '" + method + "'");
  }
  return t;
}

}  // namespace noisecal::app
