#include "calderon/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "calderon/dnmap.hpp"
#include "calderon/identities.hpp"
#include "calderon/io.hpp"
#include "calderon/linearize.hpp"
#include "calderon/recon.hpp"

#ifndef CALDERON_VERSION
#define CALDERON_VERSION "0.0.0"
#endif

namespace calderon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Errors below this are reported as exact in convergence tables.
constexpr double kRoundingLevel = 1e-12;

const std::set<std::string> kKnownKeys = {
    "description", "shape",      "resolution", "m",          "pipeline",      "base_pipeline",
    "resolutions", "potential",  "potential2", "lp_exponent", "picard_tol",   "max_iter",
    "delta",       "blowup_factor", "boundary_data", "amplitude", "xi_max",    "xi_spacing",
    "fd_step",     "support_fraction", "data",  "xi",         "patch",         "measure",
    "tolerance",   "seed",       "output_dir", "threads"};

std::string key_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

int integer_at(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where, "expected an integer");
  return j.get<int>();
}

std::string string_at(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

Point point_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where, "expected [x1, x2]");
  return {number_at(j[0], where + "[0]"), number_at(j[1], where + "[1]")};
}

double positive_at(const json& j, const std::string& where) {
  const double v = number_at(j, where);
  if (!(v > 0.0)) throw ConfigError(where, "must be positive");
  return v;
}

PotentialSpec parse_term(const json& t, const std::string& where, Shape shape, std::uint64_t seed) {
  if (t.is_number()) return PotentialSpec::constant(t.get<double>());
  if (!t.is_object()) throw ConfigError(where, "potential term must be an object or a number");
  if (!t.contains("type")) throw ConfigError(where, "potential term needs a 'type'");
  const std::string type = string_at(t["type"], key_path(where, "type"));
  const auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : t.items()) {
      bool ok = k == "type";
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw ConfigError(key_path(where, k), "unknown key for a " + type + " term");
    }
  };
  if (type == "constant") {
    allow({"value"});
    return PotentialSpec::constant(number_at(t.value("value", json(0.0)), key_path(where, "value")));
  }
  if (type == "gaussian") {
    allow({"center", "width", "amplitude"});
    GaussianTerm g;
    if (t.contains("center")) g.center = point_at(t["center"], key_path(where, "center"));
    if (t.contains("width")) g.width = positive_at(t["width"], key_path(where, "width"));
    if (t.contains("amplitude")) g.amplitude = number_at(t["amplitude"], key_path(where, "amplitude"));
    return {{g}};
  }
  if (type == "singular") {
    allow({"center", "alpha", "amplitude", "cap"});
    SingularTerm s;
    if (t.contains("center")) s.center = point_at(t["center"], key_path(where, "center"));
    if (t.contains("alpha")) s.alpha = positive_at(t["alpha"], key_path(where, "alpha"));
    if (t.contains("amplitude")) s.amplitude = number_at(t["amplitude"], key_path(where, "amplitude"));
    if (t.contains("cap")) s.cap = number_at(t["cap"], key_path(where, "cap"));
    return {{s}};
  }
  if (type == "random") {
    allow({"count", "amplitude"});
    const int count = integer_at(t.value("count", json(3)), key_path(where, "count"));
    if (count < 1) throw ConfigError(key_path(where, "count"), "must be at least 1");
    const double amp = number_at(t.value("amplitude", json(1.0)), key_path(where, "amplitude"));
    return random_smooth(seed, count, amp, shape);
  }
  throw ConfigError(key_path(where, "type"), "unknown potential type '" + type + "'");
}

PotentialSpec parse_potential(const json& j, const std::string& where, Shape shape,
                              std::uint64_t seed) {
  if (!j.is_array()) return parse_term(j, where, shape, seed);
  PotentialSpec spec;
  for (std::size_t k = 0; k < j.size(); ++k) {
    // Each random term draws from its own stream.
    PotentialSpec t = parse_term(j[k], where + "[" + std::to_string(k) + "]", shape, seed + 977 * k);
    spec.terms.insert(spec.terms.end(), t.terms.begin(), t.terms.end());
  }
  return spec;
}

// Analytic boundary data used by the forward pipeline; `exact` is the
// harmonic extension when it is known in closed form.
struct NamedData {
  BoundaryField f;
  std::optional<Field> exact;
};

NamedData named_boundary_data(const DomainPtr& domain, const std::string& name, double amplitude) {
  const auto make = [&](auto&& fn, bool harmonic) {
    NamedData d{sample_boundary<Complex>(domain, [&](const Point& x) { return amplitude * fn(x); }),
                std::nullopt};
    if (harmonic) d.exact = sample<Complex>(domain, [&](const Point& x) { return amplitude * fn(x); });
    return d;
  };
  if (name == "x1") return make([](const Point& x) { return x.x(); }, true);
  if (name == "constant") return make([](const Point&) { return 1.0; }, true);
  if (name == "harmonic_quadratic")
    return make([](const Point& x) { return x.x() * x.x() - x.y() * x.y(); }, true);
  if (name == "sin_theta") {
    const Point c = domain->shape() == Shape::disk ? Point(0.0, 0.0) : Point(0.5, 0.5);
    const bool disk = domain->shape() == Shape::disk;
    NamedData d{sample_boundary<Complex>(domain,
                                         [&](const Point& x) {
                                           return amplitude * std::sin(std::atan2(x.y() - c.y(), x.x() - c.x()));
                                         }),
                std::nullopt};
    if (disk) d.exact = sample<Complex>(domain, [&](const Point& x) { return amplitude * x.y(); });
    return d;
  }
  throw ConfigError("boundary_data", "unknown boundary data '" + name + "'");
}

// sin^2 bump over the patch, zero elsewhere.
BoundaryField patch_bump(const DomainPtr& domain, const BoundaryPatch& patch) {
  const RealVector& s = domain->boundary_parameter();
  const double period = domain->perimeter();
  const auto& members = patch.members();
  const double s0 = s[members.front()];
  double length = s[members.back()] - s0;
  if (length < 0.0) length += period;
  BoundaryField g(domain);
  if (length <= 0.0) {
    g.values()[members.front()] = 1.0;
    return g;
  }
  for (Eigen::Index j : members) {
    double t = s[j] - s0;
    if (t < 0.0) t += period;
    const double b = std::sin(std::numbers::pi * t / length);
    g.values()[j] = b * b;
  }
  return g;
}

std::vector<BoundaryField> identity_data(const DomainPtr& domain, int m, const std::string& kind,
                                         const Eigen::Vector2d& xi, const BoundaryField* window) {
  const BoundaryField ones(domain, ComplexVector::Ones(domain->num_boundary()));
  std::vector<BoundaryField> data;
  if (kind == "ones") {
    data.assign(m, ones);
  } else {
    CalderonData pair = calderon_pair(domain, xi);
    data = {pair.f1, pair.f2};
    while (static_cast<int>(data.size()) < m) data.push_back(pair.fill);
  }
  if (window)
    for (auto& f : data) f.values().array() *= window->values().array();
  return data;
}

struct Stage {
  json results = json::object();
  json tolerances = json::object();
  std::vector<std::pair<std::string, std::string>> files;
  double metric = 0.0;
  bool identity_failed = false;
};

template <typename T>
std::string csv_of(const T& field) {
  std::ostringstream out;
  write_csv(out, field);
  return out.str();
}

Stage run_forward(const ExperimentConfig& cfg) {
  const DomainPtr domain = build_domain(cfg.shape, cfg.resolution);
  const RealField q = evaluate(cfg.potential, domain);
  NamedData data = named_boundary_data(domain, cfg.boundary_data, cfg.amplitude);
  const SemilinearProblem problem{q, cfg.m, data.f};
  const SemilinearSolution sol = solve_semilinear(problem, cfg.solver);
  const BoundaryField dn = normal_derivative(sol.u);

  Stage st;
  const double f_sup = sup_norm(data.f);
  st.results["iterations"] = sol.diagnostics.iterations;
  st.results["last_update"] = sol.diagnostics.last_update;
  st.results["pde_residual"] = sol.diagnostics.residual;
  st.results["norm_ratio"] = f_sup > 0.0 ? sup_norm(sol.u) / f_sup : 0.0;
  st.metric = sol.diagnostics.residual;
  if (data.exact && cfg.potential.is_zero()) {
    const double scale = std::max(sup_norm(*data.exact), 1e-300);
    const double err = (sol.u.values() - data.exact->values()).cwiseAbs().maxCoeff() / scale;
    st.results["relative_solution_error"] = err;
    st.metric = err;
  }
  st.results["metric"] = st.metric;

  const json diag = {{"iterations", sol.diagnostics.iterations},
                     {"last_update", sol.diagnostics.last_update},
                     {"residual", sol.diagnostics.residual},
                     {"updates", sol.diagnostics.updates}};
  st.files.emplace_back("u.csv", csv_of(sol.u));
  st.files.emplace_back("dn.csv", csv_of(dn));
  st.files.emplace_back("dn.json", to_json(dn, diag).dump(2) + "\n");
  return st;
}

Stage run_reconstruct(const ExperimentConfig& cfg, int threads) {
  const DomainPtr domain = build_domain(cfg.shape, cfg.resolution);
  const RealField q = evaluate(cfg.potential, domain);
  const int k = static_cast<int>(std::floor(cfg.xi_max / cfg.xi_spacing + 1e-9));
  const std::vector<Eigen::Vector2d> xis = frequency_lattice(k, cfg.xi_spacing);

  ReconstructionOptions ro;
  ro.xi_max = cfg.xi_max;
  ro.fd_step = cfg.fd_step;
  // The map is the only view of q the reconstruction gets.
  const DnMap map(q, cfg.m, cfg.solver);
  const std::vector<SweepEntry> entries = frequency_sweep(map, xis, ro, threads);

  std::vector<FrequencySample> samples;
  json failures = json::array();
  for (const auto& e : entries) {
    if (e.sample)
      samples.push_back(*e.sample);
    else
      failures.push_back({{"xi", {e.xi.x(), e.xi.y()}}, {"error", e.error}});
  }
  if (!failures.empty()) {
    std::ostringstream msg;
    msg << failures.size() << " of " << entries.size() << " frequency samples failed; first: "
        << failures.front()["error"].get<std::string>();
    throw SolverError(SolverError::Kind::non_convergence, msg.str());
  }

  Stage st;
  const Reconstruction rec = inverse_transform(samples, domain);
  const double rel = relative_l2_error(rec.q, q, cfg.support_fraction);

  // Oracle side: quadrature of the known q, used only for reporting.
  std::vector<FrequencySample> oracle_samples;
  std::ostringstream oracle_csv;
  oracle_csv << "xi1,xi2,re_oracle,im_oracle,rel_error\n" << std::setprecision(17);
  double worst = 0.0;
  for (const auto& s : samples) {
    FrequencySample o = s;
    o.qhat = fourier_quadrature(q, s.xi);
    oracle_samples.push_back(o);
    const double e = std::abs(s.qhat - o.qhat) / std::max(std::abs(o.qhat), 1e-300);
    worst = std::max(worst, e);
    oracle_csv << s.xi.x() << ',' << s.xi.y() << ',' << o.qhat.real() << ',' << o.qhat.imag() << ','
               << e << '\n';
  }
  const Reconstruction truncated = inverse_transform(oracle_samples, domain);

  double step_min = samples.front().fd_step, step_max = step_min;
  long long solves = 0;
  for (const auto& s : samples) {
    step_min = std::min(step_min, s.fd_step);
    step_max = std::max(step_max, s.fd_step);
    solves += s.solves;
  }
  st.tolerances["fd_step_min"] = step_min;
  st.tolerances["fd_step_max"] = step_max;
  st.tolerances["support_fraction"] = cfg.support_fraction;
  st.results["samples"] = samples.size();
  st.results["nonlinear_solves"] = solves;
  st.results["rel_l2_error"] = rel;
  st.results["truncation_rel_l2_error"] = relative_l2_error(truncated.q, q, cfg.support_fraction);
  st.results["max_rel_qhat_error"] = worst;
  st.results["imaginary_residue"] = rec.imaginary_residue;
  st.results["metric"] = rel;
  st.metric = rel;

  std::ostringstream qhat_csv;
  write_samples_csv(qhat_csv, samples);
  st.files.emplace_back("qhat.csv", qhat_csv.str());
  st.files.emplace_back("q_rec.csv", csv_of(rec.q));
  st.files.emplace_back("qhat_oracle.csv", oracle_csv.str());
  return st;
}

Stage identity_stage(const IdentityReport& report) {
  Stage st;
  st.results["report"] = report.to_json();
  st.results["metric"] = report.rel_residual;
  st.tolerances["identity_rel_residual"] = report.tolerance;
  st.metric = report.rel_residual;
  st.identity_failed = !report.passed();
  st.files.emplace_back("report.json", report.to_json().dump(2) + "\n");
  return st;
}

Stage run_verify(const ExperimentConfig& cfg, Pipeline which, double tolerance_scale) {
  const DomainPtr domain = build_domain(cfg.shape, cfg.resolution);
  const RealField q1 = evaluate(cfg.potential, domain);
  const RealField q2 = evaluate(cfg.potential2, domain);
  switch (which) {
    case Pipeline::verify_full: {
      const double tol = cfg.tolerance.value_or(1e-2) * tolerance_scale;
      const auto data = identity_data(domain, cfg.m, cfg.data, cfg.xi, nullptr);
      return identity_stage(verify_full_identity(q1, q2, cfg.m, data, tol));
    }
    case Pipeline::verify_partial: {
      const double tol = cfg.tolerance.value_or(1e-2) * tolerance_scale;
      const BoundaryPatch patch = BoundaryPatch::arc(domain, cfg.patch[0], cfg.patch[1]);
      const BoundaryField g = patch_bump(domain, patch);
      const auto data = identity_data(domain, cfg.m, cfg.data, cfg.xi, &g);
      Stage st = identity_stage(verify_partial_identity(q1, q2, cfg.m, patch, g, data, tol));
      st.results["patch_nodes"] = patch.size();
      return st;
    }
    case Pipeline::verify_onepoint: {
      const double tol = cfg.tolerance.value_or(5e-2) * tolerance_scale;
      const BoundaryMeasure mu = cfg.measure.is_null()
                                     ? BoundaryMeasure::dirac(domain, 0.0)
                                     : BoundaryMeasure::from_json(domain, cfg.measure);
      const auto data = identity_data(domain, cfg.m, cfg.data, cfg.xi, nullptr);
      Stage st = identity_stage(verify_onepoint_identity(q1, q2, cfg.m, mu, data, tol));
      const Field psi = psi_from_measure(mu);
      st.results["measure"] = mu.metadata();
      st.results["psi_l1.8"] = lp_norm(psi, 1.8);
      st.results["psi_l2.5"] = lp_norm(psi, 2.5);
      st.files.emplace_back("psi.csv", csv_of(psi));
      return st;
    }
    default:
      throw std::logic_error("not a verify pipeline");
  }
}

Stage run_stage(const ExperimentConfig& cfg, Pipeline which, int threads, double tolerance_scale) {
  switch (which) {
    case Pipeline::forward:
      return run_forward(cfg);
    case Pipeline::reconstruct:
      return run_reconstruct(cfg, threads);
    case Pipeline::verify_full:
    case Pipeline::verify_partial:
    case Pipeline::verify_onepoint:
      return run_verify(cfg, which, tolerance_scale);
    case Pipeline::sweep:
      break;
  }
  throw ConfigError("base_pipeline", "a sweep cannot be nested");
}

json solver_tolerances(const ExperimentConfig& cfg, double tolerance_scale) {
  json t = {{"picard_tol", cfg.solver.picard_tol},
            {"max_iter", cfg.solver.max_iter},
            {"delta", cfg.solver.delta},
            {"blowup_factor", cfg.solver.blowup_factor},
            {"linear_residual", kLinearResidualTol},
            {"tolerance_scale", tolerance_scale}};
  if (cfg.pipeline == Pipeline::reconstruct || cfg.base_pipeline == Pipeline::reconstruct)
    t["fd_step_default"] = default_fd_step(cfg.solver, cfg.m);
  return t;
}

json error_json(const std::string& kind, const std::string& message, int code,
                const std::string& location = {}) {
  json e = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!location.empty()) e["location"] = location;
  return e;
}

std::string solver_kind(SolverError::Kind k) {
  switch (k) {
    case SolverError::Kind::linear_solve:
      return "linear_solve";
    case SolverError::Kind::smallness:
      return "smallness";
    case SolverError::Kind::non_convergence:
      return "non_convergence";
  }
  return "solver";
}

// Shared driver: output directory, timing, error taxonomy, manifest.
template <typename Body>
RunResult drive(const ExperimentConfig& cfg, const RunOptions& opts, Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out = opts.output_dir.value_or(cfg.output_dir);
  RunResult result;
  result.manifest = {{"version", CALDERON_VERSION},
                     {"pipeline", to_string(cfg.pipeline)},
                     {"config", cfg.raw},
                     {"output_dir", out.string()},
                     {"threads", opts.threads.value_or(cfg.threads)},
                     {"tolerances", solver_tolerances(cfg, opts.tolerance_scale)}};
  std::optional<json> error;
  try {
    fs::create_directories(out);
    Stage st = body();
    for (const auto& [k, v] : st.tolerances.items()) result.manifest["tolerances"][k] = v;
    result.manifest["results"] = st.results;
    result.metric = st.metric;
    json outputs = json::array();
    for (const auto& [name, contents] : st.files) {
      write_file(out / name, contents);
      outputs.push_back(name);
    }
    result.manifest["outputs"] = outputs;
    if (st.identity_failed) {
      result.exit_code = kExitIdentity;
      error = error_json("identity_residual", "relative residual exceeds the configured tolerance",
                         kExitIdentity);
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    error = error_json("config", e.what(), kExitConfig, e.location());
  } catch (const SolverError& e) {
    result.exit_code = kExitSolver;
    error = error_json(solver_kind(e.kind()), e.what(), kExitSolver);
  } catch (const std::invalid_argument& e) {
    // Inputs the config could not rule out statically (domain too coarse,
    // one-point data on the square, ...).
    result.exit_code = kExitConfig;
    error = error_json("config", e.what(), kExitConfig);
  } catch (const std::exception& e) {
    result.exit_code = kExitFailure;
    error = error_json("failure", e.what(), kExitFailure);
  }

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  result.manifest["wall_time_s"] = elapsed.count();
  result.manifest["exit_code"] = result.exit_code;
  if (error) result.manifest["error"] = *error;
  try {
    fs::create_directories(out);
    if (error) write_file(out / "error.json", error->dump(2) + "\n");
    write_file(out / "manifest.json", result.manifest.dump(2) + "\n");
  } catch (const std::exception&) {
    if (result.exit_code == kExitOk) result.exit_code = kExitFailure;
  }
  return result;
}

}  // namespace

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::forward:
      return "forward";
    case Pipeline::reconstruct:
      return "reconstruct";
    case Pipeline::verify_full:
      return "verify-full";
    case Pipeline::verify_partial:
      return "verify-partial";
    case Pipeline::verify_onepoint:
      return "verify-onepoint";
    case Pipeline::sweep:
      return "sweep-convergence";
  }
  return "unknown";
}

Pipeline pipeline_from_string(const std::string& name) {
  for (Pipeline p : {Pipeline::forward, Pipeline::reconstruct, Pipeline::verify_full,
                     Pipeline::verify_partial, Pipeline::verify_onepoint, Pipeline::sweep})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown pipeline '" + name + "'");
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (!kKnownKeys.count(k)) throw ConfigError(k, "unknown key");

  ExperimentConfig c;
  c.raw = doc;
  const auto has = [&](const char* k) { return doc.contains(k); };

  if (has("shape")) {
    try {
      c.shape = shape_from_string(string_at(doc["shape"], "shape"));
    } catch (const DomainError& e) {
      throw ConfigError("shape", e.what());
    }
  }
  if (has("resolution")) c.resolution = integer_at(doc["resolution"], "resolution");
  if (c.resolution < 8) throw ConfigError("resolution", "must be at least 8");
  if (has("m")) c.m = integer_at(doc["m"], "m");
  if (c.m < 2) throw ConfigError("m", "must be at least 2");

  const auto pipeline_at = [&](const char* key) {
    try {
      return pipeline_from_string(string_at(doc[key], key));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  };
  if (!has("pipeline")) throw ConfigError("pipeline", "missing");
  c.pipeline = pipeline_at("pipeline");
  if (has("base_pipeline")) c.base_pipeline = pipeline_at("base_pipeline");
  if (c.base_pipeline == Pipeline::sweep) throw ConfigError("base_pipeline", "a sweep cannot be nested");
  if (has("resolutions")) {
    const json& r = doc["resolutions"];
    if (!r.is_array() || r.empty()) throw ConfigError("resolutions", "expected a nonempty array");
    c.resolutions.clear();
    for (std::size_t k = 0; k < r.size(); ++k) {
      const std::string where = "resolutions[" + std::to_string(k) + "]";
      c.resolutions.push_back(integer_at(r[k], where));
      if (c.resolutions.back() < 8) throw ConfigError(where, "must be at least 8");
    }
  }

  if (has("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0)
      throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (has("potential")) c.potential = parse_potential(doc["potential"], "potential", c.shape, c.seed);
  if (has("potential2"))
    c.potential2 = parse_potential(doc["potential2"], "potential2", c.shape, c.seed + 1);
  if (has("lp_exponent")) {
    c.lp_exponent = number_at(doc["lp_exponent"], "lp_exponent");
    if (!(c.lp_exponent >= 1.0)) throw ConfigError("lp_exponent", "must be at least 1");
  }
  for (const auto& [spec, key] : {std::pair{&c.potential, "potential"}, {&c.potential2, "potential2"}}) {
    try {
      spec->check_integrability(c.lp_exponent);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  }

  if (has("picard_tol")) c.solver.picard_tol = positive_at(doc["picard_tol"], "picard_tol");
  if (has("max_iter")) c.solver.max_iter = integer_at(doc["max_iter"], "max_iter");
  if (c.solver.max_iter < 1) throw ConfigError("max_iter", "must be at least 1");
  if (has("delta")) c.solver.delta = positive_at(doc["delta"], "delta");
  if (has("blowup_factor")) c.solver.blowup_factor = positive_at(doc["blowup_factor"], "blowup_factor");

  if (has("boundary_data")) c.boundary_data = string_at(doc["boundary_data"], "boundary_data");
  if (has("amplitude")) c.amplitude = number_at(doc["amplitude"], "amplitude");
  if (has("xi_max")) c.xi_max = positive_at(doc["xi_max"], "xi_max");
  if (has("xi_spacing")) c.xi_spacing = positive_at(doc["xi_spacing"], "xi_spacing");
  if (has("fd_step")) c.fd_step = positive_at(doc["fd_step"], "fd_step");
  if (has("support_fraction")) {
    c.support_fraction = number_at(doc["support_fraction"], "support_fraction");
    if (c.support_fraction < 0.0 || c.support_fraction >= 1.0)
      throw ConfigError("support_fraction", "must lie in [0, 1)");
  }
  if (has("data")) {
    c.data = string_at(doc["data"], "data");
    if (c.data != "calderon" && c.data != "ones")
      throw ConfigError("data", "expected 'calderon' or 'ones'");
  }
  if (has("xi")) {
    const Point xi = point_at(doc["xi"], "xi");
    c.xi = xi;
  }
  if (c.data == "calderon" && c.xi.norm() == 0.0)
    throw ConfigError("xi", "Calderon data needs a nonzero frequency");
  if (has("patch")) {
    const Point p = point_at(doc["patch"], "patch");
    c.patch = {p.x(), p.y()};
  }
  if (has("measure")) {
    if (!doc["measure"].is_object()) throw ConfigError("measure", "expected an object");
    c.measure = doc["measure"];
  }
  if (has("tolerance")) c.tolerance = positive_at(doc["tolerance"], "tolerance");
  if (has("output_dir")) c.output_dir = string_at(doc["output_dir"], "output_dir");
  if (has("threads")) c.threads = integer_at(doc["threads"], "threads");
  if (c.threads < 1) throw ConfigError("threads", "must be at least 1");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot read config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column),
                      "JSON syntax error");
  }
  return parse_config(doc);
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.pipeline == Pipeline::sweep) return run_sweep(config, options);
  const int threads = options.threads.value_or(config.threads);
  return drive(config, options, [&] {
    Stage st = run_stage(config, config.pipeline, threads, options.tolerance_scale);
    st.results["domain"] = {{"shape", to_string(config.shape)}, {"resolution", config.resolution}};
    return st;
  });
}

std::vector<std::string> observed_orders(const std::vector<double>& errors) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (k == 0) {
      out.emplace_back();
      continue;
    }
    const double a = errors[k - 1], b = errors[k];
    if (a <= kRoundingLevel && b <= kRoundingLevel) {
      out.emplace_back("exact");
    } else if (b <= 0.0 || a <= 0.0) {
      out.emplace_back("nan");
    } else {
      std::ostringstream s;
      s << std::setprecision(6) << std::log2(a / b);
      out.push_back(s.str());
    }
  }
  return out;
}

RunResult run_sweep(const ExperimentConfig& config, const RunOptions& options) {
  const Pipeline base = config.pipeline == Pipeline::sweep ? config.base_pipeline : config.pipeline;
  const int threads = options.threads.value_or(config.threads);
  ExperimentConfig labelled = config;
  labelled.pipeline = Pipeline::sweep;
  labelled.base_pipeline = base;
  return drive(labelled, options, [&] {
    std::vector<double> errors;
    json runs = json::array();
    for (int n : config.resolutions) {
      ExperimentConfig c = config;
      c.resolution = n;
      c.pipeline = base;
      Stage st = run_stage(c, base, threads, options.tolerance_scale);
      errors.push_back(st.metric);
      st.results["resolution"] = n;
      runs.push_back(st.results);
    }
    const std::vector<std::string> orders = observed_orders(errors);
    std::ostringstream csv;
    csv << "resolution,error,order\n" << std::setprecision(17);
    for (std::size_t k = 0; k < errors.size(); ++k)
      csv << config.resolutions[k] << ',' << errors[k] << ',' << orders[k] << '\n';

    Stage st;
    st.results = {{"base_pipeline", to_string(base)}, {"runs", runs}, {"errors", errors},
                  {"orders", orders}};
    st.metric = errors.back();
    st.files.emplace_back("convergence.csv", csv.str());
    return st;
  });
}

}  // namespace calderon
