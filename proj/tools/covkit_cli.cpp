// covkit command-line front end: eval, validate, sample, estimate.
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "covkit/config.hpp"
#include "covkit/io.hpp"
#include "covkit/simulation.hpp"
#include "covkit/validation.hpp"

namespace {

using namespace covkit;

enum Exit { ok = 0, invalid = 1, input_error = 2, evaluation_error = 3, inconclusive = 4 };

// Limits OpenMP threads from COVKIT_THREADS (0 or unset = runtime default).
void apply_thread_limit() {
  const char* env = std::getenv("COVKIT_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw InputError("COVKIT_THREADS must be a non-negative integer");
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw InputError(std::string(what) + ": '" + item + "' is not a number");
  }
  if (out.empty()) throw InputError(std::string(what) + ": empty list");
  return out;
}

RunManifest manifest_for(const std::string& command, const ModelConfig* model, std::uint64_t seed,
                         const std::string& started, nlohmann::json args) {
  RunManifest m;
  m.command = command;
  m.config_hash = model ? config_hash(serialize_model_config(model->model)) : 0;
  m.seed = seed;
  m.started = started;
  m.finished = utc_timestamp();
  m.arguments = std::move(args);
  return m;
}

struct EvalArgs {
  std::string model, points, out;
};

int run_eval(const EvalArgs& a) {
  const std::string started = utc_timestamp();
  const ModelConfig cfg = load_model_config(a.model);
  const PointSet pts = read_points(a.points);
  if (!(pts.domain() == cfg.domain)) throw InputError("points: column layout does not match dim_space/dim_time");
  const std::string csv = eval_csv(cfg.model, pts);
  atomic_write(a.out, csv);
  write_manifest(a.out, manifest_for("eval", &cfg, 0, started, {{"model", a.model}, {"points", a.points}}));
  return ok;
}

struct ValidateArgs {
  std::string model, mode = "pd", out, t_grid = "0.1,1,10";
  int configs = 20, points_max = 12;
  double tol = 1e-8, box_lo = -1.0, box_hi = 1.0;
  std::uint64_t seed = 0;
};

int run_validate(const ValidateArgs& a) {
  const std::string started = utc_timestamp();
  const ModelConfig cfg = load_model_config(a.model);
  ValidationConfig vc;
  vc.n_configs = a.configs;
  vc.n_points_max = a.points_max;
  vc.tol_rel = a.tol;
  vc.seed = a.seed;
  vc.box_lo = a.box_lo;
  vc.box_hi = a.box_hi;
  vc.validate();
  ValidationReport rep;
  const Claims& c = cfg.model.claims();
  std::string claim_note;
  if (a.mode == "pd") {
    rep = check_pd(cfg.model, vc);
    if (!c.positive_definite) claim_note = "model does not claim positive definiteness";
  } else if (a.mode == "cnd") {
    rep = check_cnd(cfg.model, vc);
    if (!c.conditionally_negative_definite) claim_note = "model does not claim conditional negative definiteness";
  } else if (a.mode == "pcv") {
    rep = check_pseudo_variogram(cfg.model, vc);
    if (!c.pseudo_variogram) claim_note = "model does not claim to be a pseudo cross-variogram";
  } else {
    rep = schoenberg_roundtrip(cfg.model, parse_list(a.t_grid, "--t-grid"), vc);
    if (!c.conditionally_negative_definite) claim_note = "model does not claim conditional negative definiteness";
  }
  if (!claim_note.empty()) rep.notes.push_back(claim_note);
  nlohmann::json doc = rep.to_json();
  doc["config"] = vc.to_json();
  atomic_write(a.out, doc.dump(2) + "\n");
  write_manifest(a.out, manifest_for("validate", &cfg, a.seed, started,
                                     {{"model", a.model}, {"mode", a.mode}, {"configs", a.configs},
                                      {"points_max", a.points_max}, {"tol", a.tol}}));
  std::cerr << "validate: " << to_string(rep.verdict) << " (worst " << format_double(rep.worst_value) << ", scale "
            << format_double(rep.scale) << ")\n";
  switch (rep.verdict) {
    case Verdict::pass: return ok;
    case Verdict::fail: return invalid;
    case Verdict::inconclusive: return inconclusive;
  }
  return inconclusive;
}

struct SampleArgs {
  std::string model, points, out;
  int reals = 1;
  std::uint64_t seed = 0;
  bool force = false;
};

int run_sample(const SampleArgs& a) {
  const std::string started = utc_timestamp();
  const ModelConfig cfg = load_model_config(a.model);
  const PointSet pts = read_points(a.points);
  if (!(pts.domain() == cfg.domain)) throw InputError("points: column layout does not match dim_space/dim_time");
  if (a.reals < 0) throw InputError("--reals must be non-negative");
  const auto reals = sample_gaussian(cfg.model, pts, a.reals, a.seed, a.force);
  atomic_write(a.out, samples_csv(reals));
  nlohmann::json args{{"model", a.model}, {"points", a.points}, {"reals", a.reals}, {"force", a.force}};
  if (!reals.empty()) args["jitter_applied"] = reals.front().jitter_applied;
  write_manifest(a.out, manifest_for("sample", &cfg, a.seed, started, args));
  return ok;
}

struct EstimateArgs {
  std::string input, lags, out, points;
  double spacing = 1.0;
  int batches = 0;
};

int run_estimate(const EstimateArgs& a) {
  const std::string started = utc_timestamp();
  if (!(a.spacing > 0.0)) throw InputError("--grid-spacing must be positive");
  const CsvTable samples = read_csv(a.input);
  std::vector<Point> locations;
  if (!a.points.empty()) {
    locations = read_points(a.points).points();
  } else {
    long n = 0;
    for (const auto& row : samples.rows)
      if (!row.empty()) n = std::max(n, static_cast<long>(row.size() > 1 ? row[1] : 0) + 1);
    for (long i = 0; i < n; ++i) locations.push_back({static_cast<double>(i) * a.spacing});
  }
  const auto reals = realizations_from_csv(samples, locations);
  if (reals.empty()) throw InputError("samples: no realizations");
  const CsvTable lag_table = read_csv(a.lags);
  std::vector<Eigen::VectorXd> lags;
  for (const auto& row : lag_table.rows) lags.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
  const EmpiricalPcv est = empirical_pcv(reals, lags, 1e-9 * a.spacing, a.batches);
  atomic_write(a.out, estimate_csv(est));
  write_manifest(a.out, manifest_for("estimate", nullptr, 0, started,
                                     {{"input", a.input}, {"lags", a.lags}, {"grid_spacing", a.spacing}}));
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covkit: multivariate covariance and pseudo cross-variogram toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(covkit::version));

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a model on all pairs of points");
  eval->add_option("--model", ea.model, "Model JSON file")->required();
  eval->add_option("--points", ea.points, "Points CSV (x1..xd,t1..tk)")->required();
  eval->add_option("--out", ea.out, "Output CSV")->required();

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check definiteness on random configurations");
  validate->add_option("--model", va.model, "Model JSON file")->required();
  validate->add_option("--mode", va.mode, "pd, cnd, pcv or roundtrip")
      ->check(CLI::IsMember({"pd", "cnd", "pcv", "roundtrip"}));
  validate->add_option("--configs", va.configs, "Number of random configurations")->check(CLI::PositiveNumber);
  validate->add_option("--points-max", va.points_max, "Maximum points per configuration")->check(CLI::Range(2, 10000));
  validate->add_option("--tol", va.tol, "Relative eigenvalue tolerance")->check(CLI::PositiveNumber);
  validate->add_option("--seed", va.seed, "Random seed");
  validate->add_option("--box-lo", va.box_lo, "Lower coordinate bound");
  validate->add_option("--box-hi", va.box_hi, "Upper coordinate bound");
  validate->add_option("--t-grid", va.t_grid, "Comma-separated t values for roundtrip mode");
  validate->add_option("--out", va.out, "Output report JSON")->required();

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw Gaussian realizations");
  sample->add_option("--model", sa.model, "Model JSON file")->required();
  sample->add_option("--points", sa.points, "Points CSV")->required();
  sample->add_option("--reals", sa.reals, "Number of realizations")->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", sa.seed, "Random seed");
  sample->add_flag("--force", sa.force, "Skip the positive semidefiniteness check");
  sample->add_option("--out", sa.out, "Output CSV")->required();

  EstimateArgs sta;
  auto* estimate = app.add_subcommand("estimate", "Empirical pseudo cross-variogram from samples");
  estimate->add_option("--input", sta.input, "Samples CSV from 'sample'")->required();
  estimate->add_option("--grid-spacing", sta.spacing, "Grid spacing (location i sits at i * spacing)")->required();
  estimate->add_option("--points", sta.points, "Points CSV, overrides the 1-D grid");
  estimate->add_option("--lags", sta.lags, "Lag CSV with header h1..hD")->required();
  estimate->add_option("--batches", sta.batches, "Batches for standard errors (0 = auto)");
  estimate->add_option("--out", sta.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input_error;
  }

  try {
    apply_thread_limit();
    if (*eval) return run_eval(ea);
    if (*validate) return run_validate(va);
    if (*sample) return run_sample(sa);
    return run_estimate(sta);
  } catch (const covkit::NotPsdError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const covkit::EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return evaluation_error;
  } catch (const covkit::DomainError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return evaluation_error;
  } catch (const covkit::Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return input_error;
  }
}
