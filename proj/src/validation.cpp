#include "covkit/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "covkit/errors.hpp"
#include "covkit/gram.hpp"
#include "covkit/linalg_special.hpp"
#include "covkit/stationary.hpp"

namespace covkit {

namespace {

struct Outcome {
  bool evaluated = false;
  std::string error;
  ConfigResult result;
  std::vector<Point> points;
};

// Larger is worse in both modes.
double badness(const ConfigResult& r, CheckMode mode) {
  if (r.scale <= 0.0) return 0.0;
  return mode == CheckMode::pd ? -r.value / r.scale : r.value / r.scale;
}

bool violates(const ConfigResult& r, CheckMode mode, double tol) {
  return mode == CheckMode::pd ? r.value < -tol * r.scale : r.value > tol * r.scale;
}

std::string scope_note(const ValidationConfig& cfg) {
  std::ostringstream os;
  os << "finite scope: " << cfg.n_configs << " configurations of up to " << cfg.n_points_max
     << " points in [" << cfg.box_lo << ", " << cfg.box_hi << "]^dim";
  return os.str();
}

std::vector<Outcome> run_configurations(const KernelSpec& spec, const ValidationConfig& cfg,
                                        CheckMode mode) {
  std::vector<Outcome> out(static_cast<std::size_t>(cfg.n_configs));
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < cfg.n_configs; ++c) {
    Outcome& o = out[static_cast<std::size_t>(c)];
    const PointSet pts = draw_configuration(spec.domain(), cfg, c);
    o.points = pts.points();
    try {
      o.result = evaluate_configuration(spec, pts, mode);
      o.evaluated = true;
    } catch (const Error& e) {
      o.error = e.what();
    }
  }
  return out;
}

ValidationReport merge(const std::vector<Outcome>& outcomes, CheckMode mode,
                       const ValidationConfig& cfg) {
  ValidationReport rep;
  rep.mode = mode == CheckMode::pd ? "pd" : "cnd";
  int worst = -1;
  bool any_error = false;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const Outcome& o = outcomes[c];
    if (!o.evaluated) {
      if (!any_error) rep.notes.push_back("configuration " + std::to_string(c) + ": " + o.error);
      any_error = true;
      continue;
    }
    ++rep.configs_checked;
    if (worst < 0 || badness(o.result, mode) > badness(outcomes[static_cast<std::size_t>(worst)].result, mode))
      worst = static_cast<int>(c);
  }
  if (worst >= 0) {
    const Outcome& o = outcomes[static_cast<std::size_t>(worst)];
    rep.worst_value = o.result.value;
    rep.scale = o.result.scale;
    if (violates(o.result, mode, cfg.tol_rel)) {
      rep.verdict = Verdict::fail;
      rep.witness = Witness{o.points, o.result.vector, worst};
    }
  }
  if (rep.verdict != Verdict::fail && (any_error || worst < 0)) rep.verdict = Verdict::inconclusive;
  rep.notes.push_back(scope_note(cfg));
  return rep;
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

}  // namespace

void ValidationConfig::validate() const {
  if (!(tol_rel > 0.0)) throw SpecError("validation: tol_rel must be positive");
  if (n_points_max < 2) throw SpecError("validation: n_points_max must be at least 2");
  if (n_configs < 1) throw SpecError("validation: n_configs must be at least 1");
  if (!(box_hi > box_lo)) throw SpecError("validation: empty domain box");
  if (!(coincident_fraction >= 0.0 && coincident_fraction <= 1.0))
    throw SpecError("validation: coincident_fraction must lie in [0, 1]");
}

nlohmann::json ValidationConfig::to_json() const {
  return {{"n_configs", n_configs}, {"n_points_max", n_points_max}, {"tol_rel", tol_rel},
          {"seed", seed},           {"box", {box_lo, box_hi}},      {"coincident_fraction", coincident_fraction}};
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j{{"mode", mode},
                   {"verdict", std::string(to_string(verdict))},
                   {"worst_value", worst_value},
                   {"scale", scale},
                   {"configs_checked", configs_checked},
                   {"notes", notes}};
  if (witness) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : witness->points) pts.push_back(p);
    j["witness"] = {{"config_index", witness->config_index},
                    {"points", pts},
                    {"coefficients", std::vector<double>(witness->coefficients.data(),
                                                         witness->coefficients.data() + witness->coefficients.size())}};
  }
  return j;
}

PointSet draw_configuration(Domain domain, const ValidationConfig& cfg, int index) {
  auto rng = seeded(cfg.seed, 0x636f6e66, static_cast<std::uint64_t>(index));
  std::uniform_int_distribution<int> count(2, cfg.n_points_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  const int dim = domain.total();
  std::vector<Point> pts(static_cast<std::size_t>(n), Point(static_cast<std::size_t>(dim)));
  std::vector<int> strata(static_cast<std::size_t>(n));
  const double width = cfg.box_hi - cfg.box_lo;
  for (int c = 0; c < dim; ++c) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < n; ++i)
      pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          cfg.box_lo + width * (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
  }
  if (unit(rng) < cfg.coincident_fraction) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int a = pick(rng);
    int b = pick(rng);
    if (b == a) b = (a + 1) % n;
    pts[static_cast<std::size_t>(b)] = pts[static_cast<std::size_t>(a)];
  }
  return PointSet(domain, std::move(pts));
}

ConfigResult evaluate_configuration(const KernelSpec& spec, const PointSet& pts, CheckMode mode) {
  const BlockMatrix g = assemble_gram(spec, pts);
  const EigenResult ext = min_eigenvalue(g.data());
  ConfigResult r;
  r.scale = ext.max_abs_eigenvalue;
  if (mode == CheckMode::pd) {
    const EigenPair p = extreme_eigenpair(g.data(), false);
    r.value = p.value;
    r.vector = p.vector;
    return r;
  }
  const Eigen::Index nm = g.matrix().rows();
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(nm, nm) - Eigen::MatrixXd::Constant(nm, nm, 1.0 / static_cast<double>(nm));
  const EigenPair p = extreme_eigenpair(SymMatrix(proj * g.matrix() * proj), true);
  r.value = p.value;
  r.vector = proj * p.vector;
  return r;
}

ValidationReport check_pd(const KernelSpec& spec, const ValidationConfig& cfg) {
  cfg.validate();
  return merge(run_configurations(spec, cfg, CheckMode::pd), CheckMode::pd, cfg);
}

ValidationReport check_cnd(const KernelSpec& spec, const ValidationConfig& cfg) {
  cfg.validate();
  return merge(run_configurations(spec, cfg, CheckMode::cnd), CheckMode::cnd, cfg);
}

ValidationReport check_pseudo_variogram(const KernelSpec& spec, const ValidationConfig& cfg) {
  ValidationReport rep = check_cnd(spec, cfg);
  rep.mode = "pcv";
  if (rep.verdict == Verdict::fail) rep.notes.insert(rep.notes.begin(), "contrast form is not negative semidefinite");

  const int dim = spec.domain().total();
  auto rng = seeded(cfg.seed, 0x70637664, 0);
  std::uniform_real_distribution<double> coord(cfg.box_lo, cfg.box_hi);
  auto draw = [&] {
    Point p(static_cast<std::size_t>(dim));
    for (auto& v : p) v = coord(rng);
    return p;
  };
  double worst_diag = 0.0, worst_exchange = 0.0;
  Point diag_at, ex_x, ex_y;
  try {
    for (int s = 0; s < 100; ++s) {
      const Point x = draw();
      const Block b = spec.evaluate(x, x);
      const double v = b.diagonal().cwiseAbs().maxCoeff();
      if (v > worst_diag) worst_diag = v, diag_at = x;
    }
    for (int s = 0; s < 100; ++s) {
      const Point x = draw(), y = draw();
      const Block a = spec.evaluate(x, y), b = spec.evaluate(y, x);
      const double v = (a - b.transpose()).cwiseAbs().maxCoeff() /
                       std::max(1.0, a.cwiseAbs().maxCoeff());
      if (v > worst_exchange) worst_exchange = v, ex_x = x, ex_y = y;
    }
  } catch (const Error& e) {
    if (rep.verdict == Verdict::pass) rep.verdict = Verdict::inconclusive;
    rep.notes.push_back(std::string("diagonal/exchange checks: ") + e.what());
    return rep;
  }
  if (worst_diag > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "coincident diagonal does not vanish: max |gamma_ii(x, x)| = " << worst_diag;
    rep.notes.insert(rep.notes.begin(), os.str());
    if (rep.verdict != Verdict::fail) {
      rep.verdict = Verdict::fail;
      rep.witness = Witness{{diag_at}, Eigen::VectorXd(), -1};
    }
  }
  if (worst_exchange > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "exchange symmetry gamma_ij(x, y) = gamma_ji(y, x) violated by " << worst_exchange;
    rep.notes.insert(rep.notes.begin(), os.str());
    if (rep.verdict != Verdict::fail) {
      rep.verdict = Verdict::fail;
      rep.witness = Witness{{ex_x, ex_y}, Eigen::VectorXd(), -1};
    }
  }
  return rep;
}

ValidationReport schoenberg_roundtrip(const KernelSpec& gamma, const std::vector<double>& t_grid,
                                      const ValidationConfig& cfg) {
  if (t_grid.empty()) throw SpecError("schoenberg_roundtrip: empty t grid");
  for (double t : t_grid)
    if (!(t > 0.0) || !std::isfinite(t)) throw SpecError("schoenberg_roundtrip: t must be positive");
  ValidationReport out;
  out.mode = "roundtrip";
  bool first = true;
  for (double t : t_grid) {
    ValidationReport r = check_pd(schoenberg_exp(gamma, t), cfg);
    std::ostringstream os;
    os << "t = " << t << ": " << to_string(r.verdict);
    out.notes.push_back(os.str());
    const bool worse = first || (r.verdict == Verdict::fail && out.verdict != Verdict::fail) ||
                       (r.verdict == out.verdict && r.relative() < out.relative());
    if (worse) {
      out.worst_value = r.worst_value;
      out.scale = r.scale;
      out.witness = r.witness;
      out.configs_checked = r.configs_checked;
    }
    if (r.verdict == Verdict::fail) out.verdict = Verdict::fail;
    else if (r.verdict == Verdict::inconclusive && out.verdict == Verdict::pass) out.verdict = Verdict::inconclusive;
    first = false;
  }
  out.notes.push_back(scope_note(cfg));
  return out;
}

ValidationReport schoenberg_equivalence(const KernelSpec& gamma, const std::vector<double>& t_grid,
                                        const ValidationConfig& cfg) {
  const ValidationReport cnd = check_cnd(gamma, cfg);
  ValidationReport rt = schoenberg_roundtrip(gamma, t_grid, cfg);
  rt.mode = "equivalence";
  rt.notes.insert(rt.notes.begin(), "check_cnd: " + std::string(to_string(cnd.verdict)));
  if (cnd.verdict != rt.verdict) {
    rt.notes.insert(rt.notes.begin(), "check_cnd and schoenberg_roundtrip disagree");
    rt.verdict = Verdict::inconclusive;
  }
  return rt;
}

ValidationReport adversarial_search(const KernelSpec& spec, const ValidationConfig& cfg, CheckMode mode,
                                    int n_restarts) {
  cfg.validate();
  std::vector<Outcome> outcomes = run_configurations(spec, cfg, mode);
  std::vector<int> order;
  for (int c = 0; c < cfg.n_configs; ++c)
    if (outcomes[static_cast<std::size_t>(c)].evaluated) order.push_back(c);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return badness(outcomes[static_cast<std::size_t>(a)].result, mode) >
           badness(outcomes[static_cast<std::size_t>(b)].result, mode);
  });
  if (static_cast<int>(order.size()) > n_restarts) order.resize(static_cast<std::size_t>(std::max(0, n_restarts)));

  const Domain dom = spec.domain();
  for (int c : order) {
    Outcome& o = outcomes[static_cast<std::size_t>(c)];
    std::vector<Point> pts = o.points;
    ConfigResult best = o.result;
    double step = 0.25 * (cfg.box_hi - cfg.box_lo);
    int evaluations = 0;
    while (step > 1e-4 && evaluations < 4000) {
      bool improved = false;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = 0; k < pts[i].size(); ++k)
          for (double sgn : {1.0, -1.0}) {
            std::vector<Point> trial = pts;
            trial[i][k] = std::clamp(trial[i][k] + sgn * step, cfg.box_lo, cfg.box_hi);
            if (trial[i][k] == pts[i][k]) continue;
            ++evaluations;
            try {
              const ConfigResult r = evaluate_configuration(spec, PointSet(dom, trial), mode);
              if (badness(r, mode) > badness(best, mode)) {
                best = r;
                pts = std::move(trial);
                improved = true;
              }
            } catch (const Error&) {
            }
          }
      if (!improved) step *= 0.5;
    }
    o.result = best;
    o.points = pts;
  }
  ValidationReport rep = merge(outcomes, mode, cfg);
  rep.notes.push_back("adversarial refinement of " + std::to_string(order.size()) + " configurations");
  return rep;
}

}  // namespace covkit
