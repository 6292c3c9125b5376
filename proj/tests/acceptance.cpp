// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "catalog.hpp"
#include "covkit/config.hpp"
#include "covkit/io.hpp"
#include "covkit/linalg_special.hpp"
#include "covkit/simulation.hpp"
#include "covkit/validation.hpp"
#include "oracles.hpp"

using namespace covkit;
using catalog::S1;
using catalog::S2;
using catalog::vec;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back(what);
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ValidationConfig scope(int configs = 20, int pmax = 12, std::uint64_t seed = 2024) {
  ValidationConfig c;
  c.n_configs = configs;
  c.n_points_max = pmax;
  c.tol_rel = 1e-8;
  c.seed = seed;
  return c;
}

Outcome ac1() {
  Outcome o;
  std::map<std::string, int> count;
  double worst = 0.0;
  for (const auto& inst : catalog::constructions()) {
    ++count[inst.family];
    const auto rep = check_pd(inst.spec, scope());
    worst = std::min(worst, rep.relative());
    o.require(rep.verdict == Verdict::pass, inst.family + " #" + std::to_string(count[inst.family]) + ": " +
                                                std::string(to_string(rep.verdict)) + " (" + fmt(rep.relative()) + ")");
    o.require(inst.spec.claims().positive_definite, inst.family + " does not claim positive definiteness");
  }
  o.require(count.size() == 19, std::to_string(count.size()) + " constructions covered, expected 19");
  for (const auto& [family, n] : count) o.require(n >= 3, family + " has only " + std::to_string(n) + " instances");
  o.details.insert(o.details.begin(), std::to_string(count.size()) + " constructions, worst relative eigenvalue " + fmt(worst));
  return o;
}

Outcome ac2() {
  Outcome o;
  for (const auto& inst : catalog::pseudo_variograms()) {
    const auto rep = check_pseudo_variogram(inst.spec, scope());
    o.require(rep.verdict == Verdict::pass, inst.family + ": " + std::string(to_string(rep.verdict)));
  }
  const auto bad = distance_power_kernel(1, S2, 2.5);
  const auto cnd = check_cnd(bad, scope(200, 8));
  o.require(cnd.verdict == Verdict::fail, "||h||^2.5 not rejected by check_cnd");
  const auto rt = schoenberg_roundtrip(bad, {0.1, 1.0, 10.0}, scope(200, 8));
  o.require(rt.verdict == Verdict::fail, "exp(-t ||h||^2.5) not rejected for any t");
  o.details.insert(o.details.begin(), "||h||^2.5 contrast eigenvalue " + fmt(cnd.relative()) +
                                          ", Schoenberg eigenvalue " + fmt(rt.relative()));
  return o;
}

Outcome ac3() {
  Outcome o;
  int discrepancies = 0;
  for (const auto& inst : catalog::pseudo_variograms()) {
    const auto rep = schoenberg_equivalence(inst.spec, {0.1, 1.0, 10.0}, scope());
    discrepancies += rep.verdict == Verdict::inconclusive;
    o.require(rep.verdict == Verdict::pass, inst.family + ": " + std::string(to_string(rep.verdict)));
  }
  const auto bad = schoenberg_equivalence(distance_power_kernel(1, S2, 2.5), {0.1, 1.0, 10.0}, scope(200, 8));
  discrepancies += bad.verdict == Verdict::inconclusive;
  o.require(bad.verdict == Verdict::fail, "||h||^2.5: both directions should fail, got " +
                                              std::string(to_string(bad.verdict)));
  o.details.insert(o.details.begin(), std::to_string(discrepancies) + " discrepancies");
  return o;
}

Outcome ac4() {
  Outcome o;
  // (a) triple Laplace with Gamma/GIG/Gamma components against the closed form.
  const FonsecaParams p{1.3, 0.7, 2.0, 0.8, 1.5, 0.6, 0.9};
  const auto gs = pcv_power(2, S2, 1.2), gt = pcv_gaussian(2, S1);
  const auto fs = fonseca_steel(gs, gt, p);
  const auto tl = triple_laplace(gs, gt, {LaplaceTransform1D::gamma(p.lambda0, p.a0),
                                          LaplaceTransform1D::gig(p.lambda1, p.a1, p.delta),
                                          LaplaceTransform1D::gamma(p.lambda2, p.a2)});
  double worst_a = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const Point x{-2.0 + 0.4 * i, 1.0 - 0.3 * j, 0.25 * (i - j)};
      const Block a = fs.evaluate(x, Point{0, 0, 0}), b = tl.evaluate(x, Point{0, 0, 0});
      worst_a = std::max(worst_a, ((a - b).array().abs() / a.array().abs()).maxCoeff());
    }
  o.require(worst_a <= 1e-10, "(a) relative gap " + fmt(worst_a));

  // (b) toy Ei L_12(1, 1) against 2-D quadrature of the Hessian density.
  const double quad = oracle::integrate2d([](double v, double w) { return -2.0 * v / (w * w) * std::exp(-v - w); },
                                          1.0, 2.0, 1.0, 2.0);
  const double gap_b = std::abs(toy_ei_laplace(0, 1, 1.0, 1.0) - quad);
  o.require(gap_b <= 1e-6, "(b) gap " + fmt(gap_b));

  // (c) Matern mixture limit branch against gS = 1e-10.
  const auto mm = matern_mixture(pcv_power(2, S1, 2.0), pcv_power(2, S1, 1.0), vec({1.0, 2.0}));
  double worst_c = 0.0;
  for (double u : {0.0, 0.5, 2.0}) {
    const Block at0 = mm.evaluate(Point{0, u}, Point{0, 0});
    const Block near = mm.evaluate(Point{1e-5, u}, Point{0, 0});
    worst_c = std::max(worst_c, ((near - at0).array().abs() / at0.array().abs()).maxCoeff());
  }
  o.require(worst_c <= 1e-6, "(c) relative gap " + fmt(worst_c));

  // (d) 1 / cosh(sqrt(g)) against the product over the zeros pi (n - 1/2),
  // n <= 200, with the remaining factors folded into exp(-g * tail).
  const auto ch = cosh_ratio(pcv_power(1, S1, 2.0), 0.0);
  double worst_d = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double r = 0.05 * k, g = r * r;
    double prod = 1.0, tail = 0.5;
    for (int n = 1; n <= 200; ++n) {
      const double a = std::numbers::pi * (n - 0.5);
      prod /= 1.0 + g / (a * a);
      tail -= 1.0 / (a * a);
    }
    prod *= std::exp(-g * tail);
    worst_d = std::max(worst_d, std::abs(ch.evaluate(Point{r}, Point{0})(0, 0) - prod));
  }
  o.require(worst_d <= 1e-6, "(d) gap " + fmt(worst_d));
  o.details.insert(o.details.begin(), "(a) " + fmt(worst_a) + " (b) " + fmt(gap_b) + " (c) " + fmt(worst_c) +
                                          " (d) " + fmt(worst_d));
  return o;
}

Outcome ac5() {
  Outcome o;
  double worst = 0.0;
  auto compare = [&](const KernelSpec& closed, const KernelSpec& numeric, const std::string& name,
                     const std::function<Point(double)>& at) {
    for (int k = 0; k < 50; ++k) {
      const double t = -2.0 + 4.0 * k / 49.0;
      const Point x = at(t), y(x.size(), 0.0);
      const double gap = (closed.evaluate(x, y) - numeric.evaluate(x, y)).cwiseAbs().maxCoeff();
      worst = std::max(worst, gap);
      if (gap > 1e-6) {
        o.require(false, name + " gap " + fmt(gap) + " at t = " + fmt(t));
        return;
      }
    }
  };
  const std::vector<KernelSpec> smooth{pcv_gaussian(2, S2, 0.8), pcv_power(1, S2, 2.0, 1.3),
                                       pcv_g_and_c_half_diagonal(gaussian_kernel(2, S2, 1.0, catalog::equicorrelation(2, 0.5)))};
  for (const auto& g : smooth)
    for (int axis = 0; axis < 2; ++axis)
      compare(second_derivative_cov(g, axis, DerivativeMode::closed),
              second_derivative_cov(g, axis, DerivativeMode::numeric), "second_derivative " + std::string(g.op()),
              [](double t) { return Point{t, 0.5 * t - 0.3}; });
  const std::vector<std::pair<KernelSpec, CmFunction>> st{
      {pcv_nested_spacetime(pcv_power(1, S1, 1.0), pcv_power(1, S1, 2.0)), {CmKind::exp, 1.0}},
      {pcv_nested_spacetime(pcv_gaussian(2, S1), pcv_gaussian(2, S1)), {CmKind::inverse_power, 1.5}},
      {pcv_nested_spacetime(catalog::oesting(2, S1), pcv_power(2, S1, 2.0, 0.7)), {CmKind::inverse_power, 0.5}}};
  for (const auto& [g, l] : st)
    compare(cm_derivative_cov(g, l, DerivativeMode::closed), cm_derivative_cov(g, l, DerivativeMode::numeric),
            "cm_derivative", [](double t) { return Point{0.3 - 0.2 * t, t}; });
  o.details.insert(o.details.begin(), "max gap " + fmt(worst));
  return o;
}

Outcome ac6() {
  Outcome o;
  double worst_half = 0.0, worst_rec = 0.0, worst_beta = 0.0;
  for (double x = 1e-8; x <= 700.0; x *= 1.7) {
    const double closed = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    worst_half = std::max(worst_half, std::abs(bessel_k(0.5, x) - closed) / closed);
  }
  for (double x = 0.1; x <= 50.0; x *= 1.25) {
    for (double nu = 0.5; nu <= 10.0; nu += 0.5) {
      const double lhs = bessel_k(nu + 1.0, x);
      const double rhs = bessel_k(nu - 1.0, x) + 2.0 * nu / x * bessel_k(nu, x);
      worst_rec = std::max(worst_rec, std::abs(lhs - rhs) / std::abs(lhs));
    }
  }
  for (double nu = 0.0; nu <= 50.0; nu += 0.25)
    worst_beta = std::max(worst_beta, std::abs(beta(1.0, nu + 1.0) - 1.0 / (nu + 1.0)));
  o.require(worst_half <= 1e-10, "K_1/2 relative error " + fmt(worst_half));
  o.require(worst_rec <= 1e-8, "recurrence residual " + fmt(worst_rec));
  o.require(worst_beta <= 1e-12, "B(1, nu + 1) error " + fmt(worst_beta));
  o.details.insert(o.details.begin(), "K_1/2 " + fmt(worst_half) + ", recurrence " + fmt(worst_rec) + ", beta " +
                                          fmt(worst_beta));
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto spec = schoenberg_exp(catalog::delay(), 1.0);
  const double spacing = 0.125;
  std::vector<Point> grid;
  for (int i = 0; i < 64; ++i) grid.push_back(Point{i * spacing});
  const auto reals = sample_gaussian(spec, PointSet(S1, grid), 500, 7);
  std::vector<Eigen::VectorXd> lags;
  for (int k = -16; k <= 16; ++k) lags.push_back(vec({k * spacing}));
  const auto est = empirical_pcv(reals, lags, 1e-9 * spacing);
  // Samples have covariance Gram + j I; j is added to every increment variance.
  const double jit = reals.front().jitter_applied;
  double worst = 0.0;
  for (std::size_t b = 0; b < lags.size(); ++b) {
    const Eigen::MatrixXd th = theoretical_pcv(spec, lags[b]);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double diff = std::abs(est.estimates[b](i, j) - th(i, j));
        const double se = est.std_errors[b](i, j);
        if (se > 0.0) worst = std::max(worst, std::max(diff - jit, 0.0) / se);
        o.require(diff <= 5.0 * se + jit + 1e-12, "lag " + fmt(lags[b](0)) + " (" + std::to_string(i + 1) + "," +
                                                      std::to_string(j + 1) + "): " + fmt(diff) + " vs se " + fmt(se));
      }
  }
  o.details.insert(o.details.begin(), std::to_string(lags.size()) + " lag bins, worst (|error| - jitter) / se = " + fmt(worst));
  return o;
}

Outcome ac8() {
  Outcome o;
  const auto delay = schoenberg_exp(catalog::delay(), 1.0);
  Mixture1D mix;
  mix.nodes = {{1.0, 1.0, catalog::mat2(1.0, 0.5, 1.0)}, {2.0, 0.5, Eigen::MatrixXd::Identity(2, 2)}};
  const auto lagr = lagrangian_mixture(2, {2, 1}, Eigen::Matrix2d::Identity(),
                                       {{Eigen::Matrix2d::Identity(), pcv_power(2, S1, 1.0)}}, vec({1.0, 0.5}), mix);
  double gap_delay = 0.0, gap_lagr = 0.0;
  for (double h = -2.0; h <= 2.0; h += 0.1) {
    gap_delay = std::max(gap_delay, std::abs(delay.evaluate(Point{h}, Point{0})(0, 1) -
                                             delay.evaluate(Point{-h}, Point{0})(0, 1)));
    gap_lagr = std::max(gap_lagr, std::abs(lagr.evaluate(Point{h, 0.0, 1.0}, Point{0, 0, 0})(0, 1) -
                                           lagr.evaluate(Point{-h, 0.0, 1.0}, Point{0, 0, 0})(0, 1)));
  }
  o.require(gap_delay > 1e-6, "delay model symmetric on the grid");
  o.require(gap_lagr > 1e-6, "Lagrangian model symmetric on the grid");
  o.details.insert(o.details.begin(), "max |C_12(h) - C_12(-h)|: delay " + fmt(gap_delay) + ", Lagrangian " + fmt(gap_lagr));
  return o;
}

Outcome ac9() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> dir(0.0, 1.0);
  std::uniform_real_distribution<double> extra(0.0, 2.0), loc(-3.0, 3.0);
  long nonzero = 0, pairs = 0;
  struct Case {
    KernelSpec spec;
    double s;
  };
  const std::vector<Case> cases{{askey_beta(constant_shift(catalog::oesting(2, S2), 0.1), 1.0, 2.5), 1.0},
                                {askey_beta(pcv_power(1, S1, 1.0), 0.8, 1.0), 0.8},
                                {askey_beta(pcv_gaussian(3, catalog::S3, 1.0, 2.0), 1.5, 2.0), 1.5}};
  for (const auto& c : cases) {
    const int d = c.spec.domain().total();
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd u(d);
      for (int i = 0; i < d; ++i) u(i) = dir(rng);
      u.normalize();
      const double r = c.s + (k == 0 ? 0.0 : extra(rng));
      Point x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        x[static_cast<std::size_t>(i)] = loc(rng);
        y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + r * u(i);
      }
      Eigen::VectorXd diff(d);
      for (int i = 0; i < d; ++i) diff(i) = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
      if (diff.norm() < c.s) continue;  // rounding pulled the pair inside the support
      ++pairs;
      const Block b = c.spec.evaluate(x, y);
      for (Eigen::Index i = 0; i < b.size(); ++i) nonzero += b.data()[i] != 0.0;
    }
  }
  o.require(nonzero == 0, std::to_string(nonzero) + " non-zero entries");
  o.require(pairs >= 2900, "only " + std::to_string(pairs) + " pairs outside the support");
  o.details.insert(o.details.begin(), std::to_string(pairs) + " pairs, " + std::to_string(nonzero) + " non-zero entries");
  return o;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(COVKIT_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac10() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "covkit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string model = (dir / "model.json").string(), points = (dir / "points.csv").string();
  std::ofstream(model) << serialize_model_config(schoenberg_exp(catalog::delay(), 1.0)).dump(2);
  {
    std::ofstream pts(points);
    pts << "x1\n";
    for (int i = 0; i < 24; ++i) pts << format_double(0.125 * i) << '\n';
  }
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    o.require(run_cli("validate --model " + model + " --mode pd --configs 20 --seed 11 --out " +
                      (dir / ("v_" + t + ".json")).string()) == 0,
              "validate run " + t + " did not pass");
    o.require(run_cli("sample --model " + model + " --points " + points + " --reals 25 --seed 11 --out " +
                      (dir / ("s_" + t + ".csv")).string()) == 0,
              "sample run " + t + " failed");
  }
  o.require(!slurp(dir / "v_a.json").empty() && slurp(dir / "v_a.json") == slurp(dir / "v_b.json"),
            "validate reports differ");
  o.require(!slurp(dir / "s_a.csv").empty() && slurp(dir / "s_a.csv") == slurp(dir / "s_b.csv"),
            "sample outputs differ");
  int exact = 0, total = 0;
  auto all = catalog::constructions();
  for (auto& p : catalog::pseudo_variograms()) all.push_back(p);
  for (const auto& inst : all) {
    ++total;
    const auto doc = serialize_model_config(inst.spec);
    const auto back = parse_model_config_text(doc.dump());
    const bool same = back.model == inst.spec && serialize_model_config(back.model) == doc;
    exact += same;
    o.require(same, inst.family + " does not round-trip");
  }
  fs::remove_all(dir);
  o.details.insert(o.details.begin(), "CLI outputs byte-identical; " + std::to_string(exact) + "/" +
                                          std::to_string(total) + " configs round-trip");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"AC1 construction validity sweep", ac1}, {"AC2 pseudo-variogram certification", ac2},
      {"AC3 Schoenberg equivalence", ac3},      {"AC4 closed-form cross-checks", ac4},
      {"AC5 derivative oracles", ac5},          {"AC6 special-function accuracy", ac6},
      {"AC7 simulation round trip", ac7},       {"AC8 asymmetry capability", ac8},
      {"AC9 compact support exactness", ac9},   {"AC10 CLI reproducibility", ac10}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.details.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s [%.1fs]: %s\n", out.pass ? "PASS" : "FAIL", name, secs,
                out.details.empty() ? "" : out.details.front().c_str());
    for (std::size_t i = 1; i < out.details.size(); ++i) std::printf("    %s\n", out.details[i].c_str());
    failed += !out.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
