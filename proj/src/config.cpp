#include "covkit/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "covkit/derivatives.hpp"
#include "covkit/detail/common.hpp"
#include "covkit/infdiv.hpp"
#include "covkit/mixtures.hpp"
#include "covkit/nonstationary.hpp"
#include "covkit/pseudo_variograms.hpp"
#include "covkit/stationary.hpp"

namespace covkit {

namespace {

using json = nlohmann::json;

struct Context {
  int m;
  Domain domain;
};

class NodeReader;
using Builder = std::function<KernelSpec(NodeReader&)>;

struct OpInfo {
  std::set<std::string> keys;
  Builder build;
};

const std::map<std::string, OpInfo>& registry();

class NodeReader {
 public:
  NodeReader(const json& node, Context ctx, std::string path)
      : node_(node), ctx_(ctx), path_(std::move(path)) {
    static const json empty_object = json::object();
    static const json empty_array = json::array();
    params_ = &empty_object;
    children_ = &empty_array;
    if (!node_.is_object()) fail("", "expression node must be an object");
    for (const auto& [key, value] : node_.items())
      if (key != "op" && key != "params" && key != "children") fail("/" + key, "unexpected key");
    if (!node_.contains("op") || !node_["op"].is_string()) fail("/op", "missing or non-string 'op'");
    if (node_.contains("params")) {
      if (!node_["params"].is_object()) fail("/params", "'params' must be an object");
      params_ = &node_["params"];
    }
    if (node_.contains("children")) {
      if (!node_["children"].is_array()) fail("/children", "'children' must be an array");
      children_ = &node_["children"];
    }
  }

  std::string op() const { return node_["op"].get<std::string>(); }
  int m() const { return ctx_.m; }
  Domain domain() const { return ctx_.domain; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& sub, const std::string& msg) const {
    const std::string where = path_ + sub;
    throw ConfigError("at " + (where.empty() ? std::string("/") : where) + ": " + msg);
  }

  void check_keys(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : params_->items())
      if (!allowed.count(key)) fail("/params/" + key, "unknown parameter for op '" + op() + "'");
  }

  bool has(const char* key) const { return params_->contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) fail("/params", std::string("missing parameter '") + key + "'");
    return params_->at(key);
  }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(std::string("/params/") + key, "must be a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(std::string("/params/") + key, "must be an integer");
    return v.get<long long>();
  }
  long long integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(std::string("/params/") + key, "must be a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(std::string("/params/") + key, "must be true or false");
    return v.get<bool>();
  }

  Eigen::VectorXd vector(const char* key) const {
    return guarded(std::string("/params/") + key, [&] { return detail::vector_from_json(raw(key), key); });
  }
  Eigen::MatrixXd matrix(const char* key) const {
    return guarded(std::string("/params/") + key, [&] { return detail::matrix_from_json(raw(key), key); });
  }

  /// Runs f, prefixing library errors with the location below this node.
  template <class F>
  auto guarded(const std::string& sub, F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(sub, e.what());
    } catch (const json::exception& e) {
      fail(sub, e.what());
    }
  }

  std::size_t child_count() const { return children_->size(); }
  void expect_children(std::size_t n) const {
    if (child_count() != n)
      fail("/children", "op '" + op() + "' expects " + std::to_string(n) + " child(ren), got " +
                            std::to_string(child_count()));
  }
  KernelSpec child(std::size_t i, Context ctx) const;
  KernelSpec child(std::size_t i) const { return child(i, ctx_); }

  /// Children on R^d and R^k for the space-time pair constructions.
  std::pair<KernelSpec, KernelSpec> split_children() const {
    expect_children(2);
    if (ctx_.domain.time < 1) fail("", "op '" + op() + "' needs dim_time >= 1");
    return {child(0, {ctx_.m, {ctx_.domain.space, 0}}), child(1, {ctx_.m, {ctx_.domain.time, 0}})};
  }

  const json& params() const { return *params_; }

 private:
  const json& node_;
  Context ctx_;
  std::string path_;
  const json* params_;
  const json* children_;
};

KernelSpec parse_node(const json& node, Context ctx, const std::string& path) {
  NodeReader r(node, ctx, path);
  const std::string op = r.op();
  const auto& reg = registry();
  const auto it = reg.find(op);
  if (it == reg.end()) r.fail("/op", "unknown op '" + op + "'");
  r.check_keys(it->second.keys);
  KernelSpec spec = r.guarded("", [&] { return it->second.build(r); });
  if (spec.m() != ctx.m)
    r.fail("", "op '" + op + "' yields m = " + std::to_string(spec.m()) + ", expected " + std::to_string(ctx.m));
  if (!(spec.domain() == ctx.domain))
    r.fail("", "op '" + op + "' yields a domain of dimension (" + std::to_string(spec.domain().space) + ", " +
                   std::to_string(spec.domain().time) + "), expected (" + std::to_string(ctx.domain.space) + ", " +
                   std::to_string(ctx.domain.time) + ")");
  return spec;
}

KernelSpec NodeReader::child(std::size_t i, Context ctx) const {
  if (i >= child_count()) fail("/children", "missing child " + std::to_string(i));
  return parse_node((*children_)[i], ctx, path_ + "/children/" + std::to_string(i));
}

std::vector<KernelSpec> all_children(const NodeReader& r) {
  if (r.child_count() == 0) r.fail("/children", "op '" + r.op() + "' needs at least one child");
  std::vector<KernelSpec> out;
  for (std::size_t i = 0; i < r.child_count(); ++i) out.push_back(r.child(i));
  return out;
}

MixtureParams mixture_params(const NodeReader& r) {
  if (r.has("nodes")) {
    const json& arr = r.raw("nodes");
    if (!arr.is_array()) r.fail("/params/nodes", "must be an array");
    std::vector<MixtureNode2D> nodes;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& n = arr[i];
      const std::string sub = "/params/nodes/" + std::to_string(i);
      if (!n.is_object() || !n.contains("v") || !n.contains("w") || !n.contains("density"))
        r.fail(sub, "node needs 'v', 'w' and 'density'");
      nodes.push_back(r.guarded(sub, [&] {
        return MixtureNode2D{n.at("v").get<double>(), n.at("w").get<double>(), n.value("weight", 1.0),
                             detail::matrix_from_json(n.at("density"), "density")};
      }));
    }
    return MixtureParams::explicit_nodes(std::move(nodes));
  }
  const DensityFamily family =
      r.guarded("/params/family", [&] { return density_family_from_string(r.text("family")); });
  const Eigen::VectorXd v = r.has("v_range") ? r.vector("v_range") : Eigen::VectorXd(Eigen::Vector2d(1.0, 2.0));
  const Eigen::VectorXd w = r.has("w_range") ? r.vector("w_range") : Eigen::VectorXd(Eigen::Vector2d(1.0, 2.0));
  if (v.size() != 2) r.fail("/params/v_range", "needs two entries");
  if (w.size() != 2) r.fail("/params/w_range", "needs two entries");
  const long long order = r.integer("order", 16);
  if (order < 1 || order > 200) r.fail("/params/order", "must lie in [1, 200]");
  Eigen::MatrixXd density;
  if (family == DensityFamily::constant) density = r.matrix("density");
  return MixtureParams::density_on_box(family, v(0), v(1), w(0), w(1), static_cast<int>(order), density);
}

std::vector<GaussianComponent> components(const NodeReader& r) {
  const json& arr = r.raw("component_sigmas");
  if (!arr.is_array()) r.fail("/params/component_sigmas", "must be an array of matrices");
  r.expect_children(arr.size());
  const Domain dom = r.domain();
  std::vector<GaussianComponent> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Eigen::MatrixXd s = r.guarded("/params/component_sigmas/" + std::to_string(i),
                                        [&] { return detail::matrix_from_json(arr[i], "component sigma"); });
    out.push_back({s, r.child(i, {r.m(), {dom.time, 0}})});
  }
  return out;
}

const std::map<std::string, OpInfo>& registry() {
  static const std::map<std::string, OpInfo> ops = [] {
    std::map<std::string, OpInfo> o;
    o["constant"] = {{"value", "matrix"}, [](NodeReader& r) {
                       if (r.has("matrix")) return constant_matrix_kernel(r.domain(), r.matrix("matrix"));
                       return constant_kernel(r.m(), r.domain(), r.number("value"));
                     }};
    o["exponential"] = {{"scale", "sill"}, [](NodeReader& r) {
                          std::optional<Eigen::MatrixXd> sill;
                          if (r.has("sill")) sill = r.matrix("sill");
                          return exponential_kernel(r.m(), r.domain(), r.number("scale", 1.0), sill);
                        }};
    o["gaussian"] = {{"scale", "sill"}, [](NodeReader& r) {
                       std::optional<Eigen::MatrixXd> sill;
                       if (r.has("sill")) sill = r.matrix("sill");
                       return gaussian_kernel(r.m(), r.domain(), r.number("scale", 1.0), sill);
                     }};
    o["distance_power"] = {{"power", "coef"}, [](NodeReader& r) {
                             return distance_power_kernel(r.m(), r.domain(), r.number("power"), r.number("coef", 1.0));
                           }};
    o["sin_distance"] = {{"scale"},
                         [](NodeReader& r) { return sin_distance_kernel(r.m(), r.domain(), r.number("scale", 1.0)); }};
    o["sum"] = {{}, [](NodeReader& r) { return combine_sum(all_children(r)); }};
    o["schur"] = {{}, [](NodeReader& r) { return combine_schur(all_children(r)); }};
    o["scale"] = {{"factor"}, [](NodeReader& r) {
                    r.expect_children(1);
                    return scale(r.child(0), r.number("factor"));
                  }};
    o["constant_shift"] = {{"value"}, [](NodeReader& r) {
                             r.expect_children(1);
                             return constant_shift(r.child(0), r.number("value"));
                           }};

    o["pcv_power"] = {{"alpha", "scale", "sill"}, [](NodeReader& r) {
                        return pcv_power(r.m(), r.domain(), r.number("alpha"), r.number("scale", 1.0),
                                         r.number("sill", 1.0));
                      }};
    o["pcv_gaussian"] = {{"scale", "sill"}, [](NodeReader& r) {
                           return pcv_gaussian(r.m(), r.domain(), r.number("scale", 1.0), r.number("sill", 1.0));
                         }};
    o["pcv_g_and_c"] = {{"g"}, [](NodeReader& r) {
                          r.expect_children(1);
                          const json& g = r.raw("g");
                          if (g.is_string()) {
                            if (g.get<std::string>() != "half_diagonal")
                              r.fail("/params/g", "must be \"half_diagonal\" or an array");
                            return pcv_g_and_c_half_diagonal(r.child(0));
                          }
                          if (!g.is_array()) r.fail("/params/g", "must be \"half_diagonal\" or an array");
                          std::vector<GFunction> fs;
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            const json& e = g[i];
                            const std::string sub = "/params/g/" + std::to_string(i);
                            if (!e.is_object()) r.fail(sub, "must be an object");
                            fs.push_back(r.guarded(sub, [&] {
                              GFunction f;
                              f.c0 = e.value("c0", 0.0);
                              if (e.contains("linear")) f.linear = detail::vector_from_json(e["linear"], "linear");
                              f.quadratic = e.value("quadratic", 0.0);
                              return f;
                            }));
                          }
                          return pcv_g_and_c(std::move(fs), r.child(0));
                        }};
    o["coregionalized"] = {{"rho"}, [](NodeReader& r) {
                             r.expect_children(1);
                             return coregionalized(r.child(0, {1, r.domain()}), r.matrix("rho"));
                           }};
    o["pcv_cross_variogram"] = {{}, [](NodeReader& r) {
                                  r.expect_children(1);
                                  return pcv_cross_variogram(r.child(0));
                                }};
    o["pcv_oesting"] = {{}, [](NodeReader& r) {
                          r.expect_children(2);
                          return pcv_oesting(r.child(0, {1, r.domain()}), r.child(1));
                        }};
    o["pcv_delay"] = {{"delays"}, [](NodeReader& r) {
                        r.expect_children(1);
                        const json& arr = r.raw("delays");
                        if (!arr.is_array()) r.fail("/params/delays", "must be an array of vectors");
                        std::vector<Eigen::VectorXd> delays;
                        for (std::size_t i = 0; i < arr.size(); ++i)
                          delays.push_back(r.guarded("/params/delays/" + std::to_string(i),
                                                     [&] { return detail::vector_from_json(arr[i], "delay"); }));
                        return pcv_delay(r.child(0, {1, r.domain()}), delays);
                      }};
    o["bernstein"] = {{"transform", "param"}, [](NodeReader& r) {
                        r.expect_children(1);
                        BernsteinTransform t;
                        t.kind = r.guarded("/params/transform",
                                           [&] { return bernstein_kind_from_string(r.text("transform")); });
                        t.param = r.number("param", 1.0);
                        return pcv_bernstein(r.child(0), t);
                      }};
    o["nested_spacetime"] = {{}, [](NodeReader& r) {
                               auto [s, t] = r.split_children();
                               return pcv_nested_spacetime(s, t);
                             }};
    o["transport"] = {{"velocity"}, [](NodeReader& r) {
                        r.expect_children(1);
                        if (r.domain().time != 1) r.fail("", "op 'transport' needs dim_time = 1");
                        return pcv_transport(r.child(0, {r.m(), {r.domain().space, 0}}), r.vector("velocity"));
                      }};

    o["schoenberg_exp"] = {{"t"}, [](NodeReader& r) {
                             r.expect_children(1);
                             return schoenberg_exp(r.child(0), r.number("t", 1.0));
                           }};
    o["increment"] = {{"z"}, [](NodeReader& r) {
                        r.expect_children(1);
                        return increment_cov(r.child(0), r.vector("z"));
                      }};
    o["ratio_product"] = {{"z", "c"}, [](NodeReader& r) {
                            r.expect_children(1);
                            return ratio_product_model(r.child(0), r.vector("z"), r.number("c"));
                          }};
    o["laplace2d_mixture"] = {{"family", "v_range", "w_range", "order", "density", "nodes"}, [](NodeReader& r) {
                                const MixtureParams mix = mixture_params(r);
                                auto [s, t] = r.split_children();
                                return laplace2d_mixture(s, t, mix);
                              }};
    o["toy_ei"] = {{}, [](NodeReader& r) {
                     auto [s, t] = r.split_children();
                     return toy_ei_model(s, t);
                   }};
    o["triple_laplace"] = {{"L0", "L1", "L2"}, [](NodeReader& r) {
                             const TripleLaplace l =
                                 r.guarded("/params", [&] { return TripleLaplace::from_json(r.params()); });
                             auto [s, t] = r.split_children();
                             return triple_laplace(s, t, l);
                           }};
    o["fonseca_steel"] = {{"a0", "a1", "a2", "lambda0", "lambda1", "lambda2", "delta"}, [](NodeReader& r) {
                            FonsecaParams p;
                            p.a0 = r.number("a0", 1.0);
                            p.a1 = r.number("a1", 1.0);
                            p.a2 = r.number("a2", 1.0);
                            p.lambda0 = r.number("lambda0", 1.0);
                            p.lambda1 = r.number("lambda1", 1.0);
                            p.lambda2 = r.number("lambda2", 1.0);
                            p.delta = r.number("delta", 1.0);
                            auto [s, t] = r.split_children();
                            return fonseca_steel(s, t, p);
                          }};
    o["matern_mixture"] = {{"nu"}, [](NodeReader& r) {
                             auto [s, t] = r.split_children();
                             return matern_mixture(s, t, r.vector("nu"));
                           }};
    o["transport_mixture"] = {{"d1", "laplace", "velocity", "n_mc", "seed"}, [](NodeReader& r) {
                                r.expect_children(2);
                                if (r.domain().time != 1) r.fail("", "op 'transport_mixture' needs dim_time = 1");
                                const long long d1 = r.integer("d1");
                                const int space = r.domain().space;
                                if (d1 < 1 || d1 >= space) r.fail("/params/d1", "must lie in [1, dim_space - 1]");
                                const TripleLaplace l = r.guarded(
                                    "/params/laplace", [&] { return TripleLaplace::from_json(r.raw("laplace")); });
                                const VelocitySampler v = r.guarded(
                                    "/params/velocity", [&] { return VelocitySampler::from_json(r.raw("velocity")); });
                                const long long n_mc = r.integer("n_mc", 64);
                                if (n_mc < 1 || n_mc > 1000000) r.fail("/params/n_mc", "must lie in [1, 1e6]");
                                const json& seed = r.has("seed") ? r.raw("seed") : json(0);
                                if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
                                  r.fail("/params/seed", "must be a non-negative integer");
                                const int di = static_cast<int>(d1);
                                return transport_mixture(r.child(0, {r.m(), {di, 0}}), r.child(1, {r.m(), {space - di, 0}}),
                                                         l, v, static_cast<int>(n_mc), seed.get<std::uint64_t>());
                              }};
    o["gaussian_extended"] = {{"sigma", "component_sigmas"}, [](NodeReader& r) {
                                return gaussian_extended(r.m(), r.domain(), r.matrix("sigma"), components(r));
                              }};
    o["lagrangian_mixture"] = {{"sigma", "component_sigmas", "theta", "mixture"}, [](NodeReader& r) {
                                 const Mixture1D mix = r.guarded(
                                     "/params/mixture", [&] { return Mixture1D::from_json(r.raw("mixture")); });
                                 return lagrangian_mixture(r.m(), r.domain(), r.matrix("sigma"), components(r),
                                                           r.vector("theta"), mix);
                               }};
    o["isotropic_descent"] = {{"profile", "scale", "coef", "beta", "cross", "cross_scale"}, [](NodeReader& r) {
                                IsotropicProfile p;
                                p.kind = r.guarded("/params/profile",
                                                   [&] { return radial_profile_from_string(r.text("profile")); });
                                p.scale = r.number("scale", 1.0);
                                p.coef = r.number("coef", 1.0);
                                p.beta = r.number("beta", 0.5);
                                if (r.has("cross")) p.cross = r.matrix("cross");
                                p.cross_scale = r.number("cross_scale", 1.0);
                                return isotropic_descent(r.m(), r.domain(), p);
                              }};
    o["second_derivative"] = {{"axis", "mode"}, [](NodeReader& r) {
                                r.expect_children(1);
                                const DerivativeMode mode = r.guarded(
                                    "/params/mode", [&] { return derivative_mode_from_string(r.text("mode", "closed")); });
                                return second_derivative_cov(r.child(0), static_cast<int>(r.integer("axis")), mode);
                              }};
    o["cm_derivative"] = {{"L", "mode", "lambda"}, [](NodeReader& r) {
                            r.expect_children(1);
                            CmFunction l;
                            l.kind = r.guarded("/params/L", [&] { return cm_kind_from_string(r.text("L", "exp")); });
                            l.lambda = r.number("lambda", 1.0);
                            const DerivativeMode mode = r.guarded(
                                "/params/mode", [&] { return derivative_mode_from_string(r.text("mode", "closed")); });
                            return cm_derivative_cov(r.child(0), l, mode);
                          }};
    o["infdiv_ratio"] = {{"a", "b"}, [](NodeReader& r) {
                           r.expect_children(1);
                           return infdiv_ratio(r.child(0), r.number("a"), r.number("b"));
                         }};
    o["hadamard_power"] = {{"r"}, [](NodeReader& r) {
                             r.expect_children(1);
                             return hadamard_power(r.child(0), r.number("r"));
                           }};
    o["cosh_ratio"] = {{"nu"}, [](NodeReader& r) {
                         r.expect_children(1);
                         return cosh_ratio(r.child(0), r.number("nu"));
                       }};
    o["askey_beta"] = {{"s", "nu"}, [](NodeReader& r) {
                         r.expect_children(1);
                         return askey_beta(r.child(0), r.number("s"), r.number("nu"));
                       }};
    o["paciorek_mixture"] = {{"field", "mixture"}, [](NodeReader& r) {
                               r.expect_children(1);
                               const auto field = r.guarded(
                                   "/params/field", [&] { return LocalAnisotropyField::from_json(r.raw("field")); });
                               const Mixture1D mix = r.guarded(
                                   "/params/mixture", [&] { return Mixture1D::from_json(r.raw("mixture")); });
                               return paciorek_mixture(field, r.child(0), mix);
                             }};
    o["nonstationary_matern"] = {{"field", "gamma_factor"}, [](NodeReader& r) {
                                   r.expect_children(1);
                                   const auto field = r.guarded(
                                       "/params/field", [&] { return LocalAnisotropyField::from_json(r.raw("field")); });
                                   return nonstationary_matern(field, r.child(0), r.boolean("gamma_factor", false));
                                 }};
    return o;
  }();
  return ops;
}

int positive_int(const json& doc, const char* key, int lo, int hi) {
  if (!doc.contains(key)) throw ConfigError(std::string("at /") + key + ": missing");
  const json& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > hi)
    throw ConfigError(std::string("at /") + key + ": must be an integer in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(v.get<long long>());
}

}  // namespace

KernelSpec parse_kernel(const nlohmann::json& node, int m, Domain domain) {
  return parse_node(node, {m, domain}, "");
}

ModelConfig parse_model_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("at /: model document must be an object");
  for (const auto& [key, value] : doc.items())
    if (key != "m" && key != "dim_space" && key != "dim_time" && key != "model")
      throw ConfigError("at /" + key + ": unexpected key");
  const int m = positive_int(doc, "m", 1, 64);
  Domain domain;
  domain.space = positive_int(doc, "dim_space", 1, 16);
  domain.time = doc.contains("dim_time") ? positive_int(doc, "dim_time", 0, 16) : 0;
  if (!doc.contains("model")) throw ConfigError("at /model: missing");
  return {m, domain, parse_node(doc["model"], {m, domain}, "/model")};
}

ModelConfig parse_model_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (text[i] == '\n') ++line, column = 1;
      else ++column;
    }
    std::ostringstream os;
    os << "JSON syntax error at line " << line << ", column " << column << ": " << e.what();
    throw ConfigError(os.str());
  }
  return parse_model_config(doc);
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config_text(buf.str());
}

nlohmann::json serialize_model_config(const KernelSpec& spec) {
  return {{"m", spec.m()},
          {"dim_space", spec.domain().space},
          {"dim_time", spec.domain().time},
          {"model", spec.to_json()}};
}

std::uint64_t config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace covkit
