#pragma once

// Chain configuration files: parsing with schema paths in error messages,
// building a FactorChain from them, the verification report, and the
// built-in presets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsfact/chain.hpp"
#include "tsfact/error.hpp"
#include "tsfact/expr.hpp"
#include "tsfact/grid.hpp"
#include "tsfact/io.hpp"

namespace tsfact {

/// A structural function as written in a config: an expression in x (and
/// the level index k), an explicit value array, or a keyword.
struct FunctionSpec {
  enum class Kind { expression, values, keyword, solve };

  Kind kind = Kind::expression;
  std::string text; // expression source, keyword, or seed expression for solve
  Expr ast;
  std::vector<double> values;
  RootBranch branch = RootBranch::positive;

  static FunctionSpec expression(std::string src) {
    FunctionSpec f;
    f.kind = Kind::expression;
    f.ast = parse_expression(src);
    f.text = std::move(src);
    return f;
  }

  Json to_json() const {
    switch (kind) {
    case Kind::expression:
    case Kind::keyword: return text;
    case Kind::values: return values;
    case Kind::solve: {
      Json j;
      j["solve"] = text;
      j["branch"] = branch == RootBranch::positive ? "positive" : "through_zeros";
      return j;
    }
    }
    return nullptr;
  }

  /// Values on the grid (top point set to 0 for expressions).
  RealFunction sample(const TimeScaleGrid& grid, const ConstantMap& constants,
                      const std::string& path) const {
    if (kind == Kind::values) {
      RealFunction v = values;
      if (v.size() + 1 == grid.size()) v.push_back(0.0);
      if (v.size() != grid.size())
        throw ConfigError(path, "expected " + std::to_string(grid.size() - 1) + " or " +
                                    std::to_string(grid.size()) + " values, got " +
                                    std::to_string(values.size()));
      return v;
    }
    if (kind != Kind::expression) throw ConfigError(path, "'" + text + "' is not allowed here");
    try {
      return evaluate_on_grid(ast, grid, constants, true);
    } catch (const EvalError& e) {
      throw ConfigError(path, e.what());
    }
  }
};

/// a_k or b_k: a number or "fit".
struct ConstantSpec {
  bool fit = false;
  double value = 0.0;

  Json to_json() const { return fit ? Json("fit") : Json(value); }
};

struct LevelConfig {
  std::optional<FunctionSpec> h;
  std::optional<FunctionSpec> phi;
  std::optional<FunctionSpec> f;
  std::optional<FunctionSpec> B;
  std::optional<FunctionSpec> A_pearson;
  std::optional<FunctionSpec> g;
  ConstantSpec a{false, 1.0};
  ConstantSpec b{false, 0.0};
};

struct Tolerances {
  double comm = 1e-10;
  double relations = 1e-10;
  double pearson = 1e-10;
};

struct ChainConfig {
  GridKind grid_kind = GridKind::integer;
  GridParams grid;
  FunctionSpec rho0 = FunctionSpec::expression("1");
  ConstantMap constants;
  std::size_t guard_width = 2;
  Tolerances tolerances;
  std::vector<LevelConfig> levels;

  TimeScaleGrid build_grid() const {
    try {
      return tsfact::build_grid(grid_kind, grid);
    } catch (const GridError& e) {
      throw ConfigError("grid", e.what());
    }
  }
};

namespace detail {

inline void check_keys(const Json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(path + "." + it.key(), "unknown key");
  }
}

inline double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "number is not finite");
  return v;
}

inline long get_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long>();
}

inline bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

inline FunctionSpec parse_function(const Json& j, const std::string& path,
                                   const std::set<std::string>& names,
                                   std::initializer_list<const char*> keywords = {},
                                   bool allow_solve = false) {
  FunctionSpec f;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    for (const char* kw : keywords)
      if (s == kw) {
        f.kind = FunctionSpec::Kind::keyword;
        f.text = s;
        return f;
      }
    try {
      f.ast = parse_expression(s, &names);
    } catch (const ParseError& e) {
      throw ConfigError(path, e.what());
    }
    f.kind = FunctionSpec::Kind::expression;
    f.text = s;
    return f;
  }
  if (j.is_number()) {
    f = FunctionSpec::expression(format_double(get_number(j, path)));
    return f;
  }
  if (j.is_array()) {
    f.kind = FunctionSpec::Kind::values;
    for (std::size_t i = 0; i < j.size(); ++i)
      f.values.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    return f;
  }
  if (j.is_object() && allow_solve) {
    check_keys(j, path, {"solve", "branch"});
    if (!j.contains("solve") || !j["solve"].is_string())
      throw ConfigError(path + ".solve", "expected a seed expression");
    f.kind = FunctionSpec::Kind::solve;
    f.text = j["solve"].get<std::string>();
    try {
      f.ast = parse_expression(f.text, &names);
    } catch (const ParseError& e) {
      throw ConfigError(path + ".solve", e.what());
    }
    if (j.contains("branch")) {
      const auto& b = j["branch"];
      if (b == "positive") f.branch = RootBranch::positive;
      else if (b == "through_zeros") f.branch = RootBranch::through_zeros;
      else throw ConfigError(path + ".branch", "expected \"positive\" or \"through_zeros\"");
    }
    return f;
  }
  throw ConfigError(path, "expected an expression, a value array" +
                              std::string(keywords.size() ? " or a keyword" : ""));
}

inline ConstantSpec parse_constant(const Json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "fit") throw ConfigError(path, "expected a number or \"fit\"");
    return {true, 0.0};
  }
  return {false, get_number(j, path)};
}

} // namespace detail

inline ChainConfig parse_chain_config(const Json& root) {
  using namespace detail;
  ChainConfig cfg;
  check_keys(root, "$", {"grid", "rho0", "constants", "guard_width", "tolerances", "levels"});

  if (root.contains("constants")) {
    const auto& c = root["constants"];
    if (!c.is_object()) throw ConfigError("constants", "expected an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      const std::string& name = it.key();
      if (name == "x" || name == "k" || builtin_functions().count(name))
        throw ConfigError("constants." + name, "reserved name");
      cfg.constants[name] = get_number(it.value(), "constants." + name);
    }
  }
  std::set<std::string> names{"k"};
  for (const auto& [n, v] : cfg.constants) names.insert(n);

  if (!root.contains("grid")) throw ConfigError("grid", "missing");
  {
    const auto& g = root["grid"];
    check_keys(g, "grid", {"kind", "a", "b", "c", "q", "h", "count", "points",
                           "min_is_true_min", "max_is_true_max"});
    if (!g.contains("kind") || !g["kind"].is_string())
      throw ConfigError("grid.kind", "expected a string");
    try {
      cfg.grid_kind = grid_kind_from_string(g["kind"].get<std::string>());
    } catch (const GridError& e) {
      throw ConfigError("grid.kind", e.what());
    }
    auto& p = cfg.grid;
    if (g.contains("a")) p.a = get_integer(g["a"], "grid.a");
    if (g.contains("b")) p.b = get_integer(g["b"], "grid.b");
    if (g.contains("c")) p.c = get_number(g["c"], "grid.c");
    if (g.contains("q")) p.q = get_number(g["q"], "grid.q");
    if (g.contains("h")) p.h = get_number(g["h"], "grid.h");
    if (g.contains("count")) p.count = get_integer(g["count"], "grid.count");
    if (g.contains("points")) {
      if (!g["points"].is_array()) throw ConfigError("grid.points", "expected an array");
      for (std::size_t i = 0; i < g["points"].size(); ++i)
        p.points.push_back(get_number(g["points"][i], "grid.points[" + std::to_string(i) + "]"));
    }
    if (g.contains("min_is_true_min"))
      p.min_is_true_min = get_bool(g["min_is_true_min"], "grid.min_is_true_min");
    if (g.contains("max_is_true_max"))
      p.max_is_true_max = get_bool(g["max_is_true_max"], "grid.max_is_true_max");
  }

  if (root.contains("rho0"))
    cfg.rho0 = parse_function(root["rho0"], "rho0", names, {"pearson"});
  if (root.contains("guard_width")) {
    const long gw = get_integer(root["guard_width"], "guard_width");
    if (gw < 0) throw ConfigError("guard_width", "must be nonnegative");
    cfg.guard_width = static_cast<std::size_t>(gw);
  }
  if (root.contains("tolerances")) {
    const auto& t = root["tolerances"];
    check_keys(t, "tolerances", {"comm", "relations", "pearson"});
    auto tol = [&](const char* key, double& dst) {
      if (!t.contains(key)) return;
      dst = get_number(t[key], std::string("tolerances.") + key);
      if (!(dst > 0.0)) throw ConfigError(std::string("tolerances.") + key, "must be positive");
    };
    tol("comm", cfg.tolerances.comm);
    tol("relations", cfg.tolerances.relations);
    tol("pearson", cfg.tolerances.pearson);
  }

  if (!root.contains("levels") || !root["levels"].is_array() || root["levels"].empty())
    throw ConfigError("levels", "expected a nonempty array");
  const auto& levels = root["levels"];
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const std::string path = "levels[" + std::to_string(k) + "]";
    const auto& L = levels[k];
    if (k == 0)
      check_keys(L, path, {"h", "phi", "f", "B", "A_pearson", "g", "a", "b"});
    else
      check_keys(L, path, {"h", "phi", "f", "g", "a", "b"});
    LevelConfig lc;
    if (!L.contains("h")) throw ConfigError(path + ".h", "missing");
    lc.h = parse_function(L["h"], path + ".h", names, {}, k > 0);
    if (L.contains("phi") == L.contains("f"))
      throw ConfigError(path + ".phi", "give exactly one of phi and f");
    if (L.contains("phi"))
      lc.phi = parse_function(L["phi"], path + ".phi", names,
                              k > 0 ? std::initializer_list<const char*>{"derive"}
                                    : std::initializer_list<const char*>{});
    else
      lc.f = parse_function(L["f"], path + ".f", names);
    if (L.contains("B")) lc.B = parse_function(L["B"], path + ".B", names);
    if (L.contains("A_pearson"))
      lc.A_pearson = parse_function(L["A_pearson"], path + ".A_pearson", names);
    if (L.contains("g")) lc.g = parse_function(L["g"], path + ".g", names);
    if (L.contains("a")) lc.a = parse_constant(L["a"], path + ".a");
    if (L.contains("b")) lc.b = parse_constant(L["b"], path + ".b");
    if (lc.a.fit != lc.b.fit)
      throw ConfigError(path + (lc.a.fit ? ".b" : ".a"), "a and b are fitted together");
    if (!lc.a.fit && lc.a.value == 0.0) throw ConfigError(path + ".a", "a_k must be nonzero");
    cfg.levels.push_back(std::move(lc));
  }

  if (cfg.rho0.kind == FunctionSpec::Kind::keyword &&
      !(cfg.levels[0].B && cfg.levels[0].A_pearson))
    throw ConfigError("rho0", "\"pearson\" needs B and A_pearson at level 0");
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const std::string path = "levels[" + std::to_string(k) + "]";
    const auto& lc = cfg.levels[k];
    if (lc.a.fit && k + 1 == cfg.levels.size())
      throw ConfigError(path + ".a", "the last level has no next level to fit against");
    if (lc.a.fit) {
      const auto& nx = cfg.levels[k + 1];
      if (nx.h->kind == FunctionSpec::Kind::solve)
        throw ConfigError("levels[" + std::to_string(k + 1) + "].h",
                          "fitting a_k, b_k needs explicit h_{k+1}");
      if (nx.phi && nx.phi->kind == FunctionSpec::Kind::keyword)
        throw ConfigError("levels[" + std::to_string(k + 1) + "].phi",
                          "fitting a_k, b_k needs explicit phi_{k+1}");
    }
  }
  return cfg;
}

inline ChainConfig parse_chain_config_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_chain_config(root);
}

inline Json chain_config_to_json(const ChainConfig& cfg) {
  Json j;
  Json g;
  g["kind"] = to_string(cfg.grid_kind);
  const auto& p = cfg.grid;
  switch (cfg.grid_kind) {
  case GridKind::integer:
    g["a"] = p.a;
    g["b"] = p.b;
    break;
  case GridKind::qh_lattice: g["h"] = p.h; [[fallthrough]];
  case GridKind::q_lattice:
    g["c"] = p.c;
    g["q"] = p.q;
    g["count"] = p.count;
    break;
  case GridKind::explicit_points: g["points"] = p.points; break;
  }
  if (p.min_is_true_min >= 0) g["min_is_true_min"] = p.min_is_true_min != 0;
  if (p.max_is_true_max >= 0) g["max_is_true_max"] = p.max_is_true_max != 0;
  j["grid"] = g;
  j["rho0"] = cfg.rho0.to_json();
  Json c = Json::object();
  for (const auto& [name, v] : cfg.constants) c[name] = v;
  j["constants"] = c;
  j["guard_width"] = cfg.guard_width;
  j["tolerances"] = {{"comm", cfg.tolerances.comm},
                     {"relations", cfg.tolerances.relations},
                     {"pearson", cfg.tolerances.pearson}};
  Json levels = Json::array();
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const auto& lc = cfg.levels[k];
    Json L;
    L["h"] = lc.h->to_json();
    if (lc.phi) L["phi"] = lc.phi->to_json();
    if (lc.f) L["f"] = lc.f->to_json();
    if (lc.B) L["B"] = lc.B->to_json();
    if (lc.A_pearson) L["A_pearson"] = lc.A_pearson->to_json();
    if (lc.g) L["g"] = lc.g->to_json();
    if (k + 1 < cfg.levels.size()) {
      L["a"] = lc.a.to_json();
      L["b"] = lc.b.to_json();
    }
    levels.push_back(L);
  }
  j["levels"] = levels;
  return j;
}

struct LevelBuildInfo {
  bool fitted = false;
  std::vector<std::size_t> removable_points; // from advance_level, at this level
  std::vector<std::size_t> restarts;         // from solve_h_next, at this level
};

struct BuiltChain {
  FactorChain chain;
  std::vector<LevelBuildInfo> info;
};

namespace detail {

inline ConstantMap level_constants(const ChainConfig& cfg, std::size_t k) {
  ConstantMap c = cfg.constants;
  c["k"] = static_cast<double>(k);
  return c;
}

/// φ from a phi or f spec on the given grid.
inline RealFunction sample_phi(const LevelConfig& lc, const TimeScaleGrid& grid,
                               const RealFunction& h, const ConstantMap& c,
                               const std::string& path) {
  if (lc.phi) return lc.phi->sample(grid, c, path + ".phi");
  const RealFunction f = lc.f->sample(grid, c, path + ".f");
  return LadderSpec::from_h_f(grid, h, f).phi;
}

} // namespace detail

/// Build every level of the chain described by the config.
///
/// Level 0 comes from rho0, B, A_pearson (η_0 = B + μA). Each further level
/// is obtained with advance_level from h_{k+1}, which is given explicitly or
/// solved for; an explicit phi_{k+1} replaces the derived one, and "fit"
/// constants are fitted against the explicit level-(k+1) data.
inline BuiltChain build_chain(const ChainConfig& cfg) {
  const TimeScaleGrid grid0 = cfg.build_grid();
  std::vector<StructuralLevel> levels;
  std::vector<LevelBuildInfo> info(cfg.levels.size());

  try {
    {
      const auto c = detail::level_constants(cfg, 0);
      const auto& lc = cfg.levels[0];
      const std::string path = "levels[0]";
      const RealFunction B = lc.B ? lc.B->sample(grid0, c, path + ".B")
                                  : RealFunction(grid0.size(), 1.0);
      const RealFunction A = lc.A_pearson ? lc.A_pearson->sample(grid0, c, path + ".A_pearson")
                                          : RealFunction(grid0.size(), 0.0);
      RealFunction rho = cfg.rho0.kind == FunctionSpec::Kind::keyword
                             ? pearson_weight(grid0, B, A)
                             : cfg.rho0.sample(grid0, c, "rho0");
      const RealFunction h = lc.h->sample(grid0, c, path + ".h");
      const RealFunction phi = detail::sample_phi(lc, grid0, h, c, path);
      const RealFunction g = lc.g ? lc.g->sample(grid0, c, path + ".g")
                                  : RealFunction(grid0.size(), 1.0);
      levels.push_back(make_first_level(grid0, std::move(rho), B, A, h, phi, g));
    }

    for (std::size_t k = 1; k < cfg.levels.size(); ++k) {
      const auto& prev_cfg = cfg.levels[k - 1];
      const auto& lc = cfg.levels[k];
      const std::string path = "levels[" + std::to_string(k) + "]";
      const auto c = detail::level_constants(cfg, k);
      StructuralLevel& prev = levels.back();
      const TimeScaleGrid grid = prev.grid.drop_top();

      std::optional<RealFunction> h;
      if (lc.h->kind != FunctionSpec::Kind::solve) h = lc.h->sample(grid, c, path + ".h");
      std::optional<RealFunction> phi_explicit;
      if (h && !(lc.phi && lc.phi->kind == FunctionSpec::Kind::keyword))
        phi_explicit = detail::sample_phi(lc, grid, *h, c, path);

      if (prev_cfg.a.fit) {
        const auto fc = fit_constants(prev, *h, *phi_explicit, cfg.guard_width,
                                      cfg.tolerances.relations);
        prev.a = fc.a;
        prev.b = fc.b;
        info[k - 1].fitted = true;
      } else {
        prev.a = prev_cfg.a.value;
        prev.b = prev_cfg.b.value;
      }

      if (!h) {
        const Expr seed = lc.h->ast;
        const auto seed_fn = [&seed, &c](double x) { return evaluate(seed, x, c); };
        auto sol = solve_h_next(prev, prev.a, prev.b, seed_fn, cfg.guard_width, lc.h->branch);
        h = std::move(sol.h);
        info[k].restarts = std::move(sol.restarts);
      }
      auto adv = advance_level(prev, *h);
      info[k].removable_points = std::move(adv.removable_points);
      StructuralLevel next = std::move(adv.level);
      if (!phi_explicit && !(lc.phi && lc.phi->kind == FunctionSpec::Kind::keyword))
        phi_explicit = detail::sample_phi(lc, grid, *h, c, path);
      if (phi_explicit) next.phi = *phi_explicit;
      if (lc.g) next.g = lc.g->sample(grid, c, path + ".g");
      if (!lc.a.fit) {
        next.a = lc.a.value;
        next.b = lc.b.value;
      }
      levels.push_back(std::move(next));
    }
    return {FactorChain(std::move(levels), cfg.guard_width), std::move(info)};
  } catch (const ConfigError&) {
    throw;
  } catch (const EvalError& e) {
    throw ConfigError("levels", e.what());
  }
}

/// Residual report; `ok` is true when every residual is within tolerance.
struct VerifyReport {
  Json json;
  bool ok = true;
};

inline VerifyReport verify_chain(const ChainConfig& cfg, BuiltChain& built) {
  FactorChain& chain = built.chain;
  const auto& tol = cfg.tolerances;
  VerifyReport rep;
  chain.verify(tol.comm);

  auto xs = [](const TimeScaleGrid& grid, const std::vector<std::size_t>& idx) {
    Json arr = Json::array();
    for (auto i : idx) arr.push_back(grid[i]);
    return arr;
  };

  Json levels = Json::array();
  for (std::size_t k = 0; k < chain.depth(); ++k) {
    const auto& lv = chain.level(k);
    Json L;
    L["level"] = k;
    L["grid_size"] = lv.grid.size();
    const auto pr = pearson_residual(lv);
    const bool pearson_ok = pr.max() <= tol.pearson * std::max(1.0, pr.scale);
    L["pearson"] = {{"delta_form", pr.delta_form},
                    {"shift_form", pr.shift_form},
                    {"scale", pr.scale},
                    {"ok", pearson_ok}};
    bool ok = pearson_ok;
    if (k + 1 < chain.depth()) {
      const auto& nx = chain.level(k + 1);
      L["a"] = lv.a;
      L["b"] = lv.b;
      L["fitted"] = built.info[k].fitted;
      const auto rr = relation_residuals(lv, nx, chain.guard_width());
      const bool phi_ok = rr.phi <= tol.relations * std::max(1.0, rr.phi_scale);
      const bool eq_ok = rr.eq_max <= tol.relations * std::max(1.0, rr.eq_scale);
      L["phi"] = {{"residual", rr.phi}, {"scale", rr.phi_scale}, {"ok", phi_ok}};
      Json eq = {{"residual", rr.eq_max}, {"scale", rr.eq_scale}, {"ok", eq_ok}};
      if (rr.eq_max > 0.0) {
        const auto it = std::max_element(rr.eq.begin(), rr.eq.end());
        eq["worst_x"] = nx.grid[static_cast<std::size_t>(it - rr.eq.begin())];
      }
      eq["skipped_points"] = xs(nx.grid, rr.skipped_points);
      L["eq"] = eq;
      const auto fr = factorization_residual_detail(chain, k);
      L["comm_matrix"] = {{"residual", fr.residual}, {"scale", fr.scale},
                          {"ok", chain.verified(k)}};
      ok = ok && phi_ok && eq_ok && chain.verified(k);
    }
    L["removable_points"] = xs(lv.grid, built.info[k].removable_points);
    L["solver_restarts"] = xs(lv.grid, built.info[k].restarts);
    L["ok"] = ok;
    rep.ok = rep.ok && ok;
    levels.push_back(L);
  }

  rep.json["grid"] = {{"kind", to_string(chain.level(0).grid.kind())},
                      {"size", chain.level(0).grid.size()},
                      {"min_is_true_min", chain.level(0).grid.min_is_true_min()},
                      {"max_is_true_max", chain.level(0).grid.max_is_true_max()}};
  rep.json["guard_width"] = chain.guard_width();
  rep.json["tolerances"] = {{"comm", tol.comm},
                            {"relations", tol.relations},
                            {"pearson", tol.pearson}};
  rep.json["levels"] = levels;
  rep.json["ok"] = rep.ok;
  return rep;
}

/// Names accepted by preset_config.
inline std::vector<std::string> preset_names() {
  return {"z-example", "square-spectrum", "q-derivative"};
}

/// Built-in configurations.
///
///  z-example        A_0 = xΔ, A_1 = (x+1)Δ + 1 on a truncated window of ℤ,
///                   trivial weights, a_0 = 1, b_0 = 0.
///  square-spectrum  trivial weights on {−N..N+1} with
///                   h_k = sqrt(N(N+1) − x(x+1)), φ_k = −sqrt(N² − (x+k)²),
///                   (a_k, b_k) = (1, 2k+1); A_0*A_0 has spectrum {j²}.
///  q-derivative     A_k = ∂_q on a q-lattice window, B = x²,
///                   A = (q − 2x)/ν with ν = (1−q)/q, g = q; a_k, b_k fitted.
inline ChainConfig preset_config(const std::string& name,
                                 std::optional<std::pair<long, long>> window = {}) {
  Json j;
  if (name == "z-example") {
    const auto [a, b] = window.value_or(std::pair<long, long>{-10, 20});
    j = Json::parse(R"({
      "grid": {"kind": "integer", "min_is_true_min": false, "max_is_true_max": false},
      "rho0": "1", "constants": {}, "guard_width": 2,
      "tolerances": {"comm": 1e-10, "relations": 1e-10, "pearson": 1e-10},
      "levels": [
        {"h": "x", "phi": "-x", "B": "1", "A_pearson": "0", "g": "1", "a": 1.0, "b": 0.0},
        {"h": "x + 1", "phi": "-x", "g": "1"}
      ]})");
    Json g;
    g["kind"] = "integer";
    g["a"] = a;
    g["b"] = b;
    g["min_is_true_min"] = false;
    g["max_is_true_max"] = false;
    j["grid"] = g;
  } else if (window) {
    throw ConfigError("preset", "only z-example takes a window");
  } else if (name == "square-spectrum") {
    j = Json::parse(R"({
      "grid": {"kind": "integer", "a": -6, "b": 7,
               "min_is_true_min": true, "max_is_true_max": true},
      "rho0": "1", "constants": {"N": 6}, "guard_width": 2,
      "tolerances": {"comm": 1e-10, "relations": 1e-10, "pearson": 1e-10}})");
    Json levels = Json::array();
    for (int k = 0; k <= 4; ++k) {
      Json L;
      L["h"] = "sqrt(N*(N + 1) - x*(x + 1))";
      L["phi"] = "-sqrt(N^2 - (x + k)^2)";
      if (k == 0) {
        L["B"] = "1";
        L["A_pearson"] = "0";
      }
      L["g"] = "1";
      if (k < 4) {
        L["a"] = 1.0;
        L["b"] = 2.0 * k + 1.0;
      }
      levels.push_back(L);
    }
    j["levels"] = levels;
  } else if (name == "q-derivative") {
    j = Json::parse(R"({
      "grid": {"kind": "q_lattice", "c": 1.0, "q": 0.5, "count": 14,
               "min_is_true_min": false, "max_is_true_max": true},
      "rho0": "pearson", "constants": {"q": 0.5, "nu": 1.0}, "guard_width": 2,
      "tolerances": {"comm": 1e-10, "relations": 1e-10, "pearson": 1e-10}})");
    Json levels = Json::array();
    for (int k = 0; k <= 4; ++k) {
      Json L;
      L["h"] = "1";
      L["f"] = "0";
      if (k == 0) {
        L["B"] = "x^2";
        L["A_pearson"] = "(q - 2*x)/nu";
      }
      L["g"] = "q";
      if (k < 4) {
        L["a"] = "fit";
        L["b"] = "fit";
      }
      levels.push_back(L);
    }
    j["levels"] = levels;
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return parse_chain_config(j);
}

} // namespace tsfact
