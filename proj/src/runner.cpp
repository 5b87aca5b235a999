#include "srf/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <thread>

#include "srf/convexity1d.hpp"
#include "srf/dynconv.hpp"
#include "srf/expr.hpp"
#include "srf/gammacalc.hpp"
#include "srf/riemann.hpp"
#include "srf/srfcheck.hpp"
#include "srf/tgs.hpp"
#include "srf/transport.hpp"

namespace srf {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json vec_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

ordered_json vec_json(const Vec& v) { return vec_json(std::vector<double>(v.data(), v.data() + v.size())); }

ordered_json mat_json(const Mat& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(Vec(m.row(i).transpose())));
  return a;
}

// ------------------------------------------------------------------ JSON readers

double read_double(const Scenario& sc, const std::string& ptr, const json& v) {
  if (v.is_null()) return kInfinity;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
  }
  if (!v.is_number()) sc.fail(ptr, "expected a number");
  return v.get<double>();
}

std::size_t read_index(const Scenario& sc, const std::string& ptr, const json& v) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)))
    sc.fail(ptr, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<double> read_doubles(const Scenario& sc, const std::string& ptr, const json& v) {
  if (!v.is_array()) sc.fail(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_double(sc, ptr + "/" + std::to_string(i), v[i]));
  return out;
}

Vec read_vec(const Scenario& sc, const std::string& ptr, const json& v) {
  auto d = read_doubles(sc, ptr, v);
  return Eigen::Map<Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
}

Mat read_mat(const Scenario& sc, const std::string& ptr, const json& v) {
  if (!v.is_array() || v.empty()) sc.fail(ptr, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = read_doubles(sc, ptr + "/" + std::to_string(i), v[i]);
    if (row.size() != cols) sc.fail(ptr + "/" + std::to_string(i), "rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

Expression read_expr(const Scenario& sc, const std::string& ptr, const json& v, int max_coord) {
  if (!v.is_string()) sc.fail(ptr, "expected an expression string");
  Expression e;
  try {
    e = Expression::parse(v.get<std::string>());
  } catch (const InvalidInput& err) {
    sc.fail(ptr, err.what());
  }
  if (e.max_coordinate() > max_coord)
    sc.fail(ptr, max_coord < 0 ? "expression may only depend on t" : "expression uses a coordinate beyond the dimension");
  return e;
}

// Runs a builder and reports library input errors at the section's location.
template <class F>
auto at(const Scenario& sc, const std::string& ptr, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    sc.fail(ptr, e.what());
  }
}

// ------------------------------------------------------------------ instances

struct Context {
  const Scenario* sc = nullptr;
  std::optional<TimeGrid> grid;
  std::optional<DiscreteGeodesicSpace> space;
  std::vector<double> coords;  // vertex positions used by expressions
  std::optional<TdMmSpace> mm;
  std::optional<GeneratorFamily> gen;
  std::unique_ptr<RiemannianFamily> fam;
  unsigned long long seed = 1;
  const RunOptions* opt = nullptr;
};

TimeGrid build_grid(const Scenario& sc) {
  const json& g = sc.section("time_grid");
  return at(sc, "/time_grid", [&] {
    if (g.contains("times")) return TimeGrid(read_doubles(sc, "/time_grid/times", g["times"]));
    return TimeGrid::uniform(read_double(sc, "/time_grid/first", g["first"]),
                             read_double(sc, "/time_grid/last", g["last"]),
                             read_index(sc, "/time_grid/intervals", g["intervals"]));
  });
}

void build_space(const Scenario& sc, Context& ctx) {
  const json& s = sc.section("space");
  const std::string kind = s["kind"].get<std::string>();
  auto need = [&](const char* key) -> const json& {
    if (!s.contains(key)) sc.fail("/space", std::string("a ") + kind + " space needs '" + key + "'");
    return s[key];
  };
  LengthScale scale;
  if (s.contains("scale")) {
    auto e = read_expr(sc, "/space/scale", s["scale"], -1);
    scale = [e](double t) { return e.eval(t, nullptr, 0); };
  }
  if (kind == "cycle" || kind == "path") {
    if (!ctx.grid) sc.fail("/space", "a generated space needs a 'time_grid' section");
    const std::size_t n = read_index(sc, "/space/vertices", need("vertices"));
    if (kind == "cycle") {
      const double c = s.contains("circumference") ? read_double(sc, "/space/circumference", s["circumference"]) : 1.0;
      ctx.space = at(sc, "/space", [&] { return make_cycle(n, c, *ctx.grid, scale); });
      for (std::size_t i = 0; i < n; ++i) ctx.coords.push_back(c * static_cast<double>(i) / static_cast<double>(n));
    } else {
      const double len = s.contains("length") ? read_double(sc, "/space/length", s["length"]) : 1.0;
      ctx.space = at(sc, "/space", [&] { return make_path_graph(n, len, *ctx.grid, scale); });
      for (std::size_t i = 0; i < n; ++i)
        ctx.coords.push_back(len * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n - 1, 1)));
    }
  } else if (kind == "file") {
    if (s.contains("scale")) sc.fail("/space/scale", "file spaces carry their own lengths");
    std::string path = need("path").get<std::string>();
    if (!path.empty() && path[0] != '/') path = sc.directory() + path;
    ctx.space = at(sc, "/space/path", [&] { return load_space_description(path); });
    if (ctx.grid && ctx.grid->times() != ctx.space->grid().times())
      sc.fail("/time_grid", "time grid differs from the one in the space file");
    ctx.grid = ctx.space->grid();
    for (std::size_t i = 0; i < ctx.space->vertex_count(); ++i) ctx.coords.push_back(static_cast<double>(i));
  } else {
    sc.fail("/space/kind", "unknown space kind '" + kind + "' (cycle, path, file)");
  }
  if (s.contains("reparametrize_K")) {
    const double K = read_double(sc, "/space/reparametrize_K", s["reparametrize_K"]);
    ctx.space = at(sc, "/space/reparametrize_K", [&] { return reparametrize_K(*ctx.space, K).space; });
  }
}

void build_measure(const Scenario& sc, Context& ctx) {
  const std::size_t n = ctx.space->vertex_count();
  const std::size_t m = ctx.grid->size();
  std::vector<double> ref(n, 1.0);
  std::vector<std::vector<double>> weights;
  if (sc.has("measure")) {
    const json& ms = sc.section("measure");
    if (ms.contains("reference")) {
      const json& r = ms["reference"];
      if (r.is_string() && r.get<std::string>() == "uniform") {
      } else if (r.is_string()) {
        auto e = read_expr(sc, "/measure/reference", r, 0);
        for (std::size_t i = 0; i < n; ++i) ref[i] = e.eval(0.0, &ctx.coords[i], 1);
      } else {
        ref = read_doubles(sc, "/measure/reference", r);
      }
    }
    if (ms.contains("weights")) {
      const json& w = ms["weights"];
      if (w.is_string()) {
        auto e = read_expr(sc, "/measure/weights", w, 0);
        weights.assign(m, std::vector<double>(n));
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t i = 0; i < n; ++i) weights[k][i] = e.eval((*ctx.grid)[k], &ctx.coords[i], 1);
      } else if (w.is_array()) {
        for (std::size_t k = 0; k < w.size(); ++k)
          weights.push_back(read_doubles(sc, "/measure/weights/" + std::to_string(k), w[k]));
      } else {
        sc.fail("/measure/weights", "weights must be an expression or a table");
      }
    }
  }
  ctx.mm = at(sc, "/measure", [&] { return TdMmSpace(*ctx.space, ref, weights); });
}

void build_generator(const Scenario& sc, Context& ctx) {
  const json& g = sc.section("generator");
  if (!ctx.grid) sc.fail("/generator", "a generator needs a time grid");
  const std::string kind = g["kind"].get<std::string>();
  const bool markov = g.value("markov", true);
  if (kind == "circle") {
    if (!g.contains("states")) sc.fail("/generator", "a circle generator needs 'states'");
    const std::size_t n = read_index(sc, "/generator/states", g["states"]);
    const double c = g.contains("circumference") ? read_double(sc, "/generator/circumference", g["circumference"]) : 1.0;
    std::function<double(double)> scale = [](double) { return 1.0; };
    if (g.contains("scale")) {
      auto e = read_expr(sc, "/generator/scale", g["scale"], -1);
      scale = [e](double t) { return e.eval(t, nullptr, 0); };
    }
    ctx.gen = at(sc, "/generator", [&] {
      return GeneratorFamily::scaled(*ctx.grid, circle_laplacian(n, c), scale, markov);
    });
  } else if (kind == "matrices") {
    if (!g.contains("matrices")) sc.fail("/generator", "a matrices generator needs 'matrices'");
    const json& list = g["matrices"];
    std::vector<Mat> mats;
    for (std::size_t k = 0; k < list.size(); ++k)
      mats.push_back(read_mat(sc, "/generator/matrices/" + std::to_string(k), list[k]));
    if (mats.size() == 1)
      ctx.gen = at(sc, "/generator", [&] { return GeneratorFamily::constant(*ctx.grid, mats[0], markov); });
    else
      ctx.gen = at(sc, "/generator", [&] { return GeneratorFamily(*ctx.grid, mats, markov); });
  } else {
    sc.fail("/generator/kind", "unknown generator kind '" + kind + "' (circle, matrices)");
  }
}

void build_riemann(const Scenario& sc, Context& ctx) {
  const json& r = sc.section("riemann");
  const std::string family = r["family"].get<std::string>();
  std::size_t dim = 2;
  if (r.contains("dim")) dim = read_index(sc, "/riemann/dim", r["dim"]);
  if (dim < 1 || dim > 3) sc.fail("/riemann/dim", "dimension must be 1, 2 or 3");
  Box chart{read_vec(sc, "/riemann/chart/lo", r["chart"]["lo"]), read_vec(sc, "/riemann/chart/hi", r["chart"]["hi"])};
  if (static_cast<std::size_t>(chart.lo.size()) != dim || static_cast<std::size_t>(chart.hi.size()) != dim)
    sc.fail("/riemann/chart", "chart bounds must have one entry per dimension");
  ScalarField weight;
  if (r.contains("weight")) {
    auto e = read_expr(sc, "/riemann/weight", r["weight"], static_cast<int>(dim) - 1);
    weight = [e](double t, const Vec& x) { return e.eval(t, x.data(), static_cast<std::size_t>(x.size())); };
  }
  auto make = [&]() -> RiemannianFamily {
    if (family == "flat") return RiemannianFamily::flat(dim, chart, weight);
    if (family == "conformal_euclidean") {
      const double rate = r.contains("rate") ? read_double(sc, "/riemann/rate", r["rate"]) : 1.0;
      return RiemannianFamily::conformal_euclidean(dim, chart, rate);
    }
    if (family == "shrinking_sphere" || family == "expanding_hyperbolic") {
      if (dim != 2) sc.fail("/riemann/dim", family + " is two-dimensional");
      return family == "shrinking_sphere" ? RiemannianFamily::shrinking_sphere(chart)
                                          : RiemannianFamily::expanding_hyperbolic(chart);
    }
    if (family == "metric") {
      if (!r.contains("metric")) sc.fail("/riemann", "a metric family needs 'metric'");
      const json& g = r["metric"];
      if (g.size() != dim) sc.fail("/riemann/metric", "metric must have one row per dimension");
      std::vector<Expression> entries;
      for (std::size_t i = 0; i < dim; ++i) {
        if (!g[i].is_array() || g[i].size() != dim) sc.fail("/riemann/metric/" + std::to_string(i), "row has the wrong length");
        for (std::size_t j = 0; j < dim; ++j) {
          const std::string p = "/riemann/metric/" + std::to_string(i) + "/" + std::to_string(j);
          const json& v = g[i][j];
          entries.push_back(read_expr(sc, p, v.is_number() ? json(v.dump()) : v, static_cast<int>(dim) - 1));
        }
      }
      auto field = [entries, dim](double t, const Vec& x) {
        Mat m(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j) m(i, j) = entries[i * dim + j].eval(t, x.data(), dim);
        return m;
      };
      return RiemannianFamily(dim, chart, field, weight);
    }
    sc.fail("/riemann/family", "unknown family '" + family +
                                   "' (flat, conformal_euclidean, shrinking_sphere, expanding_hyperbolic, metric)");
  };
  ctx.fam = std::make_unique<RiemannianFamily>(at(sc, "/riemann", make));
  if (weight && family != "flat" && family != "metric") ctx.fam->set_weight(weight);
}

Context build_context(const Scenario& sc) {
  Context ctx;
  ctx.sc = &sc;
  if (sc.has("time_grid")) ctx.grid = build_grid(sc);
  if (sc.has("space")) {
    build_space(sc, ctx);
    build_measure(sc, ctx);
  } else if (sc.has("measure")) {
    sc.fail("/measure", "a measure section needs a 'space' section");
  }
  if (sc.has("generator")) build_generator(sc, ctx);
  if (sc.has("riemann")) build_riemann(sc, ctx);
  return ctx;
}

// ------------------------------------------------------------------ check plumbing

/// Parameter access for one check; errors point into the scenario.
struct Params {
  const Scenario& sc;
  const CheckSpec& spec;
  const Context& ctx;

  bool has(const std::string& k) const { return spec.params.contains(k); }
  const json& raw(const std::string& k) const { return spec.params[k]; }
  std::string ptr(const std::string& k) const { return spec.pointer + "/params/" + k; }
  [[noreturn]] void fail(const std::string& k, const std::string& msg) const { sc.fail(ptr(k), msg); }
  double number(const std::string& k, double def) const { return has(k) ? read_double(sc, ptr(k), raw(k)) : def; }
  std::size_t index(const std::string& k, std::size_t def) const { return has(k) ? read_index(sc, ptr(k), raw(k)) : def; }
  std::size_t time(const std::string& k) const {
    const std::size_t t = index(k, 0);
    if (t >= ctx.grid->size()) fail(k, "time index out of range");
    return t;
  }
  double tol(double def) const {
    if (ctx.opt->tol) return *ctx.opt->tol;
    if (has("tol")) return number("tol", def);
    return sc.tolerance.value_or(def);
  }
  // "all"/absent gives the default list.
  std::vector<std::size_t> times(const std::string& k, std::vector<std::size_t> all) const {
    if (!has(k) || (raw(k).is_string() && raw(k).get<std::string>() == "all")) return all;
    std::vector<std::size_t> out;
    if (raw(k).is_array()) {
      for (std::size_t i = 0; i < raw(k).size(); ++i) out.push_back(read_index(sc, ptr(k) + "/" + std::to_string(i), raw(k)[i]));
    } else {
      out.push_back(read_index(sc, ptr(k), raw(k)));
    }
    for (auto t : out)
      if (t >= ctx.grid->size()) fail(k, "time index out of range");
    return out;
  }
};

void add_sample(CheckRecord& r, double t, std::size_t pair, double tau, double slack) {
  SlackSample s{t, pair, std::nullopt, std::isnan(slack) ? kInfinity : slack + 0.0};
  if (std::isfinite(tau)) s.tau = tau;
  r.samples.push_back(s);
}

// Status from a verdict; min slack and witness come from the samples.
void conclude(CheckRecord& r, bool holds, double tol) {
  r.tolerance = tol;
  r.status = holds ? CheckStatus::Pass : CheckStatus::Fail;
  const SlackSample* best = nullptr;
  for (const auto& s : r.samples)
    if (!best || s.slack < best->slack) best = &s;
  if (best && std::isfinite(best->slack)) {
    r.min_slack = best->slack;
    r.witness = *best;
  }
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (std::size_t i = a; i < b; ++i) v.push_back(i);
  return v;
}

ProbabilityVector read_measure(const Params& P, const std::string& ptr, const json& v, std::size_t t) {
  const auto& space = *P.ctx.space;
  const std::size_t n = space.vertex_count();
  return at(P.sc, ptr, [&]() -> ProbabilityVector {
    if (v.is_string() && v.get<std::string>() == "uniform") return ProbabilityVector::uniform(n);
    if (v.is_number()) {
      const std::size_t x = read_index(P.sc, ptr, v);
      if (x >= n) P.sc.fail(ptr, "vertex out of range");
      return ProbabilityVector::dirac(n, x);
    }
    if (v.is_object() && v.size() == 1 && v.contains("dirac")) {
      const std::size_t x = read_index(P.sc, ptr + "/dirac", v["dirac"]);
      if (x >= n) P.sc.fail(ptr + "/dirac", "vertex out of range");
      return ProbabilityVector::dirac(n, x);
    }
    if (v.is_object() && v.size() == 1 && v.contains("bump")) {
      const json& b = v["bump"];
      if (!b.is_object() || !b.contains("center") || !b.contains("width") || b.size() != 2)
        P.sc.fail(ptr + "/bump", "a bump needs exactly 'center' and 'width'");
      const std::size_t c = read_index(P.sc, ptr + "/bump/center", b["center"]);
      if (c >= n) P.sc.fail(ptr + "/bump/center", "vertex out of range");
      return bump_measure(space, t, c, read_double(P.sc, ptr + "/bump/width", b["width"]));
    }
    if (v.is_array()) return ProbabilityVector::normalized(read_doubles(P.sc, ptr, v));
    P.sc.fail(ptr, "a measure is \"uniform\", a vertex, {\"dirac\": x}, {\"bump\": {...}} or a weight array");
  });
}

std::vector<MeasurePair> read_corpus(const Params& P, std::size_t t) {
  if (!P.has("corpus") || (P.raw("corpus").is_string() && P.raw("corpus").get<std::string>() == "default"))
    return default_measure_corpus(*P.ctx.space, t, P.index("dirac_pairs", 4));
  const json& c = P.raw("corpus");
  if (!c.is_array()) P.fail("corpus", "corpus must be \"default\" or an array of measure pairs");
  std::vector<MeasurePair> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::string p = P.ptr("corpus") + "/" + std::to_string(i);
    const json& e = c[i];
    if (!e.is_object()) P.sc.fail(p, "measure pair must be an object");
    for (const auto& [key, value] : e.items())
      if (key != "mu0" && key != "mu1" && key != "label") P.sc.fail(p + "/" + key, "unknown key '" + key + "'");
    if (!e.contains("mu0") || !e.contains("mu1")) P.sc.fail(p, "measure pair needs 'mu0' and 'mu1'");
    MeasurePair mp{read_measure(P, p + "/mu0", e["mu0"], t), read_measure(P, p + "/mu1", e["mu1"], t),
                   e.contains("label") && e["label"].is_string() ? e["label"].get<std::string>() : "pair-" + std::to_string(i)};
    out.push_back(std::move(mp));
  }
  return out;
}

FlowCheckOptions flow_options(const Params& P, double tol) {
  FlowCheckOptions o;
  o.tol = tol;
  o.tau_intervals = P.index("tau_intervals", o.tau_intervals);
  o.geodesic_cap = P.index("geodesic_cap", o.geodesic_cap);
  return o;
}

// lambda as a number, "controls" (estimated rates) or a per-time list.
std::vector<double> read_lambda(const Params& P) {
  const std::size_t m = P.ctx.grid->size();
  const json& v = P.raw("lambda");
  if (v.is_string() && v.get<std::string>() == "controls") return estimate_controls(*P.ctx.space).lambda;
  if (v.is_array()) {
    auto out = read_doubles(P.sc, P.ptr("lambda"), v);
    if (out.size() != m) P.fail("lambda", "lambda list needs one value per grid time");
    return out;
  }
  return std::vector<double>(m, read_double(P.sc, P.ptr("lambda"), v));
}

void record_flow(CheckRecord& r, const FlowVerdict& v, ordered_json& per_time) {
  for (const auto& s : v.samples) add_sample(r, s.t, s.pair_id, s.tau, s.slack);
  for (const auto& n : v.notes) r.notes.push_back(n);
  ordered_json e;
  e["status"] = to_string(v.status);
  e["min_slack"] = num(v.min_slack);
  per_time.push_back(e);
}

void finish_flow(CheckRecord& r, const std::vector<VerdictStatus>& statuses, double tol) {
  bool fail = false, undetermined = false;
  for (auto s : statuses) {
    fail |= s == VerdictStatus::Fail;
    undetermined |= s == VerdictStatus::Undetermined;
  }
  conclude(r, !fail, tol);
  if (!fail && undetermined) r.status = CheckStatus::Undetermined;
}

// ------------------------------------------------------------------ ops

using Handler = std::function<void(const Params&, CheckRecord&)>;

void op_k_convex(const Params& P, CheckRecord& r) {
  SampledFunction1D u = at(P.sc, P.spec.pointer, [&] {
    return SampledFunction1D(read_doubles(P.sc, P.ptr("tau"), P.raw("tau")),
                             read_doubles(P.sc, P.ptr("values"), P.raw("values")));
  });
  const double K = P.number("K", 0.0);
  const double tol = P.tol(default_tolerance(u));
  ConvexityVerdict v = P.has("N") ? is_kn_convex(u, K, P.number("N", kInfinity), tol) : is_k_convex(u, K, tol);
  add_sample(r, 0.0, 0, u.tau[v.witness[1]], v.min_slack);
  r.values["witness_indices"] = {v.witness[0], v.witness[1], v.witness[2]};
  conclude(r, v.holds, tol);
}

void op_controls(const Params& P, CheckRecord& r) {
  auto c = estimate_controls(*P.ctx.space);
  r.values["kappa"] = vec_json(c.kappa);
  r.values["lambda"] = vec_json(c.lambda);
  conclude(r, true, 0.0);
}

Potential read_potential(const Params& P) {
  const auto& ctx = P.ctx;
  if (!P.has("potential") || (P.raw("potential").is_string() && P.raw("potential").get<std::string>() == "entropy")) {
    const TdMmSpace* mm = &*ctx.mm;
    return Potential::entropy_delegate(mm->reference(), [mm](std::size_t t, std::size_t x) {
      return mm->weight_table().empty() ? 0.0 : mm->weights(t)[x];
    });
  }
  const json& v = P.raw("potential");
  const std::string p = P.ptr("potential");
  if (v.is_object() && v.size() == 1 && v.contains("quadratic")) {
    const json& q = v["quadratic"];
    if (!q.is_object()) P.sc.fail(p + "/quadratic", "expected an object");
    for (const auto& [key, value] : q.items())
      if (key != "center" && key != "coefficient" && key != "offset") P.sc.fail(p + "/quadratic/" + key, "unknown key '" + key + "'");
    if (!q.contains("center") || !q.contains("coefficient")) P.sc.fail(p + "/quadratic", "needs 'center' and 'coefficient'");
    const std::size_t c = read_index(P.sc, p + "/quadratic/center", q["center"]);
    if (c >= ctx.space->vertex_count()) P.sc.fail(p + "/quadratic/center", "vertex out of range");
    return Potential::quadratic(*ctx.space, c, read_double(P.sc, p + "/quadratic/coefficient", q["coefficient"]),
                                q.contains("offset") ? read_double(P.sc, p + "/quadratic/offset", q["offset"]) : 0.0);
  }
  if (v.is_object() && v.size() == 1 && v.contains("expr")) {
    auto e = read_expr(P.sc, p + "/expr", v["expr"], 0);
    std::vector<std::vector<double>> table(ctx.grid->size(), std::vector<double>(ctx.coords.size()));
    for (std::size_t k = 0; k < table.size(); ++k)
      for (std::size_t x = 0; x < ctx.coords.size(); ++x) table[k][x] = e.eval((*ctx.grid)[k], &ctx.coords[x], 1);
    return Potential::tabulated(std::move(table));
  }
  P.sc.fail(p, "potential is \"entropy\", {\"quadratic\": {...}} or {\"expr\": \"...\"}");
}

void op_dynamic_convexity(const Params& P, CheckRecord& r) {
  const std::size_t t = P.time("t");
  const auto V = read_potential(P);
  const std::string form = P.raw("form").get<std::string>();
  DynCheckOptions o;
  o.tol = P.tol(1e-9);
  o.lambda = P.number("lambda", 0.0);
  o.path_cap = P.index("path_cap", kDefaultPathCap);
  if (P.has("pairs")) {
    const json& ps = P.raw("pairs");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string p = P.ptr("pairs") + "/" + std::to_string(i);
      if (!ps[i].is_array() || ps[i].size() != 2) P.sc.fail(p, "a pair is [x, y]");
      o.pairs.emplace_back(read_index(P.sc, p + "/0", ps[i][0]), read_index(P.sc, p + "/1", ps[i][1]));
    }
  }
  DynConvVerdict v;
  if (P.has("N")) {
    NConvexityForm f{};
    bool found = false;
    for (auto c : {NConvexityForm::Slope, NConvexityForm::WeightedIntegral, NConvexityForm::PhiTransform})
      if (to_string(c) == form) f = c, found = true;
    if (!found) P.fail("form", "unknown N-form '" + form + "' (N-slope, N-weighted-integral, N-phi)");
    v = check_dynamic_N_convexity(*P.ctx.space, V, t, P.number("N", kInfinity), f, o);
  } else {
    const ConvexityForm f = at(P.sc, P.ptr("form"), [&] { return parse_convexity_form(form); });
    v = check_dynamic_convexity(*P.ctx.space, V, t, f, o);
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_ids;
  ordered_json pairs = ordered_json::array();
  for (const auto& s : v.samples) {
    auto [it, fresh] = pair_ids.emplace(std::make_pair(s.x0, s.x1), pair_ids.size());
    if (fresh) pairs.push_back({s.x0, s.x1});
    add_sample(r, (*P.ctx.grid)[t], it->second, s.tau, s.slack);
  }
  r.values["form"] = v.form;
  r.values["pairs"] = pairs;
  if (v.truncated) r.notes.push_back("path enumeration hit its cap");
  conclude(r, v.holds, o.tol);
}

void op_wasserstein(const Params& P, CheckRecord& r) {
  const std::size_t t = P.time("t");
  auto mu = read_measure(P, P.ptr("mu0"), P.raw("mu0"), t);
  auto nu = read_measure(P, P.ptr("mu1"), P.raw("mu1"), t);
  auto res = wasserstein(*P.ctx.space, t, mu, nu);
  r.values["cost"] = num(res.cost);
  r.values["distance"] = num(res.distance);
  ordered_json atoms = ordered_json::array();
  for (const auto& a : coupling_atoms(res.plan)) atoms.push_back({a.x, a.y, num(a.mass)});
  r.values["coupling"] = atoms;
  conclude(r, true, 0.0);
}

void op_flow(const Params& P, CheckRecord& r, FlowFlavor flavor) {
  const double tol = P.tol(1e-9);
  const auto opt = flow_options(P, tol);
  const auto& X = *P.ctx.mm;
  std::vector<VerdictStatus> statuses;
  ordered_json per_time = ordered_json::array();
  std::vector<double> lambda;
  if (P.has("lambda")) lambda = read_lambda(P);
  for (std::size_t t : P.times("times", range(1, P.ctx.grid->size()))) {
    const auto pairs = read_corpus(P, t);
    FlowVerdict v;
    switch (flavor) {
      case FlowFlavor::Strong: v = check_super_ricci_strong(X, t, pairs, opt); break;
      case FlowFlavor::Moderate: v = check_super_ricci_moderate(X, t, lambda[t], pairs, opt); break;
      case FlowFlavor::N:
        v = check_super_N_ricci(X, t, P.number("N", kInfinity),
                                lambda.empty() ? std::nullopt : std::optional<double>(lambda[t]), pairs, opt);
        break;
      default: throw InvalidInput("unsupported flavor");
    }
    statuses.push_back(v.status);
    record_flow(r, v, per_time);
    per_time.back()["t"] = num((*P.ctx.grid)[t]);
  }
  r.values["per_time"] = per_time;
  finish_flow(r, statuses, tol);
}

void op_averaged(const Params& P, CheckRecord& r) {
  const double tol = P.tol(1e-9);
  const std::size_t a = P.time("r"), b = P.time("s");
  auto v = check_averaged_flow(*P.ctx.mm, a, b, P.number("N", kInfinity), read_lambda(P), read_corpus(P, b),
                               flow_options(P, tol));
  ordered_json per_time = ordered_json::array();
  record_flow(r, v, per_time);
  finish_flow(r, {v.status}, tol);
}

Vec read_point(const Params& P, const std::string& ptr, const json& v) {
  Vec x = read_vec(P.sc, ptr, v);
  if (static_cast<std::size_t>(x.size()) != P.ctx.fam->dim()) P.sc.fail(ptr, "point has the wrong dimension");
  if (!P.ctx.fam->chart().contains(x)) P.sc.fail(ptr, "point lies outside the chart");
  return x;
}

std::vector<SamplePoint> tensor_samples(const Params& P) {
  const auto& fam = *P.ctx.fam;
  const json& sec = P.sc.section("riemann");
  const json empty = json::object();
  const json& s = sec.contains("samples") ? sec["samples"] : empty;
  std::vector<double> times{0.0};
  if (P.has("times"))
    times = read_doubles(P.sc, P.ptr("times"), P.raw("times"));
  else if (s.contains("times"))
    times = read_doubles(P.sc, "/riemann/samples/times", s["times"]);
  std::size_t per_axis = s.contains("per_axis") ? read_index(P.sc, "/riemann/samples/per_axis", s["per_axis"]) : 5;
  per_axis = P.index("per_axis", per_axis);
  if (P.has("points")) {
    std::vector<SamplePoint> out;
    const json& pts = P.raw("points");
    for (double t : times)
      for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({t, read_point(P, P.ptr("points") + "/" + std::to_string(i), pts[i])});
    return out;
  }
  double margin = s.contains("margin") ? read_double(P.sc, "/riemann/samples/margin", s["margin"]) : 0.05;
  margin = P.number("margin", margin);
  return interior_samples(fam, times, per_axis, margin);
}

void record_tensor(CheckRecord& r, const TensorVerdict& v, bool upper) {
  for (std::size_t i = 0; i < v.samples.size(); ++i) {
    const auto& s = v.samples[i];
    add_sample(r, s.t, i, kNaN, upper ? -s.max_eigenvalue : s.min_eigenvalue);
  }
  r.values["min_eigenvalue"] = num(v.min_eigenvalue);
  r.values["max_eigenvalue"] = num(v.max_eigenvalue);
  if (v.witness) {
    r.values["witness_point"] = vec_json(v.witness->x);
    r.values["witness_direction"] = vec_json(v.witness_direction);
  }
  if (!v.note.empty()) r.notes.push_back(v.note);
}

void op_tensor(const Params& P, CheckRecord& r, int kind) {
  const double tol = P.tol(1e-6);
  const auto pts = tensor_samples(P);
  TensorVerdict v;
  if (kind == 0) v = check_srf_tensor(*P.ctx.fam, pts, tol);
  if (kind == 1) v = check_sub_rf_tensor(*P.ctx.fam, pts, tol);
  if (kind == 2) v = check_N_srf_tensor(*P.ctx.fam, P.number("N", kInfinity), pts, tol);
  record_tensor(r, v, kind == 1);
  conclude(r, v.holds, tol);
}

void op_weight_identity(const Params& P, CheckRecord& r) {
  const double tol = P.tol(1e-4);
  auto rep = check_weight_identity(*P.ctx.fam, P.number("t_ref", 0.0), tensor_samples(P), tol);
  for (std::size_t i = 0; i < rep.residuals.size(); ++i)
    add_sample(r, rep.residuals[i].first.t, i, kNaN, -std::abs(rep.residuals[i].second));
  r.values["max_residual"] = num(rep.max_residual);
  conclude(r, rep.holds, tol);
}

ScalarField read_field(const Params& P, const std::string& key) {
  auto e = read_expr(P.sc, P.ptr(key), P.raw(key), static_cast<int>(P.ctx.fam->dim()) - 1);
  return [e](double t, const Vec& x) { return e.eval(t, x.data(), static_cast<std::size_t>(x.size())); };
}

void op_distance_expansion(const Params& P, CheckRecord& r) {
  const double tol = P.tol(1e-9);
  const auto V = read_field(P, "potential");
  const std::size_t steps = P.index("substeps", 20);
  auto a = gradient_flow(*P.ctx.fam, V, *P.ctx.grid, read_point(P, P.ptr("x"), P.raw("x")), steps);
  auto b = gradient_flow(*P.ctx.fam, V, *P.ctx.grid, read_point(P, P.ptr("y"), P.raw("y")), steps);
  if (a.truncated || b.truncated) r.notes.push_back("a trajectory left the chart; earlier times are dropped");
  auto v = check_distance_expansion(*P.ctx.fam, a, b, tol);
  const std::size_t off = a.times.size() - v.distances.size();
  for (std::size_t k = 0; k + 1 < v.distances.size(); ++k)
    add_sample(r, a.times[off + k + 1], 0, kNaN, v.distances[k + 1] - v.distances[k]);
  r.values["distances"] = vec_json(v.distances);
  conclude(r, v.holds, tol);
}

void op_evi(const Params& P, CheckRecord& r) {
  const double tol = P.tol(1e-6);
  const auto V = read_field(P, "potential");
  auto traj = gradient_flow(*P.ctx.fam, V, *P.ctx.grid, read_point(P, P.ptr("x"), P.raw("x")), P.index("substeps", 20));
  if (traj.truncated) throw NumericalFailure("trajectory left the chart before the first grid time");
  std::vector<Vec> comps;
  const json& c = P.raw("comparisons");
  for (std::size_t i = 0; i < c.size(); ++i) comps.push_back(read_point(P, P.ptr("comparisons") + "/" + std::to_string(i), c[i]));
  ChartEviModel model(*P.ctx.fam, V, *P.ctx.grid);
  auto v = check_evi(model, traj.points, comps, tol, 1, P.index("geodesic_samples", 16));
  for (const auto& s : v.samples) add_sample(r, (*P.ctx.grid)[s.time], s.comparison, kNaN, s.slack);
  conclude(r, v.holds, tol);
}

void op_srf_gamma(const Params& P, CheckRecord& r) {
  const double tol = P.tol(1e-9);
  const auto& fam = *P.ctx.gen;
  bool holds = true;
  ordered_json first_order = ordered_json::array();
  for (std::size_t t : P.times("times", range(0, fam.grid().size()))) {
    auto v = check_srf_gamma(fam, t, tol, P.number("N", kInfinity));
    add_sample(r, fam.grid()[t], v.witness_state, kNaN, v.min_eigenvalue);
    holds &= v.holds;
    if (v.first_order) first_order.push_back(t);
  }
  r.values["one_sided_slices"] = first_order;
  conclude(r, holds, tol);
}

std::vector<std::pair<std::size_t, std::size_t>> read_pairs(const Params& P) {
  const std::size_t m = P.ctx.gen->grid().size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (!P.has("pairs") || (P.raw("pairs").is_string() && P.raw("pairs").get<std::string>() == "all")) {
    for (std::size_t t = 1; t < m; ++t)
      for (std::size_t s = 0; s < t; ++s) out.emplace_back(s, t);
    return out;
  }
  const json& ps = P.raw("pairs");
  if (!ps.is_array()) P.fail("pairs", "pairs is \"all\" or a list of [s, t]");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string p = P.ptr("pairs") + "/" + std::to_string(i);
    if (!ps[i].is_array() || ps[i].size() != 2) P.sc.fail(p, "a pair is [s, t]");
    const std::size_t s = read_index(P.sc, p + "/0", ps[i][0]), t = read_index(P.sc, p + "/1", ps[i][1]);
    if (s > t || t >= m) P.sc.fail(p, "need grid indices s <= t");
    out.emplace_back(s, t);
  }
  return out;
}

std::uint64_t check_seed(unsigned long long seed, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<Vec> read_tests(const Params& P) {
  const std::size_t n = P.ctx.gen->states();
  std::vector<Vec> tests;
  if (P.has("tests") && P.raw("tests").is_array()) {
    const json& ts = P.raw("tests");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Vec u = read_vec(P.sc, P.ptr("tests") + "/" + std::to_string(i), ts[i]);
      if (static_cast<std::size_t>(u.size()) != n) P.sc.fail(P.ptr("tests") + "/" + std::to_string(i), "test has the wrong size");
      tests.push_back(u);
    }
    return tests;
  }
  const std::size_t count = P.index("tests", 8);
  std::mt19937_64 rng(check_seed(P.ctx.seed, P.spec.id));
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    Vec u(n);
    for (auto& x : u) x = U(rng);
    tests.push_back(u);
  }
  return tests;
}

void op_gradient(const Params& P, CheckRecord& r, bool dimensional) {
  const double tol = P.tol(1e-9);
  const auto& fam = *P.ctx.gen;
  const auto pairs = read_pairs(P);
  const auto tests = read_tests(P);
  bool holds = true;
  std::optional<PropagatorTable> table;
  if (!dimensional) table.emplace(fam);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [s, t] = pairs[i];
    auto v = dimensional ? check_N_gradient_estimate(fam, s, t, P.number("N", kInfinity), tests, tol)
                         : check_gradient_estimate(fam, s, t, tests, tol, &*table);
    add_sample(r, fam.grid()[t], i, fam.grid()[s], v.min_slack);
    holds &= v.holds;
  }
  if (!dimensional && (!P.has("witness") || P.raw("witness").get<bool>())) {
    if (auto w = find_gradient_witness(fam, tol, &*table)) {
      ordered_json wj;
      wj["s"] = w->s;
      wj["t"] = w->t;
      wj["state"] = w->state;
      wj["slack"] = num(w->slack);
      wj["u"] = vec_json(w->u);
      r.values["witness_function"] = wj;
      add_sample(r, fam.grid()[w->t], pairs.size(), fam.grid()[w->s], w->slack);
      holds = false;
    }
  }
  conclude(r, holds, tol);
}

void op_propagator(const Params& P, CheckRecord& r) {
  const auto& fam = *P.ctx.gen;
  const std::size_t s = P.index("s", 0), t = P.index("t", 0);
  PropagateOptions o;
  o.substeps = P.index("substeps", 0);
  auto slice = propagate(fam, s, t, o);
  r.values["propagator"] = mat_json(slice.P);
  r.values["backward_residual"] = num(slice.backward_residual);
  r.values["row_sum_error"] = num((slice.P.rowwise().sum().array() - 1.0).abs().maxCoeff());
  conclude(r, true, 0.0);
}

void ddi_value(const TimedMmInstance& a, const TimedMmInstance& b, const DdiOptions& o, CheckRecord& r) {
  auto res = ddi_distance(a, b, o);
  r.values["value"] = num(res.value);
  r.values["quadratic_term"] = num(res.quadratic_term);
  r.values["weight_term"] = num(res.weight_term);
  r.values["solver_status"] = to_string(res.status);
  r.values["rounds"] = res.rounds;
  r.values["upper_bound"] = res.upper_bound;
  r.values["coupling"] = mat_json(res.coupling);
  ordered_json hs = ordered_json::array();
  for (const auto& h : res.metric_couplings) hs.push_back(mat_json(h));
  r.values["metric_couplings"] = hs;
  if (res.status != DdiStatus::Converged)
    r.notes.push_back("alternation ended by " + to_string(res.status) + "; the best iterate is reported");
  conclude(r, true, 0.0);
}

void slice_bounds(const TimedMmInstance& a, const TimedMmInstance& b, const std::vector<std::size_t>& slices,
                  std::optional<double> lipschitz, const DdiOptions& o, CheckRecord& r) {
  bool holds = true;
  ordered_json rows = ordered_json::array();
  for (std::size_t s : slices) {
    auto sb = check_slice_bound(a, b, s, lipschitz, o);
    add_sample(r, a.grid()[s], 0, kNaN, sb.bound - sb.static_value);
    holds &= sb.holds;
    ordered_json e;
    e["t"] = num(a.grid()[s]);
    e["ddi"] = num(sb.ddi);
    e["static"] = num(sb.static_value);
    e["bound"] = num(sb.bound);
    e["lipschitz"] = num(sb.lipschitz);
    e["radius"] = num(sb.radius);
    e["short_interval"] = sb.short_interval;
    rows.push_back(e);
  }
  r.values["slices"] = rows;
  conclude(r, holds, 0.0);
}

TimedMmInstance other_instance(const Params& P) {
  std::string path = P.raw("other").get<std::string>();
  if (!path.empty() && path[0] != '/') path = P.sc.directory() + path;
  Scenario other;
  try {
    other = load_scenario(path);
  } catch (const ConfigError& e) {
    P.fail("other", e.what());
  }
  return build_timed_instance(other);
}

DdiOptions ddi_options(const Params& P) {
  DdiOptions o;
  o.rounds = P.index("rounds", o.rounds);
  if (P.has("reference_time")) o.reference_time = P.number("reference_time", 0.0);
  return o;
}

void op_ddi(const Params& P, CheckRecord& r) {
  ddi_value(build_timed_instance(P.sc), other_instance(P), ddi_options(P), r);
}

void op_slice_bound(const Params& P, CheckRecord& r) {
  auto a = build_timed_instance(P.sc);
  auto b = other_instance(P);
  std::vector<std::size_t> slices = range(0, a.grid().size());
  if (P.has("s") && !(P.raw("s").is_string() && P.raw("s").get<std::string>() == "all")) {
    slices.clear();
    const json& v = P.raw("s");
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) slices.push_back(read_index(P.sc, P.ptr("s") + "/" + std::to_string(i), v[i]));
    } else {
      slices.push_back(read_index(P.sc, P.ptr("s"), v));
    }
  }
  std::optional<double> lip;
  if (P.has("lipschitz")) lip = P.number("lipschitz", 0.0);
  slice_bounds(a, b, slices, lip, ddi_options(P), r);
}

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"convexity1d.k_convex", op_k_convex},
      {"tgs.controls", op_controls},
      {"dynconv.dynamic_convexity", op_dynamic_convexity},
      {"transport.wasserstein", op_wasserstein},
      {"srfcheck.super_ricci_strong", [](const Params& P, CheckRecord& r) { op_flow(P, r, FlowFlavor::Strong); }},
      {"srfcheck.super_ricci_moderate", [](const Params& P, CheckRecord& r) { op_flow(P, r, FlowFlavor::Moderate); }},
      {"srfcheck.super_n_ricci", [](const Params& P, CheckRecord& r) { op_flow(P, r, FlowFlavor::N); }},
      {"srfcheck.averaged_flow", op_averaged},
      {"riemann.srf_tensor", [](const Params& P, CheckRecord& r) { op_tensor(P, r, 0); }},
      {"riemann.sub_rf_tensor", [](const Params& P, CheckRecord& r) { op_tensor(P, r, 1); }},
      {"riemann.n_srf_tensor", [](const Params& P, CheckRecord& r) { op_tensor(P, r, 2); }},
      {"riemann.weight_identity", op_weight_identity},
      {"riemann.distance_expansion", op_distance_expansion},
      {"riemann.evi", op_evi},
      {"gammacalc.srf_gamma", op_srf_gamma},
      {"gammacalc.gradient_estimate", [](const Params& P, CheckRecord& r) { op_gradient(P, r, false); }},
      {"gammacalc.n_gradient_estimate", [](const Params& P, CheckRecord& r) { op_gradient(P, r, true); }},
      {"gammacalc.propagator", op_propagator},
      {"ddi.ddi", op_ddi},
      {"ddi.slice_bound", op_slice_bound},
  };
  return table;
}

void record_error(CheckRecord& r, const std::string& kind, const std::string& message) {
  r.status = CheckStatus::Error;
  r.error_kind = kind;
  r.message = message;
  r.samples.clear();
  r.min_slack.reset();
  r.witness.reset();
}

// Runs body and turns exceptions into an error record.
template <class F>
void guarded(CheckRecord& r, const RunOptions& opt, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const InvalidInput& e) {
    record_error(r, "config", e.what());
  } catch (const NumericalFailure& e) {
    record_error(r, "numerical", e.what());
  } catch (const std::exception& e) {
    record_error(r, "numerical", e.what());
  }
  if (opt.timings)
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Runs tasks on up to `threads` workers; results stay in task order.
void run_parallel(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

ReportDocument header(const std::string& command, std::vector<std::string> inputs, const std::string& hash,
                      unsigned long long seed, const RunOptions& opt) {
  ReportDocument doc;
  doc.command = command;
  doc.inputs = std::move(inputs);
  doc.scenario_hash = hash;
  doc.seed = seed;
  doc.tolerance_override = opt.tol;
  return doc;
}

}  // namespace

std::vector<std::string> command_modules(const std::string& command) {
  if (command == "verify") return {};
  if (command == "ot") return {"transport", "srfcheck", "dynconv", "tgs", "convexity1d"};
  if (command == "gamma") return {"gammacalc"};
  if (command == "riemann") return {"riemann"};
  if (command == "ddi") return {"ddi"};
  throw InvalidInput("unknown command '" + command + "'");
}

TimedMmInstance build_timed_instance(const Scenario& sc) {
  if (sc.has("instance")) {
    if (!sc.has("time_grid")) sc.fail("/instance", "an instance needs a 'time_grid' section");
    const TimeGrid grid = build_grid(sc);
    const json& in = sc.section("instance");
    std::vector<Mat> d;
    for (std::size_t k = 0; k < in["distances"].size(); ++k)
      d.push_back(read_mat(sc, "/instance/distances/" + std::to_string(k), in["distances"][k]));
    std::vector<Vec> f;
    if (in.contains("weights"))
      for (std::size_t k = 0; k < in["weights"].size(); ++k)
        f.push_back(read_vec(sc, "/instance/weights/" + std::to_string(k), in["weights"][k]));
    const Vec base = read_vec(sc, "/instance/base", in["base"]);
    return at(sc, "/instance", [&] { return TimedMmInstance(grid, d, f, base); });
  }
  if (!sc.has("space")) sc.fail("", "scenario has neither an 'instance' nor a 'space' section");
  Context ctx = build_context(sc);
  const auto& X = *ctx.mm;
  std::vector<Mat> d;
  std::vector<Vec> f;
  for (std::size_t k = 0; k < ctx.grid->size(); ++k) {
    d.push_back(X.space().distances(k));
    if (!X.weight_table().empty()) f.push_back(Eigen::Map<const Vec>(X.weights(k).data(), X.vertex_count()));
  }
  const Vec base = Eigen::Map<const Vec>(X.reference().data(), X.vertex_count());
  return at(sc, "/space", [&] { return TimedMmInstance(*ctx.grid, d, f, base); });
}

ReportDocument run_scenario(const Scenario& sc, const RunOptions& opt) {
  const auto modules = command_modules(opt.command);
  Context ctx = build_context(sc);
  ctx.opt = &opt;
  ctx.seed = opt.seed.value_or(sc.seed.value_or(1));
  ReportDocument doc = header(opt.command, {sc.path}, fnv1a64(sc.text), ctx.seed, opt);

  std::vector<const CheckSpec*> selected;
  for (const auto& c : sc.checks)
    if (modules.empty() || std::find(modules.begin(), modules.end(), c.module) != modules.end())
      selected.push_back(&c);
  doc.checks.resize(selected.size());
  run_parallel(selected.size(), opt.threads, [&](std::size_t i) {
    const CheckSpec& spec = *selected[i];
    CheckRecord& r = doc.checks[i];
    r.id = spec.id;
    r.module = spec.module;
    r.op = spec.op;
    guarded(r, opt, [&] { handlers().at(spec.module + "." + spec.op)(Params{sc, spec, ctx}, r); });
  });
  return doc;
}

ReportDocument run_ddi_pair(const Scenario& a, const Scenario& b, const RunOptions& opt) {
  const TimedMmInstance A = build_timed_instance(a), B = build_timed_instance(b);
  if (A.grid().times() != B.grid().times()) throw ConfigError("the two instances use different time grids", b.path);
  ReportDocument doc = header("ddi", {a.path, b.path}, fnv1a64(a.text + '\0' + b.text),
                              opt.seed.value_or(a.seed.value_or(1)), opt);
  doc.checks.resize(2);
  for (std::size_t i = 0; i < 2; ++i) {
    doc.checks[i].id = doc.checks[i].op = i == 0 ? "ddi" : "slice_bound";
    doc.checks[i].module = "ddi";
  }
  run_parallel(2, opt.threads, [&](std::size_t i) {
    CheckRecord& r = doc.checks[i];
    guarded(r, opt, [&] {
      if (i == 0)
        ddi_value(A, B, {}, r);
      else
        slice_bounds(A, B, range(0, A.grid().size()), std::nullopt, {}, r);
    });
  });
  return doc;
}

}  // namespace srf
