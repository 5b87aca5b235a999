#include "srf/srfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "srf/convexity1d.hpp"
#include "srf/dynconv.hpp"
#include "srf/error.hpp"

namespace srf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clean(double slack) { return std::isnan(slack) ? kInfinity : slack; }

void check_time(const TdMmSpace& X, std::size_t t, bool need_left, bool need_right) {
  if (t >= X.grid().size()) throw InvalidInput("time index out of range");
  if (need_left && t == 0) throw InvalidInput("no left difference at the first grid time");
  if (need_right && t + 1 >= X.grid().size()) throw InvalidInput("no right difference at the last grid time");
}

void check_pairs(const TdMmSpace& X, const std::vector<MeasurePair>& pairs) {
  for (const auto& p : pairs)
    if (p.mu0.size() != X.vertex_count() || p.mu1.size() != X.vertex_count())
      throw InvalidInput("measure size does not match the vertex count");
}

std::vector<double> path_entropy(const TdMmSpace& X, std::size_t t, const MeasurePath& path) {
  std::vector<double> u;
  for (const auto& mu : path.measures) u.push_back(X.entropy(t, mu));
  return u;
}

// Per-pair outcome of a universal or existential search.
struct PairOutcome {
  double worst = kInfinity;
  std::vector<FlowSample> samples;
  bool truncated = false;
};

FlowVerdict assemble(FlowFlavor flavor, double tol, const std::vector<PairOutcome>& outcomes) {
  FlowVerdict v;
  v.flavor = flavor;
  v.tolerance = tol;
  bool failed = false, undetermined = false;
  for (const auto& o : outcomes) {
    for (const auto& s : o.samples) {
      v.samples.push_back(s);
      if (s.slack < v.min_slack) {
        v.min_slack = s.slack;
        v.witness = s;
      }
    }
    if (o.worst < -tol) {
      if (o.truncated) undetermined = true;
      else failed = true;
    }
  }
  if (failed) v.status = VerdictStatus::Fail;
  else if (undetermined) v.status = VerdictStatus::Undetermined;
  if (undetermined) v.notes.push_back("candidate geodesic search hit its cap");
  return v;
}

// Evaluates every candidate geodesic of a pair and keeps the one with the largest worst slack.
template <class SlackFn>
PairOutcome best_candidate(const TdMmSpace& X, std::size_t t, const MeasurePair& pair, std::size_t pair_id,
                           const FlowCheckOptions& opt, SlackFn slacks) {
  auto cands = geodesic_candidates(X.space(), t, pair.mu0, pair.mu1, opt.geodesic_cap);
  const auto taus = uniform_taus(opt.tau_intervals);
  PairOutcome best;
  best.worst = -kInfinity;
  for (std::size_t k = 0; k < cands.count; ++k) {
    auto path = displacement_interpolation(X.space(), t, pair.mu0, pair.mu1, cands.transport.plan, taus,
                                           cands.choice(k));
    auto u = path_entropy(X, t, path);
    PairOutcome o;
    for (auto [tau, s] : slacks(path, u, cands.transport.cost)) {
      s = clean(s);
      o.samples.push_back({X.grid()[t], pair_id, tau, s});
      o.worst = std::min(o.worst, s);
    }
    if (o.worst > best.worst) best = std::move(o);
    if (best.worst >= 0) break;
  }
  best.truncated = cands.truncated;
  return best;
}

double left_rate_W2(const TdMmSpace& X, std::size_t t, const ProbabilityVector& a, const ProbabilityVector& b,
                    double cost_now) {
  const double before = wasserstein(X.space(), t - 1, a, b).cost;
  return (cost_now - before) / (X.grid()[t] - X.grid()[t - 1]);
}

// min over N' in {inf, N'_min} of the Phi_{N'} slack; the expression is affine in 1/N'.
double phi_slack(double A, double B, double D, double tau, double base, double N, double n_floor) {
  double s = base;
  const double n_min = std::max(N, n_floor);
  if (std::isfinite(n_min)) s = std::min(s, base + ((A * A + B * B) / tau - D * D) / n_min);
  return s;
}

std::vector<std::pair<VertexSet, VertexSet>> singleton_pairs(const std::vector<VertexSet>& parts) {
  std::vector<std::pair<VertexSet, VertexSet>> out;
  for (const auto& part : parts)
    for (std::size_t i = 0; i < part.size(); ++i)
      for (std::size_t j = i + 1; j < part.size(); ++j) out.push_back({{part[i]}, {part[j]}});
  return out;
}

std::vector<ProbabilityVector> measures_on(const VertexSet& U, std::size_t n) {
  std::vector<ProbabilityVector> out;
  for (std::size_t x : U) out.push_back(ProbabilityVector::dirac(n, x));
  if (U.size() > 1) {
    std::vector<double> w(n, 0.0);
    for (std::size_t x : U) w[x] = 1.0;
    out.push_back(ProbabilityVector::normalized(w));
  }
  return out;
}

void check_sets(const TdMmSpace& X, const std::vector<VertexSet>& parts,
                const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs) {
  for (const auto& p : parts)
    for (auto x : p)
      if (x >= X.vertex_count()) throw InvalidInput("partition vertex out of range");
  for (const auto& [a, b] : set_pairs) {
    if (a.empty() || b.empty()) throw InvalidInput("empty vertex set in a set pair");
    for (auto x : a)
      if (x >= X.vertex_count()) throw InvalidInput("set vertex out of range");
    for (auto x : b)
      if (x >= X.vertex_count()) throw InvalidInput("set vertex out of range");
  }
}

}  // namespace

TdMmSpace::TdMmSpace(DiscreteGeodesicSpace space, std::vector<double> reference,
                     std::vector<std::vector<double>> weights)
    : space_(std::move(space)), m_(std::move(reference)), f_(std::move(weights)) {
  if (m_.size() != space_.vertex_count()) throw InvalidInput("reference measure size does not match the vertex count");
  for (double x : m_)
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidInput("reference measure must be finite and non-negative");
  if (f_.empty()) f_.assign(space_.grid().size(), std::vector<double>(m_.size(), 0.0));
  if (f_.size() != space_.grid().size()) throw InvalidInput("weight table must have one row per grid time");
  for (const auto& row : f_) {
    if (row.size() != m_.size()) throw InvalidInput("weight row does not match the vertex count");
    for (double v : row)
      if (!std::isfinite(v)) throw InvalidInput("weights must be finite");
  }
}

double TdMmSpace::entropy(std::size_t t, const ProbabilityVector& mu) const { return srf::entropy(m_, f_[t], mu); }

std::string to_string(FlowFlavor f) {
  switch (f) {
    case FlowFlavor::Strong: return "strong";
    case FlowFlavor::Moderate: return "moderate";
    case FlowFlavor::N: return "N";
    case FlowFlavor::Averaged: return "averaged";
    case FlowFlavor::Sub: return "sub";
    case FlowFlavor::UpperK: return "upper-K";
  }
  return "?";
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "pass";
    case VerdictStatus::Fail: return "fail";
    case VerdictStatus::Undetermined: return "undetermined";
  }
  return "?";
}

ProbabilityVector bump_measure(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t center, double width) {
  if (!(width > 0)) throw InvalidInput("bump width must be positive");
  std::vector<double> w(space.vertex_count());
  for (std::size_t x = 0; x < w.size(); ++x) {
    double d = space.distance(t, center, x) / width;
    w[x] = std::exp(-0.5 * d * d);
  }
  return ProbabilityVector::normalized(std::move(w));
}

std::vector<MeasurePair> default_measure_corpus(const DiscreteGeodesicSpace& space, std::size_t t,
                                                std::size_t max_dirac_pairs) {
  const std::size_t n = space.vertex_count();
  std::vector<MeasurePair> out;
  if (n < 2) return out;
  const std::size_t count = std::min(max_dirac_pairs, n);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t x = k * n / count;
    std::size_t far = 0;
    for (std::size_t y = 0; y < n; ++y)
      if (space.distance(t, x, y) > space.distance(t, x, far)) far = y;
    out.push_back({ProbabilityVector::dirac(n, x), ProbabilityVector::dirac(n, far),
                   "dirac-" + std::to_string(x) + "-" + std::to_string(far)});
  }
  const double width = std::max(space.diameter(t) / 6.0, 1e-12);
  std::size_t far0 = 0;
  for (std::size_t y = 0; y < n; ++y)
    if (space.distance(t, 0, y) > space.distance(t, 0, far0)) far0 = y;
  out.push_back({bump_measure(space, t, 0, width), bump_measure(space, t, far0, width), "bump-0-" + std::to_string(far0)});
  out.push_back({ProbabilityVector::uniform(n), bump_measure(space, t, 0, width), "uniform-bump-0"});
  return out;
}

std::vector<std::size_t> GeodesicCandidates::choice(std::size_t k) const {
  std::vector<std::size_t> c(radices.size(), 0);
  for (std::size_t i = 0; i < radices.size() && k > 0; ++i) {
    c[i] = k % radices[i];
    k /= radices[i];
  }
  return c;
}

GeodesicCandidates geodesic_candidates(const DiscreteGeodesicSpace& space, std::size_t t,
                                       const ProbabilityVector& mu0, const ProbabilityVector& mu1, std::size_t cap) {
  GeodesicCandidates c;
  c.transport = wasserstein(space, t, mu0, mu1);
  std::size_t product = 1;
  for (const auto& atom : coupling_atoms(c.transport.plan)) {
    auto paths = shortest_paths(space, t, atom.x, atom.y, std::max<std::size_t>(cap, 1));
    c.radices.push_back(paths.paths.size());
    if (paths.truncated) c.truncated = true;
    if (product <= cap) product *= paths.paths.size();
  }
  if (product > cap) c.truncated = true;
  c.count = std::max<std::size_t>(1, std::min(product, std::max<std::size_t>(cap, 1)));
  return c;
}

FlowVerdict check_super_ricci_strong(const TdMmSpace& X, std::size_t t, const std::vector<MeasurePair>& pairs,
                                     const FlowCheckOptions& opt) {
  check_time(X, t, true, false);
  check_pairs(X, pairs);
  const auto taus = uniform_taus(opt.tau_intervals);
  std::vector<PairOutcome> outcomes;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pr = pairs[p];
    auto ot = wasserstein(X.space(), t, pr.mu0, pr.mu1);
    auto path = displacement_interpolation(X.space(), t, pr.mu0, pr.mu1, ot.plan, taus);
    auto u = path_entropy(X, t, path);
    double s = slope_at_end(path.tau, u) - slope_at_start(path.tau, u) +
               0.5 * left_rate_W2(X, t, pr.mu0, pr.mu1, ot.cost);
    s = clean(s);
    outcomes.push_back({s, {{X.grid()[t], p, kNaN, s}}, false});
  }
  return assemble(FlowFlavor::Strong, opt.tol, outcomes);
}

FlowVerdict check_super_ricci_moderate(const TdMmSpace& X, std::size_t t, double lambda,
                                       const std::vector<MeasurePair>& pairs, const FlowCheckOptions& opt) {
  check_time(X, t, true, false);
  check_pairs(X, pairs);
  if (opt.tau_intervals % 2 != 0) throw InvalidInput("moderate checks need an even number of tau intervals");
  std::vector<PairOutcome> outcomes;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pr = pairs[p];
    const double rate = left_rate_W2(X, t, pr.mu0, pr.mu1, wasserstein(X.space(), t, pr.mu0, pr.mu1).cost);
    outcomes.push_back(best_candidate(X, t, pr, p, opt, [&](const MeasurePath& path, const std::vector<double>& u,
                                                            double W2) {
      std::vector<std::pair<double, double>> out;
      const std::size_t K = path.size() - 1;
      for (std::size_t i = 1; 2 * i <= K; ++i) {
        const double tau = path.tau[i];
        const double lhs = (u[0] - u[i]) / tau + (u[K] - u[K - i]) / tau;
        out.push_back({tau, lhs + 0.5 * rate + lambda * tau * W2});
      }
      return out;
    }));
  }
  return assemble(FlowFlavor::Moderate, opt.tol, outcomes);
}

FlowVerdict check_super_N_ricci(const TdMmSpace& X, std::size_t t, double N, std::optional<double> lambda,
                                const std::vector<MeasurePair>& pairs, const FlowCheckOptions& opt) {
  if (!(N > 0)) throw InvalidInput("N must be positive");
  check_time(X, t, true, false);
  check_pairs(X, pairs);
  const double invN = std::isinf(N) ? 0.0 : 1.0 / N;
  std::vector<PairOutcome> outcomes;
  if (!lambda) {
    const auto taus = uniform_taus(opt.tau_intervals);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& pr = pairs[p];
      auto ot = wasserstein(X.space(), t, pr.mu0, pr.mu1);
      auto path = displacement_interpolation(X.space(), t, pr.mu0, pr.mu1, ot.plan, taus);
      auto u = path_entropy(X, t, path);
      const double dS = u.front() - u.back();
      double s = slope_at_end(path.tau, u) - slope_at_start(path.tau, u) +
                 0.5 * left_rate_W2(X, t, pr.mu0, pr.mu1, ot.cost) - invN * dS * dS;
      s = clean(s);
      outcomes.push_back({s, {{X.grid()[t], p, kNaN, s}}, false});
    }
    return assemble(FlowFlavor::N, opt.tol, outcomes);
  }
  if (opt.tau_intervals % 2 != 0) throw InvalidInput("moderate checks need an even number of tau intervals");
  const double lam = *lambda;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pr = pairs[p];
    const double rate = left_rate_W2(X, t, pr.mu0, pr.mu1, wasserstein(X.space(), t, pr.mu0, pr.mu1).cost);
    outcomes.push_back(best_candidate(X, t, pr, p, opt, [&](const MeasurePath& path, const std::vector<double>& u,
                                                            double W2) {
      std::vector<std::pair<double, double>> out;
      const std::size_t K = path.size() - 1;
      for (std::size_t i = 1; 2 * i <= K; ++i) {
        const double tau = path.tau[i];
        const double A = u[0] - u[i], B = u[K] - u[K - i], D = u[0] - u[K];
        const double base = (A + B) / tau + 0.5 * rate + lam * tau * W2;
        out.push_back({tau, phi_slack(A, B, D, tau, base, N, 2 * tau * (std::abs(D) + 0.5 * lam * W2))});
      }
      return out;
    }));
  }
  return assemble(FlowFlavor::N, opt.tol, outcomes);
}

FlowVerdict check_averaged_flow(const TdMmSpace& X, std::size_t r, std::size_t s, double N,
                                const std::vector<double>& lambda, const std::vector<MeasurePair>& pairs,
                                const FlowCheckOptions& opt) {
  if (!(N > 0)) throw InvalidInput("N must be positive");
  if (s >= X.grid().size() || r >= s) throw InvalidInput("averaging interval must satisfy r < s within the grid");
  if (s - r < 2) throw InvalidInput("averaging interval must span at least 2 grid steps");
  if (lambda.size() != X.grid().size()) throw InvalidInput("lambda must have one value per grid time");
  if (opt.tau_intervals % 2 != 0) throw InvalidInput("averaged checks need an even number of tau intervals");
  check_pairs(X, pairs);
  const auto& grid = X.grid();
  const double len = grid[s] - grid[r];
  const auto taus = uniform_taus(opt.tau_intervals);
  const std::size_t K = taus.size() - 1;
  std::vector<PairOutcome> outcomes;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pr = pairs[p];
    std::vector<GeodesicCandidates> cands;
    std::size_t count = 1;
    bool truncated = false;
    for (std::size_t k = r; k <= s; ++k) {
      cands.push_back(geodesic_candidates(X.space(), k, pr.mu0, pr.mu1, opt.geodesic_cap));
      count = std::max(count, cands.back().count);
      truncated = truncated || cands.back().truncated;
    }
    // Time averages of W_t^2 lambda_t and of S_t along the geodesic family.
    double w_lambda = 0;
    for (std::size_t k = r + 1; k <= s; ++k)
      w_lambda += 0.5 * (cands[k - r].transport.cost * lambda[k] + cands[k - 1 - r].transport.cost * lambda[k - 1]) *
                  (grid[k] - grid[k - 1]);
    w_lambda /= len;
    const double drift = -(cands.back().transport.cost - cands.front().transport.cost) / (2 * len);

    PairOutcome best;
    best.worst = -kInfinity;
    for (std::size_t c = 0; c < count; ++c) {
      std::vector<std::vector<double>> S;
      for (std::size_t k = r; k <= s; ++k) {
        const auto& ck = cands[k - r];
        auto path = displacement_interpolation(X.space(), k, pr.mu0, pr.mu1, ck.transport.plan, taus,
                                               ck.choice(c % ck.count));
        S.push_back(path_entropy(X, k, path));
      }
      std::vector<double> SJ(K + 1, 0.0);
      for (std::size_t a = 0; a <= K; ++a) {
        double acc = 0;
        for (std::size_t k = r + 1; k <= s; ++k)
          acc += 0.5 * (S[k - r][a] + S[k - 1 - r][a]) * (grid[k] - grid[k - 1]);
        SJ[a] = acc / len;
      }
      PairOutcome o;
      for (std::size_t i = 1; 2 * i <= K; ++i) {
        const double a = taus[i];
        const double A = SJ[0] - SJ[i], B = SJ[K] - SJ[K - i], D = SJ[0] - SJ[K];
        const double base = (A + B) / a - drift + a * w_lambda;
        double sl = clean(phi_slack(A, B, D, a, base, N, 2 * a * (std::abs(D) + w_lambda)));
        o.samples.push_back({grid[s], p, a, sl});
        o.worst = std::min(o.worst, sl);
      }
      if (o.worst > best.worst) best = std::move(o);
      if (best.worst >= 0) break;
    }
    best.truncated = truncated;
    outcomes.push_back(std::move(best));
  }
  return assemble(FlowFlavor::Averaged, opt.tol, outcomes);
}

namespace {

// Shared driver for the set-pair searches: every set pair needs one good candidate.
template <class Evaluate>
FlowVerdict search_set_pairs(const TdMmSpace& X, std::size_t t, FlowFlavor flavor,
                             const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs,
                             const FlowCheckOptions& opt, Evaluate evaluate) {
  const auto taus = uniform_taus(opt.tau_intervals);
  const std::size_t n = X.vertex_count();
  std::vector<PairOutcome> outcomes;
  for (std::size_t p = 0; p < set_pairs.size(); ++p) {
    PairOutcome best;
    best.worst = -kInfinity;
    bool truncated = false;
    for (const auto& mu0 : measures_on(set_pairs[p].first, n)) {
      for (const auto& mu1 : measures_on(set_pairs[p].second, n)) {
        auto cands = geodesic_candidates(X.space(), t, mu0, mu1, opt.geodesic_cap);
        truncated = truncated || cands.truncated;
        for (std::size_t k = 0; k < cands.count && best.worst < 0; ++k) {
          auto path = displacement_interpolation(X.space(), t, mu0, mu1, cands.transport.plan, taus, cands.choice(k));
          auto u = path_entropy(X, t, path);
          PairOutcome o;
          for (auto [tau, s] : evaluate(path, u)) {
            s = clean(s);
            o.samples.push_back({X.grid()[t], p, tau, s});
            o.worst = std::min(o.worst, s);
          }
          if (o.worst > best.worst) best = std::move(o);
        }
      }
    }
    best.truncated = truncated;
    outcomes.push_back(std::move(best));
  }
  return assemble(flavor, opt.tol, outcomes);
}

}  // namespace

FlowVerdict check_weak_sub_ricci(const TdMmSpace& X, std::size_t t, double epsilon,
                                 const std::vector<VertexSet>& partition,
                                 const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs,
                                 const FlowCheckOptions& opt) {
  check_time(X, t, false, true);
  if (!(epsilon > 0)) throw InvalidInput("epsilon must be positive");
  check_sets(X, partition, set_pairs);
  auto pairs = set_pairs.empty() ? singleton_pairs(partition) : set_pairs;
  const double dt = X.grid()[t + 1] - X.grid()[t];
  auto evaluate = [&](const MeasurePath& path, const std::vector<double>& u) {
    std::vector<std::pair<double, double>> out;
    const std::size_t K = path.size() - 1;
    std::map<std::pair<std::size_t, std::size_t>, double> rate;
    for (std::size_t i = 1; i < K; ++i)
      for (std::size_t j = i + 1; j < K; ++j) {
        const auto& a = path.measures[i];
        const auto& b = path.measures[j];
        const double fwd = (wasserstein(X.space(), t + 1, a, b).cost - wasserstein(X.space(), t, a, b).cost) / dt;
        const double sigma = path.tau[i], rho = path.tau[j];
        const double d_rho = (u[j] - u[j - 1]) / (path.tau[j] - path.tau[j - 1]);
        const double d_sigma = (u[i] - u[i - 1]) / (path.tau[i] - path.tau[i - 1]);
        const double rhs = -fwd / (2 * (rho - sigma)) + epsilon;
        out.push_back({rho, rhs - (d_rho - d_sigma)});
      }
    if (out.empty()) out.push_back({kNaN, epsilon});
    return out;
  };
  return search_set_pairs(X, t, FlowFlavor::Sub, pairs, opt, evaluate);
}

FlowVerdict check_upper_ricci_static(const TdMmSpace& X, std::size_t t, double K, double K_prime,
                                     const std::vector<VertexSet>& covering,
                                     const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs,
                                     const FlowCheckOptions& opt) {
  check_time(X, t, false, false);
  if (!(K_prime > K)) throw InvalidInput("K' must exceed K");
  check_sets(X, covering, set_pairs);
  auto pairs = set_pairs.empty() ? singleton_pairs(covering) : set_pairs;
  auto evaluate = [&](const MeasurePath& path, const std::vector<double>& u) {
    std::vector<std::pair<double, double>> out;
    const std::size_t n = path.size();
    Eigen::MatrixXd W2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j)
        W2(i, j) = wasserstein(X.space(), t, path.measures[i], path.measures[j]).cost;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          const double rho = path.tau[i], tau = path.tau[j], sig = path.tau[k];
          const double span = sig - rho;
          const double chord = ((sig - tau) * u[i] + (tau - rho) * u[k]) / span;
          const double bend = 0.5 * K_prime * (tau - rho) * (sig - tau) / (span * span) * W2(i, k);
          out.push_back({tau, u[j] - (chord - bend)});
        }
    return out;
  };
  return search_set_pairs(X, t, FlowFlavor::UpperK, pairs, opt, evaluate);
}

}  // namespace srf
