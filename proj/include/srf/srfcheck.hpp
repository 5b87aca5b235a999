#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "srf/convexity1d.hpp"
#include "srf/transport.hpp"

namespace srf {

/// Graph metric family with a reference measure m and weights f_t; the
/// evolving measure is m_t = e^{-f_t} m.
class TdMmSpace {
 public:
  // weights[t][x]; an empty table means f = 0.
  TdMmSpace(DiscreteGeodesicSpace space, std::vector<double> reference, std::vector<std::vector<double>> weights = {});

  const DiscreteGeodesicSpace& space() const { return space_; }
  const std::vector<double>& reference() const { return m_; }
  const std::vector<double>& weights(std::size_t t) const { return f_[t]; }
  const std::vector<std::vector<double>>& weight_table() const { return f_; }
  std::size_t vertex_count() const { return space_.vertex_count(); }
  const TimeGrid& grid() const { return space_.grid(); }

  double entropy(std::size_t t, const ProbabilityVector& mu) const;

 private:
  DiscreteGeodesicSpace space_;
  std::vector<double> m_;
  std::vector<std::vector<double>> f_;
};

enum class FlowFlavor { Strong, Moderate, N, Averaged, Sub, UpperK };
enum class VerdictStatus { Pass, Fail, Undetermined };

std::string to_string(FlowFlavor f);
std::string to_string(VerdictStatus s);

struct FlowSample {
  double t = 0.0;
  std::size_t pair_id = 0;
  double tau = 0.0;  // NaN when the slack has no parameter
  double slack = 0.0;
};

struct FlowVerdict {
  FlowFlavor flavor = FlowFlavor::Strong;
  VerdictStatus status = VerdictStatus::Pass;
  double min_slack = kInfinity;
  double tolerance = 0.0;
  std::vector<FlowSample> samples;
  std::optional<FlowSample> witness;
  std::vector<std::string> notes;

  bool holds() const { return status == VerdictStatus::Pass; }
};

struct MeasurePair {
  ProbabilityVector mu0, mu1;
  std::string label;
};

// Point masses at maximal distance, smooth bumps, and uniform-vs-bump.
std::vector<MeasurePair> default_measure_corpus(const DiscreteGeodesicSpace& space, std::size_t t,
                                                std::size_t max_dirac_pairs = 4);

ProbabilityVector bump_measure(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t center, double width);

struct FlowCheckOptions {
  double tol = 1e-9;
  std::size_t tau_intervals = 16;
  std::size_t geodesic_cap = 64;  // candidate geodesics examined per pair in existential searches
};

FlowVerdict check_super_ricci_strong(const TdMmSpace& X, std::size_t t, const std::vector<MeasurePair>& pairs,
                                     const FlowCheckOptions& opt = {});

FlowVerdict check_super_ricci_moderate(const TdMmSpace& X, std::size_t t, double lambda,
                                       const std::vector<MeasurePair>& pairs, const FlowCheckOptions& opt = {});

// Without lambda: the slope form with the 1/N |Delta S|^2 term. With lambda: the
// Phi_{N'} form over every admissible N' in [N, inf].
FlowVerdict check_super_N_ricci(const TdMmSpace& X, std::size_t t, double N, std::optional<double> lambda,
                                const std::vector<MeasurePair>& pairs, const FlowCheckOptions& opt = {});

// Time-averaged N-form on J = (t_r, t_s]; lambda holds one value per grid time.
FlowVerdict check_averaged_flow(const TdMmSpace& X, std::size_t r, std::size_t s, double N,
                                const std::vector<double>& lambda, const std::vector<MeasurePair>& pairs,
                                const FlowCheckOptions& opt = {});

using VertexSet = std::vector<std::size_t>;

// For every part and every pair (U0, U1) of vertex sets in it, some geodesic between
// measures supported in U0 and U1 must keep the slope increments below the forward
// strain plus epsilon. Empty set_pairs means all singleton pairs inside each part.
FlowVerdict check_weak_sub_ricci(const TdMmSpace& X, std::size_t t, double epsilon,
                                 const std::vector<VertexSet>& partition,
                                 const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs = {},
                                 const FlowCheckOptions& opt = {});

// Static upper bound: some geodesic with S K'-concave for each set pair; requires K' > K.
FlowVerdict check_upper_ricci_static(const TdMmSpace& X, std::size_t t, double K, double K_prime,
                                     const std::vector<VertexSet>& covering,
                                     const std::vector<std::pair<VertexSet, VertexSet>>& set_pairs = {},
                                     const FlowCheckOptions& opt = {});

/// Optimal coupling plus the shortest-path choices available to each atom.
struct GeodesicCandidates {
  TransportResult transport;
  std::vector<std::size_t> radices;  // path count per atom
  std::size_t count = 1;             // candidates examined
  bool truncated = false;            // the full product exceeded the cap

  std::vector<std::size_t> choice(std::size_t k) const;
};

GeodesicCandidates geodesic_candidates(const DiscreteGeodesicSpace& space, std::size_t t,
                                       const ProbabilityVector& mu0, const ProbabilityVector& mu1, std::size_t cap);

}  // namespace srf
