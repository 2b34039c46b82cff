#pragma once

#include <algorithm>
#include <cstdint>

#include "vista/graph.hpp"

namespace vista {

/// Edge-level confusion counts. A reversed estimate (truth has the opposite
/// direction) counts as fp_reverse, not as tp and not as fn.
struct Confusion {
  long long tp = 0;          // estimated edge matches truth exactly
  long long fp_extra = 0;    // estimated edge absent from truth in both directions
  long long fp_reverse = 0;  // estimated edge whose reverse is a true edge
  long long fn = 0;          // true edge with neither direction estimated

  long long estimated_edges() const { return tp + fp_extra + fp_reverse; }
  long long true_edges() const { return tp + fp_reverse + fn; }
};

inline Confusion confusion(const Digraph& est, const Digraph& truth) {
  if (est.node_count() != truth.node_count()) {
    throw std::invalid_argument("confusion: node count mismatch");
  }
  Confusion c;
  for (const auto& [u, v] : est.edges()) {
    if (truth.has_edge(u, v)) {
      ++c.tp;
    } else if (truth.has_edge(v, u)) {
      ++c.fp_reverse;
    } else {
      ++c.fp_extra;
    }
  }
  for (const auto& [u, v] : truth.edges()) {
    if (!est.has_edge(u, v) && !est.has_edge(v, u)) ++c.fn;
  }
  return c;
}

inline double fdr(const Confusion& c) {
  return static_cast<double>(c.fp_extra + c.fp_reverse) /
         static_cast<double>(std::max<long long>(1, c.estimated_edges()));
}

inline double tpr(const Confusion& c) {
  return static_cast<double>(c.tp) /
         static_cast<double>(std::max<long long>(1, c.true_edges()));
}

inline double recall(const Confusion& c) { return tpr(c); }

inline double precision(const Confusion& c) {
  return static_cast<double>(c.tp) /
         static_cast<double>(std::max<long long>(1, c.estimated_edges()));
}

inline double f1(const Confusion& c) {
  const double p = precision(c), r = recall(c);
  return (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
}

/// Insertions + deletions + reversals, each reversal counting 1.
inline long long shd(const Confusion& c) { return c.fp_extra + c.fn + c.fp_reverse; }

inline double fdr(const Digraph& est, const Digraph& truth) { return fdr(confusion(est, truth)); }
inline double tpr(const Digraph& est, const Digraph& truth) { return tpr(confusion(est, truth)); }
inline double precision(const Digraph& est, const Digraph& truth) {
  return precision(confusion(est, truth));
}
inline double recall(const Digraph& est, const Digraph& truth) {
  return recall(confusion(est, truth));
}
inline double f1(const Digraph& est, const Digraph& truth) { return f1(confusion(est, truth)); }
inline long long shd(const Digraph& est, const Digraph& truth) { return shd(confusion(est, truth)); }

}  // namespace vista
