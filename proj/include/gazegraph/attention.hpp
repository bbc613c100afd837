#ifndef GAZEGRAPH_ATTENTION_HPP
#define GAZEGRAPH_ATTENTION_HPP

#include <cstddef>

#include "errors.hpp"

namespace gazegraph {

// Attention of a cluster is exp(N² · C): N members (global attention) and C
// self-loops (local dwell). The values overflow doubles for ordinary cluster
// sizes, so only their exact logarithms are handled.

/// log a_i = N_i² · C_in.
inline double attention_log_score(std::size_t n, std::size_t self_loops) {
  if (n == 0) throw ArgumentError("attention score needs N >= 1");
  const auto nd = static_cast<double>(n);
  return nd * nd * static_cast<double>(self_loops);
}

/// log w_ij = N_i² C_in + N_j² C_jn, the product of both endpoint attentions.
inline double edge_log_weight(std::size_t n_i, std::size_t c_i, std::size_t n_j, std::size_t c_j) {
  return attention_log_score(n_i, c_i) + attention_log_score(n_j, c_j);
}

}  // namespace gazegraph

#endif  // GAZEGRAPH_ATTENTION_HPP
