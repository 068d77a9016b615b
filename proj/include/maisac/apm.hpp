// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/scenario.hpp"
#include "maisac/types.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace maisac {

/// Assignment of initial antenna positions to destinations.
/// Antenna i moves from init[i] to opt[dest_index[i]].
struct MatchingPlan {
  std::vector<std::size_t> dest_index;
  std::vector<double> distance;
  double total_distance = 0.0;

  bool is_permutation() const {
    std::vector<char> seen(dest_index.size(), 0);
    for (std::size_t d : dest_index) {
      if (d >= seen.size() || seen[d]) return false;
      seen[d] = 1;
    }
    return true;
  }
};

/// Movement cost between two positions (Euclidean distance, meters).
inline double path_weight(const Position3& from, const Position3& to) { return distance(from, to); }

namespace detail {

inline void check_lists(std::span<const Position3> init, std::span<const Position3> opt) {
  if (init.size() != opt.size()) {
    fail(ErrorKind::kInvalidArgument, "matching needs equal list lengths (got " + std::to_string(init.size()) +
                                          " and " + std::to_string(opt.size()) + ")");
  }
  require(!init.empty(), "matching needs at least one antenna");
}

inline MatchingPlan plan_from(std::span<const Position3> init, std::span<const Position3> opt,
                              std::vector<std::size_t> dest) {
  MatchingPlan plan;
  plan.dest_index = std::move(dest);
  plan.distance.resize(init.size());
  for (std::size_t i = 0; i < init.size(); ++i) {
    plan.distance[i] = path_weight(init[i], opt[plan.dest_index[i]]);
    plan.total_distance += plan.distance[i];
  }
  return plan;
}

}  // namespace detail

/// Antenna i moves to destination i.
inline MatchingPlan identity_match(std::span<const Position3> init, std::span<const Position3> opt) {
  detail::check_lists(init, opt);
  std::vector<std::size_t> dest(init.size());
  std::iota(dest.begin(), dest.end(), 0);
  return detail::plan_from(init, opt, std::move(dest));
}

/// Antennas in index order each take the nearest destination still free;
/// ties go to the lowest destination index.
inline MatchingPlan greedy_match(std::span<const Position3> init, std::span<const Position3> opt) {
  detail::check_lists(init, opt);
  const std::size_t n = init.size();
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> dest(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const double d = path_weight(init[i], opt[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    dest[i] = best;
    taken[best] = 1;
  }
  return detail::plan_from(init, opt, std::move(dest));
}

inline constexpr std::size_t kMaxExhaustiveAntennas = 9;

/// Minimum-total-distance matching by enumerating all permutations in
/// lexicographic order; the first minimum found is kept.
inline MatchingPlan exhaustive_match(std::span<const Position3> init, std::span<const Position3> opt) {
  detail::check_lists(init, opt);
  const std::size_t n = init.size();
  if (n > kMaxExhaustiveAntennas) {
    fail(ErrorKind::kComplexityGuard, "exhaustive matching is limited to " + std::to_string(kMaxExhaustiveAntennas) +
                                          " antennas (got " + std::to_string(n) + ")");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = path_weight(init[i], opt[j]);
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + perm[i]];
    if (total < best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return detail::plan_from(init, opt, std::move(best));
}

/// Optimal matching for any size via the Hungarian method (O(n^3)).
/// A benchmarking reference beyond the greedy and exhaustive matchers.
inline MatchingPlan optimal_match(std::span<const Position3> init, std::span<const Position3> opt) {
  detail::check_lists(init, opt);
  const std::size_t n = init.size();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation: row i of the cost matrix is antenna i.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = path_weight(init[i0 - 1], opt[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> dest(n);
  for (std::size_t j = 1; j <= n; ++j) dest[match[j] - 1] = j - 1;
  return detail::plan_from(init, opt, std::move(dest));
}

enum class MatchMethod { kGreedy, kExhaustive, kIdentity, kOptimal };

inline const char* to_string(MatchMethod m) {
  switch (m) {
    case MatchMethod::kGreedy: return "greedy";
    case MatchMethod::kExhaustive: return "exhaustive";
    case MatchMethod::kIdentity: return "identity";
    case MatchMethod::kOptimal: return "optimal";
  }
  return "?";
}

inline MatchingPlan match(MatchMethod method, std::span<const Position3> init, std::span<const Position3> opt) {
  switch (method) {
    case MatchMethod::kGreedy: return greedy_match(init, opt);
    case MatchMethod::kExhaustive: return exhaustive_match(init, opt);
    case MatchMethod::kIdentity: return identity_match(init, opt);
    case MatchMethod::kOptimal: return optimal_match(init, opt);
  }
  fail(ErrorKind::kInvalidArgument, "unknown matching method");
}

struct LayoutMatching {
  MatchingPlan transmit;
  MatchingPlan receive;
  double total() const { return transmit.total_distance + receive.total_distance; }
};

/// Matches the transmit and receive arrays independently.
inline LayoutMatching apm_for_layouts(const AntennaLayout& init, const AntennaLayout& opt,
                                      MatchMethod method = MatchMethod::kGreedy) {
  require(init.transmit.size() == opt.transmit.size() && init.receive.size() == opt.receive.size(),
          "layouts must have the same antenna counts");
  return {match(method, init.transmit, opt.transmit), match(method, init.receive, opt.receive)};
}

/// Percentage saved by `plan` relative to `baseline` (0 when the baseline is 0).
inline double reduction_pct(double total, double baseline) {
  return baseline > 0.0 ? 100.0 * (baseline - total) / baseline : 0.0;
}

}  // namespace maisac
