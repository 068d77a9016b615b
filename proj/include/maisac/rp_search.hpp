// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/ao.hpp"
#include "maisac/channels.hpp"
#include "maisac/error.hpp"
#include "maisac/scenario.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace maisac {

enum class Scheme { kMA, kFPAF, kFPAH };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kMA: return "MA";
    case Scheme::kFPAF: return "FPAF";
    case Scheme::kFPAH: return "FPAH";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "MA") return Scheme::kMA;
  if (s == "FPAF") return Scheme::kFPAF;
  if (s == "FPAH") return Scheme::kFPAH;
  fail(ErrorKind::kInvalidArgument, "unknown scheme '" + s + "' (expected MA, FPAF or FPAH)");
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Exceptions
/// are captured per index; the lowest-index one is rethrown after all work
/// finishes unless `collect` is given.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body,
                         std::vector<std::exception_ptr>* collect = nullptr) {
  std::vector<std::exception_ptr> errors(count);
  auto run_one = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  if (collect) {
    *collect = std::move(errors);
    return;
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct CandidateResult {
  std::size_t index = 0;
  AntennaLayout layout;
  DesignVariables vars;
  RateReport report;
  OptimizationTrace trace;
  std::vector<double> rank_residuals;
  double lifted_wsr = 0.0;
  double wsr = 0.0;
};

struct SearchResult {
  CandidateResult best;
  std::vector<CandidateResult> candidates;  // successful candidates, ascending index
  std::vector<std::pair<std::size_t, std::string>> failures;
};

struct RpOptions {
  AoOptions ao;
  std::size_t threads = 1;
  std::size_t layout_attempts = kDefaultLayoutAttempts;
};

/// Stream tag for candidate layouts; candidate i of seed s uses derive_seed(s, tag, i).
inline constexpr std::uint64_t kLayoutStream = 0x1a70u;

/// Runs the inner AO on one fixed layout from the default initial point.
inline CandidateResult evaluate_layout(const Scenario& sc, const AntennaLayout& layout, const AoOptions& ao,
                                       std::size_t index = 0) {
  const ChannelSet ch = build_channels(sc, layout);
  AoResult r = alternating_optimize(initial_design(ch, sc), ch, sc, ao);
  CandidateResult c;
  c.index = index;
  c.layout = layout;
  c.wsr = r.report.wsr;
  c.report = std::move(r.report);
  c.vars = std::move(r.vars);
  c.trace = std::move(r.trace);
  c.rank_residuals = std::move(r.rank_residuals);
  c.lifted_wsr = r.lifted_wsr;
  return c;
}

/// Random-position search: gamma independent feasible layouts, one AO run
/// each, keep the best (lowest index on exact ties).
inline SearchResult random_position_search(const Scenario& sc, std::size_t n, std::size_t m, std::size_t gamma,
                                           std::uint64_t seed, const RpOptions& opt = {}) {
  require(gamma >= 1, "random_position_search needs gamma >= 1");
  std::vector<std::optional<CandidateResult>> slots(gamma);
  std::vector<std::exception_ptr> errors;
  parallel_for(
      gamma, opt.threads,
      [&](std::size_t i) {
        const AntennaLayout layout = sample_layout(sc.tx_region, sc.rx_region, n, m, sc.min_spacing,
                                                   derive_seed(seed, kLayoutStream, i), opt.layout_attempts);
        slots[i] = evaluate_layout(sc, layout, opt.ao, i);
      },
      &errors);

  SearchResult out;
  std::exception_ptr first_error;
  bool only_layout_failures = true;
  for (std::size_t i = 0; i < gamma; ++i) {
    if (slots[i]) {
      out.candidates.push_back(std::move(*slots[i]));
      continue;
    }
    if (!first_error) first_error = errors[i];
    std::string msg = "unknown error";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      msg = e.what();
      if (e.kind() != ErrorKind::kInfeasibleLayout) only_layout_failures = false;
    } catch (const std::exception& e) {
      msg = e.what();
      only_layout_failures = false;
    }
    out.failures.emplace_back(i, msg);
  }
  if (out.candidates.empty()) {
    if (only_layout_failures) fail(ErrorKind::kInfeasibleLayout, "no feasible candidate layout: " + out.failures.front().second);
    std::rethrow_exception(first_error);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.candidates.size(); ++i) {
    if (out.candidates[i].wsr > out.candidates[best].wsr) best = i;
  }
  out.best = out.candidates[best];
  return out;
}

/// MA runs the random-position search; FPAF and FPAH run one AO on their fixed grid.
inline CandidateResult run_scheme(Scheme scheme, const Scenario& sc, std::size_t n, std::size_t m, std::size_t gamma,
                                  std::uint64_t seed, const RpOptions& opt = {}) {
  switch (scheme) {
    case Scheme::kMA: return random_position_search(sc, n, m, gamma, seed, opt).best;
    case Scheme::kFPAF: return evaluate_layout(sc, fpaf_layout(sc, n, m), opt.ao);
    case Scheme::kFPAH: return evaluate_layout(sc, fpah_layout(sc, n, m), opt.ao);
  }
  fail(ErrorKind::kInvalidArgument, "unknown scheme");
}

}  // namespace maisac
