// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/apm.hpp"
#include "maisac/beampattern.hpp"
#include "maisac/config.hpp"
#include "maisac/rp_search.hpp"
#include "maisac/version.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace maisac {

/// 17 significant digits: round-trips every double and is byte-stable.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    require(row.size() == columns.size(), "row width does not match the table header");
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    }
    return out;
  }
};

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

enum class Command { kSolve, kSweep, kApm, kBeampattern, kBaselines };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::kSolve: return "solve";
    case Command::kSweep: return "sweep";
    case Command::kApm: return "apm";
    case Command::kBeampattern: return "beampattern";
    case Command::kBaselines: return "baselines";
  }
  return "?";
}

inline Command parse_command(const std::string& s) {
  if (s == "solve") return Command::kSolve;
  if (s == "sweep") return Command::kSweep;
  if (s == "apm") return Command::kApm;
  if (s == "beampattern") return Command::kBeampattern;
  if (s == "baselines") return Command::kBaselines;
  fail(ErrorKind::kConfig, "unknown command '" + s + "' (expected solve, sweep, apm, beampattern or baselines)");
}

struct RunConfig {
  Command command = Command::kSolve;
  json document = json::object();  // effective configuration, all keys present
  std::string out_dir = "out";
  std::size_t threads = 1;
  bool timing = false;  // record wall-clock columns (otherwise written as 0)
};

struct NamedGrid {
  std::string name;
  GainGrid grid;
};

struct ResultsBundle {
  std::map<std::string, Table> tables;  // file name -> table
  std::vector<NamedGrid> grids;
  bool grid_binary = false;
  std::string config_text;  // exact bytes of config.json
  json manifest;
};

/// Stream tags for derive_seed; fixed so results are reproducible across versions.
inline constexpr std::uint64_t kInitialLayoutStream = 0x1a71u;
inline constexpr std::uint64_t kApmOptStream = 0x1a72u;
inline constexpr std::uint64_t kBeamLayoutStream = 0x1a73u;

namespace detail {

inline Table results_table(const SceneParams& p) {
  Table t;
  t.columns = {"seed", "scheme", "A_over_lambda", "wsr"};
  for (std::size_t l = 0; l < p.num_targets; ++l) t.columns.push_back("R_S" + std::to_string(l + 1));
  for (std::size_t j = 0; j < p.num_ul; ++j) t.columns.push_back("R_U" + std::to_string(j + 1));
  for (std::size_t k = 0; k < p.num_dl; ++k) t.columns.push_back("R_D" + std::to_string(k + 1));
  for (const char* c : {"iterations", "wall_ms", "candidate", "lifted_wsr", "max_rank_residual"}) t.columns.push_back(c);
  return t;
}

inline Table traces_table() {
  return {{"seed", "scheme", "A_over_lambda", "iteration", "wsr", "surrogate", "sca_rounds", "ascent_steps",
           "max_rank_residual", "wall_ms"},
          {}};
}

inline Table summary_table() { return {{"scheme", "A_over_lambda", "count", "mean_wsr", "std_wsr"}, {}}; }

inline Table layouts_table() { return {{"seed", "scheme", "A_over_lambda", "array", "index", "x", "y", "z"}, {}}; }

inline Table matching_table() {
  return {{"seed", "A_over_lambda", "N", "method", "total_distance_m", "reduction_pct"}, {}};
}

inline Table plan_table() {
  return {{"seed", "array", "antenna", "dest_index", "distance_m", "init_x", "init_y", "opt_x", "opt_y"}, {}};
}

inline Table failures_table() { return {{"seed", "scheme", "A_over_lambda", "candidate", "error"}, {}}; }

inline std::string csv_field(std::string s) {
  for (auto& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ';';
  }
  return s;
}

inline double max_residual(const std::vector<double>& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, v);
  return m;
}

struct Recorder {
  const RunConfig& cfg;
  ResultsBundle& bundle;

  void result(std::uint64_t seed, Scheme scheme, double a_over, const CandidateResult& c) {
    const double wall = cfg.timing && !c.trace.entries.empty() ? c.trace.entries.back().wall_ms : 0.0;
    std::vector<std::string> row{fmt(seed), to_string(scheme), fmt(a_over), fmt(c.wsr)};
    for (double r : c.report.rate_s) row.push_back(fmt(r));
    for (double r : c.report.rate_u) row.push_back(fmt(r));
    for (double r : c.report.rate_d) row.push_back(fmt(r));
    row.push_back(fmt(static_cast<std::uint64_t>(c.trace.iterations())));
    row.push_back(fmt(wall));
    row.push_back(fmt(static_cast<std::uint64_t>(c.index)));
    row.push_back(fmt(c.lifted_wsr));
    row.push_back(fmt(max_residual(c.rank_residuals)));
    bundle.tables["results.csv"].add(std::move(row));
    for (const auto& e : c.trace.entries) {
      bundle.tables["traces.csv"].add({fmt(seed), to_string(scheme), fmt(a_over), fmt(static_cast<std::uint64_t>(e.iteration)),
                                       fmt(e.wsr), fmt(e.surrogate), fmt(static_cast<std::uint64_t>(e.sca_rounds)),
                                       fmt(static_cast<std::uint64_t>(e.ascent_steps)), fmt(e.max_rank_residual),
                                       fmt(cfg.timing ? e.wall_ms : 0.0)});
    }
  }

  void layout(std::uint64_t seed, const std::string& scheme, double a_over, const AntennaLayout& lay) {
    auto add = [&](const char* array, const std::vector<Position3>& pts) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        bundle.tables["layouts.csv"].add({fmt(seed), scheme, fmt(a_over), array, fmt(static_cast<std::uint64_t>(i)),
                                          fmt(pts[i].x), fmt(pts[i].y), fmt(pts[i].z)});
      }
    };
    add("transmit", lay.transmit);
    add("receive", lay.receive);
  }

  void failures(std::uint64_t seed, Scheme scheme, double a_over, const SearchResult& s) {
    for (const auto& [idx, msg] : s.failures) {
      bundle.tables["failures.csv"].add(
          {fmt(seed), to_string(scheme), fmt(a_over), fmt(static_cast<std::uint64_t>(idx)), csv_field(msg)});
    }
  }
};

inline void summarize(const Table& results, Table& summary) {
  // Group by (scheme, A_over_lambda) in first-appearance order.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : results.rows) {
    const auto key = std::make_pair(r[1], r[2]);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(std::stod(r[3]));
  }
  for (const auto& key : keys) {
    const auto& v = groups[key];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    summary.add({key.first, key.second, fmt(static_cast<std::uint64_t>(v.size())), fmt(mean), fmt(sd)});
  }
}

inline CandidateResult run_one_scheme(Scheme scheme, const Scenario& sc, const SceneParams& p, const Settings& s,
                                      std::uint64_t seed, const RpOptions& opt, Recorder& rec, double a_over) {
  if (scheme == Scheme::kMA) {
    SearchResult sr = random_position_search(sc, p.num_tx, p.num_rx, s.gamma, seed, opt);
    rec.failures(seed, scheme, a_over, sr);
    return std::move(sr.best);
  }
  return run_scheme(scheme, sc, p.num_tx, p.num_rx, s.gamma, seed, opt);
}

inline void add_matching_rows(ResultsBundle& b, std::uint64_t seed, double a_over, std::size_t n,
                              const AntennaLayout& init, const AntennaLayout& opt, const std::vector<MatchMethod>& methods) {
  const double identity = apm_for_layouts(init, opt, MatchMethod::kIdentity).total();
  for (MatchMethod m : methods) {
    const double total = apm_for_layouts(init, opt, m).total();
    b.tables["matching.csv"].add({fmt(seed), fmt(a_over), fmt(static_cast<std::uint64_t>(n)), to_string(m), fmt(total),
                                  fmt(reduction_pct(total, identity))});
  }
}

inline void add_plan_rows(ResultsBundle& b, std::uint64_t seed, const AntennaLayout& init, const AntennaLayout& opt,
                          const LayoutMatching& lm) {
  auto add = [&](const char* array, const MatchingPlan& plan, const std::vector<Position3>& from,
                 const std::vector<Position3>& to) {
    for (std::size_t i = 0; i < plan.dest_index.size(); ++i) {
      const Position3& a = from[i];
      const Position3& d = to[plan.dest_index[i]];
      b.tables["plan.csv"].add({fmt(seed), array, fmt(static_cast<std::uint64_t>(i)),
                                fmt(static_cast<std::uint64_t>(plan.dest_index[i])), fmt(plan.distance[i]), fmt(a.x),
                                fmt(a.y), fmt(d.x), fmt(d.y)});
    }
  };
  add("transmit", lm.transmit, init.transmit, opt.transmit);
  add("receive", lm.receive, init.receive, opt.receive);
}

}  // namespace detail

/// Executes one command. Results depend only on the configuration and seeds,
/// never on the thread count.
inline ResultsBundle run(const RunConfig& cfg) {
  const Settings s = settings_from_json(cfg.document);
  ResultsBundle b;
  b.config_text = cfg.document.dump(2) + "\n";
  detail::Recorder rec{cfg, b};
  RpOptions opt = s.rp;
  opt.threads = std::max<std::size_t>(1, cfg.threads);
  const SceneParams& base = s.scene;
  const double a_over = base.region_side / base.wavelength;

  auto ensure = [&](const char* name, Table t) { b.tables.emplace(name, std::move(t)); };
  ensure("failures.csv", detail::failures_table());

  switch (cfg.command) {
    case Command::kSolve: {
      ensure("results.csv", detail::results_table(base));
      ensure("traces.csv", detail::traces_table());
      ensure("layouts.csv", detail::layouts_table());
      ensure("matching.csv", detail::matching_table());
      ensure("plan.csv", detail::plan_table());
      for (std::uint64_t seed : s.seeds) {
        const Scenario sc = make_scenario(base, seed);
        const CandidateResult best = detail::run_one_scheme(Scheme::kMA, sc, base, s, seed, opt, rec, a_over);
        rec.result(seed, Scheme::kMA, a_over, best);
        const AntennaLayout init = sample_layout(sc.tx_region, sc.rx_region, base.num_tx, base.num_rx, sc.min_spacing,
                                                 derive_seed(seed, kInitialLayoutStream), opt.layout_attempts);
        rec.layout(seed, "initial", a_over, init);
        rec.layout(seed, "MA", a_over, best.layout);
        const LayoutMatching lm = apm_for_layouts(init, best.layout, MatchMethod::kGreedy);
        detail::add_plan_rows(b, seed, init, best.layout, lm);
        detail::add_matching_rows(b, seed, a_over, base.num_tx, init, best.layout, s.apm_methods);
      }
      break;
    }
    case Command::kBaselines:
    case Command::kSweep: {
      ensure("results.csv", detail::results_table(base));
      ensure("traces.csv", detail::traces_table());
      ensure("summary.csv", detail::summary_table());
      const std::vector<double> sides =
          cfg.command == Command::kSweep ? s.sweep.sides_wavelengths : std::vector<double>{a_over};
      const std::vector<Scheme> schemes = cfg.command == Command::kSweep
                                              ? s.sweep.schemes
                                              : std::vector<Scheme>{Scheme::kMA, Scheme::kFPAF, Scheme::kFPAH};
      for (double side : sides) {
        SceneParams p = base;
        p.region_side = side * base.wavelength;
        for (Scheme scheme : schemes) {
          for (std::uint64_t seed : s.seeds) {
            const Scenario sc = make_scenario(p, seed);
            rec.result(seed, scheme, side, detail::run_one_scheme(scheme, sc, p, s, seed, opt, rec, side));
          }
        }
      }
      detail::summarize(b.tables["results.csv"], b.tables["summary.csv"]);
      break;
    }
    case Command::kApm: {
      ensure("matching.csv", detail::matching_table());
      Table summary{{"method", "count", "mean_total_distance_m", "mean_reduction_pct"}, {}};
      std::map<std::string, std::pair<double, double>> sums;
      const auto [tx, rx] = make_regions(base.region_side, base.region_gap);
      for (std::uint64_t seed : s.seeds) {
        const AntennaLayout init = sample_layout(tx, rx, base.num_tx, base.num_rx, base.min_spacing,
                                                 derive_seed(seed, kInitialLayoutStream), opt.layout_attempts);
        const AntennaLayout dest = sample_layout(tx, rx, base.num_tx, base.num_rx, base.min_spacing,
                                                 derive_seed(seed, kApmOptStream), opt.layout_attempts);
        detail::add_matching_rows(b, seed, a_over, base.num_tx, init, dest, s.apm_methods);
      }
      for (MatchMethod m : s.apm_methods) {
        double total = 0.0, red = 0.0;
        std::size_t n = 0;
        for (const auto& r : b.tables["matching.csv"].rows) {
          if (r[3] != to_string(m)) continue;
          total += std::stod(r[4]);
          red += std::stod(r[5]);
          ++n;
        }
        if (n > 0) {
          summary.add({to_string(m), fmt(static_cast<std::uint64_t>(n)), fmt(total / static_cast<double>(n)),
                       fmt(red / static_cast<double>(n))});
        }
      }
      b.tables["apm_summary.csv"] = std::move(summary);
      break;
    }
    case Command::kBeampattern: {
      Table focus{{"seed", "index", "x", "y", "z", "gain"}, {}};
      ensure("layouts.csv", detail::layouts_table());
      const BeamSettings& bs = s.beam;
      for (std::uint64_t seed : s.seeds) {
        SceneParams p = base;
        const Scenario sc = make_scenario(p, seed);
        AntennaLayout lay;
        std::string label;
        switch (bs.layout) {
          case BeamLayout::kFpaf:
            lay = {fpaf_positions(sc.tx_region, bs.num_antennas), fpaf_positions(sc.rx_region, p.num_rx), sc.min_spacing};
            label = "FPAF";
            break;
          case BeamLayout::kFpah:
            lay = fpah_layout(sc, bs.num_antennas, p.num_rx);
            label = "FPAH";
            break;
          case BeamLayout::kRandom:
            lay = sample_layout(sc.tx_region, sc.rx_region, bs.num_antennas, p.num_rx, sc.min_spacing,
                                derive_seed(seed, kBeamLayoutStream), opt.layout_attempts);
            label = "random";
            break;
          case BeamLayout::kOptimized:
            lay = random_position_search(sc, bs.num_antennas, p.num_rx, s.gamma, seed, opt).best.layout;
            label = "MA";
            break;
        }
        rec.layout(seed, label, a_over, lay);
        std::vector<Position3> pts;
        if (bs.focus) {
          pts = *bs.focus;
        } else {
          for (const auto& n : sc.targets) pts.push_back(n.position);
          for (const auto& n : sc.dl_users) pts.push_back(n.position);
        }
        require(!pts.empty(), "beampattern needs focus points (no targets or DL users in the scenario)");
        const CVec w = focusing_beamformer(lay.transmit, pts, sc.wavelength);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          focus.add({fmt(seed), fmt(static_cast<std::uint64_t>(i)), fmt(pts[i].x), fmt(pts[i].y), fmt(pts[i].z),
                     fmt(beam_gain(w, lay.transmit, pts[i], sc.wavelength))});
        }
        b.grids.push_back({"grid_seed" + std::to_string(seed),
                           beampattern_grid(lay.transmit, w, bs.grid, sc.wavelength, opt.threads)});
      }
      b.tables["focus.csv"] = std::move(focus);
      b.grid_binary = bs.binary;
      break;
    }
  }

  json files = json::array();
  for (const auto& [name, t] : b.tables) files.push_back(name);
  for (const auto& g : b.grids) {
    files.push_back(g.name + ".csv");
    if (b.grid_binary) files.push_back(g.name + ".bin");
  }
  files.push_back("config.json");
  json seeds = json::array();
  for (auto v : s.seeds) seeds.push_back(v);
  b.manifest = json{{"library", "maisac"},
                    {"version", kVersion},
                    {"command", to_string(cfg.command)},
                    {"config_file", "config.json"},
                    {"config_hash_fnv1a64", fnv1a_hex(b.config_text)},
                    {"seeds", seeds},
                    {"files", files}};
  return b;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Writes every table, grid, config.json and manifest.json into `dir`,
/// overwriting earlier files of the same names.
inline std::vector<std::string> write_results(const ResultsBundle& b, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  for (const auto& [name, t] : b.tables) {
    detail::write_text(fs::path(dir) / name, t.csv());
    written.push_back(name);
  }
  for (const auto& g : b.grids) {
    write_grid_csv(g.grid, (fs::path(dir) / (g.name + ".csv")).string());
    written.push_back(g.name + ".csv");
    if (b.grid_binary) {
      write_grid_binary(g.grid, (fs::path(dir) / (g.name + ".bin")).string());
      written.push_back(g.name + ".bin");
    }
  }
  detail::write_text(fs::path(dir) / "config.json", b.config_text);
  detail::write_text(fs::path(dir) / "manifest.json", b.manifest.dump(2) + "\n");
  written.push_back("config.json");
  written.push_back("manifest.json");
  return written;
}

}  // namespace maisac
