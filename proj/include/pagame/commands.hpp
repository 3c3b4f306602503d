#pragma once

// The run / sweep / bounds commands behind the command-line tool. Kept in the
// library so tests can drive them without spawning processes.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pagame/bounds.hpp"
#include "pagame/core.hpp"
#include "pagame/engine.hpp"
#include "pagame/io.hpp"
#include "pagame/presets.hpp"
#include "pagame/principal.hpp"

namespace pagame {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_usage = 2 };

struct CommandOptions {
  std::string config_path;
  std::string manifest_path;  // replays a previous run; overrides config/model
  std::string preset;         // defaults to the preset matching n
  std::string model_path;     // JSON {"r0": [...], "theta0": [...]}
  std::string out_dir = "out";
  std::size_t jobs = 0;  // 0 = logical cores
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;  // exact | hybrid | subgradient
  std::optional<std::size_t> refresh_every;
  std::vector<std::size_t> horizons;  // sweep only
  bool record_wallclock = false;
  bool write_traces = true;
  double alpha = 1.0;   // bounds only
  double radius = 1.0;  // bounds only: estimation radius beta
};

/// Reported to the user with exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline SolveMode parse_solver(const std::string& s) {
  if (s == "exact") return SolveMode::every_step_exact;
  if (s == "hybrid") return SolveMode::hybrid;
  if (s == "subgradient") return SolveMode::subgradient_only;
  throw UsageError("unknown solver '" + s + "' (expected exact, hybrid or subgradient)");
}

inline SolveSchedule schedule_for(const RunManifest& m) {
  SolveSchedule s;
  s.mode = parse_solver(m.solver);
  s.refresh_every = m.refresh_every;
  return s;
}

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void check_violations(const std::vector<ConfigViolation>& v) {
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& x : v) msg += "\n  " + x.field + ": " + x.message;
  throw UsageError(msg);
}

}  // namespace detail

/// Resolves config, model and solver settings into the manifest that fully
/// determines a run.
inline RunManifest resolve_manifest(const CommandOptions& opt, const std::string& command) {
  RunManifest m;
  if (!opt.manifest_path.empty()) {
    m = load_manifest(opt.manifest_path);
  } else {
    if (!opt.config_path.empty()) m.config = load_config(opt.config_path);
    if (!opt.model_path.empty()) {
      m.model = model_from_json(read_json_file(opt.model_path));
      m.model_source = "custom";
    } else {
      auto p = opt.preset.empty() ? preset_for_arms(m.config.n) : find_preset(opt.preset);
      if (!p)
        throw UsageError(opt.preset.empty()
                             ? "no preset has n=" + std::to_string(m.config.n) + "; pass --model"
                             : "unknown preset '" + opt.preset + "'");
      m.model = p->model;
      m.model_source = p->name;
    }
  }
  m.command = command;
  if (opt.seed) m.config.seed = *opt.seed;
  if (opt.solver) m.solver = *opt.solver;
  if (opt.refresh_every) m.refresh_every = *opt.refresh_every;
  if (command == "sweep" && !opt.horizons.empty()) m.horizons = opt.horizons;
  if (command == "run" || m.horizons.empty()) m.horizons = {m.config.horizon};
  parse_solver(m.solver);
  if (m.refresh_every == 0) throw UsageError("refresh_every must be >= 1");

  detail::check_violations(validate_config(m.config));
  for (std::size_t T : m.horizons) {
    GameConfig c = m.config;
    c.horizon = T;
    detail::check_violations(validate_config(c));
  }
  detail::check_violations(validate_model(m.model, m.config));

  m.out_dir = opt.out_dir;
  m.tool_version = kToolVersion;
  m.timestamp = detail::utc_timestamp();
  return m;
}

/// Executes the manifest and writes every output under `out`.
inline int execute(const RunManifest& m, const CommandOptions& opt, std::ostream& log) {
  const std::filesystem::path out = opt.out_dir;
  std::filesystem::create_directories(out);
  save_manifest(m, out / "manifest.json");

  ExperimentOptions eo;
  eo.schedule = schedule_for(m);
  eo.jobs = opt.jobs;
  eo.keep_traces = opt.write_traces;
  const auto tables = run_sweep(m.config, m.model, m.horizons, eo);

  SummaryOptions so{opt.record_wallclock};
  for (const auto& t : tables) {
    const auto dir = out / m.model_source / std::to_string(t.config.horizon);
    write_text_file(dir / "summary.csv",
                    [&](std::ostream& os) { write_summary_csv(os, std::span(&t, 1), so); });
    if (!opt.write_traces) continue;
    for (const auto& r : t.rows) {
      if (!r.trace) continue;
      write_text_file(replicate_dir(out, m.model_source, t.config.horizon, r.replicate) /
                          trace_file_name(m.model_source, t.config.horizon, r.replicate),
                      [&](std::ostream& os) { write_trace_csv(os, *r.trace); });
    }
  }
  const char* combined = m.command == "sweep" ? "sweep.csv" : "summary.csv";
  write_text_file(out / combined, [&](std::ostream& os) { write_summary_csv(os, tables, so); });

  std::size_t failed = 0;
  for (const auto& t : tables) failed += t.failures();
  if (failed > 0) {
    write_text_file(out / "failures.csv", [&](std::ostream& os) { write_failures_csv(os, tables); });
    log << failed << " replicate(s) failed; see " << (out / "failures.csv").string() << '\n';
    return exit_runtime;
  }
  for (const auto& t : tables) {
    log << m.model_source << " T=" << t.config.horizon << ": regret mean "
        << format_double(t.metric(&ReplicateResult::regret_final).mean) << ", linf mean "
        << format_double(t.metric(&ReplicateResult::linf_final).mean) << '\n';
  }
  return exit_ok;
}

namespace detail {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return exit_usage;
  } catch (const ConfigParseError& e) {
    err << e.what() << '\n';
    return exit_usage;
  } catch (const DomainError& e) {
    err << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}

}  // namespace detail

inline int cmd_run(const CommandOptions& opt, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] { return execute(resolve_manifest(opt, "run"), opt, log); });
}

inline int cmd_sweep(const CommandOptions& opt, std::ostream& log = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    if (opt.horizons.empty() && opt.manifest_path.empty())
      throw UsageError("sweep needs a non-empty --T-list");
    return execute(resolve_manifest(opt, "sweep"), opt, log);
  });
}

inline int cmd_bounds(const CommandOptions& opt, std::ostream& log = std::cout,
                      std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    GameConfig cfg = opt.config_path.empty() ? GameConfig{} : load_config(opt.config_path);
    detail::check_violations(validate_config(cfg));
    if (!(opt.alpha > 0.0)) throw UsageError("alpha must be > 0");
    if (!(opt.radius > 0.0)) throw UsageError("radius must be > 0");
    const auto p = BoundParams::from_config(cfg, opt.alpha, opt.radius);
    if (cfg.horizon < p.k_tilde)
      throw DomainError("bounds: T=" + std::to_string(cfg.horizon) + " is below k~=" +
                        std::to_string(p.k_tilde) + ", empty range");
    double B = 0.0;
    try {
      B = effective_buffer_scale(cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const std::filesystem::path out = opt.out_dir;
    write_text_file(out / "bounds.csv",
                    [&](std::ostream& os) { write_bounds_csv(os, p, cfg.horizon, B); });
    log << "bounds for t in [" << p.k_tilde << ", " << cfg.horizon << "] (alpha=" << opt.alpha
        << ") written to " << (out / "bounds.csv").string() << '\n';
    return exit_ok;
  });
}

}  // namespace pagame
