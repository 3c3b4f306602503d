#pragma once

// JSON configuration and manifest handling, CSV writers and the on-disk
// output layout.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pagame/bounds.hpp"
#include "pagame/core.hpp"
#include "pagame/engine.hpp"
#include "pagame/presets.hpp"

namespace pagame {

using json = nlohmann::json;

/// Malformed configuration document (syntax, unknown key, wrong type).
class ConfigParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline double get_real(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigParseError(std::string("config: '") + key + "' must be a number");
  return j.get<double>();
}

inline std::uint64_t get_unsigned(const json& j, const char* key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigParseError(std::string("config: '") + key + "' must be a non-negative integer");
}

}  // namespace detail

/// Keys are the GameConfig field names; `T` is the horizon. Missing keys keep
/// their defaults. buffer_override: null selects the closed-form B, a number a
/// fixed B, "auto" (the default) the horizon-matched B.
inline GameConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigParseError("config: top level must be an object");
  GameConfig cfg;
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "n") cfg.n = detail::get_unsigned(v, k);
    else if (key == "T") cfg.horizon = detail::get_unsigned(v, k);
    else if (key == "r_min") cfg.r_min = detail::get_real(v, k);
    else if (key == "r_max") cfg.r_max = detail::get_real(v, k);
    else if (key == "gamma") cfg.gamma = detail::get_real(v, k);
    else if (key == "theta_max") cfg.theta_max = detail::get_real(v, k);
    else if (key == "m_pr") cfg.m_pr = detail::get_real(v, k);
    else if (key == "w") cfg.w = detail::get_real(v, k);
    else if (key == "m_ag") cfg.m_ag = detail::get_real(v, k);
    else if (key == "k") cfg.k = detail::get_real(v, k);
    else if (key == "varsigma") cfg.varsigma = detail::get_real(v, k);
    else if (key == "sigma2_ag") cfg.sigma2_ag = detail::get_real(v, k);
    else if (key == "sigma2_pr") cfg.sigma2_pr = detail::get_real(v, k);
    else if (key == "seed") cfg.seed = detail::get_unsigned(v, k);
    else if (key == "replicates") cfg.replicates = detail::get_unsigned(v, k);
    else if (key == "buffer_override") {
      if (v.is_null()) {
        cfg.buffer_mode = BufferMode::theoretical;
      } else if (v.is_string() && v.get<std::string>() == "auto") {
        cfg.buffer_mode = BufferMode::automatic;
      } else if (v.is_number()) {
        cfg.buffer_mode = BufferMode::fixed;
        cfg.buffer_value = v.get<double>();
      } else {
        throw ConfigParseError("config: 'buffer_override' must be null, a number or \"auto\"");
      }
    } else {
      throw ConfigParseError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline json config_to_json(const GameConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["T"] = cfg.horizon;
  j["r_min"] = cfg.r_min;
  j["r_max"] = cfg.r_max;
  j["gamma"] = cfg.gamma;
  j["theta_max"] = cfg.theta_max;
  j["m_pr"] = cfg.m_pr;
  j["w"] = cfg.w;
  j["m_ag"] = cfg.m_ag;
  j["k"] = cfg.k;
  j["varsigma"] = cfg.varsigma;
  j["sigma2_ag"] = cfg.sigma2_ag;
  j["sigma2_pr"] = cfg.sigma2_pr;
  switch (cfg.buffer_mode) {
    case BufferMode::theoretical: j["buffer_override"] = nullptr; break;
    case BufferMode::automatic: j["buffer_override"] = "auto"; break;
    case BufferMode::fixed: j["buffer_override"] = cfg.buffer_value; break;
  }
  j["seed"] = cfg.seed;
  j["replicates"] = cfg.replicates;
  return j;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(path.string() + ": " + e.what());
  }
}

inline GameConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

inline RewardModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("r0") || !j.contains("theta0"))
    throw ConfigParseError("model: expected an object with 'r0' and 'theta0'");
  for (const auto& [key, v] : j.items())
    if (key != "r0" && key != "theta0" && key != "source")
      throw ConfigParseError("model: unknown key '" + key + "'");
  RewardModel m;
  try {
    m.r0 = j.at("r0").get<Vector>();
    m.theta0 = j.at("theta0").get<Vector>();
  } catch (const json::exception&) {
    throw ConfigParseError("model: 'r0' and 'theta0' must be arrays of numbers");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  GameConfig config;
  std::string model_source;  // preset name or "custom"
  RewardModel model;
  std::string command = "run";  // run | sweep
  std::vector<std::size_t> horizons;  // sweep horizons; {T} for run
  std::string solver = "hybrid";
  std::size_t refresh_every = 50;
  std::string out_dir;
  std::string tool_version;
  std::string timestamp;

  bool operator==(const RunManifest&) const = default;
};

inline json manifest_to_json(const RunManifest& m) {
  json j;
  j["config"] = config_to_json(m.config);
  j["model"] = {{"source", m.model_source}, {"r0", m.model.r0}, {"theta0", m.model.theta0}};
  j["command"] = m.command;
  j["horizons"] = m.horizons;
  j["solver"] = m.solver;
  j["refresh_every"] = m.refresh_every;
  j["out_dir"] = m.out_dir;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.config = config_from_json(j.at("config"));
    m.model = model_from_json(j.at("model"));
    m.model_source = j.at("model").value("source", std::string("custom"));
    m.command = j.at("command").get<std::string>();
    m.horizons = j.at("horizons").get<std::vector<std::size_t>>();
    m.solver = j.at("solver").get<std::string>();
    m.refresh_every = j.at("refresh_every").get<std::size_t>();
    m.out_dir = j.value("out_dir", std::string());
    m.tool_version = j.value("tool_version", std::string());
    m.timestamp = j.value("timestamp", std::string());
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("manifest: ") + e.what());
  }
  return m;
}

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest representation that round-trips; NaN becomes an empty field.
inline std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* const kTraceHeader =
    "t,mode,chosen_arm,incentive_sum,regret_cum,linf_err,agent_correct";

/// Arms are written 1-based.
inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace.steps) {
    double sum = 0.0;
    for (double v : s.pi) sum += v;
    out << s.t << ',' << to_string(s.mode) << ',' << s.chosen_arm + 1 << ',' << format_double(sum)
        << ',' << format_double(s.regret_cum) << ',' << format_double(s.linf_error) << ','
        << (s.agent_correct ? 1 : 0) << '\n';
  }
}

inline const char* const kSummaryHeader =
    "n,T,replicate,seed,linf_final,l1_final,regret_final,wallclock_s,l1_exploit_final";

struct SummaryOptions {
  bool record_wallclock = false;  // off by default so reruns are byte-identical
};

/// One row per replicate followed by mean, std and stderr rows. Failed
/// replicates keep their row with empty metrics.
inline void write_summary_rows(std::ostream& out, const ResultTable& table,
                               const SummaryOptions& opt = {}) {
  const auto wall = [&](double v) { return opt.record_wallclock ? format_double(v) : std::string(); };
  for (const auto& r : table.rows) {
    out << r.n << ',' << r.horizon << ',' << r.replicate << ',' << r.seed << ',';
    if (r.ok)
      out << format_double(r.linf_final) << ',' << format_double(r.l1_final) << ','
          << format_double(r.regret_final) << ',' << wall(r.wallclock_s) << ','
          << format_double(r.l1_exploit_final);
    else
      out << ",,,,";
    out << '\n';
  }
  const auto linf = table.metric(&ReplicateResult::linf_final);
  const auto l1 = table.metric(&ReplicateResult::l1_final);
  const auto regret = table.metric(&ReplicateResult::regret_final);
  const auto wc = table.metric(&ReplicateResult::wallclock_s);
  const auto l1x = table.metric(&ReplicateResult::l1_exploit_final);
  const auto row = [&](const char* label, double MetricSummary::*f) {
    out << table.config.n << ',' << table.config.horizon << ',' << label << ",,"
        << format_double(linf.*f) << ',' << format_double(l1.*f) << ','
        << format_double(regret.*f) << ',' << wall(wc.*f) << ',' << format_double(l1x.*f) << '\n';
  };
  row("mean", &MetricSummary::mean);
  row("std", &MetricSummary::std);
  row("stderr", &MetricSummary::stderr_);
}

inline void write_summary_csv(std::ostream& out, std::span<const ResultTable> tables,
                              const SummaryOptions& opt = {}) {
  out << kSummaryHeader << '\n';
  for (const auto& t : tables) write_summary_rows(out, t, opt);
}

inline void write_failures_csv(std::ostream& out, std::span<const ResultTable> tables) {
  out << "n,T,replicate,seed,error\n";
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      if (!r.ok) {
        std::string msg = r.error;
        for (char& c : msg)
          if (c == '"') c = '\'';
        out << r.n << ',' << r.horizon << ',' << r.replicate << ',' << r.seed << ",\"" << msg
            << "\"\n";
      }
}

inline const char* const kBoundsHeader =
    "t,pt_bound,concentration_raw,concentration,regret_term1,regret_term2,regret_term3,"
    "regret_term4,regret_term5,regret_term6,regret_bound";

/// Bound overlays for t in [k~, T]. The concentration bound uses the expected
/// exploration count of the principal's schedule; every column that depends on
/// alpha holds only up to that constant.
inline void write_bounds_csv(std::ostream& out, const BoundParams& p, std::size_t T,
                             double buffer_scale = -1.0) {
  if (T < p.k_tilde) throw DomainError("bounds: T is below k~ (empty range)");
  out << kBoundsHeader << '\n';
  double eta = expected_eta(p, p.k_tilde);
  for (std::size_t t = p.k_tilde; t <= T; ++t) {
    if (t > p.k_tilde) {
      const std::size_t tau = t - 1;
      if (tau >= std::max(p.k_tilde, p.n + 1))
        eta += std::min(1.0, p.m_pr / std::pow(static_cast<double>(tau), 0.5 - p.w));
    }
    const auto conc = concentration_bound(p, lambda_t(p, eta, t), p.beta, t);
    const auto rb = regret_bound(p, t, buffer_scale);
    out << t << ',' << format_double(pt_bound(p.k, t)) << ',' << format_double(conc.raw) << ','
        << format_double(conc.clamped);
    for (double v : rb.terms) out << ',' << format_double(v);
    out << ',' << format_double(rb.total) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Output layout: <out>/<preset>/<T>/replicate_<i>/trace_<preset>_T<T>_r<i>.csv

inline std::filesystem::path replicate_dir(const std::filesystem::path& out,
                                           std::string_view preset, std::size_t T,
                                           std::size_t replicate) {
  return out / std::string(preset) / std::to_string(T) / ("replicate_" + std::to_string(replicate));
}

inline std::string trace_file_name(std::string_view preset, std::size_t T, std::size_t replicate) {
  return "trace_" + std::string(preset) + "_T" + std::to_string(T) + "_r" +
         std::to_string(replicate) + ".csv";
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& body) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pagame
