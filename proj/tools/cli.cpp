#include "cli.hpp"

#include <glob.h>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "eerec/audit.hpp"
#include "eerec/errors.hpp"
#include "eerec/http.hpp"
#include "eerec/metrics.hpp"
#include "eerec/service.hpp"
#include "eerec/sim.hpp"

namespace eerec {

namespace {

namespace fs = std::filesystem;

// --config files are JSON objects keyed by long option name; nested objects
// address subcommands.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || opt->get_configurable() == false) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? Json(r.front()) : Json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError("config", e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void flatten(const Json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

ScenarioSpec load_spec(const std::string& path) {
  if (path.empty()) return office_week_spec();
  auto spec = read_json_file(path).get<ScenarioSpec>();
  spec.validate();
  return spec;
}

std::vector<Persona> load_personas(const std::string& path) {
  const Json j = read_json_file(path);
  std::vector<Persona> out;
  if (j.is_array()) {
    for (const auto& p : j) out.push_back(p.get<Persona>());
  } else {
    out.push_back(j.get<Persona>());
  }
  if (out.empty()) throw ValidationError(path + ": no personas");
  return out;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::set<std::string> paths;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.insert(g.gl_pathv[i]);
    globfree(&g);
  }
  if (paths.empty()) throw ValidationError("no log files match");
  return {paths.begin(), paths.end()};
}

struct KbArgs {
  std::string readings;
  int weeks = 3;
  std::string out;
  std::string thresholds;
};

int kb_build(const KbArgs& a, std::ostream& out) {
  std::ifstream in(a.readings);
  if (!in) throw NotFoundError("cannot open " + a.readings);
  const auto readings = read_readings_jsonl(in);
  const Thresholds th = a.thresholds.empty() ? Thresholds{} : read_json_file(a.thresholds).get<Thresholds>();
  const auto kb = build_knowledge(readings, a.weeks, th);
  write_json_file(a.out, kb);
  out << "knowledge base from " << readings.size() << " readings (" << kb.rejected_readings << " rejected), "
      << a.weeks << " weeks -> " << a.out << "\n";
  return kExitOk;
}

struct TraceArgs {
  std::string spec;
  std::string out;
  int first_week = 0;
  int weeks = 1;
  std::optional<std::uint64_t> seed;
};

int trace_generate(const TraceArgs& a, std::ostream& out) {
  const auto spec = load_spec(a.spec);
  if (a.weeks < 1 || a.first_week < 0) throw ValidationError("weeks must be >= 1 and first-week >= 0");
  const auto readings = generate_trace(spec, a.first_week, a.weeks, a.seed);
  std::ofstream file(a.out);
  if (!file) throw Error("cannot write " + a.out);
  write_readings_jsonl(file, readings);
  out << readings.size() << " readings -> " << a.out << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string spec;
  std::vector<std::string> personas;
  std::vector<std::string> modes{"explainable"};
  std::uint64_t seed = 0;
  int seeds = 1;
  std::string out;
  std::string user;
  int week = 0;
  int days = 0;
  std::string engine;
  std::string projection = "uniform";
  std::string adapt;
  int parallel = 1;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const auto spec = load_spec(a.spec);
  RunOptions base;
  base.week = a.week;
  base.days = a.days;
  if (!a.engine.empty()) base.engine = read_json_file(a.engine).get<EngineConfig>();
  if (!a.adapt.empty()) base.adapt = read_json_file(a.adapt).get<AdaptConfig>();
  base.projection = Json(a.projection).get<ProjectionPolicy>();

  std::vector<Persona> personas;
  for (const auto& path : a.personas)
    for (auto& p : load_personas(path)) personas.push_back(std::move(p));
  if (!a.user.empty()) {
    if (personas.size() != 1) throw ValidationError("--user needs exactly one persona");
    personas.front().name = a.user;
  }
  if (a.seeds < 1) throw ValidationError("--seeds must be >= 1");

  struct Run {
    const Persona* persona;
    RunOptions opt;
    std::string path;
  };
  std::vector<Run> runs;
  for (const auto& p : personas)
    for (const auto& m : a.modes)
      for (int k = 0; k < a.seeds; ++k) {
        Run r{&p, base, ""};
        r.opt.mode = parse_enum<ScenarioMode>(m);
        r.opt.seed = a.seed + static_cast<std::uint64_t>(k);
        r.opt.user = p.name;
        runs.push_back(std::move(r));
      }

  if (runs.size() == 1 && !fs::is_directory(a.out)) {
    runs.front().path = a.out;
  } else {
    fs::create_directories(a.out);
    for (auto& r : runs)
      r.path = (fs::path(a.out) / (r.opt.user + "-" + std::string(to_string(r.opt.mode)) + "-" +
                                   std::to_string(r.opt.seed) + ".jsonl"))
                   .string();
  }
  std::set<std::string> unique_paths;
  for (const auto& r : runs)
    if (!unique_paths.insert(r.path).second) throw ValidationError("two runs would write " + r.path);

  std::vector<std::string> lines(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const auto& r = runs[i];
        const auto log = run_session(spec, *r.persona, r.opt);
        std::ofstream file(r.path);
        if (!file) throw Error("cannot write " + r.path);
        write_log_jsonl(file, log.events());
        const auto s = summarize(log.events());
        lines[i] = r.path + ": " + std::to_string(log.size()) + " events, " + std::to_string(s.issued) +
                   " recommendations, accepted " + std::to_string(s.overall.accepted) + ", rejected " +
                   std::to_string(s.overall.rejected) + ", ignored " + std::to_string(s.overall.ignored);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(a.parallel, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& l : lines) out << l << "\n";
  return kExitOk;
}

struct AuditArgs {
  std::string log;
  bool json = false;
  double tolerance = 1e-9;
};

int audit(const AuditArgs& a, std::ostream& out) {
  const auto log = read_log_file(a.log);
  const auto rep = audit_log(log.events(), {a.tolerance});
  if (a.json) {
    out << Json(rep).dump(2) << "\n";
  } else {
    for (const auto& v : rep.violations)
      out << "violation " << v.rule << " at seq " << v.seq << " (" << format_timestamp(v.time) << "): " << v.detail
          << "\n";
    out << a.log << ": " << rep.events << " events, " << rep.recommendations << " recommendations, "
        << rep.violations.size() << " violations; quoted " << rep.quoted_kwh << " kWh of " << rep.metered_kwh
        << " kWh metered\n";
  }
  return rep.ok() ? kExitOk : kExitRuntime;
}

struct ReportArgs {
  std::vector<std::string> logs;
  std::string format = "text";
  bool force = false;
  std::string out;
};

int report(const ReportArgs& a, std::ostream& out) {
  std::vector<SessionSummary> summaries;
  for (const auto& path : expand_globs(a.logs)) {
    try {
      summaries.push_back(summarize(read_log_file(path).events()));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  const auto r = report_metrics(summaries, a.force);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error("cannot write " + a.out);
  }
  std::ostream& dst = a.out.empty() ? out : file;
  if (a.format == "json")
    dst << Json(r).dump(2) << "\n";
  else if (a.format == "csv")
    write_report_csv(dst, r);
  else
    write_report_text(dst, r);
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data;
  double speedup = 60.0;
  bool no_pause = false;
};

int serve(const ServeArgs& a, std::ostream& out) {
  ServiceConfig cfg;
  cfg.data_dir = resolve_data_dir(a.data.empty() ? std::nullopt : std::optional<std::string>(a.data));
  cfg.speedup = a.speedup;
  cfg.pause_without_subscribers = !a.no_pause;
  SessionManager manager(cfg, std::make_shared<SteadyClock>());
  const auto recovered = manager.recover();
  HttpServer server(manager, HttpOptions{a.host, a.port});
  const int port = server.bind();
  out << "serving on http://" << a.host << ":" << port << " (data " << cfg.data_dir.string() << ", " << recovered
      << " sessions recovered)" << std::endl;
  server.listen();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-aware energy-saving recommendations: knowledge bases, simulation, audits, reports"};
  app.name("eerec");
  app.require_subcommand(1, 1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; command-line flags take precedence");

  auto* kb = app.add_subcommand("kb", "Knowledge base tools")->require_subcommand(1, 1);
  KbArgs kb_args;
  auto* kb_build_cmd = kb->add_subcommand("build", "Build a knowledge base from sensor readings");
  kb_build_cmd->add_option("--readings", kb_args.readings, "Readings JSONL")->required();
  kb_build_cmd->add_option("--weeks", kb_args.weeks, "Weeks of history to aggregate")->check(CLI::PositiveNumber);
  kb_build_cmd->add_option("--out", kb_args.out, "Output JSON")->required();
  kb_build_cmd->add_option("--thresholds", kb_args.thresholds, "Thresholds JSON");

  auto* trace = app.add_subcommand("trace", "Sensor traces")->require_subcommand(1, 1);
  TraceArgs trace_args;
  auto* trace_gen = trace->add_subcommand("generate", "Generate an open-loop reading trace from a scenario");
  trace_gen->add_option("--spec", trace_args.spec, "Scenario JSON (default: built-in office-week)");
  trace_gen->add_option("--out", trace_args.out, "Output JSONL")->required();
  trace_gen->add_option("--first-week", trace_args.first_week, "First simulated week");
  trace_gen->add_option("--weeks", trace_args.weeks, "Number of weeks");
  trace_gen->add_option("--seed", trace_args.seed, "Random seed (default: the scenario's)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run scripted-persona sessions");
  sim_cmd->add_option("--spec", sim.spec, "Scenario JSON (default: built-in office-week)");
  sim_cmd->add_option("--persona", sim.personas, "Persona JSON (object or array); repeatable")->required();
  sim_cmd->add_option("--mode", sim.modes, "plain|persuasive|explainable; repeatable")
      ->check(CLI::IsMember({"plain", "persuasive", "explainable"}));
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--seeds", sim.seeds, "Number of consecutive seeds to run");
  sim_cmd->add_option("--out", sim.out, "Log file, or directory when several runs are requested")->required();
  sim_cmd->add_option("--user", sim.user, "User name recorded in the log (single persona)");
  sim_cmd->add_option("--week", sim.week, "Simulated week (default: after the history weeks)");
  sim_cmd->add_option("--days", sim.days, "Simulate only the first N days");
  sim_cmd->add_option("--engine", sim.engine, "Engine config JSON");
  sim_cmd->add_option("--projection", sim.projection, "uniform|actual|monthly|annual")
      ->check(CLI::IsMember({"uniform", "actual", "monthly", "annual"}));
  sim_cmd->add_option("--adapt", sim.adapt, "Adaptation config JSON");
  sim_cmd->add_option("--parallel", sim.parallel, "Worker threads")->check(CLI::PositiveNumber);

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "Check a session log against the engine rules");
  audit_cmd->add_option("--log", audit_args.log, "Session log JSONL")->required();
  audit_cmd->add_flag("--json", audit_args.json, "Print the report as JSON");
  audit_cmd->add_option("--tolerance", audit_args.tolerance, "Relative tolerance for figures");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Acceptance metrics over session logs");
  report_cmd->add_option("--logs", report_args.logs, "Log files or glob patterns")->required();
  report_cmd->add_option("--format", report_args.format, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  report_cmd->add_flag("--force", report_args.force, "Combine logs from different engine configurations");
  report_cmd->add_option("--out", report_args.out, "Write to a file instead of stdout");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the live session service");
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--port", serve_args.port, "TCP port (0 = any)");
  serve_cmd->add_option("--data", serve_args.data, "Data directory (default: $EEREC_DATA_DIR or ./data)");
  serve_cmd->add_option("--speedup", serve_args.speedup, "Simulated seconds per wall-clock second")
      ->check(CLI::PositiveNumber);
  serve_cmd->add_flag("--no-pause", serve_args.no_pause, "Keep sessions running without subscribers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (kb_build_cmd->parsed()) return kb_build(kb_args, out);
    if (trace_gen->parsed()) return trace_generate(trace_args, out);
    if (sim_cmd->parsed()) return simulate(sim, out);
    if (audit_cmd->parsed()) return audit(audit_args, out);
    if (report_cmd->parsed()) return report(report_args, out);
    if (serve_cmd->parsed()) return serve(serve_args, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace eerec
