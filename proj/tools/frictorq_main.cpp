#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frictorq/dynamics.hpp"
#include "frictorq/friction.hpp"
#include "frictorq/linalg.hpp"
#include "frictorq/model.hpp"
#include "frictorq/rng.hpp"
#include "frictorq/runlog.hpp"
#include "frictorq/scenario.hpp"
#include "frictorq/sim.hpp"
#include "frictorq/state.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frictorq;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json metrics_json(const RunMetrics& m) {
  json j;
  j["rms_s_err"] = m.rms_s;
  j["max_s_err"] = m.max_s;
  if (m.has_com) {
    j["rms_com_err"] = m.rms_com;
    j["max_com_err"] = m.max_com;
  }
  if (m.has_hlin) {
    j["rms_hlin_err"] = m.rms_hlin;
    j["max_hlin_err"] = m.max_hlin;
  }
  return j;
}

std::string controller_name(ControllerKind k) {
  return k == ControllerKind::ef ? "ef" : "baseline";
}

std::string plot_script(const std::vector<std::pair<std::string, std::string>>& files_titles,
                        const RunLog& log, const std::string& png) {
  std::string s;
  s += "# error norms over time\n";
  s += "set datafile separator ','\n";
  s += "set xlabel 't [s]'\n";
  s += "set grid\n";
  s += "set key outside\n";
  s += "set term pngcairo size 1000,700\n";
  s += "set output '" + png + "'\n";
  s += "plot ";
  bool first = true;
  for (const auto& [file, title] : files_titles) {
    const int cs = log.col("err_s_norm") + 1;
    if (!first) s += ", \\\n     ";
    s += "'" + file + "' using 1:" + std::to_string(cs) + " with lines title '" + title +
         " joint err'";
    first = false;
    const int ch = log.col("err_hlin_norm");
    if (ch >= 0) {
      s += ", \\\n     '" + file + "' using 1:" + std::to_string(ch + 1) + " with lines title '" +
           title + " Hlin err'";
    }
  }
  s += "\n";
  return s;
}

fs::path resolve_output(const std::string& flag_out, const ScenarioConfig& cfg) {
  if (!flag_out.empty()) return flag_out;
  if (!cfg.output.empty()) return cfg.output;
  return ".";
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
  const ScenarioConfig cfg = load_scenario(config_path);
  const fs::path out = resolve_output(out_flag, cfg);
  fs::create_directories(out);

  const RunLog log = run_scenario(cfg);
  log.write_csv((out / "run.csv").string());

  json summary;
  summary["command"] = "run";
  summary["config"] = config_path;
  summary["controller"] = controller_name(cfg.controller);
  summary["mode"] = cfg.mode == ModeKind::floating_base ? "floating_base" : "fixed_base";
  summary["duration"] = cfg.duration;
  summary["rows"] = log.rows.size();
  summary["metrics"] = metrics_json(run_metrics(log));
  write_text(out / "summary.json", summary.dump(2) + "\n");

  write_text(out / "plot.gp", plot_script({{"run.csv", controller_name(cfg.controller)}}, log,
                                          "run.png"));
  std::cout << "wrote " << (out / "run.csv").string() << ", summary.json, plot.gp\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_flag) {
  ScenarioConfig cfg = load_scenario(config_path);
  const fs::path out = resolve_output(out_flag, cfg);
  fs::create_directories(out);

  cfg.controller = ControllerKind::baseline;
  const RunLog log_base = run_scenario(cfg);
  cfg.controller = ControllerKind::ef;
  const RunLog log_ef = run_scenario(cfg);

  log_base.write_csv((out / "run_baseline.csv").string());
  log_ef.write_csv((out / "run_ef.csv").string());

  const CompareReport rep = compare_runs(log_base, log_ef);
  json summary;
  summary["command"] = "compare";
  summary["config"] = config_path;
  summary["baseline"] = metrics_json(rep.a);
  summary["ef"] = metrics_json(rep.b);
  json ratios;
  ratios["rms_s_err"] = rep.ratio_rms_s;
  ratios["max_s_err"] = rep.ratio_max_s;
  if (rep.a.has_com) {
    ratios["rms_com_err"] = rep.ratio_rms_com;
    ratios["max_com_err"] = rep.ratio_max_com;
  }
  if (rep.a.has_hlin) {
    ratios["rms_hlin_err"] = rep.ratio_rms_hlin;
    ratios["max_hlin_err"] = rep.ratio_max_hlin;
  }
  summary["ratios_ef_over_baseline"] = ratios;
  write_text(out / "summary.json", summary.dump(2) + "\n");

  write_text(out / "plot.gp",
             plot_script({{"run_baseline.csv", "baseline"}, {"run_ef.csv", "ef"}}, log_base,
                         "compare.png"));
  std::cout << "wrote run_baseline.csv, run_ef.csv, summary.json, plot.gp in " << out.string()
            << "\n";
  return 0;
}

int sweep_thread_count(size_t jobs) {
  if (const char* env = std::getenv("FRICTORQ_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return std::min<size_t>(v, jobs);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<size_t>(hw ? hw : 1, jobs));
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& sigmas,
              const std::string& out_flag) {
  for (double s : sigmas) {
    if (s < 0) throw ModelError("sweep: sigma must be >= 0");
  }
  const ScenarioConfig base_cfg = load_scenario(config_path);
  const fs::path out = resolve_output(out_flag, base_cfg);
  fs::create_directories(out);

  struct Job {
    double sigma;
    ControllerKind ctl;
    RunMetrics metrics;
    std::exception_ptr error;
  };
  std::vector<Job> jobs;
  for (double s : sigmas) {
    jobs.push_back({s, ControllerKind::baseline, {}, nullptr});
    jobs.push_back({s, ControllerKind::ef, {}, nullptr});
  }

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        ScenarioConfig cfg = base_cfg;
        cfg.noise.sigma_v = jobs[i].sigma;
        cfg.controller = jobs[i].ctl;
        jobs[i].metrics = run_metrics(run_scenario(cfg));
      } catch (...) {
        jobs[i].error = std::current_exception();
      }
    }
  };

  const int threads = sweep_thread_count(jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const Job& job : jobs) {
    if (job.error) std::rethrow_exception(job.error);
  }

  std::ofstream csv(out / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  csv << "sigma,controller,rms_err,max_err\n";
  char buf[128];
  for (const Job& job : jobs) {
    std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g\n", job.sigma,
                  controller_name(job.ctl).c_str(), job.metrics.rms_s, job.metrics.max_s);
    csv << buf;
  }
  std::cout << "wrote " << (out / "sweep.csv").string() << " (" << jobs.size() << " rows)\n";
  return 0;
}

int cmd_condition(const std::string& model_path, int samples, uint64_t seed,
                  const std::string& out_path) {
  const RobotModel model = load_model(model_path);
  const int n = model.n_joints();
  const CounterRng rng(seed);

  std::ofstream csv(out_path);
  if (!csv) throw std::runtime_error("cannot write " + out_path);
  csv << "config_index,cond_ms,cond_ms_bar,ratio\n";

  std::vector<double> ratios;
  char buf[160];
  for (int i = 0; i < samples; ++i) {
    RobotState state = RobotState::zero(model);
    for (int jx = 0; jx < n; ++jx) {
      state.s(jx) = 2.0 * rng.uniform(static_cast<uint64_t>(i) * n + jx) - 1.0;
    }
    const DynamicsQuantities dq = compute_dynamics(model, state);
    const double c_ms = condition_number(dq.M_s);
    const double c_bar = condition_number(mbar_s(dq.M_s, model.actuation));
    const double ratio = c_ms / c_bar;
    ratios.push_back(ratio);
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", i, c_ms, c_bar, ratio);
    csv << buf;
  }

  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  std::snprintf(buf, sizeof(buf), "reduction factor min=%.6g median=%.6g max=%.6g\n",
                ratios.front(), median, ratios.back());
  std::cout << buf;
  return 0;
}

int cmd_validate(const std::string& model_path) {
  const RobotModel model = load_model(model_path);
  const std::vector<std::string> violations = validate(model);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "error: " << v << "\n";
    return 2;
  }
  std::cout << "ok: " << model.links.size() << " links, " << model.n_joints() << " joints, "
            << model.n_contacts() << " contacts, "
            << (model.floating_base ? "floating" : "fixed") << " base\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"friction-exploiting whole-body torque control workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_path, cond_out = "condition.csv";
  std::vector<double> sigmas;
  int samples = 100;
  uint64_t seed = 1;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario");
  run->add_option("--config", config_path, "scenario config JSON")->required();
  run->add_option("--output", out_dir, "output directory");

  CLI::App* compare = app.add_subcommand("compare", "run baseline and ef on one scenario");
  compare->add_option("--config", config_path, "scenario config JSON")->required();
  compare->add_option("--output", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep-noise", "noise sweep over both controllers");
  sweep->add_option("--config", config_path, "scenario config JSON")->required();
  sweep->add_option("--sigmas", sigmas, "velocity noise std values")->required()->delimiter(',');
  sweep->add_option("--output", out_dir, "output directory");

  CLI::App* cond = app.add_subcommand("condition-report", "mass matrix conditioning samples");
  cond->add_option("--model", model_path, "model JSON")->required();
  cond->add_option("--samples", samples, "number of random configurations");
  cond->add_option("--seed", seed, "sampling seed");
  cond->add_option("--output", cond_out, "output CSV path");

  CLI::App* val = app.add_subcommand("validate-model", "check a model file");
  val->add_option("--model", model_path, "model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path, out_dir);
    if (app.got_subcommand(compare)) return cmd_compare(config_path, out_dir);
    if (app.got_subcommand(sweep)) return cmd_sweep(config_path, sigmas, out_dir);
    if (app.got_subcommand(cond)) return cmd_condition(model_path, samples, seed, cond_out);
    if (app.got_subcommand(val)) return cmd_validate(model_path);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
