// crowdorg command-line driver: planning, simulated runs, the HTTP service,
// clustering comparison and stored-run reports.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "crowdorg/metrics.hpp"
#include "crowdorg/sampling.hpp"
#include "crowdorg/serialization.hpp"
#include "crowdorg/service/engine.hpp"
#include "crowdorg/service/http_api.hpp"
#include "crowdorg/simulation.hpp"

using namespace crowdorg;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::optional<double> delta;
  std::optional<int> f, h, m, n, theta;

  void attach(CLI::App* cmd) {
    cmd->set_help_flag("--help", "print this help and exit");  // frees -h for --h
    cmd->add_option("--config", config_file, "workflow config JSON")->check(CLI::ExistingFile);
    cmd->add_option("--delta", delta, "target coverage in (0, 1)");
    cmd->add_option("--f", f, "bound on the frontier size");
    cmd->add_option("--h", h, "items per clustering task");
    cmd->add_option("--m", m, "workers per clustering task");
    cmd->add_option("--n", n, "sample size; solved from delta and f when omitted");
    cmd->add_option("--theta", theta, "workers per categorization task");
  }

  WorkflowConfig resolve() const {
    WorkflowConfig c = config_file.empty() ? WorkflowConfig{} : load_config(config_file);
    if (delta) c.delta = *delta;
    if (f) c.f = *f;
    if (h) c.h = *h;
    if (m) c.m = *m;
    if (n) c.n = *n;
    if (theta) c.theta = *theta;
    return c;
  }
};

int cmd_plan(const ConfigFlags& flags) {
  WorkflowConfig c = flags.resolve();
  auto report = validate_config(c);
  if (!report.ok()) {
    std::cerr << "invalid config:\n" << report.to_string();
    return 2;
  }
  int solved = solve_sample_size(c.delta, c.f);
  int n = c.n.value_or(solved);
  json out{{"delta", c.delta},
           {"f", c.f},
           {"h", c.h},
           {"m", c.m},
           {"n", n},
           {"n_solved", solved},
           {"tau", solve_iterations(n, c.f, c.h)},
           {"coverage_lower_bound", coverage_lower_bound(n, c.f)},
           {"variance_upper_bound", variance_upper_bound(n, c.f)},
           {"clustering_tasks", planned_clustering_tasks(n, c.f, c.h, c.m)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct RunFlags {
  bool simulate = false;
  std::optional<std::uint64_t> seed;
  std::string corpus_file;
  int shapes = 0;
  int flat = 0;
  int concepts = 20;
  std::string worker_model_file;
  std::string data_dir;
  std::string output;
  bool text = false;
};

ItemCorpus resolve_corpus(const RunFlags& r, std::uint64_t seed) {
  int sources = (!r.corpus_file.empty()) + (r.shapes > 0) + (r.flat > 0);
  if (sources != 1) throw CLI::ValidationError("run", "give exactly one of --corpus, --shapes, --flat");
  if (!r.corpus_file.empty()) return load_corpus(r.corpus_file);
  json spec = r.shapes > 0 ? json{{"kind", "shapes"}, {"count", r.shapes}}
                           : json{{"kind", "flat"}, {"count", r.flat}, {"concepts", r.concepts}};
  return corpus_from_request({{"corpus_spec", spec}}, seed);
}

void print_summary(const json& report) {
  std::cout << "run " << report.at("run_id").get<std::string>() << ": " << report.at("phase").get<std::string>()
            << ", iteration " << report.at("iteration") << " of " << report.at("tau") << ", n = " << report.at("n")
            << "\n";
  const json& cost = report.at("cost");
  std::cout << "clustering tasks " << cost.at("clustering_tasks") << " (bound " << cost.at("clustering_tasks_bound")
            << "), categorization assignments " << cost.at("categorization_assignments") << "\n";
  if (report.contains("hierarchy_text")) std::cout << report.at("hierarchy_text").get<std::string>();
  if (const json& m = report.at("metrics"); !m.is_null()) {
    for (const auto& [name, v] : m.at("perspectives").items()) {
      std::printf("%-10s VI %.4f bits  NMI %.4f\n", name.c_str(), v.at("vi_bits").get<double>(),
                  v.at("nmi").get<double>());
    }
    if (m.contains("hierarchy_count")) std::cout << "hierarchy count " << m.at("hierarchy_count").at("count") << "\n";
  }
}

int cmd_run(const ConfigFlags& flags, const RunFlags& r) {
  WorkflowConfig c = flags.resolve();
  if (r.simulate && !r.seed) throw CLI::ValidationError("--seed", "--simulate needs --seed");
  if (r.seed) c.rng_seed = *r.seed;
  ItemCorpus corpus = resolve_corpus(r, c.rng_seed);

  std::optional<std::filesystem::path> dir;
  if (!r.data_dir.empty()) dir = r.data_dir;
  Engine engine(dir);
  if (!r.simulate) {
    if (!dir) throw CLI::ValidationError("--data-dir", "a live run needs --data-dir so `serve` can pick it up");
    engine.recover();
    std::string id = engine.start_run(c, std::move(corpus), RunSource::live());
    std::cout << id << "\n";
    return 0;
  }
  WorkerModel model = r.worker_model_file.empty() ? WorkerModel::shapes_default()
                                                  : read_json_file(r.worker_model_file).get<WorkerModel>();
  if (r.worker_model_file.empty() && r.flat > 0) model = WorkerModel::single("category");
  engine.recover();
  std::string id = engine.start_run(c, std::move(corpus), RunSource::simulate(model));
  drive_simulation(engine, id, c.rng_seed);
  json report = engine.run_report(id);
  if (!r.output.empty()) write_json_file(r.output, report);
  if (r.text) {
    print_summary(report);
  } else if (r.output.empty()) {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

ApiServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::string& data_dir) {
  std::optional<std::filesystem::path> dir;
  if (!data_dir.empty()) dir = data_dir;
  Engine engine(dir);
  std::size_t recovered = engine.recover();
  ApiServer server(engine);
  int bound = port;
  if (port == 0) {
    bound = server.bind_any_port(host);
  } else if (!server.bind(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  std::cerr << "listening on " << host << ":" << bound << " (" << recovered << " runs recovered)\n";
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.serve();
  g_server = nullptr;
  return 0;
}

int cmd_score(const std::string& a_file, const std::string& b_file, const std::string& corpus_file,
              std::vector<std::string> perspectives) {
  Clustering a = load_clustering(a_file);
  Clustering b = load_clustering(b_file);
  std::printf("vi_bits: %.6f\nnmi: %.6f\n", variation_of_information(a, b), normalized_mutual_information(a, b));
  if (corpus_file.empty()) return 0;
  ItemCorpus corpus = load_corpus(corpus_file);
  if (perspectives.empty()) {
    for (const auto& [name, _] : corpus.perspectives()) perspectives.push_back(name);
  }
  for (const auto& [tag, c] : {std::pair<std::string, const Clustering*>{"a", &a}, {"b", &b}}) {
    for (const auto& p : perspectives) {
      Clustering truth = ground_truth_clustering(corpus, p, c->items());
      std::printf("%s.%s.vi_bits: %.6f\n%s.%s.nmi: %.6f\n", tag.c_str(), p.c_str(),
                  variation_of_information(*c, truth), tag.c_str(), p.c_str(),
                  normalized_mutual_information(*c, truth));
    }
    auto count = clustering_hierarchy_count(*c, corpus, perspectives);
    std::printf("%s.hierarchy_count: %d%s\n", tag.c_str(), count.count, count.unexplainable ? " (unexplainable)" : "");
  }
  return 0;
}

int cmd_report(const std::string& data_dir, const std::string& run_id, bool text) {
  Engine engine{std::filesystem::path(data_dir)};
  engine.recover();
  json report = engine.run_report(run_id);
  if (text) {
    print_summary(report);
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowd-powered consensus clustering"};
  app.require_subcommand(1);

  ConfigFlags plan_flags;
  auto* plan = app.add_subcommand("plan", "sample size, iterations and cost for a configuration");
  plan_flags.attach(plan);

  ConfigFlags run_flags;
  RunFlags run_opts;
  auto* run = app.add_subcommand("run", "start a run; with --simulate, drive it to completion");
  run_flags.attach(run);
  run->add_flag("--simulate", run_opts.simulate, "answer every task with simulated workers");
  run->add_option("--seed", run_opts.seed, "run seed (required with --simulate)");
  run->add_option("--corpus", run_opts.corpus_file, "corpus manifest or JSON")->check(CLI::ExistingFile);
  run->add_option("--shapes", run_opts.shapes, "generate a shapes corpus of this many items");
  run->add_option("--flat", run_opts.flat, "generate a flat-concept corpus of this many items");
  run->add_option("--concepts", run_opts.concepts, "concepts of the flat corpus")->check(CLI::Range(1, 20));
  run->add_option("--worker-model", run_opts.worker_model_file, "worker model JSON")->check(CLI::ExistingFile);
  run->add_option("--data-dir", run_opts.data_dir, "persist the run's event log here");
  run->add_option("--output", run_opts.output, "write the report JSON to this file");
  run->add_flag("--text", run_opts.text, "print a readable summary instead of JSON");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_dir;
  auto* serve = app.add_subcommand("serve", "HTTP/JSON service for workers and run management");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port, 0 for any free port");
  serve->add_option("--data-dir", serve_dir, "event logs and snapshots");

  std::string a_file, b_file, score_corpus;
  std::vector<std::string> perspectives;
  auto* score = app.add_subcommand("score", "compare two clusterings");
  score->add_option("a", a_file, "clustering JSON")->required()->check(CLI::ExistingFile);
  score->add_option("b", b_file, "clustering JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--corpus", score_corpus, "ground-truth corpus")->check(CLI::ExistingFile);
  score->add_option("--perspectives", perspectives, "perspectives to score against");

  std::string report_dir, report_run;
  bool report_text = false;
  auto* report = app.add_subcommand("report", "report of a stored run");
  report->add_option("--data-dir", report_dir, "event logs and snapshots")->required();
  report->add_option("--run-id", report_run, "run id")->required();
  report->add_flag("--text", report_text, "print a readable summary instead of JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) return cmd_plan(plan_flags);
    if (run->parsed()) return cmd_run(run_flags, run_opts);
    if (serve->parsed()) return cmd_serve(host, port, serve_dir);
    if (score->parsed()) return cmd_score(a_file, b_file, score_corpus, perspectives);
    if (report->parsed()) return cmd_report(report_dir, report_run, report_text);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
