#include "crowdorg/service/http_api.hpp"

#include <thread>

#include <httplib.h>

namespace crowdorg {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

int status_for(const SubmitResult& r) {
  if (r.accepted) return 200;
  if (r.reason == "unknown-task") return 404;
  if (r.reason == "task-closed" || r.reason == "duplicate-worker" || r.reason == "wrong-kind") return 409;
  return 422;
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  return it->get<std::string>();
}

// Wraps a handler: malformed input -> 400, unknown runs and engine errors ->
// 404 / 422.
template <typename Fn>
httplib::Server::Handler guarded(Engine& engine, Fn fn) {
  return [&engine, fn](const httplib::Request& req, httplib::Response& res) {
    try {
      if (req.path_params.contains("run") && !engine.has_run(req.path_params.at("run"))) {
        send_error(res, 404, "unknown run '" + req.path_params.at("run") + "'");
        return;
      }
      fn(req, res);
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const Error& e) {
      send_error(res, 422, e.what());
    }
  };
}

}  // namespace

ItemCorpus corpus_from_request(const json& body, std::uint64_t seed) {
  if (auto it = body.find("corpus"); it != body.end()) return it->get<ItemCorpus>();
  if (auto it = body.find("corpus_spec"); it != body.end()) {
    Rng rng(seed);
    return generate_corpus(*it, rng);
  }
  throw std::invalid_argument("request needs 'corpus' or 'corpus_spec'");
}

struct ApiServer::Impl {
  explicit Impl(Engine& e) : engine(e) { routes(); }

  void routes() {
    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/v1/runs", guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      WorkflowConfig config = body.contains("config") ? body.at("config").get<WorkflowConfig>() : WorkflowConfig{};
      ItemCorpus corpus = corpus_from_request(body, config.rng_seed);
      RunSource source = RunSource::live();
      if (auto it = body.find("source"); it != body.end() && it->value("mode", "live") == "simulated") {
        source = RunSource::simulate(it->contains("worker_model") ? it->at("worker_model").get<WorkerModel>()
                                                                  : WorkerModel::shapes_default());
      }
      std::string run_id = engine.start_run(config, std::move(corpus), std::move(source),
                                            body.value("request_id", std::string{}));
      json view = engine.with_run(run_id, [](const Run& r) {
        return json{{"run_id", r.id()}, {"phase", to_string(r.phase())}, {"n", r.n()}, {"tau", r.tau()}};
      });
      send_json(res, 201, view);
    }));

    server.Get("/v1/runs", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"runs", engine.run_ids()}});
    });

    server.Get("/v1/runs/:run/tasks/next", guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
      std::string worker = req.get_param_value("worker_id");
      if (worker.empty()) throw std::invalid_argument("missing query parameter 'worker_id'");
      const std::string& run = req.path_params.at("run");
      auto task = engine.get_task(run, worker);
      if (!task) {
        res.status = 204;
        return;
      }
      send_json(res, 200, engine.task_view(run, *task));
    }));

    server.Post("/v1/runs/:run/tasks/:task/clustering",
                guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
                  json body = parse_body(req);
                  Clustering c;
                  c.clusters = body.at("clusters").get<std::vector<ItemSet>>();
                  auto r = engine.submit_clustering(req.path_params.at("run"), req.path_params.at("task"),
                                                    required_string(body, "worker_id"), c,
                                                    body.value("submission_id", std::string{}));
                  send_json(res, status_for(r), r);
                }));

    server.Post("/v1/runs/:run/tasks/:task/categorization",
                guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
                  json body = parse_body(req);
                  std::map<ItemId, Vote> votes;
                  for (const auto& [item, v] : body.at("assignments").items()) {
                    votes[item] = v.is_null() ? Vote{} : Vote{v.get<NodeId>()};
                  }
                  auto r = engine.submit_categorization(req.path_params.at("run"), req.path_params.at("task"),
                                                        required_string(body, "worker_id"), votes,
                                                        body.value("submission_id", std::string{}));
                  send_json(res, status_for(r), r);
                }));

    server.Get("/v1/runs/:run/report", guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, engine.run_report(req.path_params.at("run")));
    }));

    server.Post("/v1/runs/:run/simulate", guarded(engine, [this](const httplib::Request& req, httplib::Response& res) {
      const std::string& run = req.path_params.at("run");
      auto seed = engine.with_run(run, [](const Run& r) { return r.config().rng_seed; });
      std::size_t submitted = drive_simulation(engine, run, seed);
      send_json(res, 200, {{"submissions", submitted}, {"report", engine.run_report(run)}});
    }));
  }

  Engine& engine;
  httplib::Server server;
  std::thread thread;
};

ApiServer::ApiServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ApiServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

void ApiServer::serve() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace crowdorg
