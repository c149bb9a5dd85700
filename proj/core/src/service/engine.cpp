#include "crowdorg/service/engine.hpp"

#include <algorithm>
#include <cstdio>

#include "crowdorg/metrics.hpp"

namespace crowdorg {

namespace {

std::string task_name(const std::string& prefix, int a, int b = 0) {
  std::string s = prefix + "-" + std::to_string(a);
  if (b > 0) s += "." + std::to_string(b);
  return s;
}

std::string first_condition(const ValidationReport& r) {
  return r.violations.empty() ? std::string("invalid") : r.violations.front().condition;
}

Phase phase_from_string(const std::string& s) {
  for (Phase p : {Phase::planning, Phase::clustering, Phase::frontier_selection, Phase::categorization, Phase::done}) {
    if (to_string(p) == s) return p;
  }
  throw Error("unknown phase '" + s + "'");
}

json source_json(const RunSource& s) {
  json j{{"mode", s.simulated ? "simulated" : "live"}};
  if (s.simulated) j["worker_model"] = s.model;
  return j;
}

RunSource source_from_json(const json& j) {
  if (j.value("mode", std::string("live")) != "simulated") return RunSource::live();
  return RunSource::simulate(j.at("worker_model").get<WorkerModel>());
}

json votes_json(const std::map<ItemId, Vote>& assignments) {
  json j = json::object();
  for (const auto& [item, vote] : assignments) j[item] = vote ? json(*vote) : json(nullptr);
  return j;
}

std::map<ItemId, Vote> votes_from_json(const json& j) {
  std::map<ItemId, Vote> out;
  for (const auto& [item, v] : j.items()) out[item] = v.is_null() ? Vote{} : Vote{v.get<NodeId>()};
  return out;
}

}  // namespace

std::string to_string(Phase p) {
  switch (p) {
    case Phase::planning: return "planning";
    case Phase::clustering: return "clustering";
    case Phase::frontier_selection: return "frontier-selection";
    case Phase::categorization: return "categorization";
    case Phase::done: return "done";
  }
  return "unknown";
}

std::string to_string(TaskKind k) { return k == TaskKind::clustering ? "clustering" : "categorization"; }

SubmitResult SubmitResult::ok() {
  SubmitResult r;
  r.accepted = true;
  return r;
}

SubmitResult SubmitResult::reject(std::string reason, std::string detail, ValidationReport violations) {
  SubmitResult r;
  r.reason = std::move(reason);
  r.detail = std::move(detail);
  r.violations = std::move(violations);
  return r;
}

void to_json(json& j, const SubmitResult& r) {
  j = json{{"accepted", r.accepted}};
  if (r.replayed) j["replayed"] = true;
  if (!r.accepted) {
    j["reason"] = r.reason;
    j["detail"] = r.detail;
    if (!r.violations.ok()) j["violations"] = r.violations;
  }
}

// ---------------------------------------------------------------------------
// Run

Run::Run(std::string run_id, WorkflowConfig config, ItemCorpus corpus, RunSource source)
    : id_(std::move(run_id)),
      config_(std::move(config)),
      corpus_(std::move(corpus)),
      source_(std::move(source)),
      rng_(config_.rng_seed) {
  auto report = validate_config(config_);
  if (!report.ok()) throw Error("invalid workflow config: " + report.to_string());
  if (source_.simulated) source_.model.validate();
  n_ = config_.n ? *config_.n : solve_sample_size(config_.delta, config_.f);
  tau_ = solve_iterations(n_, config_.f, config_.h);
  phase_ = Phase::clustering;
  start_iteration();
}

const Task* Run::find_task(const std::string& task_id) const {
  auto it = task_index_.find(task_id);
  return it == task_index_.end() ? nullptr : &tasks_[it->second];
}

Task& Run::task_ref(const std::string& task_id) { return tasks_[task_index_.at(task_id)]; }

const Task* Run::next_task(const std::string& worker_id) const {
  for (const auto& t : tasks_) {
    if (t.open && t.assignments_remaining > 0 && !t.answered_by.contains(worker_id)) return &t;
  }
  return nullptr;
}

void Run::start_iteration() {
  ++iteration_;
  const Hierarchy* current = hierarchy_.empty() ? nullptr : &hierarchy_;
  auto samples = generate_iteration_samples(current, config_.h, config_.f, corpus_, used_, rng_, iteration_, "sample");
  ItemSet fresh = samples.front().new_items();
  if (fresh.empty()) {
    // corpus exhausted before tau iterations
    --iteration_;
    finish_clustering();
    return;
  }
  for (const auto& item : fresh) new_item_log_.push_back(item);
  used_.insert(fresh.begin(), fresh.end());
  samples_ = std::move(samples);
  portion_ = 0;
  relocatable_.clear();
  open_clustering_task();
}

void Run::open_clustering_task() {
  const Sample& s = samples_[portion_];
  Task t;
  t.kind = TaskKind::clustering;
  t.task_id = task_name("cluster", iteration_, samples_.size() > 1 ? static_cast<int>(portion_) + 1 : 0);
  t.item_ids.assign(s.items.begin(), s.items.end());
  t.assignments_remaining = config_.m;
  t.iteration = iteration_;
  t.sample_id = s.sample_id;
  task_index_[t.task_id] = tasks_.size();
  tasks_.push_back(std::move(t));
  responses_.clear();
}

SubmitResult Run::submit_clustering(const std::string& task_id, const std::string& worker_id, Clustering c) {
  auto it = task_index_.find(task_id);
  if (it == task_index_.end()) return SubmitResult::reject("unknown-task", "no task " + task_id);
  Task& task = tasks_[it->second];
  if (task.kind != TaskKind::clustering) return SubmitResult::reject("wrong-kind", task_id + " is a categorization task");
  if (!task.open) return SubmitResult::reject("task-closed", task_id + " has all its responses");
  if (task.answered_by.contains(worker_id)) {
    return SubmitResult::reject("duplicate-worker", worker_id + " already answered " + task_id);
  }
  ItemSet sample_items(task.item_ids.begin(), task.item_ids.end());
  auto report = validate_clustering(c, sample_items);
  if (!report.ok()) return SubmitResult::reject(first_condition(report), report.to_string(), report);

  c.worker_id = worker_id;
  c.sample_id = task.sample_id;
  responses_.push_back(std::move(c));
  task.answered_by.insert(worker_id);
  ++clustering_assignments_;
  if (--task.assignments_remaining == 0) {
    task.open = false;
    finish_sample();
  }
  return SubmitResult::ok();
}

void Run::finish_sample() {
  const Sample& sample = samples_[portion_];
  CliqueResult clique = find_consensus(responses_);
  json entry{{"sample_id", sample.sample_id},
             {"iteration", iteration_},
             {"responses", responses_.size()},
             {"distinct_clusterings", clique.graph.size()},
             {"clique", clique.members},
             {"clique_weight", clique.total_multiplicity},
             {"maximal_cliques", clique.maximal_clique_count},
             {"bound_applicable", clique.bound_applicable},
             {"kernel", sample.kernel.size()}};
  if (hierarchy_.empty()) {
    hierarchy_ = clique.hierarchy;
  } else {
    MergeResult merged = merge_hierarchies(hierarchy_, clique.hierarchy, sample.kernel, relocatable_);
    hierarchy_ = std::move(merged.hierarchy);
    relocatable_.insert(merged.created.begin(), merged.created.end());
    std::erase_if(relocatable_, [&](NodeId id) { return !hierarchy_.contains(id); });
    for (auto& line : merged.trace) merge_trace_.push_back(sample.sample_id + " " + line);
  }
  entry["leaves"] = hierarchy_.leaves().size();
  iteration_log_.push_back(std::move(entry));
  for (auto& member : clique.member_clusterings()) clique_members_.push_back(std::move(member));
  ++clustering_samples_;

  if (portion_ + 1 < samples_.size()) {
    ++portion_;
    open_clustering_task();
    return;
  }
  if (iteration_ >= tau_) {
    finish_clustering();
  } else {
    start_iteration();
  }
}

void Run::finish_clustering() {
  phase_ = Phase::frontier_selection;
  std::vector<Frontier> responses;
  for (const auto& c : clique_members_) {
    if (auto fr = project_clustering(hierarchy_, c)) responses.push_back(std::move(*fr));
  }
  split_stats_ = estimate_split_probabilities(hierarchy_, responses);
  frontier_ = max_likelihood_frontier(hierarchy_, split_stats_);
  consensus_.clear();
  for (NodeId id : frontier_->frontier.nodes) {
    if (!hierarchy_.node(id).pending) consensus_.push_back(id);
  }
  start_categorization();
}

void Run::start_categorization() {
  phase_ = Phase::categorization;
  for (NodeId id : consensus_) {
    for (const auto& item : hierarchy_.node(id).items) placements_[item] = id;
  }
  std::vector<ItemId> pending;
  for (const auto& item : corpus_.items()) {
    if (!placements_.contains(item.id)) pending.push_back(item.id);
  }
  if (pending.empty()) {
    finish_run();
    return;
  }
  if (consensus_.empty()) {
    for (const auto& item : pending) placements_[item] = std::nullopt;
    finish_run();
    return;
  }
  Frontier clusters;
  clusters.nodes.insert(consensus_.begin(), consensus_.end());
  auto pivots = select_pivots(hierarchy_, clusters, config_.pivots_per_cluster, rng_);
  std::shuffle(pending.begin(), pending.end(), rng_);
  auto batch = static_cast<std::size_t>(config_.categorization_batch);
  for (std::size_t start = 0, k = 1; start < pending.size(); start += batch, ++k) {
    Task t;
    t.kind = TaskKind::categorization;
    t.task_id = task_name("categorize", static_cast<int>(k));
    t.item_ids.assign(pending.begin() + static_cast<std::ptrdiff_t>(start),
                      pending.begin() + static_cast<std::ptrdiff_t>(std::min(pending.size(), start + batch)));
    t.pivots = pivots;
    t.assignments_remaining = config_.theta;
    t.iteration = iteration_;
    task_index_[t.task_id] = tasks_.size();
    tasks_.push_back(std::move(t));
  }
}

SubmitResult Run::submit_categorization(const std::string& task_id, const std::string& worker_id,
                                        const std::map<ItemId, Vote>& assignments) {
  auto it = task_index_.find(task_id);
  if (it == task_index_.end()) return SubmitResult::reject("unknown-task", "no task " + task_id);
  Task& task = tasks_[it->second];
  if (task.kind != TaskKind::categorization) return SubmitResult::reject("wrong-kind", task_id + " is a clustering task");
  if (!task.open) return SubmitResult::reject("task-closed", task_id + " has all its responses");
  if (task.answered_by.contains(worker_id)) {
    return SubmitResult::reject("duplicate-worker", worker_id + " already answered " + task_id);
  }
  ItemSet task_items(task.item_ids.begin(), task.item_ids.end());
  for (const auto& [item, vote] : assignments) {
    if (!task_items.contains(item)) return SubmitResult::reject("unknown-item", item + " is not part of " + task_id);
    if (vote && !task.pivots.contains(*vote)) {
      return SubmitResult::reject("unknown-cluster", "cluster " + std::to_string(*vote) + " is not a consensus cluster");
    }
  }
  std::vector<std::string> missing;
  for (const auto& item : task.item_ids) {
    if (!assignments.contains(item)) missing.push_back(item);
  }
  if (!missing.empty()) {
    ValidationReport r;
    r.add("incomplete", "items without an assignment", missing);
    return SubmitResult::reject("incomplete", std::to_string(missing.size()) + " items unassigned", r);
  }

  for (const auto& [item, vote] : assignments) votes_[item].push_back(vote);
  task.answered_by.insert(worker_id);
  ++categorization_assignments_;
  if (--task.assignments_remaining == 0) {
    task.open = false;
    finish_categorization_task(task);
  }
  return SubmitResult::ok();
}

void Run::finish_categorization_task(Task& task) {
  Frontier clusters;
  clusters.nodes.insert(consensus_.begin(), consensus_.end());
  for (const auto& item : task.item_ids) {
    placements_[item] = aggregate_categorization_votes(votes_.at(item), config_.theta, clusters);
  }
  bool all_closed = std::none_of(tasks_.begin(), tasks_.end(), [](const Task& t) {
    return t.kind == TaskKind::categorization && t.open;
  });
  if (all_closed) finish_run();
}

void Run::finish_run() { phase_ = Phase::done; }

Clustering Run::final_clustering() const {
  std::map<NodeId, ItemSet> by_cluster;
  ItemSet uncategorized;
  for (const auto& [item, node] : placements_) {
    if (node) {
      by_cluster[*node].insert(item);
    } else {
      uncategorized.insert(item);
    }
  }
  Clustering c;
  c.worker_id = "consensus";
  c.sample_id = id_;
  for (NodeId id : consensus_) {
    if (by_cluster.contains(id)) c.clusters.push_back(by_cluster[id]);
  }
  if (!uncategorized.empty()) c.clusters.push_back(uncategorized);
  return c;
}

json Run::report() const {
  const bool final = phase_ == Phase::done;
  json r{{"schema", schema_tag("run-report")},
         {"run_id", id_},
         {"phase", to_string(phase_)},
         {"final", final},
         {"iteration", iteration_},
         {"tau", tau_},
         {"n", n_},
         {"config", config_},
         {"source", source_json(source_)}};

  // ground-truth labels for readability, under the perspective that best
  // matches the outcome
  std::map<NodeId, std::string> labels;
  std::string best_perspective;
  json metrics = nullptr;
  if (final && !corpus_.perspectives().empty() && !placements_.empty()) {
    Clustering result = final_clustering();
    metrics = json::object();
    double best_nmi = -1.0;
    std::vector<std::string> perspectives;
    for (const auto& [name, _] : corpus_.perspectives()) {
      perspectives.push_back(name);
      Clustering truth = ground_truth_clustering(corpus_, name, result.items());
      double nmi = normalized_mutual_information(result, truth);
      metrics["perspectives"][name] = {{"vi_bits", variation_of_information(result, truth)}, {"nmi", nmi}};
      if (nmi > best_nmi) {
        best_nmi = nmi;
        best_perspective = name;
      }
    }
    auto count = clustering_hierarchy_count(result, corpus_, perspectives);
    metrics["hierarchy_count"] = {{"count", count.count},
                                  {"unexplainable", count.unexplainable},
                                  {"perspectives", count.perspectives}};
    metrics["best_perspective"] = best_perspective;
    r["metrics"] = metrics;
  } else {
    r["metrics"] = nullptr;
  }
  if (!hierarchy_.empty() && !best_perspective.empty()) labels = label_nodes(hierarchy_, corpus_, best_perspective);
  auto name_of = [&](NodeId id) -> std::string {
    const auto& node = hierarchy_.node(id);
    if (node.label) return *node.label;
    if (node.pending) return "(pending)";
    auto it = labels.find(id);
    return it == labels.end() ? "node-" + std::to_string(id) : it->second;
  };

  if (!hierarchy_.empty()) {
    r["hierarchy"] = hierarchy_;
    Hierarchy named = hierarchy_;
    for (auto& [id, node] : named.nodes) {
      if (!node.label && labels.contains(id)) node.label = labels.at(id);
    }
    r["hierarchy_text"] = format_hierarchy(named);
    r["covered_items"] = hierarchy_.covered_items.size();
    r["leaves"] = hierarchy_.leaves().size();
  }
  if (frontier_) {
    json nodes = json::array();
    std::set<NodeId> consensus(consensus_.begin(), consensus_.end());
    for (NodeId id : frontier_->frontier.nodes) {
      const auto& node = hierarchy_.node(id);
      nodes.push_back({{"id", id},
                       {"label", name_of(id)},
                       {"items", node.items.size()},
                       {"stay_probability", split_stats_.stay_probability(id)},
                       {"pending", node.pending},
                       {"consensus", consensus.contains(id)}});
    }
    r["frontier"] = {{"nodes", nodes},
                     {"log_likelihood", frontier_->log_likelihood},
                     {"responses", split_stats_.responses}};
  } else {
    r["frontier"] = nullptr;
  }

  std::size_t categorization_items = 0;
  std::size_t categorization_tasks = 0;
  for (const auto& t : tasks_) {
    if (t.kind == TaskKind::categorization) {
      ++categorization_tasks;
      categorization_items += t.item_ids.size();
    }
  }
  r["cost"] = {{"clustering_samples", clustering_samples_},
               {"clustering_tasks", clustering_assignments_},
               {"clustering_tasks_bound", static_cast<long long>(config_.m) * tau_},
               {"planned_clustering_tasks", planned_clustering_tasks(n_, config_.f, config_.h, config_.m)},
               {"categorization_tasks", categorization_tasks},
               {"categorization_assignments", categorization_assignments_},
               {"categorization_votes", categorization_assignments_ > 0 ? categorization_items * static_cast<std::size_t>(config_.theta) : 0},
               {"categorization_votes_bound", static_cast<long long>(config_.theta) * static_cast<long long>(corpus_.size())}};

  if (final) {
    Clustering result = final_clustering();
    json clusters = json::array();
    std::size_t uncategorized = 0;
    for (const auto& [item, node] : placements_) {
      if (!node) ++uncategorized;
    }
    for (NodeId id : consensus_) {
      std::size_t size = 0;
      for (const auto& [item, node] : placements_) {
        if (node == id) ++size;
      }
      clusters.push_back({{"id", id}, {"label", name_of(id)}, {"items", size}});
    }
    r["result"] = {{"clusters", clusters}, {"uncategorized", uncategorized}};
  }
  r["samples"] = iteration_log_;
  r["open_tasks"] = std::count_if(tasks_.begin(), tasks_.end(), [](const Task& t) { return t.open; });
  return r;
}

json Run::snapshot() const {
  json s{{"schema", schema_tag("run-snapshot")},
         {"run_id", id_},
         {"phase", to_string(phase_)},
         {"iteration", iteration_},
         {"tau", tau_},
         {"n", n_},
         {"used_items", used_.size()},
         {"tasks", tasks_.size()}};
  s["hierarchy"] = hierarchy_.empty() ? json(nullptr) : json(hierarchy_);
  if (frontier_) s["frontier"] = frontier_->frontier;
  return s;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(std::optional<std::filesystem::path> data_dir) {
  if (data_dir) store_.emplace(*data_dir);
}

Engine::~Engine() = default;

std::shared_ptr<Engine::Handle> Engine::handle(const std::string& run_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw Error("unknown run '" + run_id + "'");
  return it->second;
}

std::vector<std::string> Engine::run_ids() const {
  std::lock_guard lock(registry_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : runs_) out.push_back(id);
  return out;
}

bool Engine::has_run(const std::string& run_id) const {
  std::lock_guard lock(registry_mutex_);
  return runs_.contains(run_id);
}

std::string Engine::next_run_id() {
  // registry lock held by the caller
  for (;;) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%04llu", static_cast<unsigned long long>(++counter_));
    if (!runs_.contains(buf)) return buf;
  }
}

void Engine::persist_progress(const std::string& run_id, Handle& h) {
  if (!store_) return;
  if (h.run->phase() == h.logged_phase && h.run->iteration() == h.logged_iteration) return;
  store_->write_snapshot(run_id, h.run->snapshot());
  h.logged_phase = h.run->phase();
  h.logged_iteration = h.run->iteration();
}

std::string Engine::start_run(WorkflowConfig config, ItemCorpus corpus, RunSource source,
                              const std::string& request_id) {
  std::string run_id;
  {
    std::lock_guard lock(registry_mutex_);
    if (!request_id.empty()) {
      if (auto it = requests_.find(request_id); it != requests_.end()) return it->second;
    }
    run_id = next_run_id();
  }
  json created{{"type", "run-created"},
               {"run_id", run_id},
               {"request_id", request_id},
               {"config", config},
               {"corpus", corpus},
               {"source", source_json(source)}};
  auto h = std::make_shared<Handle>();
  h->run = std::make_unique<Run>(run_id, std::move(config), std::move(corpus), std::move(source));
  {
    std::lock_guard lock(registry_mutex_);
    if (!request_id.empty()) {
      // a concurrent request with the same id may have won the race
      if (auto it = requests_.find(request_id); it != requests_.end()) return it->second;
      requests_[request_id] = run_id;
    }
    runs_[run_id] = h;
  }
  std::lock_guard lock(h->mutex);
  if (store_) store_->append(run_id, created);
  persist_progress(run_id, *h);
  return run_id;
}

std::optional<Task> Engine::get_task(const std::string& run_id, const std::string& worker_id) {
  auto h = handle(run_id);
  std::lock_guard lock(h->mutex);
  const Task* t = h->run->next_task(worker_id);
  if (!t) return std::nullopt;
  return *t;
}

SubmitResult Engine::submit_clustering(const std::string& run_id, const std::string& task_id,
                                       const std::string& worker_id, const Clustering& c,
                                       const std::string& submission_id) {
  auto h = handle(run_id);
  std::lock_guard lock(h->mutex);
  if (!submission_id.empty()) {
    if (auto it = h->submissions.find(submission_id); it != h->submissions.end()) {
      SubmitResult r = it->second.at("accepted").get<bool>()
                           ? SubmitResult::ok()
                           : SubmitResult::reject(it->second.value("reason", ""), it->second.value("detail", ""));
      r.replayed = true;
      return r;
    }
  }
  SubmitResult r = h->run->submit_clustering(task_id, worker_id, c);
  if (r.accepted && store_) {
    store_->append(run_id, {{"type", "clustering-submitted"},
                            {"task_id", task_id},
                            {"worker_id", worker_id},
                            {"submission_id", submission_id},
                            {"clusters", c.clusters}});
  }
  if (!submission_id.empty()) h->submissions[submission_id] = r;
  persist_progress(run_id, *h);
  return r;
}

SubmitResult Engine::submit_categorization(const std::string& run_id, const std::string& task_id,
                                           const std::string& worker_id, const std::map<ItemId, Vote>& assignments,
                                           const std::string& submission_id) {
  auto h = handle(run_id);
  std::lock_guard lock(h->mutex);
  if (!submission_id.empty()) {
    if (auto it = h->submissions.find(submission_id); it != h->submissions.end()) {
      SubmitResult r = it->second.at("accepted").get<bool>()
                           ? SubmitResult::ok()
                           : SubmitResult::reject(it->second.value("reason", ""), it->second.value("detail", ""));
      r.replayed = true;
      return r;
    }
  }
  SubmitResult r = h->run->submit_categorization(task_id, worker_id, assignments);
  if (r.accepted && store_) {
    store_->append(run_id, {{"type", "categorization-submitted"},
                            {"task_id", task_id},
                            {"worker_id", worker_id},
                            {"submission_id", submission_id},
                            {"assignments", votes_json(assignments)}});
  }
  if (!submission_id.empty()) h->submissions[submission_id] = r;
  persist_progress(run_id, *h);
  return r;
}

json Engine::run_report(const std::string& run_id) {
  auto h = handle(run_id);
  std::lock_guard lock(h->mutex);
  return h->run->report();
}

json Engine::task_view(const std::string& run_id, const Task& task) {
  auto h = handle(run_id);
  std::lock_guard lock(h->mutex);
  const ItemCorpus& corpus = h->run->corpus();
  auto item_json = [&](const ItemId& id) { return json{{"id", id}, {"payload", corpus.at(id).payload}}; };
  json items = json::array();
  for (const auto& id : task.item_ids) items.push_back(item_json(id));
  json view{{"schema", schema_tag("task")},
            {"run_id", run_id},
            {"task_id", task.task_id},
            {"kind", to_string(task.kind)},
            {"iteration", task.iteration},
            {"assignments_remaining", task.assignments_remaining},
            {"items", items}};
  if (task.kind == TaskKind::clustering) {
    view["sample_id"] = task.sample_id;
  } else {
    json pivots = json::array();
    for (const auto& [cluster, ids] : task.pivots) {
      json p = json::array();
      for (const auto& id : ids) p.push_back(item_json(id));
      pivots.push_back({{"cluster_id", cluster}, {"pivots", p}});
    }
    view["clusters"] = pivots;
  }
  return view;
}

void Engine::replay(const std::string& run_id, const std::vector<json>& events) {
  if (events.empty() || events.front().value("type", "") != "run-created") {
    throw Error("event log of run " + run_id + " does not start with run-created");
  }
  const json& created = events.front();
  auto h = std::make_shared<Handle>();
  h->run = std::make_unique<Run>(run_id, created.at("config").get<WorkflowConfig>(),
                                 created.at("corpus").get<ItemCorpus>(), source_from_json(created.at("source")));
  for (std::size_t i = 1; i < events.size(); ++i) {
    const json& e = events[i];
    std::string type = e.value("type", "");
    SubmitResult r;
    if (type == "clustering-submitted") {
      Clustering c;
      c.clusters = e.at("clusters").get<std::vector<ItemSet>>();
      r = h->run->submit_clustering(e.at("task_id"), e.at("worker_id"), std::move(c));
    } else if (type == "categorization-submitted") {
      r = h->run->submit_categorization(e.at("task_id"), e.at("worker_id"), votes_from_json(e.at("assignments")));
    } else {
      throw Error("run " + run_id + ": unknown event type '" + type + "'");
    }
    if (!r.accepted) throw Error("run " + run_id + ": replayed event " + std::to_string(i) + " rejected (" + r.reason + ")");
    std::string sid = e.value("submission_id", "");
    if (!sid.empty()) h->submissions[sid] = r;
  }
  h->logged_phase = h->run->phase();
  h->logged_iteration = h->run->iteration();
  if (auto snap = store_->read_snapshot(run_id)) {
    if (phase_from_string(snap->value("phase", "planning")) != h->run->phase() ||
        snap->value("iteration", 0) != h->run->iteration()) {
      store_->write_snapshot(run_id, h->run->snapshot());
    }
  }
  std::lock_guard lock(registry_mutex_);
  std::string request_id = created.value("request_id", "");
  if (!request_id.empty()) requests_[request_id] = run_id;
  runs_[run_id] = h;
}

std::size_t Engine::recover() {
  if (!store_) return 0;
  std::size_t loaded = 0;
  for (const auto& run_id : store_->runs()) {
    if (has_run(run_id)) continue;
    replay(run_id, store_->read(run_id));
    ++loaded;
  }
  return loaded;
}

// ---------------------------------------------------------------------------
// Simulation driver

std::size_t drive_simulation(Engine& engine, const std::string& run_id, std::uint64_t seed) {
  auto [corpus, source, workers] = engine.with_run(run_id, [](const Run& r) {
    return std::make_tuple(r.corpus(), r.source(), std::max(r.config().m, r.config().theta));
  });
  if (!source.simulated) throw Error("run " + run_id + " is not a simulated run");
  const WorkerModel& model = source.model;

  std::vector<std::string> pool;
  for (int i = 1; i <= workers; ++i) pool.push_back("sim-" + std::to_string(i));

  std::map<std::string, PivotReading> readings;
  std::size_t submissions = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& worker : pool) {
      auto task = engine.get_task(run_id, worker);
      if (!task) continue;
      Rng rng = derive_rng(seed, worker, task->task_id);
      std::string submission_id = worker + "/" + task->task_id;
      SubmitResult r;
      if (task->kind == TaskKind::clustering) {
        Sample s;
        s.sample_id = task->sample_id;
        s.items = ItemSet(task->item_ids.begin(), task->item_ids.end());
        Clustering c = simulate_worker_clustering(model, s, corpus, rng);
        r = engine.submit_clustering(run_id, task->task_id, worker, c, submission_id);
      } else {
        auto it = readings.find(task->task_id);
        if (it == readings.end()) it = readings.emplace(task->task_id, read_pivots(model, task->pivots, corpus)).first;
        std::map<ItemId, Vote> votes;
        for (const auto& item : task->item_ids) {
          votes[item] = simulate_categorization_vote(model, corpus.at(item), it->second, corpus, rng);
        }
        r = engine.submit_categorization(run_id, task->task_id, worker, votes, submission_id);
      }
      if (!r.accepted) throw Error("simulated submission rejected: " + r.reason + " " + r.detail);
      ++submissions;
      progress = true;
    }
  }
  return submissions;
}

}  // namespace crowdorg
