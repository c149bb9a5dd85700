#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crowdorg/consensus.hpp"
#include "crowdorg/frontier.hpp"
#include "crowdorg/merging.hpp"
#include "crowdorg/sampling.hpp"
#include "crowdorg/serialization.hpp"
#include "crowdorg/service/event_store.hpp"
#include "crowdorg/simulation.hpp"

namespace crowdorg {

enum class Phase { planning, clustering, frontier_selection, categorization, done };
enum class TaskKind { clustering, categorization };

std::string to_string(Phase p);
std::string to_string(TaskKind k);

struct Task {
  std::string task_id;
  TaskKind kind = TaskKind::clustering;
  std::vector<ItemId> item_ids;
  // categorization only: consensus cluster -> exemplar items
  std::map<NodeId, std::vector<ItemId>> pivots;
  int assignments_remaining = 0;
  bool open = true;
  std::set<std::string> answered_by;
  int iteration = 0;
  std::string sample_id;
};

/// Where responses come from. Simulated runs carry the worker model used by
/// the driver; the engine itself treats both modes identically.
struct RunSource {
  bool simulated = false;
  WorkerModel model;

  static RunSource live() { return {}; }
  static RunSource simulate(WorkerModel m) { return {true, std::move(m)}; }
};

/// Outcome of a submission. `reason` is one of: disjointness, coverage,
/// empty-cluster, duplicate-worker, task-closed, unknown-task, wrong-kind,
/// incomplete, unknown-cluster, unknown-item.
struct SubmitResult {
  bool accepted = false;
  bool replayed = false;  // answered from the idempotency cache
  std::string reason;
  std::string detail;
  ValidationReport violations;

  static SubmitResult ok();
  static SubmitResult reject(std::string reason, std::string detail, ValidationReport violations = {});
};

void to_json(json& j, const SubmitResult& r);

/// One run's state machine. Not synchronized; Engine serializes access.
class Run {
 public:
  Run(std::string run_id, WorkflowConfig config, ItemCorpus corpus, RunSource source);

  const std::string& id() const noexcept { return id_; }
  Phase phase() const noexcept { return phase_; }
  int iteration() const noexcept { return iteration_; }
  int tau() const noexcept { return tau_; }
  int n() const noexcept { return n_; }
  const WorkflowConfig& config() const noexcept { return config_; }
  const ItemCorpus& corpus() const noexcept { return corpus_; }
  const RunSource& source() const noexcept { return source_; }
  const Hierarchy& hierarchy() const noexcept { return hierarchy_; }
  const std::vector<Task>& tasks() const noexcept { return tasks_; }
  const std::vector<std::string>& merge_trace() const noexcept { return merge_trace_; }
  /// Items sampled as new items, in sampling order.
  const std::vector<ItemId>& new_item_log() const noexcept { return new_item_log_; }
  const std::optional<FrontierLikelihood>& consensus_frontier() const noexcept { return frontier_; }
  /// Consensus clusters: frontier nodes that are not pending pools.
  const std::vector<NodeId>& consensus_clusters() const noexcept { return consensus_; }
  /// Final item placement; nullopt marks an item no cluster received.
  const std::map<ItemId, std::optional<NodeId>>& placements() const noexcept { return placements_; }

  const Task* find_task(const std::string& task_id) const;
  /// First open task the worker has not answered.
  const Task* next_task(const std::string& worker_id) const;

  SubmitResult submit_clustering(const std::string& task_id, const std::string& worker_id, Clustering c);
  SubmitResult submit_categorization(const std::string& task_id, const std::string& worker_id,
                                     const std::map<ItemId, Vote>& assignments);

  /// Final clustering of the corpus (consensus clusters plus one cluster of
  /// uncategorized items when any). Only meaningful once done.
  Clustering final_clustering() const;

  json report() const;
  json snapshot() const;

 private:
  void open_clustering_task();
  void finish_sample();
  void start_iteration();
  void finish_clustering();
  void start_categorization();
  void finish_categorization_task(Task& task);
  void finish_run();
  Task& task_ref(const std::string& task_id);

  std::string id_;
  WorkflowConfig config_;
  ItemCorpus corpus_;
  RunSource source_;
  Rng rng_;
  int n_ = 0;
  int tau_ = 0;

  Phase phase_ = Phase::planning;
  int iteration_ = 0;
  Hierarchy hierarchy_;
  ItemSet used_;
  std::vector<ItemId> new_item_log_;
  std::vector<Sample> samples_;  // current iteration's samples
  std::size_t portion_ = 0;
  std::vector<Clustering> responses_;  // current sample
  std::set<NodeId> relocatable_;
  std::vector<Clustering> clique_members_;  // all iterations, one per worker
  std::vector<std::string> merge_trace_;
  std::vector<json> iteration_log_;

  std::optional<FrontierLikelihood> frontier_;
  SplitStats split_stats_;
  std::vector<NodeId> consensus_;
  std::map<ItemId, std::vector<Vote>> votes_;
  std::map<ItemId, std::optional<NodeId>> placements_;

  std::vector<Task> tasks_;
  std::map<std::string, std::size_t> task_index_;
  int clustering_samples_ = 0;
  long long clustering_assignments_ = 0;
  long long categorization_assignments_ = 0;
};

/// Registry of runs; every mutation of a run happens under that run's lock.
/// With a data directory, runs persist as event logs and are recovered by
/// replaying them.
class Engine {
 public:
  explicit Engine(std::optional<std::filesystem::path> data_dir = std::nullopt);
  ~Engine();

  /// `request_id` makes creation idempotent: repeating it returns the run
  /// created the first time. Throws crowdorg::Error on an invalid config.
  std::string start_run(WorkflowConfig config, ItemCorpus corpus, RunSource source,
                        const std::string& request_id = {});

  std::optional<Task> get_task(const std::string& run_id, const std::string& worker_id);
  SubmitResult submit_clustering(const std::string& run_id, const std::string& task_id,
                                 const std::string& worker_id, const Clustering& c,
                                 const std::string& submission_id = {});
  SubmitResult submit_categorization(const std::string& run_id, const std::string& task_id,
                                     const std::string& worker_id, const std::map<ItemId, Vote>& assignments,
                                     const std::string& submission_id = {});
  json run_report(const std::string& run_id);

  /// Item payload lookup for task views.
  json task_view(const std::string& run_id, const Task& task);

  /// Runs `fn` on the run under its lock.
  template <typename Fn>
  auto with_run(const std::string& run_id, Fn&& fn) {
    auto h = handle(run_id);
    std::lock_guard lock(h->mutex);
    return fn(static_cast<const Run&>(*h->run));
  }

  std::vector<std::string> run_ids() const;
  bool has_run(const std::string& run_id) const;

  /// Replays every run found in the data directory. Returns the number of
  /// runs loaded.
  std::size_t recover();

 private:
  struct Handle {
    std::mutex mutex;
    std::unique_ptr<Run> run;
    std::map<std::string, json> submissions;  // submission id -> result
    Phase logged_phase = Phase::planning;
    int logged_iteration = 0;
  };

  std::shared_ptr<Handle> handle(const std::string& run_id) const;
  void persist_progress(const std::string& run_id, Handle& h);
  std::string next_run_id();
  void replay(const std::string& run_id, const std::vector<json>& events);

  std::optional<EventStore> store_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Handle>> runs_;
  std::map<std::string, std::string> requests_;
  std::uint64_t counter_ = 0;
};

/// Answers every open task of a simulated run through the Engine API with a
/// pool of max(m, theta) workers named sim-1, sim-2, ... until the run is done
/// or no worker can make progress. Returns the number of submissions.
std::size_t drive_simulation(Engine& engine, const std::string& run_id, std::uint64_t seed);

}  // namespace crowdorg
