#include <gtest/gtest.h>

#include <filesystem>

#include "crowdorg/metrics.hpp"
#include "crowdorg/service/engine.hpp"
#include "fixtures.hpp"

using namespace crowdorg;
namespace fs = std::filesystem;

namespace {

WorkflowConfig small_config(std::uint64_t seed = 1) {
  WorkflowConfig c;
  c.delta = 0.9;
  c.f = 3;
  c.h = 10;
  c.m = 3;
  c.theta = 3;
  c.rng_seed = seed;
  c.pivots_per_cluster = 3;
  c.categorization_batch = 10;
  return c;
}

ItemCorpus flat(int count, int concepts, std::uint64_t seed = 1) {
  Rng rng(seed);
  return generate_flat_corpus(FlatSpec::image_categories(count, concepts), rng);
}

// Answers a task the way a careful worker would: clusters by category,
// categorizes each item into the cluster whose pivots share its category.
Clustering truthful_clustering(const ItemCorpus& corpus, const Task& task) {
  return ground_truth_clustering(corpus, "category", ItemSet(task.item_ids.begin(), task.item_ids.end()));
}

std::map<ItemId, Vote> truthful_votes(const ItemCorpus& corpus, const Task& task) {
  std::map<ItemId, Vote> votes;
  for (const auto& item : task.item_ids) {
    Vote v;
    for (const auto& [cluster, pivots] : task.pivots) {
      if (corpus.at(pivots.front()).labels.at("category") == corpus.at(item).labels.at("category")) v = cluster;
    }
    votes[item] = v;
  }
  return votes;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Engine, LiveRunWaitsForClusteringResponses) {
  Engine engine;
  std::string id = engine.start_run(small_config(), flat(60, 3), RunSource::live());
  engine.with_run(id, [](const crowdorg::Run& r) {
    EXPECT_EQ(r.phase(), Phase::clustering);
    EXPECT_EQ(r.iteration(), 1);
    EXPECT_EQ(r.n(), solve_sample_size(0.9, 3));
    EXPECT_EQ(r.tau(), solve_iterations(r.n(), 3, 10));
    return 0;
  });
  auto task = engine.get_task(id, "alice");
  ASSERT_TRUE(task);
  EXPECT_EQ(task->task_id, "cluster-1");
  EXPECT_EQ(task->kind, TaskKind::clustering);
  EXPECT_EQ(task->item_ids.size(), 10U);
  EXPECT_EQ(task->assignments_remaining, 3);
}

TEST(Engine, RejectsInvalidConfig) {
  Engine engine;
  auto c = small_config();
  c.h = c.f;
  EXPECT_THROW(engine.start_run(c, flat(20, 2), RunSource::live()), Error);
}

TEST(Engine, SubmissionRejections) {
  Engine engine;
  auto corpus = flat(60, 3);
  std::string id = engine.start_run(small_config(), corpus, RunSource::live());
  auto task = *engine.get_task(id, "w1");

  Clustering overlap{"", "", {ItemSet(task.item_ids.begin(), task.item_ids.end()), {task.item_ids.front()}}};
  auto r = engine.submit_clustering(id, task.task_id, "w1", overlap);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "disjointness");
  EXPECT_TRUE(r.violations.has("disjointness"));

  Clustering partial{"", "", {{task.item_ids.front()}}};
  EXPECT_EQ(engine.submit_clustering(id, task.task_id, "w1", partial).reason, "coverage");
  EXPECT_EQ(engine.submit_clustering(id, "cluster-99", "w1", partial).reason, "unknown-task");

  auto good = truthful_clustering(corpus, task);
  EXPECT_TRUE(engine.submit_clustering(id, task.task_id, "w1", good).accepted);
  EXPECT_EQ(engine.submit_clustering(id, task.task_id, "w1", good).reason, "duplicate-worker");
  EXPECT_EQ(engine.submit_categorization(id, task.task_id, "w2", {}).reason, "wrong-kind");

  // the worker who answered gets nothing else until the next sample opens
  EXPECT_FALSE(engine.get_task(id, "w1"));
  EXPECT_TRUE(engine.submit_clustering(id, task.task_id, "w2", good).accepted);
  EXPECT_TRUE(engine.submit_clustering(id, task.task_id, "w3", good).accepted);
  EXPECT_EQ(engine.submit_clustering(id, task.task_id, "w4", good).reason, "task-closed");
  EXPECT_THROW(engine.get_task("run-none", "w1"), Error);
}

TEST(Engine, SubmissionIdsMakeRetriesIdempotent) {
  Engine engine;
  auto corpus = flat(60, 3);
  std::string id = engine.start_run(small_config(), corpus, RunSource::live(), "req-1");
  EXPECT_EQ(engine.start_run(small_config(), corpus, RunSource::live(), "req-1"), id);
  EXPECT_EQ(engine.run_ids().size(), 1U);

  auto task = *engine.get_task(id, "w1");
  auto c = truthful_clustering(corpus, task);
  EXPECT_TRUE(engine.submit_clustering(id, task.task_id, "w1", c, "sub-1").accepted);
  auto again = engine.submit_clustering(id, task.task_id, "w1", c, "sub-1");
  EXPECT_TRUE(again.accepted);
  EXPECT_TRUE(again.replayed);
  auto remaining = engine.with_run(id, [&](const crowdorg::Run& r) { return r.find_task(task.task_id)->assignments_remaining; });
  EXPECT_EQ(remaining, 2);
}

TEST(Engine, ScriptedLiveRunRecoversCategories) {
  Engine engine;
  auto corpus = flat(120, 3);  // no more concepts than f, so no kernel splits
  auto config = small_config(7);
  std::string id = engine.start_run(config, corpus, RunSource::live());
  std::vector<std::string> workers{"ann", "bo", "cy"};
  int guard = 0;
  for (bool progress = true; progress && guard < 10000; ++guard) {
    progress = false;
    for (const auto& w : workers) {
      auto task = engine.get_task(id, w);
      if (!task) continue;
      SubmitResult r = task->kind == TaskKind::clustering
                           ? engine.submit_clustering(id, task->task_id, w, truthful_clustering(corpus, *task))
                           : engine.submit_categorization(id, task->task_id, w, truthful_votes(corpus, *task));
      ASSERT_TRUE(r.accepted) << r.reason << " " << r.detail;
      progress = true;
    }
  }
  auto report = engine.run_report(id);
  EXPECT_EQ(report.at("phase"), "done");
  EXPECT_TRUE(report.at("final").get<bool>());
  auto result = engine.with_run(id, [](const crowdorg::Run& r) { return r.final_clustering(); });
  EXPECT_NEAR(normalized_mutual_information(result, ground_truth_clustering(corpus, "category")), 1.0, 1e-9);
  EXPECT_EQ(report.at("cost").at("clustering_tasks"), config.m * report.at("tau").get<int>());
}

TEST(Engine, SimulatedShapesRunCompletes) {
  Engine engine;
  Rng rng(3);
  auto corpus = generate_shapes_corpus(ShapesSpec::standard(150), rng);
  WorkflowConfig c = WorkflowConfig::reference_preset();
  c.m = 9;
  c.rng_seed = 3;
  std::string id = engine.start_run(c, corpus, RunSource::simulate(WorkerModel::shapes_default()));
  auto submitted = drive_simulation(engine, id, 3);
  EXPECT_GT(submitted, 0U);
  auto report = engine.run_report(id);
  EXPECT_EQ(report.at("phase"), "done");
  EXPECT_TRUE(report.at("metrics").contains("hierarchy_count"));
  EXPECT_TRUE(validate_hierarchy(report.at("hierarchy").get<Hierarchy>()).ok());
  auto result = engine.with_run(id, [](const crowdorg::Run& r) { return r.final_clustering(); });
  EXPECT_TRUE(validate_clustering(result, corpus.ids()).ok());
}

TEST(Engine, DriverRefusesLiveRuns) {
  Engine engine;
  std::string id = engine.start_run(small_config(), flat(30, 2), RunSource::live());
  EXPECT_THROW(drive_simulation(engine, id, 1), Error);
}

TEST(Engine, CorpusSmallerThanSampleFinishesEarly) {
  Engine engine;
  auto c = small_config();
  c.h = 40;
  c.n = 200;
  std::string id = engine.start_run(c, flat(25, 3), RunSource::simulate(WorkerModel::single("category")));
  drive_simulation(engine, id, 1);
  auto report = engine.run_report(id);
  EXPECT_EQ(report.at("phase"), "done");
  EXPECT_EQ(report.at("iteration"), 1);
}

TEST(Engine, RecoveryReplaysTheEventLog) {
  TempDir dir("crowdorg_engine_recovery");
  std::string id;
  json before;
  {
    Engine engine(dir.path);
    id = engine.start_run(small_config(5), flat(50, 3), RunSource::simulate(WorkerModel::single("category")), "r1");
    drive_simulation(engine, id, 5);
    before = engine.run_report(id);
  }
  Engine revived(dir.path);
  EXPECT_EQ(revived.recover(), 1U);
  EXPECT_EQ(revived.run_report(id), before);
  EXPECT_EQ(revived.start_run(small_config(5), flat(50, 3), RunSource::live(), "r1"), id);
  EXPECT_TRUE(fs::exists(dir.path / id / "snapshot.json"));
}

TEST(Engine, RecoveryMidRunContinuesWhereItStopped) {
  TempDir dir("crowdorg_engine_midrun");
  auto corpus = flat(60, 3);
  std::string id;
  {
    Engine engine(dir.path);
    id = engine.start_run(small_config(9), corpus, RunSource::live());
    auto task = *engine.get_task(id, "w1");
    ASSERT_TRUE(engine.submit_clustering(id, task.task_id, "w1", truthful_clustering(corpus, task), "s1").accepted);
  }
  Engine revived(dir.path);
  revived.recover();
  auto task = *revived.get_task(id, "w2");
  EXPECT_EQ(task.assignments_remaining, 2);
  EXPECT_FALSE(revived.get_task(id, "w1").has_value());
  auto replay = revived.submit_clustering(id, task.task_id, "w1", truthful_clustering(corpus, task), "s1");
  EXPECT_TRUE(replay.replayed);
}

// Property: a run is a pure function of its config, corpus and responses.
// Repeating a simulated run gives the same report, and so does rebuilding it
// from its event log.
TEST(EngineProperty, DeterministicUnderReplay) {
  TempDir dir("crowdorg_engine_replay");
  for (int trial = 0; trial < 1000; ++trial) {
    auto config = small_config(static_cast<std::uint64_t>(trial));
    config.m = 1 + trial % 3;
    auto corpus = flat(24 + trial % 17, 2 + trial % 4, static_cast<std::uint64_t>(trial));
    auto model = WorkerModel::single("category", 0.5);
    model.noise_rate = (trial % 5) * 0.05;

    auto path = dir.path / std::to_string(trial);
    json first;
    std::string id;
    {
      Engine engine(path);
      id = engine.start_run(config, corpus, RunSource::simulate(model));
      drive_simulation(engine, id, static_cast<std::uint64_t>(trial));
      first = engine.run_report(id);
    }
    Engine again;
    auto id2 = again.start_run(config, corpus, RunSource::simulate(model));
    drive_simulation(again, id2, static_cast<std::uint64_t>(trial));
    ASSERT_EQ(again.run_report(id2), first) << "trial " << trial;

    Engine revived(path);
    revived.recover();
    ASSERT_EQ(revived.run_report(id), first) << "trial " << trial;
    fs::remove_all(path);
  }
}
