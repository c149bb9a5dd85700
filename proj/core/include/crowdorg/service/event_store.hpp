#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crowdorg/serialization.hpp"

namespace crowdorg {

/// Per-run append-only event log (`<root>/<run_id>/events.jsonl`, one JSON
/// document per line) and latest state snapshot (`snapshot.json`).
class EventStore {
 public:
  explicit EventStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  void append(const std::string& run_id, const json& event);
  std::vector<json> read(const std::string& run_id) const;

  void write_snapshot(const std::string& run_id, const json& snapshot);
  std::optional<json> read_snapshot(const std::string& run_id) const;

  /// Run ids with an event log, sorted.
  std::vector<std::string> runs() const;

 private:
  std::filesystem::path dir(const std::string& run_id) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

}  // namespace crowdorg
