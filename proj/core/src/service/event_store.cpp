#include "crowdorg/service/event_store.hpp"

#include <algorithm>
#include <fstream>

namespace crowdorg {

EventStore::EventStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path EventStore::dir(const std::string& run_id) const {
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..") {
    throw Error("invalid run id '" + run_id + "'");
  }
  return root_ / run_id;
}

void EventStore::append(const std::string& run_id, const json& event) {
  std::lock_guard lock(mutex_);
  auto d = dir(run_id);
  std::filesystem::create_directories(d);
  std::ofstream out(d / "events.jsonl", std::ios::app);
  if (!out) throw Error("cannot append to event log of run " + run_id);
  out << event.dump() << "\n";
  out.flush();
}

std::vector<json> EventStore::read(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(dir(run_id) / "events.jsonl");
  if (!in) throw Error("run " + run_id + " has no event log");
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception&) {
      // a torn final line from a crash mid-append is dropped
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw Error("event log of run " + run_id + " is corrupt at line " + std::to_string(line_no));
    }
  }
  return out;
}

void EventStore::write_snapshot(const std::string& run_id, const json& snapshot) {
  std::lock_guard lock(mutex_);
  auto d = dir(run_id);
  std::filesystem::create_directories(d);
  auto tmp = d / "snapshot.json.tmp";
  write_json_file(tmp, snapshot);
  std::filesystem::rename(tmp, d / "snapshot.json");
}

std::optional<json> EventStore::read_snapshot(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto path = dir(run_id) / "snapshot.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_json_file(path);
}

std::vector<std::string> EventStore::runs() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "events.jsonl")) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace crowdorg
