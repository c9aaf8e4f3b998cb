#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace surfcomp::detail {

enum class JobKind { kMask, kSlice, kScore, kBuild, kExport };
enum class JobState { kQueued, kRunning, kSucceeded, kFailed };

const char* to_string(JobKind k);
const char* to_string(JobState s);

/// In-memory job table drained by a fixed pool of workers. A job's state only
/// ever moves forward: queued, running, then succeeded or failed.
class JobRunner {
 public:
  explicit JobRunner(std::size_t workers);
  ~JobRunner();

  std::string submit(JobKind kind, std::function<nlohmann::json()> body);
  std::optional<nlohmann::json> describe(const std::string& id) const;
  /// Blocks until the job finishes; false for unknown ids.
  bool wait(const std::string& id) const;

 private:
  struct Job {
    JobKind kind = JobKind::kMask;
    JobState state = JobState::kQueued;
    nlohmann::json result;
    std::string error;
  };

  void work();

  mutable std::mutex mutex_;
  mutable std::condition_variable queue_cv_;
  mutable std::condition_variable done_cv_;
  std::deque<std::pair<std::string, std::function<nlohmann::json()>>> queue_;
  std::map<std::string, Job> jobs_;
  std::size_t next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::jthread> workers_;
};

}  // namespace surfcomp::detail
