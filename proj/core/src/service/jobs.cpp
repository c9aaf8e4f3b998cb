#include "jobs.hpp"

#include <fmt/format.h>

#include "surfcomp/util/log.hpp"

namespace surfcomp::detail {

const char* to_string(JobKind k) {
  switch (k) {
    case JobKind::kMask: return "mask";
    case JobKind::kSlice: return "slice";
    case JobKind::kScore: return "score";
    case JobKind::kBuild: return "build";
    case JobKind::kExport: return "export";
  }
  return "?";
}

const char* to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kSucceeded: return "succeeded";
    case JobState::kFailed: return "failed";
  }
  return "?";
}

JobRunner::JobRunner(std::size_t workers) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { work(); });
}

JobRunner::~JobRunner() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  workers_.clear();
}

std::string JobRunner::submit(JobKind kind, std::function<nlohmann::json()> body) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = fmt::format("job-{}", next_id_++);
    Job job;
    job.kind = kind;
    jobs_.emplace(id, std::move(job));
    queue_.emplace_back(id, std::move(body));
  }
  queue_cv_.notify_one();
  return id;
}

std::optional<nlohmann::json> JobRunner::describe(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const Job& j = it->second;
  nlohmann::json out{{"id", id}, {"kind", to_string(j.kind)}, {"state", to_string(j.state)},
                     {"result", j.result}};
  if (j.state == JobState::kFailed) out["error"] = j.error;
  return out;
}

bool JobRunner::wait(const std::string& id) const {
  std::unique_lock lock(mutex_);
  if (!jobs_.count(id)) return false;
  done_cv_.wait(lock, [&] {
    const JobState s = jobs_.at(id).state;
    return s == JobState::kSucceeded || s == JobState::kFailed;
  });
  return true;
}

void JobRunner::work() {
  for (;;) {
    std::pair<std::string, std::function<nlohmann::json()>> next;
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      next = std::move(queue_.front());
      queue_.pop_front();
      jobs_.at(next.first).state = JobState::kRunning;
    }
    nlohmann::json result;
    std::string error;
    bool ok = true;
    try {
      result = next.second();
    } catch (const std::exception& e) {
      ok = false;
      error = e.what();
      logger()->warn("{} failed: {}", next.first, error);
    }
    {
      std::lock_guard lock(mutex_);
      Job& j = jobs_.at(next.first);
      j.result = std::move(result);
      j.error = std::move(error);
      j.state = ok ? JobState::kSucceeded : JobState::kFailed;
    }
    done_cv_.notify_all();
  }
}

}  // namespace surfcomp::detail
