#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "surfcomp/providers/config.hpp"
#include "surfcomp/segmentation/pipeline.hpp"

namespace surfcomp {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  ///< 0 picks a free port
  std::filesystem::path scene_dir;
  /// Journals and exports; defaults to scene_dir/.surfcomp.
  std::filesystem::path state_dir;
  ProviderConfig providers;
  SegmentationParams segmentation;
  std::size_t job_workers = 2;
};

/// HTTP front end for the manual segmentation workflow.
///
///   GET  /api/scenes                      [{id, name, status}]
///   POST /api/scenes                      multipart "mesh" (+ "name", "request_id") -> {id}
///   GET  /api/scenes/{id}/bev?kind=rgb|height
///   POST /api/scenes/{id}/prompts         {points, boxes, request_id} -> {mask_id, mask}
///   POST /api/scenes/{id}/slice           {mask_id, request_id} -> {job_id}
///   POST /api/scenes/{id}/score           {request_id} -> {job_id}
///   POST /api/scenes/{id}/export          {accepted_only, request_id} -> {job_id}
///   GET  /api/scenes/{id}/segments
///   GET  /api/jobs/{id}                   {id, kind, state, result, error}
///   GET  /api/segments/{id}/preview       PNG
///   POST /api/segments/{id}/review        {decision} -> {status}
///
/// Mutating requests that carry a request_id return the first response again
/// on retry. Masks, slices and review decisions are journaled per scene and
/// replayed when the service restarts on the same state directory.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Scans the scene directory, replays journals, binds and starts serving on
  /// a background thread. Returns the bound port. Throws IoError when the
  /// scene directory is unreadable or the port cannot be bound.
  int start();
  /// Blocks until stop() is called.
  void wait();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surfcomp
