#include "surfcomp/service/service.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "jobs.hpp"
#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/providers/clients.hpp"
#include "surfcomp/render/image_io.hpp"
#include "surfcomp/segmentation/export.hpp"
#include "surfcomp/util/base64.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::JobKind;

namespace {

struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& message, std::string field = {})
      : std::runtime_error(message), status(status), field(std::move(field)) {}
  int status;
  std::string field;
};

/// "points[0].u: must lie in [0, 512)" -> "points[0].u"
std::string field_of(const std::string& message) {
  const auto colon = message.find(": ");
  if (colon == std::string::npos) return {};
  const std::string head = message.substr(0, colon);
  return head.find(' ') == std::string::npos ? head : std::string();
}

std::string safe_id(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("scene") : out;
}

bool is_mesh_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".obj" || ext == ".ply";
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw HttpError(400, std::string("malformed JSON: ") + e.what());
  }
}

double number_field(const json& obj, const std::string& key, const std::string& field) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw HttpError(422, field + ": expected a number", field);
  return it->get<double>();
}

PromptSet parse_prompts(const json& body) {
  PromptSet prompts;
  if (body.contains("points")) {
    const json& points = body["points"];
    if (!points.is_array()) throw HttpError(422, "points: expected an array", "points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string f = fmt::format("points[{}]", i);
      if (!points[i].is_object()) throw HttpError(422, f + ": expected an object", f);
      PointPrompt p;
      p.u = number_field(points[i], "u", f + ".u");
      p.v = number_field(points[i], "v", f + ".v");
      const std::string pol = points[i].value("polarity", "foreground");
      if (pol == "background") p.polarity = Polarity::kBackground;
      else if (pol != "foreground") {
        throw HttpError(422, f + ".polarity: expected foreground or background", f + ".polarity");
      }
      prompts.points.push_back(p);
    }
  }
  if (body.contains("boxes")) {
    const json& boxes = body["boxes"];
    if (!boxes.is_array()) throw HttpError(422, "boxes: expected an array", "boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::string f = fmt::format("boxes[{}]", i);
      if (!boxes[i].is_object()) throw HttpError(422, f + ": expected an object", f);
      prompts.boxes.push_back({number_field(boxes[i], "u_min", f + ".u_min"),
                               number_field(boxes[i], "v_min", f + ".v_min"),
                               number_field(boxes[i], "u_max", f + ".u_max"),
                               number_field(boxes[i], "v_max", f + ".v_max")});
    }
  }
  return prompts;
}

std::string png_base64(const LabelMask& mask) {
  Gray16Image g(mask.width(), mask.height());
  std::copy(mask.data().begin(), mask.data().end(), g.data().begin());
  return base64_encode(encode_png(g));
}

LabelMask mask_from_base64(const std::string& text) {
  const Gray16Image g = decode_png_gray16(base64_decode(text));
  LabelMask mask(g.width(), g.height());
  std::copy(g.data().begin(), g.data().end(), mask.data().begin());
  return mask;
}

json relevance_json(const SegmentRecord& r) {
  if (!r.relevance) return nullptr;
  return {{"score", r.relevance->score}, {"label", r.relevance->label}, {"provenance", r.relevance->provenance}};
}

struct CachedResponse {
  int status;
  std::string body;
  std::string content_type;
};

struct Scene {
  std::string id;
  std::string name;
  fs::path mesh_path;
  fs::path journal_path;

  std::mutex mutex;
  std::optional<TriangleMesh> mesh;
  std::optional<BevRender> bev;
  std::string status = "loaded";
  std::map<std::string, LabelMask> masks;
  int next_mask = 1;
  std::map<std::string, SegmentRecord> segments;
  std::map<std::string, CachedResponse> responses;  ///< by request_id

  const TriangleMesh& ensure_mesh() {
    if (!mesh) mesh = load_mesh(mesh_path);
    return *mesh;
  }
  const BevRender& ensure_bev(const SegmentationParams& params) {
    if (!bev) bev = segmentation_bev(ensure_mesh(), params);
    return *bev;
  }
  void journal(const json& entry) const {
    std::ofstream out(journal_path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to journal '" + journal_path.string() + "'");
    out << entry.dump() << '\n';
    out.flush();
  }
};

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  detail::JobRunner jobs;
  std::thread listener;
  int bound_port = 0;

  std::mutex scenes_mutex;
  std::map<std::string, std::shared_ptr<Scene>> scenes;
  std::map<std::string, std::string> segment_owner;
  std::map<std::string, CachedResponse> upload_responses;

  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopped = false;

  explicit Impl(ServiceConfig c) : config(std::move(c)), jobs(config.job_workers) {
    if (config.state_dir.empty()) config.state_dir = config.scene_dir / ".surfcomp";
  }

  std::shared_ptr<Scene> scene(const std::string& id) {
    std::lock_guard lock(scenes_mutex);
    const auto it = scenes.find(id);
    if (it == scenes.end()) throw HttpError(404, "unknown scene '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Scene> owner_of(const std::string& segment_id) {
    std::string scene_id;
    {
      std::lock_guard lock(scenes_mutex);
      const auto it = segment_owner.find(segment_id);
      if (it == segment_owner.end()) throw HttpError(404, "unknown segment '" + segment_id + "'");
      scene_id = it->second;
    }
    return scene(scene_id);
  }

  std::shared_ptr<Scene> add_scene(const std::string& id, const std::string& name, const fs::path& mesh) {
    auto s = std::make_shared<Scene>();
    s->id = id;
    s->name = name;
    s->mesh_path = mesh;
    s->journal_path = config.state_dir / "journal" / (id + ".jsonl");
    std::lock_guard lock(scenes_mutex);
    scenes[id] = s;
    return s;
  }

  // Scene-scoped operations; callers hold s.mutex.

  std::string store_mask(Scene& s, LabelMask mask) {
    const std::string id = fmt::format("{}-m{}", s.id, s.next_mask++);
    s.masks.emplace(id, std::move(mask));
    return id;
  }

  std::vector<std::string> apply_slice(Scene& s, const std::string& mask_id) {
    const auto it = s.masks.find(mask_id);
    if (it == s.masks.end()) throw HttpError(404, "unknown mask '" + mask_id + "'");
    SliceOptions options = config.segmentation.slice;
    options.id_prefix = mask_id;
    SliceResult result = slice_by_mask(s.ensure_mesh(), it->second, s.ensure_bev(config.segmentation).frame,
                                       options, SegmentProvenance::kManual);
    std::vector<std::string> ids;
    std::lock_guard lock(scenes_mutex);
    for (SegmentRecord& r : result.segments) {
      ids.push_back(r.id);
      segment_owner[r.id] = s.id;
      s.segments.insert_or_assign(r.id, std::move(r));
    }
    return ids;
  }

  void replay(Scene& s) {
    std::ifstream in(s.journal_path);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0, applied = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json e = json::parse(line);
        const std::string op = e.at("op");
        if (op == "mask") {
          const std::string id = e.at("mask_id");
          s.masks.insert_or_assign(id, mask_from_base64(e.at("mask")));
          s.next_mask = std::max(s.next_mask, std::stoi(id.substr(id.rfind('m') + 1)) + 1);
        } else if (op == "slice") {
          apply_slice(s, e.at("mask_id"));
          s.status = "done";
        } else if (op == "score") {
          auto it = s.segments.find(e.at("segment_id"));
          if (it != s.segments.end()) {
            it->second.relevance =
                RelevanceScore{it->first, e.at("score"), e.value("label", ""), e.value("provenance", "unscored")};
          }
        } else if (op == "review") {
          auto it = s.segments.find(e.at("segment_id"));
          if (it != s.segments.end()) it->second.decide(segment_status_from_string(e.at("decision")));
        }
        ++applied;
      } catch (const std::exception& e) {
        logger()->warn("journal {} line {} skipped: {}", s.journal_path.string(), line_no, e.what());
      }
    }
    logger()->info("scene '{}': replayed {} journal entries", s.id, applied);
  }

  void scan_scenes() {
    std::error_code ec;
    if (!fs::is_directory(config.scene_dir, ec)) {
      throw IoError("scene directory '" + config.scene_dir.string() + "' is not readable");
    }
    fs::create_directories(config.state_dir / "journal");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(config.scene_dir)) {
      if (e.is_regular_file() && is_mesh_file(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      std::string id = safe_id(f.stem().string());
      while (scenes.count(id)) id += "_";
      auto s = add_scene(id, f.stem().string(), f);
      std::lock_guard lock(s->mutex);
      replay(*s);
    }
  }

  /// Runs `produce` once per request_id within `cache`; callers hold the lock
  /// guarding the cache.
  template <typename F>
  void idempotent(std::map<std::string, CachedResponse>& cache, const std::string& request_id, httplib::Response& res,
                  F&& produce) {
    if (!request_id.empty()) {
      const auto it = cache.find(request_id);
      if (it != cache.end()) {
        res.status = it->second.status;
        res.set_content(it->second.body, it->second.content_type);
        return;
      }
    }
    const json body = produce();
    res.status = 200;
    res.set_content(body.dump(), "application/json");
    if (!request_id.empty()) cache[request_id] = {200, body.dump(), "application/json"};
  }

  // Handlers.

  void list_scenes(const httplib::Request&, httplib::Response& res) {
    std::vector<std::shared_ptr<Scene>> all;
    {
      std::lock_guard lock(scenes_mutex);
      for (const auto& [id, s] : scenes) all.push_back(s);
    }
    json out = json::array();
    for (const auto& s : all) {
      std::lock_guard lock(s->mutex);
      out.push_back({{"id", s->id}, {"name", s->name}, {"status", s->status}});
    }
    res.set_content(out.dump(), "application/json");
  }

  void upload_scene(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("mesh")) throw HttpError(422, "mesh: multipart file field required", "mesh");
    const auto file = req.get_file_value("mesh");
    const std::string request_id = req.has_file("request_id") ? req.get_file_value("request_id").content : "";
    const fs::path filename = fs::path(file.filename).filename();
    if (!is_mesh_file(filename)) throw HttpError(422, "mesh: expected a .obj or .ply file", "mesh");

    static std::mutex upload_mutex;
    std::lock_guard lock(upload_mutex);
    idempotent(upload_responses, request_id, res, [&] {
      const fs::path tmp = config.state_dir / ("upload" + filename.extension().string());
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(file.content.data(), static_cast<std::streamsize>(file.content.size()));
        if (!out) throw IoError("cannot stage upload");
      }
      try {
        if (load_mesh(tmp).empty()) throw ParseError("no triangles", 0, ParseError::Unit::kLine);
      } catch (const Error& e) {
        fs::remove(tmp);
        throw HttpError(422, std::string("mesh: ") + e.what(), "mesh");
      }
      std::string id = safe_id(filename.stem().string());
      {
        std::lock_guard scenes_lock(scenes_mutex);
        const std::string base = id;
        for (int k = 2; scenes.count(id) || fs::exists(config.scene_dir / (id + filename.extension().string())); ++k) {
          id = fmt::format("{}-{}", base, k);
        }
      }
      const fs::path dest = config.scene_dir / (id + filename.extension().string());
      fs::rename(tmp, dest);
      const std::string name = req.has_file("name") ? req.get_file_value("name").content : filename.stem().string();
      add_scene(id, name, dest);
      return json{{"id", id}};
    });
  }

  void bev(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "rgb";
    if (kind != "rgb" && kind != "height") throw HttpError(422, "kind: expected rgb or height", "kind");
    std::vector<std::uint8_t> png;
    {
      std::lock_guard lock(s->mutex);
      const BevRender& b = s->ensure_bev(config.segmentation);
      png = kind == "rgb" ? encode_png(b.rgb) : encode_png(depth_to_millimeters(b.height));
    }
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void prompts(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    const json body = parse_body(req);
    const PromptSet prompts = parse_prompts(body);
    std::lock_guard lock(s->mutex);
    idempotent(s->responses, body.value("request_id", ""), res, [&] {
      const BevRender& b = s->ensure_bev(config.segmentation);
      LabelMask mask = request_mask(config.providers, b.rgb, b.height, prompts);
      const std::string encoded = png_base64(mask);
      const std::string id = store_mask(*s, std::move(mask));
      s->journal({{"op", "mask"}, {"mask_id", id}, {"mask", encoded}});
      return json{{"mask_id", id}, {"mask", encoded}, {"width", b.frame.width}, {"height", b.frame.height}};
    });
  }

  void slice(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    const json body = parse_body(req);
    if (!body.contains("mask_id") || !body["mask_id"].is_string()) {
      throw HttpError(422, "mask_id: required", "mask_id");
    }
    const std::string mask_id = body["mask_id"];
    std::lock_guard lock(s->mutex);
    if (!s->masks.count(mask_id)) throw HttpError(404, "unknown mask '" + mask_id + "'");
    idempotent(s->responses, body.value("request_id", ""), res, [&] {
      s->status = "segmenting";
      const std::string job = jobs.submit(JobKind::kSlice, [this, s, mask_id] {
        std::lock_guard job_lock(s->mutex);
        try {
          const auto ids = apply_slice(*s, mask_id);
          s->journal({{"op", "slice"}, {"mask_id", mask_id}});
          s->status = "done";
          return json{{"segments", ids}};
        } catch (...) {
          s->status = "loaded";
          throw;
        }
      });
      return json{{"job_id", job}};
    });
  }

  void score(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    const json body = parse_body(req);
    std::lock_guard lock(s->mutex);
    idempotent(s->responses, body.value("request_id", ""), res, [&] {
      const std::string job = jobs.submit(JobKind::kScore, [this, s] {
        std::lock_guard job_lock(s->mutex);
        json scored = json::array();
        for (auto& [id, r] : s->segments) {
          if (r.relevance) continue;
          const auto views = segment_views(r.submesh, static_cast<std::size_t>(config.segmentation.relevance_views),
                                           derive_seed(config.segmentation.seed, id),
                                           config.segmentation.view_intrinsics);
          RelevanceScore rs = score_relevance(config.providers, views, config.segmentation.category);
          rs.segment_id = id;
          r.relevance = rs;
          s->journal({{"op", "score"}, {"segment_id", id}, {"score", rs.score}, {"label", rs.label},
                      {"provenance", rs.provenance}});
          scored.push_back(id);
        }
        return json{{"scored", scored}};
      });
      return json{{"job_id", job}};
    });
  }

  void export_scene(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    const json body = parse_body(req);
    const auto accepted = body.find("accepted_only");
    if (accepted != body.end() && !accepted->is_boolean()) {
      throw HttpError(422, "accepted_only: expected a boolean", "accepted_only");
    }
    const bool accepted_only = accepted == body.end() ? true : accepted->get<bool>();
    std::lock_guard lock(s->mutex);
    idempotent(s->responses, body.value("request_id", ""), res, [&] {
      const std::string job = jobs.submit(JobKind::kExport, [this, s, accepted_only] {
        std::vector<SegmentRecord> records;
        {
          std::lock_guard job_lock(s->mutex);
          for (const auto& [id, r] : s->segments) records.push_back(r);
        }
        const fs::path dir = config.state_dir / "exports" / s->id;
        fs::remove_all(dir);
        const auto files = export_segments(records, dir, accepted_only);
        json out{{"dir", dir.string()}, {"files", json::array()}, {"segments", json::array()}};
        for (const auto& f : files) out["files"].push_back(f.string());
        for (const auto& r : records) {
          if (!accepted_only || r.status == SegmentStatus::kAccepted) out["segments"].push_back(r.id);
        }
        return out;
      });
      return json{{"job_id", job}};
    });
  }

  void segments(const httplib::Request& req, httplib::Response& res) {
    auto s = scene(req.matches[1]);
    json out = json::array();
    std::lock_guard lock(s->mutex);
    for (const auto& [id, r] : s->segments) {
      out.push_back({{"id", id},
                     {"label", r.label},
                     {"triangle_count", r.submesh.triangles().size()},
                     {"relevance", relevance_json(r)},
                     {"status", to_string(r.status)},
                     {"preview_url", "/api/segments/" + id + "/preview"}});
    }
    res.set_content(out.dump(), "application/json");
  }

  void job(const httplib::Request& req, httplib::Response& res) {
    const auto j = jobs.describe(req.matches[1]);
    if (!j) throw HttpError(404, "unknown job '" + std::string(req.matches[1]) + "'");
    res.set_content(j->dump(), "application/json");
  }

  void preview(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto s = owner_of(id);
    TriangleMesh mesh;
    {
      std::lock_guard lock(s->mutex);
      mesh = s->segments.at(id).submesh;
    }
    const auto views = segment_views(mesh, 1, derive_seed(config.segmentation.seed, id),
                                     config.segmentation.view_intrinsics);
    const auto png = encode_png(views.front());
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  void review(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto s = owner_of(id);
    const json body = parse_body(req);
    const std::string decision = body.value("decision", "");
    SegmentStatus target;
    if (decision == "accept" || decision == "accepted") target = SegmentStatus::kAccepted;
    else if (decision == "reject" || decision == "rejected") target = SegmentStatus::kRejected;
    else throw HttpError(422, "decision: expected accept or reject", "decision");

    std::lock_guard lock(s->mutex);
    SegmentRecord& r = s->segments.at(id);
    try {
      if (r.decide(target)) s->journal({{"op", "review"}, {"segment_id", id}, {"decision", to_string(target)}});
    } catch (const PreconditionError& e) {
      throw HttpError(409, e.what());
    }
    res.set_content(json{{"id", id}, {"status", to_string(r.status)}}.dump(), "application/json");
  }

  template <void (Impl::*Handler)(const httplib::Request&, httplib::Response&)>
  httplib::Server::Handler guarded() {
    return [this](const httplib::Request& req, httplib::Response& res) {
      auto fail = [&](int status, const std::string& message, const std::string& field) {
        json body{{"error", message}};
        if (!field.empty()) body["field"] = field;
        res.status = status;
        res.set_content(body.dump(), "application/json");
      };
      try {
        (this->*Handler)(req, res);
      } catch (const HttpError& e) {
        fail(e.status, e.what(), e.field);
      } catch (const PreconditionError& e) {
        fail(422, e.what(), field_of(e.what()));
      } catch (const EmptyRegionError& e) {
        fail(422, e.what(), "");
      } catch (const ProviderTimeoutError& e) {
        fail(504, e.what(), "");
      } catch (const ProviderError& e) {
        fail(502, e.what(), "");
      } catch (const std::exception& e) {
        logger()->error("{} {}: {}", req.method, req.path, e.what());
        fail(500, e.what(), "");
      }
    };
  }

  void routes() {
    server.Get("/api/scenes", guarded<&Impl::list_scenes>());
    server.Post("/api/scenes", guarded<&Impl::upload_scene>());
    server.Get(R"(/api/scenes/([^/]+)/bev)", guarded<&Impl::bev>());
    server.Post(R"(/api/scenes/([^/]+)/prompts)", guarded<&Impl::prompts>());
    server.Post(R"(/api/scenes/([^/]+)/slice)", guarded<&Impl::slice>());
    server.Post(R"(/api/scenes/([^/]+)/score)", guarded<&Impl::score>());
    server.Post(R"(/api/scenes/([^/]+)/export)", guarded<&Impl::export_scene>());
    server.Get(R"(/api/scenes/([^/]+)/segments)", guarded<&Impl::segments>());
    server.Get(R"(/api/jobs/([^/]+))", guarded<&Impl::job>());
    server.Get(R"(/api/segments/([^/]+)/preview)", guarded<&Impl::preview>());
    server.Post(R"(/api/segments/([^/]+)/review)", guarded<&Impl::review>());
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      logger()->debug("{} {} -> {}", req.method, req.path, res.status);
    });
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start() {
  Impl& m = *impl_;
  m.scan_scenes();
  m.routes();
  if (m.config.port == 0) {
    m.bound_port = m.server.bind_to_any_port(m.config.host);
    if (m.bound_port < 0) throw IoError("cannot bind " + m.config.host);
  } else {
    if (!m.server.bind_to_port(m.config.host, m.config.port)) {
      throw IoError(fmt::format("cannot bind {}:{}", m.config.host, m.config.port));
    }
    m.bound_port = m.config.port;
  }
  m.listener = std::thread([&m] {
    m.server.listen_after_bind();
    std::lock_guard lock(m.stop_mutex);
    m.stopped = true;
    m.stop_cv.notify_all();
  });
  m.server.wait_until_ready();
  logger()->info("serving {} scenes on {}:{}", m.scenes.size(), m.config.host, m.bound_port);
  return m.bound_port;
}

void Service::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stop_cv.wait(lock, [&] { return impl_->stopped; });
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

int Service::port() const { return impl_->bound_port; }

}  // namespace surfcomp
