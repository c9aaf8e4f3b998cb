#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "stub_provider.hpp"
#include "surfcomp/providers/clients.hpp"
#include "surfcomp/providers/fallback.hpp"
#include "surfcomp/render/image_io.hpp"
#include "surfcomp/segmentation/pipeline.hpp"
#include "surfcomp/util/base64.hpp"
#include "surfcomp/util/error.hpp"

using namespace surfcomp;
using namespace surfcomp::testing;
using nlohmann::json;

namespace {

TriangleMesh two_box_scene() {
  return merge({make_ground(Vec2(-2, -2), Vec2(2, 2), 0.0), make_box(Vec3(-1.5, -1.0, 0), Vec3(-0.5, 1.0, 1.0)),
                make_box(Vec3(0.5, -0.5, 0), Vec3(1.5, 0.5, 0.6))});
}

BevRender scene_bev(const TriangleMesh& scene, int resolution = 128) {
  SegmentationParams p;
  p.bev_resolution = resolution;
  return segmentation_bev(scene, p);
}

PointPrompt prompt_at(const BevFrame& f, double x, double y, Polarity pol = Polarity::kForeground) {
  const Vec2 px = f.to_pixel(x, y);
  return {px.x(), px.y(), pol};
}

std::string mask_png(const LabelMask& mask) {
  Gray16Image g(mask.width(), mask.height());
  std::copy(mask.data().begin(), mask.data().end(), g.data().begin());
  return base64_encode(encode_png(g));
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST(Prompts, ValidationNamesTheField) {
  PromptSet p;
  p.points.push_back({10, 10});
  p.points.push_back({5, 300});
  try {
    p.validate(256, 256);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("points[1].v", 0), 0u) << e.what();
  }
  PromptSet boxes;
  boxes.boxes.push_back({50, 50, 40, 60});
  EXPECT_THROW(boxes.validate(256, 256), PreconditionError);
  EXPECT_THROW(PromptSet{}.validate(256, 256), PreconditionError);
}

TEST(Prompts, RelabelContiguousKeepsOrder) {
  LabelMask m(3, 1);
  m.at(0, 0) = 7;
  m.at(2, 0) = 3;
  EXPECT_FALSE(labels_contiguous(m));
  const LabelMask r = relabel_contiguous(m);
  EXPECT_EQ(r.at(0, 0), 2);
  EXPECT_EQ(r.at(2, 0), 1);
  EXPECT_TRUE(labels_contiguous(r));
  EXPECT_EQ(max_label(r), 2);
}

TEST(FallbackMask, PointSelectsOnlyItsBox) {
  const TriangleMesh scene = two_box_scene();
  const BevRender bev = scene_bev(scene);
  PromptSet p;
  p.points.push_back(prompt_at(bev.frame, -1.0, 0.0));
  const LabelMask mask = fallback_mask(bev.height, p);
  EXPECT_EQ(max_label(mask), 1);
  auto label = [&](double x, double y) {
    const Vec2 px = bev.frame.to_pixel(x, y);
    return mask.at(int(px.x()), int(px.y()));
  };
  EXPECT_EQ(label(-1.0, 0.9), 1);
  EXPECT_EQ(label(-1.4, -0.9), 1);
  EXPECT_EQ(label(1.0, 0.0), 0);
  EXPECT_EQ(label(0.0, 0.0), 0);
  EXPECT_EQ(label(-1.9, 1.9), 0);
}

TEST(FallbackMask, LabelsFollowPromptOrder) {
  const BevRender bev = scene_bev(two_box_scene());
  PromptSet p;
  p.points.push_back(prompt_at(bev.frame, 1.0, 0.0));
  p.points.push_back(prompt_at(bev.frame, -1.0, 0.0));
  const LabelMask mask = fallback_mask(bev.height, p);
  const Vec2 a = bev.frame.to_pixel(1.0, 0.0), b = bev.frame.to_pixel(-1.0, 0.0);
  EXPECT_EQ(mask.at(int(a.x()), int(a.y())), 1);
  EXPECT_EQ(mask.at(int(b.x()), int(b.y())), 2);
}

TEST(FallbackMask, BoxTakesAboveGroundPixels) {
  const BevRender bev = scene_bev(two_box_scene());
  const Vec2 lo = bev.frame.to_pixel(0.0, 1.8), hi = bev.frame.to_pixel(1.9, -1.8);
  PromptSet p;
  p.boxes.push_back({lo.x(), lo.y(), hi.x(), hi.y()});
  const LabelMask mask = fallback_mask(bev.height, p);
  const Vec2 box = bev.frame.to_pixel(1.0, 0.0), ground = bev.frame.to_pixel(1.0, 1.5);
  EXPECT_EQ(mask.at(int(box.x()), int(box.y())), 1);
  EXPECT_EQ(mask.at(int(ground.x()), int(ground.y())), 0);
}

TEST(FallbackMask, PointOnGroundIsEmptyRegion) {
  const BevRender bev = scene_bev(two_box_scene());
  PromptSet p;
  p.points.push_back(prompt_at(bev.frame, 0.0, 1.5));
  EXPECT_THROW(fallback_mask(bev.height, p), EmptyRegionError);
}

TEST(FallbackMask, BackgroundPointCarves) {
  const BevRender bev = scene_bev(two_box_scene());
  const Vec2 lo = bev.frame.to_pixel(-1.9, 1.9), hi = bev.frame.to_pixel(1.9, -1.9);
  PromptSet p;
  p.boxes.push_back({lo.x(), lo.y(), hi.x(), hi.y()});
  p.points.push_back(prompt_at(bev.frame, 1.0, 0.0, Polarity::kBackground));
  const LabelMask mask = fallback_mask(bev.height, p);
  const Vec2 carved = bev.frame.to_pixel(1.0, 0.0), kept = bev.frame.to_pixel(-1.0, 0.0);
  EXPECT_EQ(mask.at(int(carved.x()), int(carved.y())), 0);
  EXPECT_EQ(mask.at(int(kept.x()), int(kept.y())), 1);
}

TEST(ProviderConfig, EnvOverridesFile) {
  TempDir dir;
  write_text(dir / "c.json", R"({"providers": {"mask_endpoint": "http://file:1", "timeout_ms": 250}})");
  ScopedEnv env("SURFCOMP_MASK_URL", "http://env:2");
  const ProviderConfig c = load_provider_config(dir / "c.json");
  EXPECT_EQ(c.mask_endpoint, "http://env:2");
  EXPECT_EQ(c.timeout_ms, 250);
  EXPECT_TRUE(c.score_endpoint.empty());
}

TEST(ProviderConfig, RejectsBadTimeout) {
  ScopedEnv env("SURFCOMP_PROVIDER_TIMEOUT_MS", "0");
  EXPECT_THROW(load_provider_config(), PreconditionError);
}

TEST(RequestMask, FallbackWithoutEndpoint) {
  const BevRender bev = scene_bev(two_box_scene());
  PromptSet p;
  p.points.push_back(prompt_at(bev.frame, 1.0, 0.0));
  const LabelMask m = request_mask(ProviderConfig{}, bev.rgb, bev.height, p);
  EXPECT_EQ(max_label(m), 1);
}

TEST(RequestMask, ValidatesBeforeAnyTraffic) {
  StubProvider stub;
  stub.on("/v1/mask", [](const json&) { return std::pair{200, json::object()}; });
  stub.start();
  ProviderConfig c;
  c.mask_endpoint = stub.url();
  const BevRender bev = scene_bev(two_box_scene(), 32);
  PromptSet p;
  p.points.push_back({-1, 3});
  EXPECT_THROW(request_mask(c, bev.rgb, bev.height, p), PreconditionError);
  EXPECT_EQ(stub.calls("/v1/mask"), 0);
}

TEST(RequestMask, WireRoundTrip) {
  const BevRender bev = scene_bev(two_box_scene(), 32);
  LabelMask reply(32, 32);
  reply.at(3, 4) = 9;
  json seen;
  StubProvider stub;
  stub.on("/v1/mask", [&](const json& req) {
    seen = req;
    return std::pair{200, json{{"mask", mask_png(reply)}}};
  });
  stub.start();
  ProviderConfig c;
  c.mask_endpoint = stub.url();
  PromptSet p;
  p.points.push_back({3.5, 4.5, Polarity::kBackground});
  p.boxes.push_back({1, 2, 3, 4});
  const LabelMask m = request_mask(c, bev.rgb, bev.height, p);
  EXPECT_EQ(m.at(3, 4), 1);
  EXPECT_EQ(seen["points"][0]["polarity"], "background");
  EXPECT_EQ(seen["boxes"][0]["v_max"], 4.0);
  EXPECT_EQ(decode_png_rgb(base64_decode(seen["image"].get<std::string>())), bev.rgb);
}

TEST(RequestMask, StatusErrorIsNotRetried) {
  StubProvider stub;
  stub.on("/v1/mask", [](const json&) { return std::pair{500, json{{"error", "down"}}}; });
  stub.start();
  ProviderConfig c;
  c.mask_endpoint = stub.url();
  c.backoff_base_ms = 1;
  const BevRender bev = scene_bev(two_box_scene(), 32);
  PromptSet p;
  p.points.push_back({5, 5});
  EXPECT_THROW(request_mask(c, bev.rgb, bev.height, p), ProviderProtocolError);
  EXPECT_EQ(stub.calls("/v1/mask"), 1);
}

TEST(RequestMask, WrongSizeIsProtocolError) {
  StubProvider stub;
  stub.on("/v1/mask", [](const json&) {
    LabelMask small(8, 8, 1);
    return std::pair{200, json{{"mask", mask_png(small)}}};
  });
  stub.start();
  ProviderConfig c;
  c.mask_endpoint = stub.url();
  const BevRender bev = scene_bev(two_box_scene(), 32);
  PromptSet p;
  p.points.push_back({5, 5});
  EXPECT_THROW(request_mask(c, bev.rgb, bev.height, p), ProviderProtocolError);
}

TEST(RequestMask, SlowProviderTimesOutAfterRetries) {
  StubProvider stub;
  stub.on("/v1/mask", [](const json&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    return std::pair{200, json::object()};
  });
  stub.start();
  ProviderConfig c;
  c.mask_endpoint = stub.url();
  c.timeout_ms = 100;
  c.max_attempts = 2;
  c.backoff_base_ms = 1;
  const BevRender bev = scene_bev(two_box_scene(), 32);
  PromptSet p;
  p.points.push_back({5, 5});
  try {
    request_mask(c, bev.rgb, bev.height, p);
    FAIL();
  } catch (const ProviderTimeoutError& e) {
    EXPECT_TRUE(e.retriable());
  }
  EXPECT_EQ(stub.calls("/v1/mask"), 2);
}

TEST(RequestMask, UnreachableEndpointIsRetriable) {
  ProviderConfig c;
  c.mask_endpoint = "http://127.0.0.1:1";
  c.max_attempts = 2;
  c.backoff_base_ms = 1;
  c.timeout_ms = 200;
  const BevRender bev = scene_bev(two_box_scene(), 32);
  PromptSet p;
  p.points.push_back({5, 5});
  EXPECT_THROW(request_mask(c, bev.rgb, bev.height, p), ProviderTimeoutError);
}

TEST(ScoreRelevance, FallbackIsUnscored) {
  const std::vector<RgbImage> views{RgbImage(4, 4)};
  const RelevanceScore s = score_relevance(ProviderConfig{}, views, "building");
  EXPECT_EQ(s.score, 1.0);
  EXPECT_EQ(s.provenance, "unscored");
  ProviderConfig off;
  off.fallback_enabled = false;
  EXPECT_THROW(score_relevance(off, views, "building"), ProviderError);
}

TEST(ScoreRelevance, AveragesPerViewScores) {
  StubProvider stub;
  stub.on("/v1/score", [](const json& req) {
    EXPECT_EQ(req["labels"][0], "building");
    return std::pair{200, json{{"scores", {{0.2}, {0.6}}}}};
  });
  stub.start();
  ProviderConfig c;
  c.score_endpoint = stub.url();
  const std::vector<RgbImage> views{RgbImage(4, 4), RgbImage(4, 4)};
  const RelevanceScore s = score_relevance(c, views, "building");
  EXPECT_NEAR(s.score, 0.4, 1e-15);
  EXPECT_EQ(s.provenance, "scored");
}

TEST(ScoreRelevance, OutOfRangeScoreRejected) {
  StubProvider stub;
  stub.on("/v1/score", [](const json&) { return std::pair{200, json{{"scores", {{1.5}}}}}; });
  stub.start();
  ProviderConfig c;
  c.score_endpoint = stub.url();
  const std::vector<RgbImage> views{RgbImage(4, 4)};
  EXPECT_THROW(score_relevance(c, views, "building"), ProviderProtocolError);
}

TEST(Caption, ModalSelectionAndTies) {
  const std::vector<std::string> a{"a house", "a tower", "a house"};
  EXPECT_EQ(select_caption(a), "a house");
  const std::vector<std::string> b{"a tall tower", "a house"};
  EXPECT_EQ(select_caption(b), "a tall tower");
  const std::vector<std::string> c{"bbb", "aaa"};
  EXPECT_EQ(select_caption(c), "aaa");
}

TEST(Caption, TemplateFallback) {
  const Aabb b{Vec3(0, 0, 0), Vec3(12.34, 5.0, 7.06)};
  EXPECT_EQ(template_caption(b), "a 3D scene segment, footprint 12.3m × 5.0m, height 7.1m");
  const std::vector<RgbImage> views{RgbImage(4, 4)};
  const Caption cap = caption_segment(ProviderConfig{}, views, b);
  EXPECT_EQ(cap.text, template_caption(b));
}

TEST(Caption, ProviderCaptionsPerView) {
  std::atomic<int> n{0};
  StubProvider stub;
  stub.on("/v1/caption", [&](const json&) {
    return std::pair{200, json{{"caption", (n++ == 0) ? "a red building" : "a building"}}};
  });
  stub.start();
  ProviderConfig c;
  c.caption_endpoint = stub.url();
  c.max_inflight = 1;
  const std::vector<RgbImage> views(4, RgbImage(4, 4));
  const Caption cap = caption_segment(c, views, Aabb{});
  EXPECT_EQ(cap.text, "a building");
  EXPECT_EQ(cap.source_view_count, 4u);
}
