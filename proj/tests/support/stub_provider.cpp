#include "stub_provider.hpp"

#include <map>

#include <httplib.h>

namespace surfcomp::testing {

StubProvider::StubProvider() : server_(std::make_unique<httplib::Server>()) {}

StubProvider::~StubProvider() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void StubProvider::on(const std::string& route, Handler handler) {
  auto counter = std::make_shared<std::atomic<int>>(0);
  calls_[route] = counter;
  server_->Post(route, [handler = std::move(handler), counter](const httplib::Request& req, httplib::Response& res) {
    ++*counter;
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    const auto [status, reply] = handler(body);
    res.status = status;
    res.set_content(reply.is_string() ? reply.get<std::string>() : reply.dump(), "application/json");
  });
}

void StubProvider::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string StubProvider::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

int StubProvider::calls(const std::string& route) const {
  const auto it = calls_.find(route);
  return it == calls_.end() ? 0 : it->second->load();
}

}  // namespace surfcomp::testing
