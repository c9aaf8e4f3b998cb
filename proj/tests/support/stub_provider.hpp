#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace surfcomp::testing {

/// Minimal HTTP provider on 127.0.0.1 with an ephemeral port. Each route
/// answers with what its handler returns: {status, JSON body}.
class StubProvider {
 public:
  using Handler = std::function<std::pair<int, nlohmann::json>(const nlohmann::json& request)>;

  StubProvider();
  ~StubProvider();

  void on(const std::string& route, Handler handler);
  void start();
  std::string url() const;
  int calls(const std::string& route) const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::map<std::string, std::shared_ptr<std::atomic<int>>> calls_;
};

}  // namespace surfcomp::testing
