#pragma once

// In-process HTTP servers speaking the search and chat-completion provider
// shapes, plus small helpers shared by the unit and acceptance suites.

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "entclf/acquisition.hpp"

namespace fixtures {

using nlohmann::json;

class Server {
 public:
  explicit Server(const std::function<void(httplib::Server&)>& setup) {
    setup(srv_);
    port_ = srv_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { srv_.listen_after_bind(); });
    srv_.wait_until_ready();
  }
  ~Server() {
    srv_.stop();
    thread_.join();
  }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::string url(const std::string& path = "") const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server srv_;
  int port_ = 0;
  std::thread thread_;
};

/// Tracks concurrent handler executions.
struct InFlight {
  std::atomic<int> now{0};
  std::atomic<int> peak{0};
  std::atomic<int> total{0};

  struct Guard {
    InFlight& f;
    explicit Guard(InFlight& f) : f(f) {
      ++f.total;
      const int n = ++f.now;
      int p = f.peak.load();
      while (n > p && !f.peak.compare_exchange_weak(p, n)) {}
    }
    ~Guard() { --f.now; }
  };
};

inline std::vector<entclf::SearchResult> default_results(const std::string& q, std::size_t n) {
  std::vector<entclf::SearchResult> out;
  for (std::size_t i = 1; i <= n; ++i) {
    out.push_back({static_cast<int>(i), q + " result " + std::to_string(i), "https://example.com/" + std::to_string(i),
                   "Snippet " + std::to_string(i) + " about " + q + "."});
  }
  return out;
}

/// GET {url}?q=&num= -> {"organic_results":[{position,title,link,snippet}]}
struct SearchFixture {
  std::function<std::vector<entclf::SearchResult>(const std::string& q, std::size_t num)> results =
      [](const std::string& q, std::size_t num) { return default_results(q, num); };
  std::chrono::milliseconds delay{0};
  std::atomic<int> fail_remaining{0};
  int fail_status = 500;
  std::string required_key = "test-search-key";
  InFlight load;
  std::mutex mu;
  std::vector<std::string> queries;

  Server server{[this](httplib::Server& s) {
    s.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      InFlight::Guard g(load);
      if (delay.count()) std::this_thread::sleep_for(delay);
      if (req.get_header_value("Authorization") != "Bearer " + required_key) {
        res.status = 401;
        res.set_content(R"({"error":"bad key"})", "application/json");
        return;
      }
      if (fail_remaining.load() > 0) {
        --fail_remaining;
        res.status = fail_status;
        res.set_content(R"({"error":"unavailable"})", "application/json");
        return;
      }
      const auto q = req.get_param_value("q");
      const auto num = static_cast<std::size_t>(std::stoul(req.get_param_value("num")));
      {
        std::lock_guard lock(mu);
        queries.push_back(q);
      }
      json arr = json::array();
      for (const auto& r : results(q, num)) {
        arr.push_back({{"position", r.rank}, {"title", r.title}, {"link", r.url}, {"snippet", r.snippet}});
      }
      res.set_content(json{{"organic_results", arr}}.dump(), "application/json");
    });
  }};

  std::string url() const { return server.url("/search"); }
};

struct Reply {
  std::string content;
  std::string finish_reason = "stop";
};

/// POST /v1/chat/completions plus the fine-tuning endpoints.
struct LlmFixture {
  std::function<Reply(const json& request)> respond = [](const json&) { return Reply{"10", "stop"}; };
  std::atomic<int> fail_remaining{0};
  int fail_status = 500;
  std::string required_key = "test-llm-key";
  std::vector<std::string> job_statuses{"running", "succeeded"};
  InFlight load;
  std::mutex mu;
  std::vector<json> requests;
  std::vector<std::string> uploads;  // uploaded file bodies
  json last_job_request;
  std::atomic<int> polls{0};

  Server server{[this](httplib::Server& s) {
    s.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      InFlight::Guard g(load);
      if (!authorized(req, res)) return;
      if (fail_remaining.load() > 0) {
        --fail_remaining;
        res.status = fail_status;
        return;
      }
      const auto body = json::parse(req.body);
      {
        std::lock_guard lock(mu);
        requests.push_back(body);
      }
      const auto r = respond(body);
      json out{{"id", "chatcmpl-1"},
               {"choices", json::array({{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", r.content}}},
                                         {"finish_reason", r.finish_reason}}})}};
      res.set_content(out.dump(), "application/json");
    });
    s.Post("/v1/files", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req, res)) return;
      std::lock_guard lock(mu);
      if (!req.has_file("file") || req.get_file_value("purpose").content != "fine-tune") {
        res.status = 400;
        return;
      }
      uploads.push_back(req.get_file_value("file").content);
      res.set_content(json{{"id", "file-" + std::to_string(uploads.size())}, {"object", "file"}}.dump(),
                      "application/json");
    });
    s.Post("/v1/fine_tuning/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req, res)) return;
      std::lock_guard lock(mu);
      last_job_request = json::parse(req.body);
      res.set_content(json{{"id", "ftjob-1"}, {"status", "validating_files"}}.dump(), "application/json");
    });
    s.Get(R"(/v1/fine_tuning/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req, res)) return;
      const auto i = static_cast<std::size_t>(polls++);
      const auto& st = job_statuses[std::min(i, job_statuses.size() - 1)];
      json out{{"id", req.matches[1].str()}, {"status", st}};
      if (st == "succeeded") out["fine_tuned_model"] = "ft:base:entclf:1";
      if (st == "failed") out["error"] = {{"message", "training file invalid"}};
      res.set_content(out.dump(), "application/json");
    });
  }};

  std::string url() const { return server.url("/v1"); }

 private:
  bool authorized(const httplib::Request& req, httplib::Response& res) const {
    if (req.get_header_value("Authorization") == "Bearer " + required_key) return true;
    res.status = 401;
    res.set_content(R"({"error":"bad key"})", "application/json");
    return false;
  }
};

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("entclf-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value) ::setenv(name, value, 1); else ::unsetenv(name);
  }
  ~EnvGuard() {
    if (old_) ::setenv(name_.c_str(), old_->c_str(), 1); else ::unsetenv(name_.c_str());
  }

 private:
  std::string name_;
  std::optional<std::string> old_;
};

}  // namespace fixtures
