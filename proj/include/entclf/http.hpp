#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "entclf/error.hpp"

namespace entclf {

using json = nlohmann::json;

struct RetryPolicy {
  int max_attempts = 3;
  double base_backoff_s = 1.0;
};

/// Shared token bucket. A rate of zero disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second = 0.0, double burst = 1.0)
      : rate_(per_second), capacity_(std::max(1.0, burst)), tokens_(capacity_), last_(Clock::now()) {}

  void acquire() {
    if (rate_ <= 0.0) return;
    std::unique_lock lock(mu_);
    while (true) {
      const auto now = Clock::now();
      tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const double wait_s = (1.0 - tokens_) / rate_;
      lock.unlock();
      std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
      lock.lock();
    }
  }

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

/// Base URL split into the part httplib connects to and a path prefix.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash, may be empty

  static Endpoint parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigError, "base URL needs a scheme: '" + url + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, path_start);
    e.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
  }
};

inline std::string require_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') throw Error(ErrorCode::ConfigError, std::string("environment variable ") + name + " is not set");
  return v;
}

/// JSON-over-HTTP client with bearer auth, retries and optional rate limiting.
/// Retries apply to transport failures, 429 and 5xx only; 401/403 surface as
/// AuthError immediately.
class JsonHttpClient {
 public:
  JsonHttpClient(std::string base_url, std::string api_key, RetryPolicy retry = {},
                 std::shared_ptr<RateLimiter> limiter = nullptr, double timeout_s = 60.0)
      : endpoint_(Endpoint::parse(base_url)),
        api_key_(std::move(api_key)),
        retry_(retry),
        limiter_(std::move(limiter)),
        timeout_s_(timeout_s) {}

  const Endpoint& endpoint() const { return endpoint_; }

  json get(const std::string& subpath, const httplib::Params& params) const {
    return send([&](httplib::Client& cli, const httplib::Headers& h) {
      return cli.Get(endpoint_.path + subpath, params, h);
    });
  }

  json post(const std::string& subpath, const json& body) const {
    const std::string payload = dump_json(body);
    return send([&](httplib::Client& cli, const httplib::Headers& h) {
      return cli.Post(endpoint_.path + subpath, h, payload, "application/json");
    });
  }

  json post_multipart(const std::string& subpath, const httplib::MultipartFormDataItems& items) const {
    return send([&](httplib::Client& cli, const httplib::Headers& h) {
      return cli.Post(endpoint_.path + subpath, h, items);
    });
  }

 private:
  template <typename Call>
  json send(Call&& call) const {
    const int attempts = std::max(1, retry_.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      if (limiter_) limiter_->acquire();
      httplib::Client cli(endpoint_.origin);
      const auto secs = static_cast<time_t>(timeout_s_);
      cli.set_connection_timeout(secs, 0);
      cli.set_read_timeout(secs, 0);
      cli.set_write_timeout(secs, 0);
      httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
      auto res = call(cli, headers);
      bool retryable = false;
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        retryable = true;
      } else if (res->status == 401 || res->status == 403) {
        throw Error(ErrorCode::AuthError, endpoint_.origin + " rejected credentials (HTTP " + std::to_string(res->status) + ")");
      } else if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        retryable = true;
      } else if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::HttpError, endpoint_.origin + ": HTTP " + std::to_string(res->status) + ": " + res->body);
      } else {
        try {
          return json::parse(res->body);
        } catch (const json::parse_error& e) {
          throw Error(ErrorCode::MalformedResponse, endpoint_.origin + ": response is not JSON: " + e.what());
        }
      }
      if (retryable && attempt < attempts) backoff(attempt);
    }
    throw Error(ErrorCode::HttpError,
                endpoint_.origin + ": " + last_error + " after " + std::to_string(attempts) + " attempts");
  }

  void backoff(int attempt) const {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    const double secs = retry_.base_backoff_s * std::pow(2.0, attempt - 1) * jitter(rng);
    std::this_thread::sleep_for(std::chrono::duration<double>(secs));
  }

  Endpoint endpoint_;
  std::string api_key_;
  RetryPolicy retry_;
  std::shared_ptr<RateLimiter> limiter_;
  double timeout_s_;
};

}  // namespace entclf
