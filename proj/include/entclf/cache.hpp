#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "entclf/acquisition.hpp"
#include "entclf/error.hpp"
#include "entclf/util.hpp"

namespace entclf {

/// On-disk store of AcquiredText records: one `<sha256>.json` per key plus an
/// append-only `index.jsonl`. Entries are immutable; writes are atomic renames,
/// so concurrent writers of distinct keys and concurrent readers are safe.
class TextCache {
 public:
  explicit TextCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::filesystem::path& dir() const { return dir_; }

  static std::string key(Task task, const std::string& entity_id, Source source, const nlohmann::json& params) {
    const nlohmann::json canon{{"task", std::string(to_string(task))},
                               {"entity_id", entity_id},
                               {"source", std::string(to_string(source))},
                               {"params", params}};
    return sha256_hex(dump_json(canon));
  }

  static std::string key_of(const AcquiredText& a) { return key(a.task, a.entity_id, a.source, a.params); }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<AcquiredText> load(const std::string& key) const {
    const auto path = path_for(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    AcquiredText rec;
    try {
      rec = acquired_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.what());
    }
    if (key_of(rec) != key) throw Error(ErrorCode::CacheCorrupt, path.string() + ": record does not match its key");
    return rec;
  }

  void store(const AcquiredText& rec) {
    const auto k = key_of(rec);
    write_file_atomic(path_for(k), dump_json(to_json(rec), 2) + "\n");
    const nlohmann::ordered_json line{{"key", k},
                                      {"entity_id", rec.entity_id},
                                      {"source", std::string(to_string(rec.source))},
                                      {"params", rec.params}};
    std::lock_guard lock(index_mu_);
    std::ofstream idx(dir_ / "index.jsonl", std::ios::app | std::ios::binary);
    if (!idx) throw Error(ErrorCode::IoError, "cannot append to cache index in " + dir_.string());
    idx << dump_json(line) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::mutex index_mu_;
};

}  // namespace entclf
