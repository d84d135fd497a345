#pragma once

// Run directory I/O: JSON artifacts, content hashes, and the manifest.

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace skilllab::pipeline {

namespace fs = std::filesystem;

// FNV-1a 64 of a byte string, as 16 hex digits.
std::string content_hash(const std::string& bytes);
std::string file_hash(const fs::path& path);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

// A run directory with manifest.json tracking artifact hashes.
class RunDirectory {
 public:
  explicit RunDirectory(fs::path root);

  const fs::path& root() const { return root_; }
  fs::path path(const std::string& name) const { return root_ / name; }
  bool has(const std::string& name) const;

  // Writes an artifact and records its hash in the manifest.
  void write(const std::string& name, const nlohmann::json& j);
  // Reads an artifact, verifying its hash against the manifest.
  nlohmann::json read(const std::string& name) const;
  void append_line(const std::string& name, const nlohmann::json& j);
  void truncate(const std::string& name);

  nlohmann::json& manifest() { return manifest_; }
  const nlohmann::json& manifest() const { return manifest_; }
  void save_manifest() const;

 private:
  fs::path root_;
  nlohmann::json manifest_;
};

}  // namespace skilllab::pipeline
