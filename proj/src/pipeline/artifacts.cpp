#include "skilllab/pipeline/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skilllab::pipeline {

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

std::string file_hash(const fs::path& path) { return content_hash(slurp(path)); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

RunDirectory::RunDirectory(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  const fs::path m = root_ / "manifest.json";
  manifest_ = fs::exists(m) ? read_json(m) : nlohmann::json::object();
  if (!manifest_.contains("artifacts")) manifest_["artifacts"] = nlohmann::json::object();
}

bool RunDirectory::has(const std::string& name) const { return fs::exists(path(name)); }

void RunDirectory::write(const std::string& name, const nlohmann::json& j) {
  write_json(path(name), j);
  manifest_["artifacts"][name] = file_hash(path(name));
  save_manifest();
}

nlohmann::json RunDirectory::read(const std::string& name) const {
  const auto& arts = manifest_.at("artifacts");
  if (!arts.contains(name)) {
    throw std::runtime_error("artifact " + name + " is not recorded in the manifest");
  }
  const std::string h = file_hash(path(name));
  if (arts.at(name).get<std::string>() != h) {
    throw std::runtime_error("artifact " + name + " does not match its manifest hash");
  }
  return read_json(path(name));
}

void RunDirectory::append_line(const std::string& name, const nlohmann::json& j) {
  std::ofstream out(path(name), std::ios::app);
  out << j.dump() << '\n';
}

void RunDirectory::truncate(const std::string& name) {
  std::ofstream out(path(name), std::ios::trunc);
}

void RunDirectory::save_manifest() const { write_json(root_ / "manifest.json", manifest_); }

}  // namespace skilllab::pipeline
