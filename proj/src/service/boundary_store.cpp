#include "hypersem/service/boundary_store.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <mutex>

#include "hypersem/error.hpp"
#include "hypersem/service/serialization.hpp"

namespace hypersem::service {

namespace fs = std::filesystem;

namespace {

constexpr const char* kExtension = ".json";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read from " + path.string() + " failed");
  return bytes;
}

}  // namespace

bool valid_boundary_name(const std::string& name) {
  if (name.empty() || name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

BoundaryStore::BoundaryStore(fs::path directory) : directory_(std::move(directory)) {}

fs::path BoundaryStore::default_directory() {
  if (const char* home = std::getenv("HYPERSEM_HOME"); home != nullptr && *home != '\0') {
    return home;
  }
  return ".hypersem";
}

fs::path BoundaryStore::path_for(const std::string& name) const {
  if (!valid_boundary_name(name)) {
    throw Error(ErrorCode::InvalidArgument, "'" + name + "' is not a valid boundary name");
  }
  return directory_ / (name + kExtension);
}

fs::path BoundaryStore::save(const SemanticDirection& direction) {
  const fs::path target = path_for(direction.name());
  const std::string text = dump(to_json(direction));

  std::unique_lock lock(mutex_);
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + directory_.string() + ": " + ec.message());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + temp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write to " + temp.string() + " failed");
  }
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw Error(ErrorCode::IoFailure, "cannot replace " + target.string());
  }
  return target;
}

SemanticDirection BoundaryStore::load(const std::string& name) const {
  const fs::path path = path_for(name);
  std::string text;
  {
    std::shared_lock lock(mutex_);
    text = read_file(path);
  }
  SemanticDirection direction = direction_from_json(parse_json(text, path.string()));
  if (direction.name() != name) {
    throw Error(ErrorCode::MalformedFile, path.string() + " holds boundary '" + direction.name() + "'");
  }
  return direction;
}

std::vector<std::string> BoundaryStore::list() const {
  std::vector<std::string> names;
  std::shared_lock lock(mutex_);
  std::error_code ec;
  if (!fs::is_directory(directory_, ec)) return names;
  for (const auto& entry : fs::directory_iterator(directory_, ec)) {
    const fs::path& p = entry.path();
    if (entry.is_regular_file() && p.extension() == kExtension &&
        valid_boundary_name(p.stem().string())) {
      names.push_back(p.stem().string());
    }
  }
  if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + directory_.string());
  std::sort(names.begin(), names.end());
  return names;
}

std::map<std::string, SemanticDirection> BoundaryStore::load_all() const {
  std::map<std::string, SemanticDirection> out;
  for (const auto& name : list()) out.emplace(name, load(name));
  return out;
}

}  // namespace hypersem::service
