#pragma once

#include <filesystem>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hypersem/geometry.hpp"

namespace hypersem::service {

/// Directory of boundary documents, one "<name>.json" per direction.
/// Saves replace the whole file atomically (write to a temporary, then
/// rename); any number of readers may load concurrently with one writer.
class BoundaryStore {
 public:
  explicit BoundaryStore(std::filesystem::path directory);

  /// $HYPERSEM_HOME if set, otherwise ".hypersem" in the working directory.
  static std::filesystem::path default_directory();

  const std::filesystem::path& directory() const noexcept { return directory_; }

  std::filesystem::path path_for(const std::string& name) const;

  /// Throws IoFailure when the directory or file cannot be written.
  std::filesystem::path save(const SemanticDirection& direction);

  /// Throws IoFailure, MalformedFile (with byte offset for syntax errors) or
  /// UnitNormViolation.
  SemanticDirection load(const std::string& name) const;

  /// Names of the stored directions, sorted.
  std::vector<std::string> list() const;
  std::map<std::string, SemanticDirection> load_all() const;

 private:
  std::filesystem::path directory_;
  mutable std::shared_mutex mutex_;
};

/// Letters, digits, '_', '-' and '.', not starting with '.'.
bool valid_boundary_name(const std::string& name);

}  // namespace hypersem::service
