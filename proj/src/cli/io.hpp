#pragma once

#include <fstream>
#include <functional>
#include <ostream>
#include <string>

namespace lieopt::cli {

/// Runs body on the file at `path`, or on `fallback` when path is empty.
/// Returns false if the file cannot be created.
inline bool with_output(const std::string& path, std::ostream& fallback,
                        const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return true;
  }
  std::ofstream file(path);
  if (!file) return false;
  body(file);
  return static_cast<bool>(file);
}

}  // namespace lieopt::cli
