#include "toolgate/path_util.hpp"

#include <vector>

namespace toolgate {

std::string normalize_path(std::string_view path) {
  std::string expanded;
  if (path == "~" || path.starts_with("~/")) {
    expanded = std::string(kHomeDir) + std::string(path.substr(1));
  } else {
    expanded = std::string(path);
  }
  std::vector<std::string_view> parts;
  std::string_view rest = expanded;
  while (!rest.empty()) {
    const auto slash = rest.find('/');
    std::string_view part = rest.substr(0, slash);
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
    if (part.empty() || part == ".") continue;
    if (part == "..") {
      if (!parts.empty()) parts.pop_back();
      continue;
    }
    parts.push_back(part);
  }
  std::string out;
  for (auto part : parts) {
    out += '/';
    out += part;
  }
  return out.empty() ? "/" : out;
}

bool path_within(std::string_view path, std::string_view root) {
  if (root == "/") return true;
  if (!path.starts_with(root)) return false;
  return path.size() == root.size() || path[root.size()] == '/';
}

bool outside_workspace(std::string_view raw, std::string_view workspace_root) {
  return !path_within(normalize_path(raw), normalize_path(workspace_root));
}

}  // namespace toolgate
