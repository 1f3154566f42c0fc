#pragma once

#include <string>
#include <string_view>

namespace toolgate {

inline constexpr std::string_view kHomeDir = "/home/user";

// Lexical normalization to an absolute path. Relative paths resolve against
// "/", a leading "~" expands to kHomeDir, "." and ".." collapse, and ".."
// above the root is dropped.
std::string normalize_path(std::string_view path);

// True if normalized `path` equals `root` or lies beneath it.
bool path_within(std::string_view path, std::string_view root);

// True if `raw` lexically escapes `workspace_root` once normalized.
bool outside_workspace(std::string_view raw, std::string_view workspace_root);

}  // namespace toolgate
