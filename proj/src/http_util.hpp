// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <string>
#include <string_view>

namespace dockwright::detail {

// "http://host:8080/api" -> {"http://host:8080", "/api"}
struct BaseUrl {
  std::string origin;
  std::string path_prefix;
};

inline BaseUrl split_base_url(std::string_view url) {
  BaseUrl out;
  auto scheme = url.find("://");
  auto host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
  auto slash = url.find('/', host_start);
  if (slash == std::string_view::npos) {
    out.origin = std::string(url);
  } else {
    out.origin = std::string(url.substr(0, slash));
    out.path_prefix = std::string(url.substr(slash));
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
      out.path_prefix.pop_back();
  }
  return out;
}

}  // namespace dockwright::detail
