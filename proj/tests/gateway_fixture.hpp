#pragma once

#include <string>

#include "secgate/service/config.hpp"
#include "support.hpp"

namespace testsupport {

// The bundled mock configuration with its data directory moved to `dir`.
inline nlohmann::json mock_config_json(const TempDir& dir) {
  auto j = nlohmann::json::parse(read_file(source_dir() / "config/mock.json"));
  j["data_dir"] = dir.path().string();
  return j;
}

inline secgate::service::AppConfig mock_config(const TempDir& dir) {
  return secgate::service::config_from_json(mock_config_json(dir),
                                            (source_dir() / "config").string());
}

}  // namespace testsupport
