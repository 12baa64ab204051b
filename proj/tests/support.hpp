#pragma once

// Shared helpers for the test suite: fixture paths, temp directories, and
// builders for common value types.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "guipilot/core.hpp"

#ifndef GUIPILOT_DATA_DIR
#define GUIPILOT_DATA_DIR "data"
#endif
#ifndef GUIPILOT_CLI_BIN
#define GUIPILOT_CLI_BIN ""
#endif

namespace testing {

inline std::string data_dir() { return GUIPILOT_DATA_DIR; }
inline std::string data_path(const std::string& rel) { return data_dir() + "/" + rel; }
inline std::string cli_bin() { return GUIPILOT_CLI_BIN; }

// Unique scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    auto base = std::filesystem::temp_directory_path() / "guipilot-tests";
    std::filesystem::create_directories(base);
    path = base / (std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& rel) const { return (path / rel).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline guipilot::Observation obs(const std::string& digest, bool stable = true,
                                 std::vector<guipilot::ObsElement> elements = {}) {
  guipilot::Observation o;
  o.screen_digest = digest;
  o.stable = stable;
  o.elements = std::move(elements);
  o.image_ref = "sim://" + digest;
  return o;
}

inline guipilot::ObsElement elem(const std::string& label, const std::string& kind = "button",
                                 const std::string& state = "", int x = 10, int y = 10) {
  guipilot::ObsElement e;
  e.label = label;
  e.kind = kind;
  e.state = state;
  e.x = x;
  e.y = y;
  e.w = 50;
  e.h = 20;
  return e;
}

}  // namespace testing
