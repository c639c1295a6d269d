#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include <doctest.h>

#include "bcgsleep/error.hpp"
#include "bcgsleep/record.hpp"
#include "bcgsleep/rng.hpp"

namespace testutil {

/// Kind of the bcgsleep::Error thrown by `fn`, or nullopt if none was thrown.
inline std::optional<bcgsleep::ErrorKind> thrown_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const bcgsleep::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define CHECK_THROWS_KIND(expr, k) CHECK(testutil::thrown_kind([&] { (void)(expr); }) == bcgsleep::ErrorKind::k)

inline bcgsleep::VitalsSample sample(bcgsleep::Seconds t, double hr, double base = 1.0) {
  return {t, hr, 14.0 * base, 50.0 * base, 45.0 * base, 900.0 * base};
}

/// Contiguous record from a list of heart rates (other signals constant).
inline bcgsleep::NightRecord hr_record(const std::vector<double>& hr) {
  std::vector<bcgsleep::VitalsSample> s;
  for (std::size_t i = 0; i < hr.size(); ++i) s.push_back(sample(static_cast<bcgsleep::Seconds>(i), hr[i]));
  return bcgsleep::NightRecord::make({"test", "subject", 0}, std::move(s));
}

inline bcgsleep::VitalsSample random_sample(bcgsleep::Rng& rng, bcgsleep::Seconds t) {
  return {t, rng.uniform(40, 90), rng.uniform(8, 20), rng.uniform(30, 70), rng.uniform(10, 90), rng.uniform(600, 1400)};
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("bcgsleep_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace testutil
