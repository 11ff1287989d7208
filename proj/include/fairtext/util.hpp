#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairtext {

// Input data is unusable (missing file, empty bin, invalid rows that cannot be skipped).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an invalid parameter or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Line-numbered warning collected while ingesting a record file.
struct IngestWarning {
  std::size_t line = 0;
  std::string message;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);
// Seed for one unit of work (a document, a patient) derived from the run seed,
// so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);
std::string hex64(std::uint64_t value);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
// Nonempty trimmed lines; lines starting with '#' are skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::filesystem::path data_path(std::string_view file_name);

// Worker count used by parallel_for; 0 means hardware concurrency.
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

// Runs body(i) for i in [0, n) on up to thread_limit() workers. Each index is
// processed exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fairtext
