#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace eoscript {

struct ProcessResult {
  int exit_status = -1;  // valid when !signaled && !timed_out
  bool signaled = false;
  int term_signal = 0;
  bool timed_out = false;
  std::string stdout_data;
  std::string stderr_data;
};

struct ProcessOptions {
  std::chrono::milliseconds timeout{30000};
  std::filesystem::path working_dir;            // empty: inherit
  std::map<std::string, std::string> extra_env;  // added to the inherited environment
  std::size_t max_output_bytes = 64 * 1024 * 1024;
};

// Runs argv[0] (PATH lookup) with `input` on stdin. The child is killed with
// SIGKILL once the timeout elapses. Throws std::system_error if it cannot spawn.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          const ProcessOptions& options = {});

}  // namespace eoscript
