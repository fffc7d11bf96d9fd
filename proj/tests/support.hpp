// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace testsupport {

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command and captures standard output. Standard error passes
// through unless the command redirects it.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + cmd);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string cli_path() { return COOKGEN_CLI_PATH; }

inline std::string fixture_path(const std::string& name) {
  return std::string(COOKGEN_FIXTURE_DIR) + "/" + name;
}

inline std::string source_path(const std::string& name) {
  return std::string(COOKGEN_SOURCE_DIR) + "/" + name;
}

// Per-process scratch file path; tests clean up after themselves only when
// the contents would be large.
inline std::string tmp_path(const std::string& name) {
  static const std::string dir = [] {
    std::string d = "/tmp/cookgen_tests_" + std::to_string(getpid());
    if (std::system(("mkdir -p " + d).c_str()) != 0)
      throw std::runtime_error("cannot create " + d);
    return d;
  }();
  return dir + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace testsupport
