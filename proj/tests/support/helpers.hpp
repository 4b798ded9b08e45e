#pragma once
// Small conveniences shared across test files: preset builders, scratch
// files, and running the command line binary as a subprocess.

#include "crl/structures.hpp"
#include "crl/embeddings.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace testsupport {

inline crl::StructureRef preset(const std::string& name, int n) {
  auto p = crl::ClassPreset::by_name(name);
  if (!p) throw std::invalid_argument("unknown preset in test: " + name);
  return crl::share(crl::generate_preset(*p, n));
}

// Per-process scratch directory, created on first use.
inline std::filesystem::path scratch_dir() {
  static std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("crl-tests-" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

inline std::string write_scratch(const std::string& name, const std::string& content) {
  auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the built binary with the given argument string.
inline CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(CRL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = ::pclose(pipe);
  CliResult r;
  r.output = std::move(out);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

// Reports are compared with the timing line removed; it is the only
// permitted run-to-run difference.
inline std::string strip_timing(const std::string& report) {
  std::istringstream in(report);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("timing-ms ", 0) != 0) out << line << "\n";
  return out.str();
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace testsupport
