#pragma once

#include "netobs/common.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

namespace netobs::runio {

// Run configuration shared by the CLI subcommands. The seed is recorded in
// every emitted artifact header; all randomness derives from it through
// named substreams.
struct RunConfig {
    std::uint64_t seed = 1;
    double alpha = -100.0;
    double q_scale = 1e-3;
    double r_scale = 1.0;
    double dt = 0.01;
    double tf = 4.0;
    std::map<std::string, std::string> extras;  // subcommand-specific knobs

    std::string canonical_string() const;
    std::uint64_t config_hash() const;
};

inline constexpr const char* kVersion = "0.1.0";

/// `# key=value` comment block written at the top of CSV artifacts:
/// seed, config hash, version, kernel variant.
std::string artifact_header(const RunConfig& cfg);

/// Worker-pool size: NETOBSERVE_THREADS when set, else hardware concurrency.
int worker_count();

/// Read a whitespace/newline-separated list of node ids.
NodeSet load_node_list(const std::filesystem::path& path);

/// Run `count` independent jobs on the worker pool; results are collected
/// by index regardless of completion order.
void parallel_for_indexed(int count, const std::function<void(int)>& job);

}  // namespace netobs::runio
