#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "dsmt/isa.hpp"

namespace dsmt {

enum class FetchPolicy { icount2_8_modified, ideal };

std::string to_string(FetchPolicy p);
FetchPolicy parse_fetch_policy(const std::string& s);

struct CacheGeometry {
  uint32_t size_bytes;
  uint32_t ways;
  uint32_t line_bytes = 32;
};

struct CacheConfig {
  CacheGeometry l1i{128 * 1024, 2};
  CacheGeometry l1d{128 * 1024, 2};
  CacheGeometry l2{256 * 1024, 2};
  int l1_hit = 1;
  int l2_hit = 6;
  int memory = 40;
  int data_ports = 4;
};

/// Functional-unit and reservation-station counts per class, indexed by
/// FuClass: IntALU, IntMul, IntDiv, FPAdd, FPMul, FPDiv, LoadStore.
struct PipelineConfig {
  int iq_size = 64;
  int lsq_size = 64;
  int rob_size = 32;
  int btb_entries = 2048;
  int btb_ways = 2;
  std::array<int, num_fu_classes> fu_counts{8, 2, 2, 2, 2, 2, 2};
  std::array<int, num_fu_classes> rs_counts{8, 2, 4, 4, 4, 2, 4};
  int issue_width_per_context = 4;
  int fetch_ports = 2;
  int fetch_width_per_port = 8;
  int fetch_buffer_size = 16;
  Latencies latencies{};
};

struct SimConfig {
  int context_count = 4;
  FetchPolicy fetch_policy = FetchPolicy::icount2_8_modified;
  PipelineConfig pipeline{};
  CacheConfig cache{};
  int mdrt_capacity = 64;
  uint64_t fast_skip = 0;
  uint64_t max_cycles = 20'000'000;
  bool strict_lbit_squash = false;

  int pre_dsmt_iterations = 2;
  int lsst_threshold = 2;
  int lsst_initial_confidence = 1;
  int read_confidence_initial = 2;
  int read_confidence_threshold = 2;
  int clone_cost = 2;
  int min_run_length = 4;
  uint64_t measurement_window = 10'000;

  /// Applies one key=value setting; throws std::invalid_argument on an
  /// unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

/// Reads a flat `key = value` file (`#` comments) on top of `base`.
SimConfig load_config_file(const std::string& path, SimConfig base = {});

}  // namespace dsmt
