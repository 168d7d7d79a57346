#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "lpnet/params.hpp"

namespace lpnet {

/// Checkpoint container: a JSON metadata block followed by named arrays.
///
/// Binary layout (all integers little-endian):
///   magic "LPNCKPT\0" | u32 version | u64 meta_len | meta (UTF-8 JSON)
///   u64 array_count | array records
/// Array record:
///   u32 name_len | name | u32 rank | i64 dims[rank] | f64 values (row-major)
/// Optimizer accumulators are stored as arrays named "opt.g2.<p>" and
/// "opt.dx2.<p>"; parameters as "param.<p>". Round-trips are bit-exact.
struct Checkpoint {
  nlohmann::json meta;
  ParamStore params;
  std::vector<Tensor> opt_grad_sq;   // empty when the checkpoint has no optimizer state
  std::vector<Tensor> opt_delta_sq;
  bool has_optimizer() const { return !opt_grad_sq.empty(); }
};

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& meta, const AdaDelta* optimizer = nullptr);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace lpnet
