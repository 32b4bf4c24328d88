#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vwgan/tensor.hpp"

namespace vwgan {

// Binary checkpoint: magic "VWG1", a key=value config text block, then named
// f64 tensors. Everything is little-endian; round-trips are bit-exact.
struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& find(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const std::string& config_text,
                      const std::vector<std::pair<std::string, const Tensor*>>& tensors);

Checkpoint read_checkpoint(const std::string& path);

}  // namespace vwgan
