#pragma once

#include <cstdint>
#include <filesystem>

#include "hyst/cells.hpp"
#include "hyst/normalization.hpp"

namespace hyst {

struct Checkpoint {
  CellParams<double> params;
  NormStats norm;
  std::uint64_t seed = 0;
};

// Plain-text records, one per line:
//
//   kind <name>
//   hidden <m>
//   dt <value>
//   seed <value>
//   norm <h_min> <h_max> <b_min> <b_max>
//   tensor <name> <rank> <rows> <cols> <v0> <v1> ...   (row-major)
//
// Tensors appear in slot order. Values round-trip exactly.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws ConfigError on malformed or inconsistent files.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace hyst
