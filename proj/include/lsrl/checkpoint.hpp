#pragma once

#include <cstdint>
#include <string>

#include "lsrl/param_store.hpp"

namespace lsrl {

enum class ModelKind { AutoEncoder, Classifier, Generator, Discriminator, Actor };

std::string kind_name(ModelKind kind);

// Binary checkpoint, little-endian throughout:
//   magic "LSRL" | version u32 (=1) | kind (u32 length + UTF-8)
//   | config hash u64 | tensor count u64
//   | per tensor: name (u64 length + UTF-8), rank u64, dims u64 each,
//                 values as IEEE-754 doubles (64-bit LE)
//   | FNV-1a 64 checksum of all preceding bytes.
//
// Saving is atomic (temp file + rename). Loading copies values into an
// already-built store and requires the file's tensor names and shapes to
// match the store exactly, so a checkpoint can only be loaded as the model
// kind that wrote it.
void save_checkpoint(const ParamStore& store, ModelKind kind, std::uint64_t config_hash,
                     const std::string& path);

std::uint64_t load_checkpoint_into(ParamStore& store, ModelKind expected_kind,
                                   const std::string& path);

// Config hash stored in the file, without loading the tensors.
std::uint64_t peek_config_hash(const std::string& path);

}  // namespace lsrl
