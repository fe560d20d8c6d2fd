#ifndef CDFOREST_MODEL_IO_HPP
#define CDFOREST_MODEL_IO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cdforest/forest.hpp"

namespace cdforest {

// Binary model container, little-endian throughout:
//   bytes 0..7   magic "CDFOREST"
//   bytes 8..11  format version (u32)
//   header       n, d, n_trees, max_features, min_samples_leaf, seed (u64 each)
//   responses    n doubles
//   per tree     seed, node array (flattened), bootstrap counts,
//                leaf member indices
//   trailer      FNV-1a 64 checksum of everything before it
// Thresholds and responses are stored as raw 64-bit floats, so a reloaded
// model reproduces weights and predictions bit-exactly.

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelVersionError : ModelIoError {
    using ModelIoError::ModelIoError;
};
struct ModelCorruptError : ModelIoError {
    using ModelIoError::ModelIoError;
};

void save_model(const Forest& forest, const std::string& path);
Forest load_model(const std::string& path);

}  // namespace cdforest

#endif  // CDFOREST_MODEL_IO_HPP
