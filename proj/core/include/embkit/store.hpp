#pragma once

#include <string>
#include <vector>

#include "embkit/embedding.hpp"

namespace embkit {

// Binary store layout: magic "EMBK", u8 version=1, u32 dimension, u64 entry
// count, then per entry: u16 token byte-length, UTF-8 token bytes, dimension
// 32-bit little-endian IEEE-754 floats. Round-trips bit-exactly.
//
// Text store layout: one line per token, token then d decimal floats,
// space-separated, "%.6f". Round-trips within 1e-6 per component.
//
// Table metadata (method name, config digest) travels in a JSON sidecar at
// "<path>.meta.json"; the pinned store layouts carry no metadata fields.

/// Saving an empty table violates the non-empty invariant and throws.
void save_table_binary(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_table_binary(const std::string& path);

void save_table_text(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_table_text(const std::string& path);

/// Dispatches on the EMBK magic when loading.
EmbeddingTable load_table(const std::string& path);

void write_table_metadata(const EmbeddingTable& table, const std::string& table_path);
/// Returns empty metadata when no sidecar exists.
EmbeddingTable::Metadata read_table_metadata(const std::string& table_path);

// ---------------------------------------------------------------------------
// Named-matrix container (model weights)
// ---------------------------------------------------------------------------

/// A named dense double matrix, row-major.
struct NamedMatrix {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

/// Same container discipline as the embedding store (magic "EMBM", version,
/// length-prefixed names, little-endian payload), holding several matrices.
void save_matrices(const std::vector<NamedMatrix>& mats, const std::string& path);
std::vector<NamedMatrix> load_matrices(const std::string& path);

} // namespace embkit
