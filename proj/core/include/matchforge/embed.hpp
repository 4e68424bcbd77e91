#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace matchforge::embed {

using Vec = std::vector<double>;

enum class EncoderVariant { FeatureHash, TrainableBag };

const char* variant_name(EncoderVariant v);
EncoderVariant variant_from_name(std::string_view name);

// 64-bit FNV-1a over raw bytes. Fixed forever: checkpoint compatibility and
// cross-run reproducibility depend on it.
std::uint64_t fnv1a64(std::string_view bytes);

struct EncoderParams {
  EncoderVariant variant = EncoderVariant::FeatureHash;
  std::size_t dim = 768;      // d
  std::size_t buckets = 768;  // B, vocabulary buckets
  std::uint64_t seed = 0;
  Vec table;  // B x d row-major, TrainableBag only

  static EncoderParams feature_hash(std::size_t d);
  static EncoderParams trainable_bag(std::size_t d, std::size_t buckets,
                                     std::uint64_t seed);

  std::size_t bucket_of(std::string_view token) const {
    return static_cast<std::size_t>(fnv1a64(token) % buckets);
  }
  std::size_t component_of(std::string_view token) const {
    return bucket_of(token) % dim;
  }
};

// FeatureHash: L2-normalized bucket-count vector. TrainableBag: mean of the
// token-bucket embedding rows. Throws EmptyChunk on an empty chunk.
Vec embed_chunk(const std::vector<std::string>& chunk, const EncoderParams& params);

// Component-wise arithmetic mean over the chunks actually produced.
Vec doc_embedding(const std::vector<Vec>& chunk_embeddings);

}  // namespace matchforge::embed
