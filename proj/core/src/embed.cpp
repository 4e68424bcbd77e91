#include "matchforge/embed.hpp"

#include <cmath>

#include "matchforge/error.hpp"
#include "matchforge/rng.hpp"

namespace matchforge::embed {

const char* variant_name(EncoderVariant v) {
  return v == EncoderVariant::FeatureHash ? "hash" : "bag";
}

EncoderVariant variant_from_name(std::string_view name) {
  if (name == "hash") return EncoderVariant::FeatureHash;
  if (name == "bag") return EncoderVariant::TrainableBag;
  raise(Errc::InvalidConfig, "unknown encoder variant '" + std::string(name) + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

EncoderParams EncoderParams::feature_hash(std::size_t d) {
  EncoderParams p;
  p.variant = EncoderVariant::FeatureHash;
  p.dim = d;
  p.buckets = d;
  return p;
}

EncoderParams EncoderParams::trainable_bag(std::size_t d, std::size_t buckets,
                                           std::uint64_t seed) {
  EncoderParams p;
  p.variant = EncoderVariant::TrainableBag;
  p.dim = d;
  p.buckets = buckets;
  p.seed = seed;
  p.table.resize(buckets * d);
  Rng rng(seed);
  for (double& w : p.table) w = rng.uniform(-0.05, 0.05);
  return p;
}

Vec embed_chunk(const std::vector<std::string>& chunk, const EncoderParams& params) {
  if (chunk.empty()) raise(Errc::EmptyChunk, "cannot embed an empty chunk");

  Vec out(params.dim, 0.0);
  if (params.variant == EncoderVariant::FeatureHash) {
    for (const std::string& token : chunk) out[params.component_of(token)] += 1.0;
    double norm = 0.0;
    for (double v : out) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : out) v /= norm;  // norm > 0: chunk is non-empty
  } else {
    for (const std::string& token : chunk) {
      const std::size_t row = params.bucket_of(token);
      for (std::size_t j = 0; j < params.dim; ++j)
        out[j] += params.table[row * params.dim + j];
    }
    const double inv = 1.0 / static_cast<double>(chunk.size());
    for (double& v : out) v *= inv;
  }
  return out;
}

Vec doc_embedding(const std::vector<Vec>& chunk_embeddings) {
  if (chunk_embeddings.empty())
    raise(Errc::NoChunks, "document produced no chunk embeddings");
  const std::size_t dim = chunk_embeddings.front().size();
  Vec out(dim, 0.0);
  for (const Vec& c : chunk_embeddings) {
    if (c.size() != dim)
      raise(Errc::DimensionMismatch, "chunk embeddings differ in dimension");
    for (std::size_t j = 0; j < dim; ++j) out[j] += c[j];
  }
  const double inv = 1.0 / static_cast<double>(chunk_embeddings.size());
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace matchforge::embed
