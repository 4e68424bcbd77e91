#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "matchforge/corpus.hpp"
#include "matchforge/embed.hpp"
#include "matchforge/textpipe.hpp"

namespace matchforge::matchnet {

using embed::Vec;

// Two-layer head over the concatenated document embeddings:
//   hidden = ReLU(W_hidden^T . concat + b_hidden)
//   logits = W_out^T . hidden + b_out
struct HeadParams {
  std::size_t dim = 0;  // d
  std::uint64_t seed = 0;
  Vec w_hidden;  // (2d x d) row-major, w_hidden[r*d + j]
  Vec b_hidden;  // d
  Vec w_out;     // (d x 2) row-major, w_out[i*2 + c]
  Vec b_out;     // 2

  static HeadParams init(std::size_t d, std::uint64_t seed);  // uniform(-0.05, 0.05)
};

enum class Outcome { NotMatch = 0, Match = 1 };

struct Prediction {
  double p_match = 0.0;
  double p_not_match = 0.0;
  Outcome predicted = Outcome::NotMatch;
};

struct ForwardCache {
  Vec concat;      // 2d
  Vec pre_hidden;  // d, before ReLU
  Vec hidden;      // d
  std::array<double, 2> logits{};
  std::array<double, 2> probs{};  // index 0 = not-match, 1 = match
};

// Softmax is max-stabilized; class index 1 is match.
Prediction forward(const Vec& job_embed, const Vec& resume_embed,
                   const HeadParams& params, ForwardCache* cache = nullptr);

// Two-term cross entropy against a one-hot truth, probabilities clamped to
// [1e-12, 1 - 1e-12]. Optional per-class weights scale the true-class term.
double bce_loss(const Prediction& pred, Outcome truth, double w_match = 1.0,
                double w_not_match = 1.0);

struct HeadGradients {
  Vec w_hidden, b_hidden, w_out, b_out;
  Vec d_job_embed, d_resume_embed;  // loss gradient w.r.t. the two inputs

  static HeadGradients zeros(std::size_t d);
};

// Exact analytic gradients of the weighted cross entropy through the head;
// the ReLU subgradient at 0 is 0.
HeadGradients backward(const ForwardCache& cache, Outcome truth,
                       const HeadParams& params, double w_match = 1.0,
                       double w_not_match = 1.0);

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 20;
  std::size_t patience = 1;  // epochs without validation-F1 improvement
  double class_weight_match = 1.0;
  double class_weight_not_match = 1.0;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;
  double val_accuracy = 0.0;
};

struct ModelBundle {
  embed::EncoderParams encoder;
  HeadParams head;
};

struct TrainResult {
  ModelBundle model;  // best-epoch params
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // 1-based
};

// Per-document chunk encoding reused across training steps. For FeatureHash
// the embedding is fixed; for TrainableBag it is recomputed from the current
// table over the cached bucket ids.
struct DocEncoding {
  Vec fixed;                                        // FeatureHash
  std::vector<std::vector<std::size_t>> chunk_rows;  // TrainableBag
};

DocEncoding encode_document(const std::vector<std::string>& tokens, std::size_t k,
                            const textpipe::ChunkPlan& plan,
                            const embed::EncoderParams& encoder);
Vec embedding_of(const DocEncoding& enc, const embed::EncoderParams& encoder);

struct ExampleGrad {
  HeadGradients head;
  std::map<std::size_t, Vec> table_grad;  // TrainableBag: row -> d-vector
  double loss = 0.0;
  Prediction prediction;
};

ExampleGrad example_gradient(const DocEncoding& job, const DocEncoding& resume,
                             const ModelBundle& model, Outcome truth,
                             double w_match = 1.0, double w_not_match = 1.0);

// Plain SGD over seeded shuffled mini-batches; the best validation-F1 epoch
// wins and strict improvement resets the patience counter.
TrainResult train(const corpus::CorpusSplit& split,
                  const std::map<std::string, corpus::Document>& documents,
                  const textpipe::ChunkPlan& plan, ModelBundle initial,
                  const TrainConfig& config);

Prediction predict_tokens(const std::vector<std::string>& job_tokens,
                          const std::vector<std::string>& resume_tokens,
                          const textpipe::ChunkPlan& plan, const ModelBundle& model);

// tokenize -> chunk -> embed -> doc mean -> forward
Prediction predict_pair(const corpus::Document& job, const corpus::Document& resume,
                        const textpipe::ChunkPlan& plan, const ModelBundle& model);

// Versioned binary checkpoint: header {magic, format_version, d, B, variant,
// encoder seed, head seed} then little-endian f64 tensors in fixed order
// (w_hidden, b_hidden, w_out, b_out, embedding table).
std::string checkpoint_bytes(const ModelBundle& model);
ModelBundle model_from_checkpoint(std::string_view bytes);
void save_checkpoint(const ModelBundle& model, std::ostream& out);
ModelBundle load_checkpoint(std::istream& in);

}  // namespace matchforge::matchnet
