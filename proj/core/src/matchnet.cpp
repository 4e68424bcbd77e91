#include "matchforge/matchnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "matchforge/error.hpp"
#include "matchforge/metrics.hpp"
#include "matchforge/rng.hpp"

namespace matchforge::matchnet {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) {
  return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
}

void check_dim(const Vec& v, std::size_t d, const char* which) {
  if (v.size() != d)
    raise(Errc::DimensionMismatch,
          std::string(which) + " has dimension " + std::to_string(v.size()) +
              ", expected " + std::to_string(d));
}

}  // namespace

HeadParams HeadParams::init(std::size_t d, std::uint64_t seed) {
  HeadParams p;
  p.dim = d;
  p.seed = seed;
  p.w_hidden.resize(2 * d * d);
  p.b_hidden.resize(d);
  p.w_out.resize(d * 2);
  p.b_out.resize(2);
  Rng rng(seed);
  for (double& w : p.w_hidden) w = rng.uniform(-0.05, 0.05);
  for (double& w : p.b_hidden) w = rng.uniform(-0.05, 0.05);
  for (double& w : p.w_out) w = rng.uniform(-0.05, 0.05);
  for (double& w : p.b_out) w = rng.uniform(-0.05, 0.05);
  return p;
}

Prediction forward(const Vec& job_embed, const Vec& resume_embed,
                   const HeadParams& params, ForwardCache* cache) {
  const std::size_t d = params.dim;
  check_dim(job_embed, d, "job embedding");
  check_dim(resume_embed, d, "resume embedding");

  Vec concat(2 * d);
  std::copy(job_embed.begin(), job_embed.end(), concat.begin());
  std::copy(resume_embed.begin(), resume_embed.end(), concat.begin() + d);

  Vec pre(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = params.b_hidden[j];
    for (std::size_t r = 0; r < 2 * d; ++r)
      sum += concat[r] * params.w_hidden[r * d + j];
    pre[j] = sum;
  }
  Vec hidden(d);
  for (std::size_t j = 0; j < d; ++j) hidden[j] = pre[j] > 0.0 ? pre[j] : 0.0;

  std::array<double, 2> logits{params.b_out[0], params.b_out[1]};
  for (std::size_t i = 0; i < d; ++i) {
    logits[0] += hidden[i] * params.w_out[i * 2 + 0];
    logits[1] += hidden[i] * params.w_out[i * 2 + 1];
  }

  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  std::array<double, 2> probs{e0 / z, e1 / z};

  if (cache) {
    cache->concat = std::move(concat);
    cache->pre_hidden = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->logits = logits;
    cache->probs = probs;
  }

  Prediction pred;
  pred.p_not_match = probs[0];
  pred.p_match = probs[1];
  pred.predicted = probs[1] > probs[0] ? Outcome::Match : Outcome::NotMatch;
  return pred;
}

double bce_loss(const Prediction& pred, Outcome truth, double w_match,
                double w_not_match) {
  if (truth == Outcome::Match) return -w_match * std::log(clamp_prob(pred.p_match));
  return -w_not_match * std::log(clamp_prob(pred.p_not_match));
}

HeadGradients HeadGradients::zeros(std::size_t d) {
  HeadGradients g;
  g.w_hidden.assign(2 * d * d, 0.0);
  g.b_hidden.assign(d, 0.0);
  g.w_out.assign(d * 2, 0.0);
  g.b_out.assign(2, 0.0);
  g.d_job_embed.assign(d, 0.0);
  g.d_resume_embed.assign(d, 0.0);
  return g;
}

HeadGradients backward(const ForwardCache& cache, Outcome truth,
                       const HeadParams& params, double w_match,
                       double w_not_match) {
  const std::size_t d = params.dim;
  HeadGradients g = HeadGradients::zeros(d);

  const double weight = truth == Outcome::Match ? w_match : w_not_match;
  std::array<double, 2> dlogits{cache.probs[0], cache.probs[1]};
  dlogits[truth == Outcome::Match ? 1 : 0] -= 1.0;
  dlogits[0] *= weight;
  dlogits[1] *= weight;

  g.b_out[0] = dlogits[0];
  g.b_out[1] = dlogits[1];

  Vec d_hidden(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    g.w_out[i * 2 + 0] = cache.hidden[i] * dlogits[0];
    g.w_out[i * 2 + 1] = cache.hidden[i] * dlogits[1];
    d_hidden[i] = params.w_out[i * 2 + 0] * dlogits[0] +
                  params.w_out[i * 2 + 1] * dlogits[1];
  }

  Vec d_pre(d);
  for (std::size_t j = 0; j < d; ++j)
    d_pre[j] = cache.pre_hidden[j] > 0.0 ? d_hidden[j] : 0.0;

  g.b_hidden = d_pre;
  for (std::size_t r = 0; r < 2 * d; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      g.w_hidden[r * d + j] = cache.concat[r] * d_pre[j];
      acc += params.w_hidden[r * d + j] * d_pre[j];
    }
    if (r < d)
      g.d_job_embed[r] = acc;
    else
      g.d_resume_embed[r - d] = acc;
  }
  return g;
}

DocEncoding encode_document(const std::vector<std::string>& tokens, std::size_t k,
                            const textpipe::ChunkPlan& plan,
                            const embed::EncoderParams& encoder) {
  const textpipe::ChunkResult chunks =
      textpipe::chunk(tokens, k, plan.window, plan.overlap);
  DocEncoding enc;
  if (encoder.variant == embed::EncoderVariant::FeatureHash) {
    std::vector<Vec> embeds;
    embeds.reserve(chunks.chunks.size());
    for (const auto& c : chunks.chunks) embeds.push_back(embed::embed_chunk(c, encoder));
    enc.fixed = embed::doc_embedding(embeds);
  } else {
    for (const auto& c : chunks.chunks) {
      if (c.empty()) raise(Errc::EmptyChunk, "cannot embed an empty chunk");
      std::vector<std::size_t> rows;
      rows.reserve(c.size());
      for (const std::string& t : c) rows.push_back(encoder.bucket_of(t));
      enc.chunk_rows.push_back(std::move(rows));
    }
  }
  return enc;
}

Vec embedding_of(const DocEncoding& enc, const embed::EncoderParams& encoder) {
  if (encoder.variant == embed::EncoderVariant::FeatureHash) return enc.fixed;
  const std::size_t d = encoder.dim;
  Vec out(d, 0.0);
  for (const std::vector<std::size_t>& rows : enc.chunk_rows) {
    Vec chunk_embed(d, 0.0);
    for (std::size_t row : rows)
      for (std::size_t j = 0; j < d; ++j)
        chunk_embed[j] += encoder.table[row * d + j];
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (std::size_t j = 0; j < d; ++j) out[j] += chunk_embed[j] * inv;
  }
  const double inv_chunks = 1.0 / static_cast<double>(enc.chunk_rows.size());
  for (double& v : out) v *= inv_chunks;
  return out;
}

ExampleGrad example_gradient(const DocEncoding& job, const DocEncoding& resume,
                             const ModelBundle& model, Outcome truth,
                             double w_match, double w_not_match) {
  const Vec job_embed = embedding_of(job, model.encoder);
  const Vec resume_embed = embedding_of(resume, model.encoder);

  ForwardCache cache;
  ExampleGrad out;
  out.prediction = forward(job_embed, resume_embed, model.head, &cache);
  out.loss = bce_loss(out.prediction, truth, w_match, w_not_match);
  out.head = backward(cache, truth, model.head, w_match, w_not_match);

  if (model.encoder.variant == embed::EncoderVariant::TrainableBag) {
    const std::size_t d = model.encoder.dim;
    auto scatter = [&](const DocEncoding& enc, const Vec& d_embed) {
      const double inv_chunks = 1.0 / static_cast<double>(enc.chunk_rows.size());
      for (const std::vector<std::size_t>& rows : enc.chunk_rows) {
        const double w = inv_chunks / static_cast<double>(rows.size());
        for (std::size_t row : rows) {
          Vec& slot = out.table_grad.try_emplace(row, Vec(d, 0.0)).first->second;
          for (std::size_t j = 0; j < d; ++j) slot[j] += w * d_embed[j];
        }
      }
    };
    scatter(job, out.head.d_job_embed);
    scatter(resume, out.head.d_resume_embed);
  }
  return out;
}

namespace {

struct Example {
  const DocEncoding* job;
  const DocEncoding* resume;
  Outcome truth;
};

double f1_of(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  metrics::ConfusionCounts counts{tp, fp, fn, 0};
  const metrics::ConfusionStats s = metrics::confusion_stats(counts);
  return s.f1.value_or(0.0);
}

}  // namespace

TrainResult train(const corpus::CorpusSplit& split,
                  const std::map<std::string, corpus::Document>& documents,
                  const textpipe::ChunkPlan& plan, ModelBundle initial,
                  const TrainConfig& config) {
  if (split.train.empty() || split.validation.empty())
    raise(Errc::InsufficientData, "train and validation splits must be non-empty");

  // Encode each document once per role.
  std::map<std::string, DocEncoding> job_enc, resume_enc;
  auto encode_role = [&](const std::string& id, bool is_job) {
    auto& cache = is_job ? job_enc : resume_enc;
    if (cache.count(id)) return;
    auto it = documents.find(id);
    if (it == documents.end())
      raise(Errc::DanglingReference, "split cites missing document " + id);
    const std::vector<std::string> tokens = textpipe::tokenize(it->second.text);
    cache.emplace(id, encode_document(tokens, is_job ? plan.k_job : plan.k_resume,
                                      plan, initial.encoder));
  };
  auto build = [&](const std::vector<corpus::LabeledPair>& pairs) {
    std::vector<Example> out;
    out.reserve(pairs.size());
    for (const corpus::LabeledPair& p : pairs) {
      encode_role(p.job_id, true);
      encode_role(p.candidate_id, false);
      out.push_back({&job_enc.at(p.job_id), &resume_enc.at(p.candidate_id),
                     p.label == corpus::Label::Match ? Outcome::Match
                                                     : Outcome::NotMatch});
    }
    return out;
  };
  const std::vector<Example> train_set = build(split.train);
  const std::vector<Example> val_set = build(split.validation);

  ModelBundle model = std::move(initial);
  const std::size_t d = model.head.dim;
  const double wm = config.class_weight_match;
  const double wn = config.class_weight_not_match;

  TrainResult result;
  ModelBundle best = model;
  double best_f1 = -1.0;
  std::size_t bad_epochs = 0;

  Rng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);

    double train_loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      HeadGradients acc = HeadGradients::zeros(d);
      std::map<std::size_t, Vec> table_acc;
      for (std::size_t idx = start; idx < end; ++idx) {
        const Example& ex = train_set[order[idx]];
        ExampleGrad g = example_gradient(*ex.job, *ex.resume, model, ex.truth, wm, wn);
        if (!std::isfinite(g.loss))
          raise(Errc::NonFiniteLoss, "epoch " + std::to_string(epoch) +
                                         ": non-finite training loss");
        train_loss_sum += g.loss;
        for (std::size_t i = 0; i < acc.w_hidden.size(); ++i)
          acc.w_hidden[i] += g.head.w_hidden[i];
        for (std::size_t i = 0; i < d; ++i) acc.b_hidden[i] += g.head.b_hidden[i];
        for (std::size_t i = 0; i < acc.w_out.size(); ++i)
          acc.w_out[i] += g.head.w_out[i];
        acc.b_out[0] += g.head.b_out[0];
        acc.b_out[1] += g.head.b_out[1];
        for (auto& [row, vec] : g.table_grad) {
          Vec& slot = table_acc.try_emplace(row, Vec(d, 0.0)).first->second;
          for (std::size_t j = 0; j < d; ++j) slot[j] += vec[j];
        }
      }

      const double step = config.learning_rate * inv_batch;
      for (std::size_t i = 0; i < acc.w_hidden.size(); ++i)
        model.head.w_hidden[i] -= step * acc.w_hidden[i];
      for (std::size_t i = 0; i < d; ++i) model.head.b_hidden[i] -= step * acc.b_hidden[i];
      for (std::size_t i = 0; i < acc.w_out.size(); ++i)
        model.head.w_out[i] -= step * acc.w_out[i];
      model.head.b_out[0] -= step * acc.b_out[0];
      model.head.b_out[1] -= step * acc.b_out[1];
      for (const auto& [row, vec] : table_acc)
        for (std::size_t j = 0; j < d; ++j)
          model.encoder.table[row * d + j] -= step * vec[j];
    }

    // Validation pass.
    double val_loss_sum = 0.0;
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const Example& ex : val_set) {
      const Vec je = embedding_of(*ex.job, model.encoder);
      const Vec re = embedding_of(*ex.resume, model.encoder);
      const Prediction pred = forward(je, re, model.head);
      const double loss = bce_loss(pred, ex.truth, wm, wn);
      if (!std::isfinite(loss))
        raise(Errc::NonFiniteLoss,
              "epoch " + std::to_string(epoch) + ": non-finite validation loss");
      val_loss_sum += loss;
      const bool pred_match = pred.predicted == Outcome::Match;
      const bool true_match = ex.truth == Outcome::Match;
      if (pred_match && true_match) ++tp;
      else if (pred_match && !true_match) ++fp;
      else if (!pred_match && true_match) ++fn;
      else ++tn;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_loss_sum / static_cast<double>(train_set.size());
    stats.val_loss = val_loss_sum / static_cast<double>(val_set.size());
    stats.val_f1 = f1_of(tp, fp, fn);
    stats.val_accuracy =
        static_cast<double>(tp + tn) / static_cast<double>(val_set.size());
    result.epochs.push_back(stats);

    if (stats.val_f1 > best_f1) {
      best_f1 = stats.val_f1;
      best = model;
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
  }

  result.model = std::move(best);
  return result;
}

Prediction predict_tokens(const std::vector<std::string>& job_tokens,
                          const std::vector<std::string>& resume_tokens,
                          const textpipe::ChunkPlan& plan, const ModelBundle& model) {
  auto embed_doc = [&](const std::vector<std::string>& tokens, std::size_t k) {
    const textpipe::ChunkResult chunks =
        textpipe::chunk(tokens, k, plan.window, plan.overlap);
    std::vector<Vec> embeds;
    embeds.reserve(chunks.chunks.size());
    for (const auto& c : chunks.chunks)
      embeds.push_back(embed::embed_chunk(c, model.encoder));
    return embed::doc_embedding(embeds);
  };
  const Vec job_embed = embed_doc(job_tokens, plan.k_job);
  const Vec resume_embed = embed_doc(resume_tokens, plan.k_resume);
  return forward(job_embed, resume_embed, model.head);
}

Prediction predict_pair(const corpus::Document& job, const corpus::Document& resume,
                        const textpipe::ChunkPlan& plan, const ModelBundle& model) {
  return predict_tokens(textpipe::tokenize(job.text), textpipe::tokenize(resume.text),
                        plan, model);
}

namespace {

constexpr char kMagic[4] = {'M', 'F', 'C', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::string_view s, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

std::uint64_t get_u64(std::string_view s, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

double get_f64(std::string_view s, std::size_t& pos) {
  const std::uint64_t bits = get_u64(s, pos);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

std::string checkpoint_bytes(const ModelBundle& model) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(model.head.dim));
  put_u32(out, static_cast<std::uint32_t>(model.encoder.buckets));
  put_u32(out, model.encoder.variant == embed::EncoderVariant::FeatureHash ? 0u : 1u);
  put_u64(out, model.encoder.seed);
  put_u64(out, model.head.seed);
  for (double v : model.head.w_hidden) put_f64(out, v);
  for (double v : model.head.b_hidden) put_f64(out, v);
  for (double v : model.head.w_out) put_f64(out, v);
  for (double v : model.head.b_out) put_f64(out, v);
  if (model.encoder.variant == embed::EncoderVariant::TrainableBag)
    for (double v : model.encoder.table) put_f64(out, v);
  return out;
}

ModelBundle model_from_checkpoint(std::string_view bytes) {
  constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 4 + 8 + 8;
  if (bytes.size() < kHeaderSize || bytes.compare(0, 4, kMagic, 4) != 0)
    raise(Errc::BadCheckpoint, "bad magic or truncated header");
  std::size_t pos = 4;
  const std::uint32_t version = get_u32(bytes, pos);
  if (version != kFormatVersion)
    raise(Errc::BadCheckpoint, "unsupported format version " + std::to_string(version));
  const std::size_t d = get_u32(bytes, pos);
  const std::size_t buckets = get_u32(bytes, pos);
  const std::uint32_t variant = get_u32(bytes, pos);
  const std::uint64_t encoder_seed = get_u64(bytes, pos);
  const std::uint64_t head_seed = get_u64(bytes, pos);
  if (d == 0 || buckets == 0 || variant > 1)
    raise(Errc::BadCheckpoint, "invalid header fields");

  const std::size_t head_doubles = 2 * d * d + d + d * 2 + 2;
  const std::size_t table_doubles = variant == 1 ? buckets * d : 0;
  if (bytes.size() != kHeaderSize + 8 * (head_doubles + table_doubles))
    raise(Errc::BadCheckpoint, "payload size does not match header");

  ModelBundle model;
  model.encoder.variant =
      variant == 0 ? embed::EncoderVariant::FeatureHash : embed::EncoderVariant::TrainableBag;
  model.encoder.dim = d;
  model.encoder.buckets = buckets;
  model.encoder.seed = encoder_seed;
  model.head.dim = d;
  model.head.seed = head_seed;
  model.head.w_hidden.resize(2 * d * d);
  model.head.b_hidden.resize(d);
  model.head.w_out.resize(d * 2);
  model.head.b_out.resize(2);
  for (double& v : model.head.w_hidden) v = get_f64(bytes, pos);
  for (double& v : model.head.b_hidden) v = get_f64(bytes, pos);
  for (double& v : model.head.w_out) v = get_f64(bytes, pos);
  for (double& v : model.head.b_out) v = get_f64(bytes, pos);
  if (table_doubles > 0) {
    model.encoder.table.resize(table_doubles);
    for (double& v : model.encoder.table) v = get_f64(bytes, pos);
  }
  return model;
}

void save_checkpoint(const ModelBundle& model, std::ostream& out) {
  const std::string bytes = checkpoint_bytes(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelBundle load_checkpoint(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return model_from_checkpoint(bytes);
}

}  // namespace matchforge::matchnet
