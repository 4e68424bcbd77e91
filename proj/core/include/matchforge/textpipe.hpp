#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace matchforge::textpipe {

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string doc_id;
};

// Deterministic encoder-independent tokenizer: lowercases (ASCII plus the
// Latin accents French needs), splits on whitespace, keeps each punctuation
// character as its own token. "C++ et Java." -> c + + et java .
std::vector<std::string> tokenize(std::string_view text);
TokenSequence tokenize(std::string_view text, std::string doc_id);

struct ChunkResult {
  std::vector<std::vector<std::string>> chunks;
  std::size_t dropped = 0;  // tokens beyond capacity(k)
};

// Sliding windows of width W at stride W - V; chunk i covers token indices
// [i*(W-V), i*(W-V)+W). Emission stops at min(k, chunks needed); an empty
// token list still yields one (empty) chunk.
ChunkResult chunk(const std::vector<std::string>& tokens, std::size_t k,
                  std::size_t window, std::size_t overlap);

struct ChunkPlan {
  std::size_t window = 512;
  std::size_t overlap = 50;
  std::size_t k_job = 1;
  std::size_t k_resume = 1;
  double loss_threshold = 0.10;
  double realized_loss_job = 0.0;
  double realized_loss_resume = 0.0;

  std::size_t capacity(std::size_t k) const {
    return k * window - (k - 1) * overlap;
  }

  std::string to_json() const;
  static ChunkPlan from_json(std::string_view text);
};

// Fraction of corpus tokens beyond capacity(k).
double corpus_loss(const std::vector<std::size_t>& lengths, std::size_t k,
                   std::size_t window, std::size_t overlap);

// Smallest k whose corpus loss meets the budget.
std::size_t min_slots_for_budget(const std::vector<std::size_t>& lengths,
                                 std::size_t window, std::size_t overlap,
                                 double loss_threshold);

// Per-role slot counts under the shared token-loss budget.
ChunkPlan plan_chunks(const std::vector<std::size_t>& job_lengths,
                      const std::vector<std::size_t>& resume_lengths,
                      std::size_t window = 512, std::size_t overlap = 50,
                      double loss_threshold = 0.10);

}  // namespace matchforge::textpipe
