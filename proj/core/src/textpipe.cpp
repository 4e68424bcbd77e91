#include "matchforge/textpipe.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "matchforge/error.hpp"

namespace matchforge::textpipe {

namespace {

using json = nlohmann::json;

bool is_space_cp(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == U'\v' || cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200B) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x3000;
}

bool is_word_cp(char32_t cp) {
  if (cp < 0x80)
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
           (cp >= U'A' && cp <= U'Z');
  // Latin-1 punctuation block and multiplication/division signs are symbols;
  // everything else non-ASCII counts as a letter.
  if (cp >= 0x00A1 && cp <= 0x00BF) return false;
  if (cp == 0x00D7 || cp == 0x00F7) return false;
  if (cp >= 0x2010 && cp <= 0x205E) return false;  // general punctuation
  return true;
}

char32_t lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (cp == 0x0152) return 0x0153;  // Œ
  if (cp == 0x0178) return 0x00FF;  // Ÿ
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// One code point at a time; malformed bytes decode as Latin-1.
char32_t next_cp(std::string_view s, std::size_t& i) {
  const unsigned char c = static_cast<unsigned char>(s[i]);
  std::size_t len;
  char32_t cp;
  if ((c & 0x80u) == 0) {
    len = 1;
    cp = c;
  } else if ((c & 0xE0u) == 0xC0u) {
    len = 2;
    cp = c & 0x1Fu;
  } else if ((c & 0xF0u) == 0xE0u) {
    len = 3;
    cp = c & 0x0Fu;
  } else if ((c & 0xF8u) == 0xF0u) {
    len = 4;
    cp = c & 0x07u;
  } else {
    ++i;
    return c;
  }
  if (i + len > s.size()) {
    ++i;
    return c;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0u) != 0x80u) {
      ++i;
      return c;
    }
    cp = (cp << 6) | (cc & 0x3Fu);
  }
  i += len;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(word);
      word.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = lower_cp(next_cp(text, i));
    if (is_space_cp(cp)) {
      flush();
    } else if (is_word_cp(cp)) {
      append_utf8(word, cp);
    } else {
      flush();
      std::string punct;
      append_utf8(punct, cp);
      tokens.push_back(std::move(punct));
    }
  }
  flush();
  return tokens;
}

TokenSequence tokenize(std::string_view text, std::string doc_id) {
  return {tokenize(text), std::move(doc_id)};
}

ChunkResult chunk(const std::vector<std::string>& tokens, std::size_t k,
                  std::size_t window, std::size_t overlap) {
  if (k < 1) throw std::invalid_argument("chunk: k must be >= 1");
  if (overlap >= window) throw std::invalid_argument("chunk: overlap must be < window");

  const std::size_t length = tokens.size();
  const std::size_t stride = window - overlap;
  std::size_t needed = 1;
  if (length > window) needed = 1 + (length - window + stride - 1) / stride;

  ChunkResult result;
  const std::size_t emit = std::min(k, needed);
  result.chunks.reserve(emit);
  for (std::size_t i = 0; i < emit; ++i) {
    const std::size_t begin = i * stride;
    const std::size_t end = std::min(begin + window, length);
    result.chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                               tokens.begin() + static_cast<std::ptrdiff_t>(end));
  }
  const std::size_t covered = (emit - 1) * stride + window;
  result.dropped = length > covered ? length - covered : 0;
  return result;
}

double corpus_loss(const std::vector<std::size_t>& lengths, std::size_t k,
                   std::size_t window, std::size_t overlap) {
  const std::size_t capacity = k * window - (k - 1) * overlap;
  std::size_t total = 0, lost = 0;
  for (std::size_t len : lengths) {
    total += len;
    if (len > capacity) lost += len - capacity;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(lost) / static_cast<double>(total);
}

std::size_t min_slots_for_budget(const std::vector<std::size_t>& lengths,
                                 std::size_t window, std::size_t overlap,
                                 double loss_threshold) {
  if (lengths.empty())
    throw std::invalid_argument("min_slots_for_budget: empty length list");
  std::size_t k = 1;
  while (corpus_loss(lengths, k, window, overlap) > loss_threshold) ++k;
  return k;
}

ChunkPlan plan_chunks(const std::vector<std::size_t>& job_lengths,
                      const std::vector<std::size_t>& resume_lengths,
                      std::size_t window, std::size_t overlap,
                      double loss_threshold) {
  if (overlap >= window)
    throw std::invalid_argument("plan_chunks: overlap must be < window");
  ChunkPlan plan;
  plan.window = window;
  plan.overlap = overlap;
  plan.loss_threshold = loss_threshold;
  plan.k_job = min_slots_for_budget(job_lengths, window, overlap, loss_threshold);
  plan.k_resume = min_slots_for_budget(resume_lengths, window, overlap, loss_threshold);
  plan.realized_loss_job = corpus_loss(job_lengths, plan.k_job, window, overlap);
  plan.realized_loss_resume =
      corpus_loss(resume_lengths, plan.k_resume, window, overlap);
  return plan;
}

std::string ChunkPlan::to_json() const {
  json j;
  j["window"] = window;
  j["overlap"] = overlap;
  j["k_job"] = k_job;
  j["k_resume"] = k_resume;
  j["loss_threshold"] = loss_threshold;
  j["realized_loss_job"] = realized_loss_job;
  j["realized_loss_resume"] = realized_loss_resume;
  return j.dump();
}

ChunkPlan ChunkPlan::from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::ParseError, "chunk plan is not valid JSON");
  ChunkPlan plan;
  try {
    plan.window = j.at("window").get<std::size_t>();
    plan.overlap = j.at("overlap").get<std::size_t>();
    plan.k_job = j.at("k_job").get<std::size_t>();
    plan.k_resume = j.at("k_resume").get<std::size_t>();
    plan.loss_threshold = j.at("loss_threshold").get<double>();
    plan.realized_loss_job = j.at("realized_loss_job").get<double>();
    plan.realized_loss_resume = j.at("realized_loss_resume").get<double>();
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("chunk plan: ") + e.what());
  }
  return plan;
}

}  // namespace matchforge::textpipe
