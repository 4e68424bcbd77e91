#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace matchforge::corpus {

// Byte offsets into Document::text, half-open.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Document {
  std::string id;
  std::string lang;
  std::string text;
  std::map<std::string, Span> sections;  // empty = no section map
  std::size_t word_count = 0;

  // Computes word_count and validates that sections are in-bounds and
  // non-overlapping.
  static Document make(std::string id, std::string lang, std::string text,
                       std::map<std::string, Span> sections = {});
};

std::size_t count_words(std::string_view text);

enum class Label { Match, Unmatch, Unknown };

const char* label_name(Label l);
Label label_from_name(std::string_view name);

struct LabeledPair {
  std::string job_id;
  std::string candidate_id;
  std::string status;
  Label label = Label::Unknown;
};

// Status -> label table; lookups are case-insensitive exact matches and
// anything unmapped is Unknown.
class StatusMapping {
 public:
  static StatusMapping defaults();
  static StatusMapping from_entries(std::vector<std::pair<std::string, Label>> entries);

  Label map(std::string_view status) const;
  const std::vector<std::pair<std::string, Label>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Label>> entries_;  // folded keys
};

// Collapses whitespace, strips control characters, repairs the usual French
// accent/ligature mojibake. Total and idempotent.
std::string clean_text(std::string_view raw);

Label map_status(std::string_view status, const StatusMapping& table);

struct AuditEntry {
  std::string entity_id;  // "doc:<id>" or "pair:<job>/<candidate>"
  std::string reason;
};

struct CleanCorpus {
  std::map<std::string, Document> documents;
  std::vector<LabeledPair> pairs;
  std::vector<AuditEntry> audit;
};

// Collapses duplicate jobs (identical cleaned text), drops contradictory
// (job, candidate) labelings, removes candidates under min_words along with
// their pairs. Every removal lands in the audit log. Expects documents whose
// text is already cleaned.
CleanCorpus dedupe_and_filter(std::vector<LabeledPair> pairs,
                              std::vector<Document> docs,
                              std::size_t min_words = 50);

struct CorpusSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> validation;
  std::vector<LabeledPair> test;
  std::uint64_t seed = 0;
  // 80/20 outer split, then 80/20 of the training side for validation.
  static constexpr double kOuterHoldout = 0.2;
  static constexpr double kInnerHoldout = 0.2;
};

// Stratified per label; every pair must be Match or Unmatch and each class
// needs at least 5 members.
CorpusSplit stratified_split(const std::vector<LabeledPair>& pairs, std::uint64_t seed);

// --- file formats ---

// JSONL, one {"id","lang","text","sections"?} object per line. Text is
// cleaned on read when `clean` is set; section spans refer to cleaned text.
std::vector<Document> read_documents_jsonl(std::istream& in, bool clean = true);

// TSV: job_id \t candidate_id \t status
std::vector<LabeledPair> read_pairs_tsv(std::istream& in, const StatusMapping& table);

void write_audit_tsv(std::ostream& out, const std::vector<AuditEntry>& audit);

// Canonical corpus blob (documents and pairs sorted) for content addressing.
std::string corpus_to_json(const CleanCorpus& corpus);
CleanCorpus corpus_from_json(std::string_view text);

}  // namespace matchforge::corpus
