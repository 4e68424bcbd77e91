#include "matchforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "matchforge/error.hpp"
#include "matchforge/rng.hpp"

namespace matchforge::corpus {

namespace {

using json = nlohmann::json;

char fold_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c;
}

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += fold_ascii(c);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// UTF-8 of "<bad bytes>" -> "<repaired>". Covers French accents double-read
// through Latin-1 and the cp1252 œ/Œ forms.
struct Repair {
  std::string_view from;
  std::string_view to;
};

const Repair kMojibake[] = {
    {"\xC3\x83\xC2\xA9", "\xC3\xA9"},  // Ã© -> é
    {"\xC3\x83\xC2\xA8", "\xC3\xA8"},  // Ã¨ -> è
    {"\xC3\x83\xC2\xAA", "\xC3\xAA"},  // Ãª -> ê
    {"\xC3\x83\xC2\xAB", "\xC3\xAB"},  // Ã« -> ë
    {"\xC3\x83\xC2\xA0", "\xC3\xA0"},  // Ã  -> à
    {"\xC3\x83\xC2\xA2", "\xC3\xA2"},  // Ã¢ -> â
    {"\xC3\x83\xC2\xA7", "\xC3\xA7"},  // Ã§ -> ç
    {"\xC3\x83\xC2\xAE", "\xC3\xAE"},  // Ã® -> î
    {"\xC3\x83\xC2\xAF", "\xC3\xAF"},  // Ã¯ -> ï
    {"\xC3\x83\xC2\xB4", "\xC3\xB4"},  // Ã´ -> ô
    {"\xC3\x83\xC2\xB9", "\xC3\xB9"},  // Ã¹ -> ù
    {"\xC3\x83\xC2\xBB", "\xC3\xBB"},  // Ã» -> û
    {"\xC3\x83\xC2\xBC", "\xC3\xBC"},  // Ã¼ -> ü
    {"\xC3\x83\xE2\x80\xB0", "\xC3\x89"},  // Ã‰ -> É (cp1252 0x89 = ‰)
    {"\xC3\x83\xC2\x89", "\xC3\x89"},      // latin1 form -> É
    {"\xC3\x83\xC2\x88", "\xC3\x88"},      // latin1 form -> È
    {"\xC3\x85\xE2\x80\x9C", "\xC5\x93"},  // Å“ -> œ (cp1252 0x93 = “)
    {"\xC3\x85\xC2\x93", "\xC5\x93"},      // latin1 form -> œ
    {"\xC3\x85\xE2\x80\x99", "\xC5\x92"},  // Å’ -> Œ (cp1252 0x92 = ’)
};

bool is_ws_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_ws_byte(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

Document Document::make(std::string id, std::string lang, std::string text,
                        std::map<std::string, Span> sections) {
  Document d;
  d.id = std::move(id);
  d.lang = std::move(lang);
  d.text = std::move(text);
  d.word_count = count_words(d.text);

  std::vector<Span> spans;
  for (const auto& [name, span] : sections) {
    if (span.end < span.begin || span.end > d.text.size())
      raise(Errc::ParseError, "document " + d.id + ": section '" + name +
                                  "' span out of bounds");
    spans.push_back(span);
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].begin < spans[i - 1].end)
      raise(Errc::ParseError, "document " + d.id + ": overlapping sections");
  }
  d.sections = std::move(sections);
  return d;
}

const char* label_name(Label l) {
  switch (l) {
    case Label::Match: return "match";
    case Label::Unmatch: return "unmatch";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

Label label_from_name(std::string_view name) {
  if (name == "match") return Label::Match;
  if (name == "unmatch") return Label::Unmatch;
  if (name == "unknown") return Label::Unknown;
  raise(Errc::ParseError, "unknown label '" + std::string(name) + "'");
}

StatusMapping StatusMapping::defaults() {
  return from_entries({
      {"Accepted Jobs Skills", Label::Match},
      {"Candidate accepted", Label::Match},
      {"Offer sent to candidate", Label::Match},
      {"Not retained - Physical interview", Label::Unmatch},
      {"Not retained - Phone interview", Label::Unmatch},
      {"Candidate refused", Label::Unmatch},
      {"Interested candidate", Label::Unknown},
      {"Stopped process", Label::Unknown},
      {"Stopped interviews process", Label::Unknown},
      {"Waiting for candidate decision", Label::Unknown},
  });
}

StatusMapping StatusMapping::from_entries(
    std::vector<std::pair<std::string, Label>> entries) {
  StatusMapping m;
  m.entries_.reserve(entries.size());
  for (auto& [status, label] : entries)
    m.entries_.emplace_back(fold(trim(status)), label);
  return m;
}

Label StatusMapping::map(std::string_view status) const {
  const std::string key = fold(trim(status));
  for (const auto& [pattern, label] : entries_)
    if (pattern == key) return label;
  return Label::Unknown;
}

Label map_status(std::string_view status, const StatusMapping& table) {
  return table.map(status);
}

std::string clean_text(std::string_view raw) {
  // Pass 1: mojibake repair.
  std::string repaired;
  repaired.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    bool hit = false;
    for (const Repair& r : kMojibake) {
      if (raw.compare(i, r.from.size(), r.from) == 0) {
        repaired += r.to;
        i += r.from.size();
        hit = true;
        break;
      }
    }
    if (!hit) repaired += raw[i++];
  }

  // Pass 2: drop control characters, collapse whitespace runs (including
  // non-breaking spaces), trim.
  std::string out;
  out.reserve(repaired.size());
  bool pending_space = false;
  std::size_t j = 0;
  while (j < repaired.size()) {
    const unsigned char c = static_cast<unsigned char>(repaired[j]);
    if (c == 0xC2 && j + 1 < repaired.size() &&
        static_cast<unsigned char>(repaired[j + 1]) == 0xA0) {
      pending_space = true;  // U+00A0
      j += 2;
      continue;
    }
    if (is_ws_byte(static_cast<char>(c))) {
      pending_space = true;
      ++j;
      continue;
    }
    if (c < 0x20 || c == 0x7F) {
      ++j;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += static_cast<char>(c);
    ++j;
  }
  return out;
}

CleanCorpus dedupe_and_filter(std::vector<LabeledPair> pairs,
                              std::vector<Document> docs,
                              std::size_t min_words) {
  CleanCorpus out;

  std::map<std::string, Document> doc_map;
  for (Document& d : docs) {
    auto [it, inserted] = doc_map.emplace(d.id, std::move(d));
    if (!inserted) out.audit.push_back({"doc:" + it->first, "duplicate_id"});
  }

  for (const LabeledPair& p : pairs) {
    if (!doc_map.count(p.job_id))
      raise(Errc::DanglingReference, "pair cites missing job " + p.job_id);
    if (!doc_map.count(p.candidate_id))
      raise(Errc::DanglingReference, "pair cites missing candidate " + p.candidate_id);
  }

  std::set<std::string> job_ids, candidate_ids;
  for (const LabeledPair& p : pairs) {
    job_ids.insert(p.job_id);
    candidate_ids.insert(p.candidate_id);
  }

  // Duplicate jobs: identical cleaned text collapses onto the smallest id.
  std::map<std::string, std::vector<std::string>> by_text;
  for (const std::string& id : job_ids) by_text[doc_map.at(id).text].push_back(id);
  std::unordered_map<std::string, std::string> job_alias;
  for (auto& [text, ids] : by_text) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 1; i < ids.size(); ++i) {
      job_alias[ids[i]] = ids[0];
      doc_map.erase(ids[i]);
      out.audit.push_back({"doc:" + ids[i], "duplicate_job"});
    }
  }
  for (LabeledPair& p : pairs) {
    auto it = job_alias.find(p.job_id);
    if (it != job_alias.end()) p.job_id = it->second;
  }

  // One pair per (job, candidate); Match vs Unmatch conflicts drop all sides.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    groups[{pairs[i].job_id, pairs[i].candidate_id}].push_back(i);

  std::vector<LabeledPair> deduped;
  for (const LabeledPair& p : pairs) {
    const auto key = std::make_pair(p.job_id, p.candidate_id);
    const std::vector<std::size_t>& group = groups.at(key);
    if (group.size() == 1) {
      deduped.push_back(p);
      continue;
    }
    bool has_match = false, has_unmatch = false;
    for (std::size_t idx : group) {
      if (pairs[idx].label == Label::Match) has_match = true;
      if (pairs[idx].label == Label::Unmatch) has_unmatch = true;
    }
    const std::string entity = "pair:" + p.job_id + "/" + p.candidate_id;
    if (has_match && has_unmatch) {
      out.audit.push_back({entity, "contradiction"});
      continue;
    }
    // Keep the first occurrence carrying a known label, else the first.
    std::size_t keep = group.front();
    for (std::size_t idx : group)
      if (pairs[idx].label != Label::Unknown) {
        keep = idx;
        break;
      }
    const std::size_t self = static_cast<std::size_t>(&p - pairs.data());
    if (self == keep)
      deduped.push_back(p);
    else
      out.audit.push_back({entity, "duplicate_pair"});
  }

  // Candidates under the word threshold go, and their pairs with them.
  std::unordered_set<std::string> removed_candidates;
  for (const std::string& id : candidate_ids) {
    auto it = doc_map.find(id);
    if (it == doc_map.end()) continue;  // candidate doc gone via job dedup
    if (it->second.word_count < min_words) {
      removed_candidates.insert(id);
      doc_map.erase(it);
      out.audit.push_back({"doc:" + id, "short_document"});
    }
  }
  for (const LabeledPair& p : deduped) {
    if (removed_candidates.count(p.candidate_id)) {
      out.audit.push_back(
          {"pair:" + p.job_id + "/" + p.candidate_id, "short_document_pair"});
    } else {
      out.pairs.push_back(p);
    }
  }

  out.documents = std::move(doc_map);
  return out;
}

CorpusSplit stratified_split(const std::vector<LabeledPair>& pairs, std::uint64_t seed) {
  std::vector<LabeledPair> match, unmatch;
  for (const LabeledPair& p : pairs) {
    switch (p.label) {
      case Label::Match: match.push_back(p); break;
      case Label::Unmatch: unmatch.push_back(p); break;
      case Label::Unknown:
        throw std::invalid_argument("stratified_split: Unknown label present");
    }
  }
  if (match.size() < 5 || unmatch.size() < 5)
    raise(Errc::InsufficientData,
          "stratified_split needs >= 5 pairs per class, got " +
              std::to_string(match.size()) + " match / " +
              std::to_string(unmatch.size()) + " unmatch");

  CorpusSplit split;
  split.seed = seed;
  Rng rng(seed);
  auto key = [](const LabeledPair& p) { return p.job_id + "\x1f" + p.candidate_id; };
  for (std::vector<LabeledPair>* cls : {&match, &unmatch}) {
    std::sort(cls->begin(), cls->end(),
              [&](const LabeledPair& a, const LabeledPair& b) { return key(a) < key(b); });
    rng.shuffle(*cls);
    const std::size_t n = cls->size();
    const std::size_t n_test = static_cast<std::size_t>(
        std::lround(static_cast<double>(n) * CorpusSplit::kOuterHoldout));
    const std::size_t pool = n - n_test;
    const std::size_t n_val = static_cast<std::size_t>(
        std::lround(static_cast<double>(pool) * CorpusSplit::kInnerHoldout));
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_test)
        split.test.push_back((*cls)[i]);
      else if (i < n_test + n_val)
        split.validation.push_back((*cls)[i]);
      else
        split.train.push_back((*cls)[i]);
    }
  }
  return split;
}

std::vector<Document> read_documents_jsonl(std::istream& in, bool clean) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      raise(Errc::ParseError, "documents line " + std::to_string(line_no) +
                                  ": not a JSON object");
    try {
      std::string id = j.at("id").get<std::string>();
      std::string lang = j.value("lang", std::string{});
      std::string text = j.at("text").get<std::string>();
      if (clean) text = clean_text(text);
      std::map<std::string, Span> sections;
      if (j.contains("sections")) {
        for (const auto& [name, span] : j.at("sections").items()) {
          sections[name] = {span.at(0).get<std::size_t>(),
                            span.at(1).get<std::size_t>()};
        }
      }
      docs.push_back(Document::make(std::move(id), std::move(lang), std::move(text),
                                    std::move(sections)));
    } catch (const json::exception& e) {
      raise(Errc::ParseError,
            "documents line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<LabeledPair> read_pairs_tsv(std::istream& in, const StatusMapping& table) {
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                   : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      raise(Errc::ParseError, "pairs line " + std::to_string(line_no) +
                                  ": expected job_id\\tcandidate_id\\tstatus");
    LabeledPair p;
    p.job_id = std::string(trim(line.substr(0, t1)));
    p.candidate_id = std::string(trim(line.substr(t1 + 1, t2 - t1 - 1)));
    p.status = std::string(trim(line.substr(t2 + 1)));
    p.label = table.map(p.status);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_audit_tsv(std::ostream& out, const std::vector<AuditEntry>& audit) {
  for (const AuditEntry& e : audit) out << e.entity_id << '\t' << e.reason << '\n';
}

namespace {

json document_to_json(const Document& d) {
  json j;
  j["id"] = d.id;
  j["lang"] = d.lang;
  j["text"] = d.text;
  j["word_count"] = d.word_count;
  if (!d.sections.empty()) {
    json s = json::object();
    for (const auto& [name, span] : d.sections) s[name] = {span.begin, span.end};
    j["sections"] = s;
  }
  return j;
}

json pair_to_json(const LabeledPair& p) {
  return {{"job_id", p.job_id},
          {"candidate_id", p.candidate_id},
          {"status", p.status},
          {"label", label_name(p.label)}};
}

}  // namespace

std::string corpus_to_json(const CleanCorpus& corpus) {
  json docs = json::array();
  for (const auto& [id, d] : corpus.documents) docs.push_back(document_to_json(d));

  std::vector<const LabeledPair*> ordered;
  for (const LabeledPair& p : corpus.pairs) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(), [](const LabeledPair* a, const LabeledPair* b) {
    return std::tie(a->job_id, a->candidate_id) < std::tie(b->job_id, b->candidate_id);
  });
  json pairs = json::array();
  for (const LabeledPair* p : ordered) pairs.push_back(pair_to_json(*p));

  json j;
  j["documents"] = docs;
  j["pairs"] = pairs;
  return j.dump();
}

CleanCorpus corpus_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::ParseError, "corpus blob is not valid JSON");
  CleanCorpus corpus;
  try {
    for (const json& jd : j.at("documents")) {
      std::map<std::string, Span> sections;
      if (jd.contains("sections")) {
        for (const auto& [name, span] : jd.at("sections").items())
          sections[name] = {span.at(0).get<std::size_t>(),
                            span.at(1).get<std::size_t>()};
      }
      Document d = Document::make(jd.at("id").get<std::string>(),
                                  jd.value("lang", std::string{}),
                                  jd.at("text").get<std::string>(), std::move(sections));
      corpus.documents.emplace(d.id, std::move(d));
    }
    for (const json& jp : j.at("pairs")) {
      LabeledPair p;
      p.job_id = jp.at("job_id").get<std::string>();
      p.candidate_id = jp.at("candidate_id").get<std::string>();
      p.status = jp.at("status").get<std::string>();
      p.label = label_from_name(jp.at("label").get<std::string>());
      corpus.pairs.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    raise(Errc::ParseError, std::string("corpus blob: ") + e.what());
  }
  return corpus;
}

}  // namespace matchforge::corpus
