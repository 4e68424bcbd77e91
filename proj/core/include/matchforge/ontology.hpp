#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace matchforge::ontology {

enum class ConceptKind { Occupation, Skill, Qualification };

const char* kind_name(ConceptKind k);
ConceptKind kind_from_name(std::string_view name);

struct LabelSet {
  std::string preferred;
  std::vector<std::string> alternatives;
  std::vector<std::string> hidden;
};

struct Concept {
  std::string uri;
  ConceptKind kind = ConceptKind::Skill;
  std::map<std::string, LabelSet> labels;        // lang -> labels
  std::map<std::string, std::string> description;  // lang -> text
  std::vector<std::string> broader;
  std::vector<std::string> essential_skills;  // Occupation only
  std::vector<std::string> optional_skills;   // Occupation only
};

struct SkillRelation {
  enum class Kind { Identical, NarrowerThan, BroaderThan, SharedAncestor, Unrelated };
  Kind kind = Kind::Unrelated;
  int depth = 0;     // NarrowerThan / BroaderThan: broader-edge hops
  int distance = 0;  // SharedAncestor: minimal combined hops

  bool operator==(const SkillRelation&) const = default;
};

const char* relation_name(SkillRelation::Kind k);

struct LabelHit {
  std::string uri;
  double score;
};

// Standard Jaro similarity with the Winkler prefix boost (prefix capped at
// 4, scaling 0.1, no boost threshold). Operates on Unicode code points.
double jaro_winkler(std::string_view a, std::string_view b);

// Immutable ESCO-style concept graph. One concept per line:
//   uri \t kind \t lang=preferred|alt|~hidden \t ... \t broader=u1,u2 \t essential=u1 \t optional=u1
// '#' starts a comment line; kind is Occupation|Skill|Qualification; a label
// prefixed with '~' is hidden; desc:lang=text carries descriptions.
class SkillGraph {
 public:
  static SkillGraph load_graph(std::istream& in);
  static SkillGraph load_file(const std::filesystem::path& path);
  static SkillGraph parse(std::string_view text);

  std::size_t size() const { return concepts_.size(); }
  bool contains(const std::string& uri) const { return index_.count(uri) != 0; }
  const Concept& concept(const std::string& uri) const;  // UnknownUri
  const std::vector<std::string>& uris() const { return uri_order_; }
  std::vector<std::string> languages() const;

  // Exact label matches (ASCII-case-insensitive) score 1.0; otherwise the
  // best Jaro-Winkler score over that language's labels, hits below
  // `threshold` omitted. Descending score, ties broken by uri.
  std::vector<LabelHit> resolve_label(const std::string& text, const std::string& lang,
                                      double threshold = 0.85) const;

  SkillRelation relate_skills(const std::string& a, const std::string& b) const;

  // 1 / (1 + L) with L the shortest undirected broader-edge path; 0 when
  // disconnected.
  double path_similarity(const std::string& a, const std::string& b) const;

 private:
  void validate_and_index();
  std::unordered_map<std::string, int> ancestor_depths(std::size_t start) const;

  std::vector<Concept> concepts_;
  std::vector<std::string> uri_order_;  // sorted
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> broader_adj_;
  std::vector<std::vector<std::size_t>> narrower_adj_;
  // lang -> (label -> concept indices), exact lookups
  std::map<std::string, std::unordered_map<std::string, std::vector<std::size_t>>> exact_index_;
  // lang -> flat (label, concept index) list for fuzzy scans
  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> label_index_;
};

}  // namespace matchforge::ontology
