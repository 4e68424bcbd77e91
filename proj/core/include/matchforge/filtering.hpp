#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matchforge/corpus.hpp"
#include "matchforge/ontology.hpp"

namespace matchforge::filtering {

enum class RequirementKind { MinYearsExperience, RequiredLanguage, RequiredCredential };

const char* requirement_kind_name(RequirementKind k);
RequirementKind requirement_kind_from_name(std::string_view name);

struct HardRequirement {
  RequirementKind kind = RequirementKind::MinYearsExperience;
  std::string skill_ref;   // MinYearsExperience
  int years = 0;           // MinYearsExperience
  std::string lang;        // RequiredLanguage
  std::string credential;  // RequiredCredential
  corpus::Span source_span;
  std::string pattern_name;

  std::string describe() const;
};

// One extraction rule: name \t kind \t regular expression. MinYears patterns
// capture (years, skill); the other kinds capture their value in group 1.
struct Pattern {
  std::string name;
  RequirementKind kind;
  std::string expression;
};

class PatternSet {
 public:
  static PatternSet defaults();  // shipped English/French rules
  static PatternSet load(std::istream& in);           // InvalidPattern on bad regex
  static PatternSet parse(std::string_view text);
  const std::vector<Pattern>& patterns() const { return patterns_; }

  std::vector<HardRequirement> apply(const corpus::Document& jd) const;

 private:
  struct Compiled;
  void compile();
  std::vector<Pattern> patterns_;
  std::shared_ptr<const std::vector<Compiled>> compiled_;
};

std::vector<HardRequirement> parse_requirements(const corpus::Document& jd,
                                                const PatternSet& patterns);

struct CandidateProfile {
  std::string id;
  std::map<std::string, double> skill_years;  // skill name -> years
  std::vector<std::string> languages;
  std::vector<std::string> credentials;
};

std::vector<CandidateProfile> read_profiles_jsonl(std::istream& in);

struct Rejection {
  std::string candidate_id;
  HardRequirement requirement;
  std::string reason;  // "3 < 5", "NotStated", ...
};

struct FilterOutcome {
  std::vector<std::string> passed;      // candidate ids, input order
  std::vector<Rejection> rejected;      // may hold several rows per candidate
};

// A candidate is rejected iff some requirement is unmet. Skill comparisons
// resolve through the ontology when one is given: a candidate skill that is
// Identical to or NarrowerThan the required skill satisfies it. Missing
// evidence counts as unmet with reason "NotStated".
FilterOutcome apply_filters(const std::vector<HardRequirement>& requirements,
                            const std::vector<CandidateProfile>& candidates,
                            const ontology::SkillGraph* graph = nullptr,
                            const std::vector<std::string>& resolve_langs = {"en", "fr"});

// Best-scoring concept for a free-text skill name across the given
// languages; empty when nothing clears the resolver threshold or no graph.
std::optional<std::string> resolve_skill_uri(const ontology::SkillGraph* graph,
                                             const std::string& text,
                                             const std::vector<std::string>& langs = {"en", "fr"});

}  // namespace matchforge::filtering
