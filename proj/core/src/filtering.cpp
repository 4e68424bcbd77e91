#include "matchforge/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "matchforge/error.hpp"

namespace matchforge::filtering {

namespace {

using json = nlohmann::json;

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// "fr-CA" -> "fr"
std::string normalize_lang(std::string_view tag) {
  std::string folded = fold(trim(tag));
  const std::size_t dash = folded.find('-');
  if (dash != std::string::npos) folded.resize(dash);
  static const std::unordered_map<std::string, std::string> kNames = {
      {"english", "en"}, {"french", "fr"},    {"anglais", "en"},
      {"fran\xC3\xA7"
       "ais",
       "fr"},
      {"francais", "fr"},
  };
  auto it = kNames.find(folded);
  return it == kNames.end() ? folded : it->second;
}

std::string format_years(double y) {
  if (y == std::floor(y)) return std::to_string(static_cast<long long>(y));
  std::ostringstream os;
  os << y;
  return os.str();
}

}  // namespace

const char* requirement_kind_name(RequirementKind k) {
  switch (k) {
    case RequirementKind::MinYearsExperience: return "min_years_experience";
    case RequirementKind::RequiredLanguage: return "required_language";
    case RequirementKind::RequiredCredential: return "required_credential";
  }
  return "min_years_experience";
}

RequirementKind requirement_kind_from_name(std::string_view name) {
  if (name == "min_years_experience") return RequirementKind::MinYearsExperience;
  if (name == "required_language") return RequirementKind::RequiredLanguage;
  if (name == "required_credential") return RequirementKind::RequiredCredential;
  raise(Errc::InvalidPattern, "unknown requirement kind '" + std::string(name) + "'");
}

std::string HardRequirement::describe() const {
  switch (kind) {
    case RequirementKind::MinYearsExperience:
      return "min " + std::to_string(years) + " years of " + skill_ref;
    case RequirementKind::RequiredLanguage:
      return "language " + lang;
    case RequirementKind::RequiredCredential:
      return "credential " + credential;
  }
  return {};
}

struct PatternSet::Compiled {
  Pattern pattern;
  std::regex re;
};

PatternSet PatternSet::defaults() {
  static const char* kDefaults =
      "en_min_years\tmin_years_experience\t"
      "(\\d+)\\s*\\+?\\s*(?:years?|yrs?)\\s+(?:of\\s+)?"
      "(?:experience\\s+(?:in|with|of)\\s+|(?:in|with)\\s+)?([A-Za-z0-9+#.\\-]+)\n"
      "fr_min_years\tmin_years_experience\t"
      "(\\d+)\\s*\\+?\\s*an(?:s|n\xC3\xA9"
      "es?)?\\s+d(?:'|\xE2\x80\x99)exp(?:\xC3\xA9|e)rience\\s+(?:en|avec|de)\\s+"
      "((?:[A-Za-z0-9+#.\\-]|\xC3\xA9|\xC3\xA8|\xC3\xAA|\xC3\xA0|\xC3\xA7|\xC3\xAE|"
      "\xC3\xAF|\xC3\xB4|\xC3\xBB|\xC3\xB9)+)\n"
      "en_language\trequired_language\t"
      "(?:fluen(?:t|cy)\\s+in|proficien(?:t|cy)\\s+in|must\\s+speak)\\s+"
      "(english|french)\n"
      "fr_language\trequired_language\t"
      "(?:ma(?:\xC3\xAE|i)trise\\s+(?:du|de\\s+l(?:'|\xE2\x80\x99))|parle\\s+"
      "couramment(?:\\s+le)?)\\s*(fran(?:\xC3\xA7|c)ais|anglais)\n"
      "en_credential\trequired_credential\t"
      "(bachelor|master|phd|doctorate|b\\.?sc|m\\.?sc)\n"
      "fr_credential\trequired_credential\t"
      "(baccalaur(?:\xC3\xA9|e)at|licence|doctorat|dipl(?:\xC3\xB4|o)me)\n";
  return parse(kDefaults);
}

PatternSet PatternSet::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load(in);
}

PatternSet PatternSet::load(std::istream& in) {
  PatternSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 =
        t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      raise(Errc::InvalidPattern, "patterns line " + std::to_string(line_no) +
                                      ": expected name\\tkind\\texpression");
    Pattern p;
    p.name = std::string(trim(line.substr(0, t1)));
    p.kind = requirement_kind_from_name(trim(line.substr(t1 + 1, t2 - t1 - 1)));
    p.expression = std::string(trim(line.substr(t2 + 1)));
    set.patterns_.push_back(std::move(p));
  }
  set.compile();
  return set;
}

void PatternSet::compile() {
  auto compiled = std::make_shared<std::vector<Compiled>>();
  for (const Pattern& p : patterns_) {
    try {
      compiled->push_back(
          {p, std::regex(p.expression, std::regex::ECMAScript | std::regex::icase)});
    } catch (const std::regex_error& e) {
      raise(Errc::InvalidPattern, "pattern '" + p.name + "': " + e.what());
    }
  }
  compiled_ = std::move(compiled);
}

std::vector<HardRequirement> PatternSet::apply(const corpus::Document& jd) const {
  std::vector<HardRequirement> out;
  for (const Compiled& c : *compiled_) {
    auto begin = std::sregex_iterator(jd.text.begin(), jd.text.end(), c.re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const std::smatch& m = *it;
      HardRequirement req;
      req.kind = c.pattern.kind;
      req.pattern_name = c.pattern.name;
      req.source_span = {static_cast<std::size_t>(m.position(0)),
                         static_cast<std::size_t>(m.position(0)) + m.length(0)};
      switch (c.pattern.kind) {
        case RequirementKind::MinYearsExperience:
          if (m.size() < 3) continue;
          req.years = std::stoi(m[1].str());
          req.skill_ref = fold(m[2].str());
          break;
        case RequirementKind::RequiredLanguage:
          if (m.size() < 2) continue;
          req.lang = normalize_lang(m[1].str());
          break;
        case RequirementKind::RequiredCredential:
          if (m.size() < 2) continue;
          req.credential = fold(m[1].str());
          break;
      }
      out.push_back(std::move(req));
    }
  }
  return out;
}

std::vector<HardRequirement> parse_requirements(const corpus::Document& jd,
                                                const PatternSet& patterns) {
  return patterns.apply(jd);
}

std::vector<CandidateProfile> read_profiles_jsonl(std::istream& in) {
  std::vector<CandidateProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      raise(Errc::ParseError,
            "profiles line " + std::to_string(line_no) + ": not a JSON object");
    try {
      CandidateProfile p;
      p.id = j.at("id").get<std::string>();
      if (j.contains("skills"))
        for (const auto& [name, years] : j.at("skills").items())
          p.skill_years[name] = years.get<double>();
      if (j.contains("languages"))
        for (const json& l : j.at("languages")) p.languages.push_back(l.get<std::string>());
      if (j.contains("credentials"))
        for (const json& c : j.at("credentials"))
          p.credentials.push_back(c.get<std::string>());
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      raise(Errc::ParseError,
            "profiles line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// Best label hit across the configured languages; lexicographically smaller
// uri wins ties so resolution is deterministic.
class SkillResolver {
 public:
  SkillResolver(const ontology::SkillGraph* graph, const std::vector<std::string>& langs)
      : graph_(graph), langs_(langs) {}

  std::optional<std::string> resolve(const std::string& text) {
    if (!graph_) return std::nullopt;
    auto cached = cache_.find(text);
    if (cached != cache_.end()) return cached->second;
    std::optional<std::string> best;
    double best_score = 0.0;
    for (const std::string& lang : langs_) {
      std::vector<ontology::LabelHit> hits;
      try {
        hits = graph_->resolve_label(text, lang);
      } catch (const Error& e) {
        if (e.code() == Errc::UnknownLanguage) continue;
        throw;
      }
      if (hits.empty()) continue;
      if (hits.front().score > best_score ||
          (hits.front().score == best_score && best && hits.front().uri < *best)) {
        best_score = hits.front().score;
        best = hits.front().uri;
      }
    }
    cache_.emplace(text, best);
    return best;
  }

 private:
  const ontology::SkillGraph* graph_;
  const std::vector<std::string>& langs_;
  std::map<std::string, std::optional<std::string>> cache_;
};

}  // namespace

FilterOutcome apply_filters(const std::vector<HardRequirement>& requirements,
                            const std::vector<CandidateProfile>& candidates,
                            const ontology::SkillGraph* graph,
                            const std::vector<std::string>& resolve_langs) {
  FilterOutcome outcome;
  SkillResolver resolver(graph, resolve_langs);

  for (const CandidateProfile& cand : candidates) {
    std::vector<Rejection> violations;
    for (const HardRequirement& req : requirements) {
      switch (req.kind) {
        case RequirementKind::MinYearsExperience: {
          const std::optional<std::string> req_uri = resolver.resolve(req.skill_ref);
          bool any_skill = false;
          double best_years = 0.0;
          for (const auto& [skill, years] : cand.skill_years) {
            bool matches = false;
            const std::optional<std::string> cand_uri = resolver.resolve(skill);
            if (req_uri && cand_uri) {
              const ontology::SkillRelation rel =
                  graph->relate_skills(*cand_uri, *req_uri);
              matches = rel.kind == ontology::SkillRelation::Kind::Identical ||
                        rel.kind == ontology::SkillRelation::Kind::NarrowerThan;
            } else {
              matches = fold(skill) == fold(req.skill_ref);
            }
            if (matches) {
              any_skill = true;
              best_years = std::max(best_years, years);
            }
          }
          if (!any_skill) {
            violations.push_back({cand.id, req, "NotStated"});
          } else if (best_years < static_cast<double>(req.years)) {
            violations.push_back(
                {cand.id, req,
                 format_years(best_years) + " < " + std::to_string(req.years)});
          }
          break;
        }
        case RequirementKind::RequiredLanguage: {
          bool found = false;
          std::string have;
          for (const std::string& l : cand.languages) {
            const std::string norm = normalize_lang(l);
            if (!have.empty()) have += ", ";
            have += norm;
            if (norm == req.lang) found = true;
          }
          if (!found) {
            violations.push_back({cand.id, req,
                                  cand.languages.empty()
                                      ? std::string("NotStated")
                                      : req.lang + " not in {" + have + "}"});
          }
          break;
        }
        case RequirementKind::RequiredCredential: {
          bool found = false;
          for (const std::string& c : cand.credentials)
            if (fold(c).find(req.credential) != std::string::npos) found = true;
          if (!found) {
            violations.push_back(
                {cand.id, req,
                 cand.credentials.empty()
                     ? std::string("NotStated")
                     : "no credential matching '" + req.credential + "'"});
          }
          break;
        }
      }
    }
    if (violations.empty()) {
      outcome.passed.push_back(cand.id);
    } else {
      for (Rejection& r : violations) outcome.rejected.push_back(std::move(r));
    }
  }
  return outcome;
}

}  // namespace matchforge::filtering
