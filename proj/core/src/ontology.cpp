#include "matchforge/ontology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "matchforge/error.hpp"

namespace matchforge::ontology {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string fold_ascii(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c;
  return out;
}

// Decode UTF-8 into code points; stray bytes pass through as Latin-1.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if ((c & 0x80u) == 0) {
      len = 1;
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
      out.push_back(cp);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(c);
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0u) != 0x80u) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3Fu);
    }
    if (!valid) {
      out.push_back(c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

const char* kind_name(ConceptKind k) {
  switch (k) {
    case ConceptKind::Occupation: return "Occupation";
    case ConceptKind::Skill: return "Skill";
    case ConceptKind::Qualification: return "Qualification";
  }
  return "Skill";
}

ConceptKind kind_from_name(std::string_view name) {
  if (name == "Occupation") return ConceptKind::Occupation;
  if (name == "Skill") return ConceptKind::Skill;
  if (name == "Qualification") return ConceptKind::Qualification;
  raise(Errc::ParseError, "unknown concept kind '" + std::string(name) + "'");
}

const char* relation_name(SkillRelation::Kind k) {
  switch (k) {
    case SkillRelation::Kind::Identical: return "Identical";
    case SkillRelation::Kind::NarrowerThan: return "NarrowerThan";
    case SkillRelation::Kind::BroaderThan: return "BroaderThan";
    case SkillRelation::Kind::SharedAncestor: return "SharedAncestor";
    case SkillRelation::Kind::Unrelated: return "Unrelated";
  }
  return "Unrelated";
}

double jaro_winkler(std::string_view a_bytes, std::string_view b_bytes) {
  if (a_bytes == b_bytes) return 1.0;
  const std::vector<char32_t> a = decode_utf8(a_bytes);
  const std::vector<char32_t> b = decode_utf8(b_bytes);
  const std::size_t la = a.size(), lb = b.size();
  if (la == 0 || lb == 0) return 0.0;

  const std::size_t window = std::max(la, lb) / 2 == 0 ? 0 : std::max(la, lb) / 2 - 1;
  std::vector<bool> a_matched(la, false), b_matched(lb, false);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < la; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(i + window + 1, lb);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_matched[j] && a[i] == b[j]) {
        a_matched[i] = true;
        b_matched[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  double transpositions = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < la; ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[k]) ++k;
    if (a[i] != b[k]) transpositions += 1.0;
    ++k;
  }
  transpositions /= 2.0;

  const double m = static_cast<double>(matches);
  const double jaro = (m / static_cast<double>(la) + m / static_cast<double>(lb) +
                       (m - transpositions) / m) /
                      3.0;

  std::size_t prefix = 0;
  for (std::size_t i = 0; i < std::min({la, lb, std::size_t{4}}); ++i) {
    if (a[i] != b[i]) break;
    ++prefix;
  }
  return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

SkillGraph SkillGraph::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_graph(in);
}

SkillGraph SkillGraph::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ParseError, "cannot open ontology file " + path.string());
  return load_graph(in);
}

SkillGraph SkillGraph::load_graph(std::istream& in) {
  SkillGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::vector<std::string> fields = split(sv, '\t');
    if (fields.size() < 2)
      raise(Errc::ParseError, "ontology line " + std::to_string(line_no) +
                                  ": expected at least uri and kind");
    Concept c;
    c.uri = std::string(trim(fields[0]));
    c.kind = kind_from_name(trim(fields[1]));
    for (std::size_t f = 2; f < fields.size(); ++f) {
      std::string_view field = trim(fields[f]);
      if (field.empty()) continue;
      const std::size_t eq = field.find('=');
      if (eq == std::string_view::npos)
        raise(Errc::ParseError, "ontology line " + std::to_string(line_no) +
                                    ": field without '=': " + std::string(field));
      const std::string key{field.substr(0, eq)};
      const std::string value{field.substr(eq + 1)};
      if (key == "broader" || key == "essential" || key == "optional") {
        auto& target = key == "broader" ? c.broader
                       : key == "essential" ? c.essential_skills
                                            : c.optional_skills;
        for (const std::string& uri : split(value, ',')) {
          const std::string_view t = trim(uri);
          if (!t.empty()) target.emplace_back(t);
        }
      } else if (key.rfind("desc:", 0) == 0) {
        c.description[key.substr(5)] = value;
      } else {
        LabelSet& ls = c.labels[key];
        bool first = true;
        for (const std::string& raw : split(value, '|')) {
          std::string_view lab = trim(raw);
          if (lab.empty()) continue;
          if (lab.front() == '~') {
            lab.remove_prefix(1);
            ls.hidden.emplace_back(lab);
          } else if (first) {
            ls.preferred = std::string(lab);
            first = false;
          } else {
            ls.alternatives.emplace_back(lab);
          }
        }
      }
    }
    if (g.index_.count(c.uri))
      raise(Errc::DuplicateUri, "uri defined twice: " + c.uri);
    g.index_[c.uri] = g.concepts_.size();
    g.concepts_.push_back(std::move(c));
  }
  g.validate_and_index();
  return g;
}

void SkillGraph::validate_and_index() {
  const std::size_t n = concepts_.size();
  broader_adj_.assign(n, {});
  narrower_adj_.assign(n, {});

  for (std::size_t i = 0; i < n; ++i) {
    const Concept& c = concepts_[i];
    for (const std::string& b : c.broader) {
      auto it = index_.find(b);
      if (it == index_.end())
        raise(Errc::DanglingUri, c.uri + " has broader edge to undefined " + b);
      broader_adj_[i].push_back(it->second);
      narrower_adj_[it->second].push_back(i);
    }
    for (const std::string& s : c.essential_skills) {
      auto it = index_.find(s);
      if (it == index_.end())
        raise(Errc::DanglingUri, c.uri + " lists undefined essential skill " + s);
      if (concepts_[it->second].kind != ConceptKind::Skill)
        raise(Errc::InvalidReference, c.uri + " essential skill " + s + " is not a Skill");
    }
    for (const std::string& s : c.optional_skills) {
      auto it = index_.find(s);
      if (it == index_.end())
        raise(Errc::DanglingUri, c.uri + " lists undefined optional skill " + s);
      if (concepts_[it->second].kind != ConceptKind::Skill)
        raise(Errc::InvalidReference, c.uri + " optional skill " + s + " is not a Skill");
    }
  }

  // Kahn's algorithm over broader edges; leftovers mean a cycle.
  std::vector<std::size_t> out_degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) out_degree[i] = broader_adj_[i].size();
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (out_degree[i] == 0) ready.push_back(i);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.front();
    ready.pop_front();
    ++visited;
    for (std::size_t v : narrower_adj_[u]) {
      if (--out_degree[v] == 0) ready.push_back(v);
    }
  }
  if (visited != n) {
    std::string member;
    for (std::size_t i = 0; i < n; ++i)
      if (out_degree[i] != 0) {
        member = concepts_[i].uri;
        break;
      }
    raise(Errc::CycleDetected, "broader edges form a cycle through " + member);
  }

  uri_order_.clear();
  uri_order_.reserve(n);
  for (const Concept& c : concepts_) uri_order_.push_back(c.uri);
  std::sort(uri_order_.begin(), uri_order_.end());

  exact_index_.clear();
  label_index_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [lang, ls] : concepts_[i].labels) {
      auto add = [&](const std::string& label) {
        if (label.empty()) return;
        exact_index_[lang][fold_ascii(label)].push_back(i);
        label_index_[lang].emplace_back(label, i);
      };
      add(ls.preferred);
      for (const std::string& l : ls.alternatives) add(l);
      for (const std::string& l : ls.hidden) add(l);
    }
  }
}

const Concept& SkillGraph::concept(const std::string& uri) const {
  auto it = index_.find(uri);
  if (it == index_.end()) raise(Errc::UnknownUri, uri);
  return concepts_[it->second];
}

std::vector<std::string> SkillGraph::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, idx] : label_index_) out.push_back(lang);
  return out;
}

std::vector<LabelHit> SkillGraph::resolve_label(const std::string& text,
                                                const std::string& lang,
                                                double threshold) const {
  auto lang_it = label_index_.find(lang);
  if (lang_it == label_index_.end())
    raise(Errc::UnknownLanguage, "no labels indexed for language '" + lang + "'");

  std::unordered_map<std::size_t, double> best;
  auto exact_it = exact_index_.find(lang);
  if (exact_it != exact_index_.end()) {
    auto hit = exact_it->second.find(fold_ascii(text));
    if (hit != exact_it->second.end())
      for (std::size_t idx : hit->second) best[idx] = 1.0;
  }
  for (const auto& [label, idx] : lang_it->second) {
    if (best.count(idx) && best[idx] == 1.0) continue;
    const double score = jaro_winkler(text, label);
    if (score < threshold) continue;
    auto [it, inserted] = best.emplace(idx, score);
    if (!inserted && score > it->second) it->second = score;
  }

  std::vector<LabelHit> hits;
  hits.reserve(best.size());
  for (const auto& [idx, score] : best) hits.push_back({concepts_[idx].uri, score});
  std::sort(hits.begin(), hits.end(), [](const LabelHit& a, const LabelHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uri < b.uri;
  });
  return hits;
}

std::unordered_map<std::string, int> SkillGraph::ancestor_depths(std::size_t start) const {
  std::unordered_map<std::string, int> depth;
  std::deque<std::size_t> queue{start};
  std::unordered_map<std::size_t, int> d{{start, 0}};
  depth[concepts_[start].uri] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : broader_adj_[u]) {
      if (d.count(v)) continue;
      d[v] = d[u] + 1;
      depth[concepts_[v].uri] = d[v];
      queue.push_back(v);
    }
  }
  return depth;
}

SkillRelation SkillGraph::relate_skills(const std::string& a, const std::string& b) const {
  auto ia = index_.find(a);
  if (ia == index_.end()) raise(Errc::UnknownUri, a);
  auto ib = index_.find(b);
  if (ib == index_.end()) raise(Errc::UnknownUri, b);

  if (a == b) return {SkillRelation::Kind::Identical, 0, 0};

  const auto up_a = ancestor_depths(ia->second);
  if (auto it = up_a.find(b); it != up_a.end())
    return {SkillRelation::Kind::NarrowerThan, it->second, 0};

  const auto up_b = ancestor_depths(ib->second);
  if (auto it = up_b.find(a); it != up_b.end())
    return {SkillRelation::Kind::BroaderThan, it->second, 0};

  int best = std::numeric_limits<int>::max();
  for (const auto& [uri, da] : up_a) {
    auto it = up_b.find(uri);
    if (it != up_b.end()) best = std::min(best, da + it->second);
  }
  if (best != std::numeric_limits<int>::max())
    return {SkillRelation::Kind::SharedAncestor, 0, best};
  return {SkillRelation::Kind::Unrelated, 0, 0};
}

double SkillGraph::path_similarity(const std::string& a, const std::string& b) const {
  auto ia = index_.find(a);
  if (ia == index_.end()) raise(Errc::UnknownUri, a);
  auto ib = index_.find(b);
  if (ib == index_.end()) raise(Errc::UnknownUri, b);
  if (ia->second == ib->second) return 1.0;

  // BFS over the undirected hierarchy.
  std::vector<int> dist(concepts_.size(), -1);
  std::deque<std::size_t> queue{ia->second};
  dist[ia->second] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == ib->second) break;
    for (const auto* adj : {&broader_adj_[u], &narrower_adj_[u]}) {
      for (std::size_t v : *adj) {
        if (dist[v] != -1) continue;
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  if (dist[ib->second] < 0) return 0.0;
  return 1.0 / (1.0 + static_cast<double>(dist[ib->second]));
}

}  // namespace matchforge::ontology
