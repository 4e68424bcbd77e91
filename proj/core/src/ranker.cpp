#include "matchforge/ranker.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include "matchforge/embed.hpp"
#include "matchforge/error.hpp"

namespace matchforge::ranker {

const char* provenance_name(Provenance p) {
  return p == Provenance::NeuralHead ? "neural" : "cosine";
}

Provenance provenance_from_name(std::string_view name) {
  if (name == "neural") return Provenance::NeuralHead;
  if (name == "cosine") return Provenance::CosineBaseline;
  raise(Errc::InvalidConfig, "unknown ranking provenance '" + std::string(name) + "'");
}

namespace {

embed::Vec doc_embed(const corpus::Document& doc, std::size_t k,
                     const textpipe::ChunkPlan& plan,
                     const embed::EncoderParams& encoder) {
  const textpipe::ChunkResult chunks =
      textpipe::chunk(textpipe::tokenize(doc.text), k, plan.window, plan.overlap);
  std::vector<embed::Vec> embeds;
  embeds.reserve(chunks.chunks.size());
  for (const auto& c : chunks.chunks) embeds.push_back(embed::embed_chunk(c, encoder));
  return embed::doc_embedding(embeds);
}

}  // namespace

std::vector<RankingEntry> rank_candidates(const corpus::Document& job,
                                          const std::vector<corpus::Document>& candidates,
                                          const matchnet::ModelBundle& model,
                                          const textpipe::ChunkPlan& plan,
                                          Provenance provenance) {
  std::vector<RankingEntry> entries;
  entries.reserve(candidates.size());

  if (provenance == Provenance::CosineBaseline) {
    const embed::Vec job_vec = doc_embed(job, plan.k_job, plan, model.encoder);
    for (const corpus::Document& cand : candidates) {
      const embed::Vec cand_vec = doc_embed(cand, plan.k_resume, plan, model.encoder);
      entries.push_back(
          {cand.id, metrics::cosine(job_vec, cand_vec), 0, provenance});
    }
  } else {
    for (const corpus::Document& cand : candidates) {
      const matchnet::Prediction pred =
          matchnet::predict_pair(job, cand, plan, model);
      entries.push_back({cand.id, pred.p_match, 0, provenance});
    }
  }

  std::sort(entries.begin(), entries.end(),
            [](const RankingEntry& a, const RankingEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.candidate_id < b.candidate_id;
            });
  for (std::size_t i = 0; i < entries.size(); ++i)
    entries[i].rank = static_cast<int>(i + 1);
  return entries;
}

RankingEvaluation evaluate_ranking(
    const std::map<std::string, std::vector<RankingEntry>>& rankings,
    const std::map<std::string, std::set<std::string>>& gold_matches,
    const std::vector<std::size_t>& k_values) {
  RankingEvaluation eval;

  std::map<std::string, std::vector<double>> collected;
  for (const auto& [job_id, entries] : rankings) {
    auto gold_it = gold_matches.find(job_id);
    const std::set<std::string>* gold =
        gold_it == gold_matches.end() ? nullptr : &gold_it->second;
    if (!gold || gold->empty()) {
      ++eval.jobs_skipped;
      continue;
    }

    metrics::RankedList list;
    list.total_relevant = gold->size();
    list.grades.reserve(entries.size());
    std::size_t first_relevant = 0;
    for (const RankingEntry& e : entries) {
      const bool relevant = gold->count(e.candidate_id) != 0;
      list.grades.push_back(relevant ? 1.0 : 0.0);
      if (relevant && first_relevant == 0)
        first_relevant = static_cast<std::size_t>(e.rank);
    }

    std::map<std::string, double>& job_metrics = eval.per_job[job_id];
    for (std::size_t k : k_values) {
      const std::string name = "ndcg@" + std::to_string(k);
      const double value = metrics::ndcg(list, std::min(k, list.grades.size()));
      job_metrics[name] = value;
      collected[name].push_back(value);
    }
    const double ap = metrics::average_precision(list, list.grades.size());
    job_metrics["ap"] = ap;
    collected["ap"].push_back(ap);
    const double rr =
        first_relevant == 0
            ? 0.0
            : metrics::mrr(std::vector<std::size_t>{first_relevant});
    job_metrics["mrr"] = rr;
    collected["mrr"].push_back(rr);
  }

  for (const auto& [name, values] : collected) {
    double sum = 0.0;
    for (double v : values) sum += v;
    eval.means[name] = sum / static_cast<double>(values.size());
  }
  return eval;
}

void write_rankings_tsv(std::ostream& out,
                        const std::map<std::string, std::vector<RankingEntry>>& rankings) {
  char buf[64];
  for (const auto& [job_id, entries] : rankings) {
    for (const RankingEntry& e : entries) {
      std::snprintf(buf, sizeof buf, "%.17g", e.score);
      out << job_id << '\t' << e.rank << '\t' << e.candidate_id << '\t' << buf
          << '\t' << provenance_name(e.provenance) << '\n';
    }
  }
}

std::map<std::string, std::vector<RankingEntry>> read_rankings_tsv(std::istream& in) {
  std::map<std::string, std::vector<RankingEntry>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 5)
      raise(Errc::ParseError,
            "rankings line " + std::to_string(line_no) + ": expected 5 fields");
    RankingEntry e;
    e.rank = std::stoi(fields[1]);
    e.candidate_id = fields[2];
    e.score = std::stod(fields[3]);
    e.provenance = provenance_from_name(fields[4]);
    out[fields[0]].push_back(std::move(e));
  }
  for (auto& [job, entries] : out)
    std::sort(entries.begin(), entries.end(),
              [](const RankingEntry& a, const RankingEntry& b) { return a.rank < b.rank; });
  return out;
}

}  // namespace matchforge::ranker
