#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "matchforge/corpus.hpp"
#include "matchforge/matchnet.hpp"
#include "matchforge/metrics.hpp"
#include "matchforge/textpipe.hpp"

namespace matchforge::ranker {

enum class Provenance { NeuralHead, CosineBaseline };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(std::string_view name);

struct RankingEntry {
  std::string candidate_id;
  double score = 0.0;  // p_match or cosine similarity
  int rank = 0;        // 1-based, no gaps
  Provenance provenance = Provenance::NeuralHead;
};

// Scores every candidate (all already past filtering), sorts descending,
// breaks ties by candidate id ascending.
std::vector<RankingEntry> rank_candidates(const corpus::Document& job,
                                          const std::vector<corpus::Document>& candidates,
                                          const matchnet::ModelBundle& model,
                                          const textpipe::ChunkPlan& plan,
                                          Provenance provenance);

struct RankingEvaluation {
  std::map<std::string, double> means;  // "ndcg@3", "ap", "mrr"
  std::map<std::string, std::map<std::string, double>> per_job;
  std::size_t jobs_skipped = 0;  // jobs with no gold matches
};

// NDCG@k / AP / MRR over jobs, binary gold relevance. Jobs without any gold
// match are skipped and counted. A job whose gold matches were all filtered
// out of the ranking contributes reciprocal rank 0.
RankingEvaluation evaluate_ranking(
    const std::map<std::string, std::vector<RankingEntry>>& rankings,
    const std::map<std::string, std::set<std::string>>& gold_matches,
    const std::vector<std::size_t>& k_values);

// TSV: job_id \t rank \t candidate_id \t score \t provenance
void write_rankings_tsv(std::ostream& out,
                        const std::map<std::string, std::vector<RankingEntry>>& rankings);
std::map<std::string, std::vector<RankingEntry>> read_rankings_tsv(std::istream& in);

}  // namespace matchforge::ranker
