#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace matchforge::metrics {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::uint64_t total() const { return tp + fp + fn + tn; }
};

// A metric whose denominator is zero comes back empty instead of dividing.
struct ConfusionStats {
  std::optional<double> recall;     // TPR = tp / (tp + fn)
  std::optional<double> tnr;        // tn / (tn + fp)
  std::optional<double> fpr;        // fp / (fp + tn)
  std::optional<double> precision;  // tp / (tp + fp)
  std::optional<double> accuracy;   // (tp + tn) / total
  std::optional<double> f1;         // 2*P*TPR / (P + TPR)
};

ConfusionStats confusion_stats(const ConfusionCounts& c);

// F1 straight from precision and recall.
double f1_score(double precision, double recall);

// Relevance grades in rank order plus the total number of relevant items,
// which may exceed the relevant grades present in the list (items the
// ranking never retrieved still count against it).
struct RankedList {
  std::vector<double> grades;
  std::size_t total_relevant = 0;
};

// Probability that a random positive outscores a random negative; tied
// pairs count 0.5. Throws SingleClass unless both labels occur.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// DCG_n = sum (2^rel_i - 1) / log2(i + 1), i starting at 1; NDCG = DCG/IDCG,
// defined as 0 when IDCG is 0. Binary lists place `total_relevant` ones at
// the top of the ideal list; graded lists idealize by sorting.
double ndcg(const RankedList& list, std::size_t n);

// sum P(i) * rel(i) over the top n, divided by total_relevant.
double average_precision(const RankedList& list, std::size_t n);

// Mean of reciprocal first-relevant ranks (1-based).
double mrr(const std::vector<std::size_t>& first_relevant_ranks);

// tf * log10(N / df)
double tfidf_weight(double tf, std::uint64_t df, std::uint64_t n_docs);

double cosine(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace matchforge::metrics
