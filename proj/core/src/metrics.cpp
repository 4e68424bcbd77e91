#include "matchforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "matchforge/error.hpp"

namespace matchforge::metrics {

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

bool is_binary(const std::vector<double>& grades) {
  return std::all_of(grades.begin(), grades.end(),
                     [](double g) { return g == 0.0 || g == 1.0; });
}

double gain(double rel) { return std::exp2(rel) - 1.0; }

double discount(std::size_t rank_1based) {
  return std::log2(static_cast<double>(rank_1based) + 1.0);
}

}  // namespace

ConfusionStats confusion_stats(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);

  ConfusionStats s;
  s.recall = ratio(tp, tp + fn);
  s.tnr = ratio(tn, tn + fp);
  s.fpr = ratio(fp, fp + tn);
  s.precision = ratio(tp, tp + fp);
  s.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  if (s.precision && s.recall) {
    const double p = *s.precision;
    const double r = *s.recall;
    if (p + r > 0.0) s.f1 = 2.0 * p * r / (p + r);
  }
  return s;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    raise(Errc::DimensionMismatch, "scores and labels differ in length");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l != 0 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    raise(Errc::SingleClass, "roc_auc needs both classes present");

  // Mann-Whitney via midranks.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double ndcg(const RankedList& list, std::size_t n) {
  const std::size_t depth = std::min(n, list.grades.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i)
    dcg += gain(list.grades[i]) / discount(i + 1);

  double idcg = 0.0;
  if (is_binary(list.grades)) {
    const std::size_t ideal = std::min(n, list.total_relevant);
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / discount(i + 1);
  } else {
    std::vector<double> ideal = list.grades;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const std::size_t ideal_depth = std::min(n, ideal.size());
    for (std::size_t i = 0; i < ideal_depth; ++i)
      idcg += gain(ideal[i]) / discount(i + 1);
  }
  if (idcg == 0.0) return 0.0;
  return dcg / idcg;
}

double average_precision(const RankedList& list, std::size_t n) {
  if (list.total_relevant == 0)
    raise(Errc::ZeroRelevant, "average_precision over a list with no relevant items");
  const std::size_t depth = std::min(n, list.grades.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (list.grades[i] > 0.0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(list.total_relevant);
}

double mrr(const std::vector<std::size_t>& first_relevant_ranks) {
  if (first_relevant_ranks.empty())
    raise(Errc::EmptyInput, "mrr over an empty rank list");
  double sum = 0.0;
  for (std::size_t rank : first_relevant_ranks) {
    if (rank < 1) throw std::invalid_argument("mrr rank must be >= 1");
    sum += 1.0 / static_cast<double>(rank);
  }
  return sum / static_cast<double>(first_relevant_ranks.size());
}

double tfidf_weight(double tf, std::uint64_t df, std::uint64_t n_docs) {
  if (df < 1 || n_docs < df || tf < 0.0)
    throw std::invalid_argument("tfidf_weight requires tf >= 0 and 1 <= df <= N");
  return tf * std::log10(static_cast<double>(n_docs) / static_cast<double>(df));
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    raise(Errc::DimensionMismatch, "cosine over vectors of different dimension");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) raise(Errc::ZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace matchforge::metrics
