#include "fimgnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "fimgnn/hungarian.hpp"
#include "fimgnn/matrix.hpp"

namespace fimgnn {

namespace {

struct Contingency {
  std::vector<std::vector<double>> counts;  // [truth class][pred cluster]
  std::vector<double> truth_sums;
  std::vector<double> pred_sums;
  double n = 0.0;
};

std::vector<std::size_t> dense_index(std::span<const std::int64_t> labels, std::size_t& count) {
  std::map<std::int64_t, std::size_t> ids;
  for (auto l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  count = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

Contingency contingency(std::span<const std::int64_t> truth, std::span<const std::int64_t> pred) {
  if (truth.size() != pred.size()) {
    throw std::invalid_argument("label length mismatch: " + std::to_string(truth.size()) + " vs " +
                                std::to_string(pred.size()));
  }
  if (truth.empty()) throw std::invalid_argument("empty labelling");
  std::size_t a = 0, b = 0;
  const auto ti = dense_index(truth, a);
  const auto pi = dense_index(pred, b);
  Contingency c;
  c.counts.assign(a, std::vector<double>(b, 0.0));
  c.truth_sums.assign(a, 0.0);
  c.pred_sums.assign(b, 0.0);
  for (std::size_t i = 0; i < ti.size(); ++i) {
    c.counts[ti[i]][pi[i]] += 1.0;
    c.truth_sums[ti[i]] += 1.0;
    c.pred_sums[pi[i]] += 1.0;
  }
  c.n = static_cast<double>(truth.size());
  return c;
}

double entropy(const std::vector<double>& sums, double n) {
  double h = 0.0;
  for (double s : sums)
    if (s > 0.0) h -= (s / n) * std::log(s / n);
  return h;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double clustering_accuracy(std::span<const std::int64_t> truth, std::span<const std::int64_t> pred) {
  const Contingency c = contingency(truth, pred);
  const std::size_t k = std::max(c.truth_sums.size(), c.pred_sums.size());
  Matrix cost(k, k);
  for (std::size_t t = 0; t < c.truth_sums.size(); ++t)
    for (std::size_t p = 0; p < c.pred_sums.size(); ++p) cost(p, t) = -c.counts[t][p];
  const auto assignment = hungarian(cost);
  return -assignment_cost(cost, assignment) / c.n;
}

double normalized_mutual_information(std::span<const std::int64_t> truth,
                                     std::span<const std::int64_t> pred, NmiNormalization norm) {
  const Contingency c = contingency(truth, pred);
  const double h_truth = entropy(c.truth_sums, c.n);
  const double h_pred = entropy(c.pred_sums, c.n);
  if (h_truth == 0.0 && h_pred == 0.0) return 1.0;
  if (h_truth == 0.0 || h_pred == 0.0) return 0.0;

  double mi = 0.0;
  for (std::size_t t = 0; t < c.truth_sums.size(); ++t) {
    for (std::size_t p = 0; p < c.pred_sums.size(); ++p) {
      const double nij = c.counts[t][p];
      if (nij == 0.0) continue;
      mi += (nij / c.n) * std::log(nij * c.n / (c.truth_sums[t] * c.pred_sums[p]));
    }
  }
  const double denom = norm == NmiNormalization::Geometric ? std::sqrt(h_truth * h_pred)
                                                           : 0.5 * (h_truth + h_pred);
  return std::clamp(mi / denom, 0.0, 1.0);
}

double adjusted_rand_index(std::span<const std::int64_t> truth, std::span<const std::int64_t> pred) {
  const Contingency c = contingency(truth, pred);
  if (truth.size() == 1) return 1.0;
  double index = 0.0;
  for (const auto& row : c.counts)
    for (double nij : row) index += comb2(nij);
  double sum_truth = 0.0, sum_pred = 0.0;
  for (double s : c.truth_sums) sum_truth += comb2(s);
  for (double s : c.pred_sums) sum_pred += comb2(s);
  const double expected = sum_truth * sum_pred / comb2(c.n);
  const double max_index = 0.5 * (sum_truth + sum_pred);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

ClusterScores evaluate_clustering(std::span<const std::int64_t> truth,
                                  std::span<const std::int64_t> pred, NmiNormalization norm) {
  return {clustering_accuracy(truth, pred), normalized_mutual_information(truth, pred, norm),
          adjusted_rand_index(truth, pred)};
}

}  // namespace fimgnn
