#include <cmath>
#include <string>

#include "fimgnn/client.hpp"
#include "fimgnn/errors.hpp"

namespace fimgnn {

EncoderKind select_encoder(double missing_rate, double beta) noexcept {
  return missing_rate <= beta ? EncoderKind::Gcn : EncoderKind::Gat;
}

Matrix soft_assign(const Matrix& z, const Matrix& centers) {
  if (z.cols() != centers.cols()) {
    throw ShapeError("soft_assign: embedding dim " + std::to_string(z.cols()) +
                     " != center dim " + std::to_string(centers.cols()));
  }
  if (centers.rows() == 0) throw ShapeError("soft_assign: no centers");
  Matrix q(z.rows(), centers.rows());
  for (std::size_t j = 0; j < z.rows(); ++j) {
    auto row = q.row(j);
    double total = 0.0;
    for (std::size_t k = 0; k < centers.rows(); ++k) {
      row[k] = 1.0 / (1.0 + squared_distance(z.row(j), centers.row(k)));
      total += row[k];
    }
    for (double& v : row) v /= total;
  }
  return q;
}

double kl_loss(const Matrix& p, const Matrix& q) {
  require_same_shape(p, q, "kl_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pv = p.data()[i];
    if (pv == 0.0) continue;
    const double qv = q.data()[i];
    if (!(qv > 0.0)) throw NumericalError("kl_loss: q is zero where p is positive");
    total += pv * (std::log(pv) - std::log(qv));
  }
  return total;
}

double clustering_loss(const Matrix& p, const Matrix& z, const Matrix& centers, Matrix* grad_z,
                       Matrix* grad_centers) {
  const Matrix q = soft_assign(z, centers);
  require_same_shape(p, q, "clustering_loss");
  const double loss = kl_loss(p, q);
  if (!grad_z && !grad_centers) return loss;

  const std::size_t n = z.rows(), k_count = centers.rows(), d = z.cols();
  Matrix gz(n, d), gu(k_count, d);
  for (std::size_t j = 0; j < n; ++j) {
    double p_total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) p_total += p(j, k);
    auto zj = z.row(j);
    auto gzj = gz.row(j);
    for (std::size_t k = 0; k < k_count; ++k) {
      auto uk = centers.row(k);
      const double kernel = 1.0 / (1.0 + squared_distance(zj, uk));
      // dL/d(dist_jk); dist_jk = |z_j - u_k|^2
      const double coeff = 2.0 * kernel * (p(j, k) - p_total * q(j, k));
      auto guk = gu.row(k);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = coeff * (zj[c] - uk[c]);
        gzj[c] += diff;
        guk[c] -= diff;
      }
    }
  }
  if (grad_z) *grad_z = std::move(gz);
  if (grad_centers) *grad_centers = std::move(gu);
  return loss;
}

EncoderKind kind_of(const Encoder& enc) noexcept {
  return std::holds_alternative<GcnEncoder>(enc) ? EncoderKind::Gcn : EncoderKind::Gat;
}

std::vector<Matrix*> encoder_parameters(Encoder& enc) {
  if (auto* g = std::get_if<GcnEncoder>(&enc)) return {&g->w0, &g->w1};
  auto& a = std::get<GatEncoder>(enc);
  return {&a.w0, &a.a0, &a.w1, &a.a1};
}

std::vector<const Matrix*> encoder_parameters(const Encoder& enc) {
  if (const auto* g = std::get_if<GcnEncoder>(&enc)) return {&g->w0, &g->w1};
  const auto& a = std::get<GatEncoder>(enc);
  return {&a.w0, &a.a0, &a.w1, &a.a1};
}

Matrix encode(const Encoder& enc, const GraphBatch& graph) {
  if (const auto* g = std::get_if<GcnEncoder>(&enc)) return gcn_forward(*g, graph);
  return gat_forward(std::get<GatEncoder>(enc), graph);
}

LossBreakdown total_loss(const Encoder& enc, const GraphBatch& graph, const Matrix& centers,
                         const Matrix* pseudo_labels, double gamma, LossGradients* grads) {
  GcnCache gcn_cache;
  GatCache gat_cache;
  const auto* gcn = std::get_if<GcnEncoder>(&enc);
  const auto* gat = std::get_if<GatEncoder>(&enc);
  const Matrix z = gcn ? gcn_forward(*gcn, graph, &gcn_cache) : gat_forward(*gat, graph, &gat_cache);

  LossBreakdown loss;
  Matrix grad_z;
  loss.reconstruction =
      reconstruction_loss_from_embeddings(graph.neighborhoods, z, grads ? &grad_z : nullptr);

  Matrix grad_centers(centers.rows(), centers.cols());
  if (pseudo_labels) {
    if (gamma != 0.0 && grads) {
      Matrix gz_cluster;
      loss.clustering = clustering_loss(*pseudo_labels, z, centers, &gz_cluster, &grad_centers);
      gz_cluster *= gamma;
      grad_centers *= gamma;
      grad_z += gz_cluster;
    } else {
      loss.clustering = clustering_loss(*pseudo_labels, z, centers);
    }
  }
  loss.total = gamma != 0.0 ? loss.reconstruction + gamma * loss.clustering : loss.reconstruction;

  if (grads) {
    grads->encoder = gcn ? gcn_backward(*gcn, graph, gcn_cache, grad_z)
                         : gat_backward(*gat, graph, gat_cache, grad_z);
    grads->centers = std::move(grad_centers);
  }
  return loss;
}

}  // namespace fimgnn
