#include "fimgnn/config.hpp"

#include <stdexcept>
#include <string>

namespace fimgnn {

std::string_view to_string(EncoderPolicy policy) noexcept {
  switch (policy) {
    case EncoderPolicy::Auto: return "auto";
    case EncoderPolicy::ForceGcn: return "force-gcn";
    case EncoderPolicy::ForceGat: return "force-gat";
  }
  return "auto";
}

EncoderPolicy parse_encoder_policy(std::string_view text) {
  if (text == "auto") return EncoderPolicy::Auto;
  if (text == "force-gcn") return EncoderPolicy::ForceGcn;
  if (text == "force-gat") return EncoderPolicy::ForceGat;
  throw std::invalid_argument("unknown encoder policy '" + std::string(text) + "'");
}

OutputActivation parse_output_activation(std::string_view text) {
  if (text == "linear") return OutputActivation::Linear;
  if (text == "softmax") return OutputActivation::Softmax;
  throw std::invalid_argument("unknown GCN output activation '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (e_rounds < 1) fail("e_rounds must be at least 1");
  if (t_epochs < 1) fail("t_epochs must be at least 1");
  if (!(gamma >= 0.0)) fail("gamma must be non-negative");
  if (!(beta >= 0.0 && beta < 1.0)) fail("beta must lie in [0,1)");
  if (!(pretrain_lr > 0.0) || !(train_lr > 0.0)) fail("learning rates must be positive");
  if (gcn_dims.hidden == 0 || gcn_dims.embed == 0) fail("gcn dims must be positive");
  if (gat_dims.hidden == 0 || gat_dims.embed == 0) fail("gat dims must be positive");
  if (knn_k == 0) fail("knn_k must be positive");
  if (kmeans.restarts == 0) fail("kmeans restarts must be positive");
  if (threads == 0) fail("threads must be positive");
}

EncoderKind RunConfig::encoder_for(double missing_rate) const noexcept {
  switch (encoder) {
    case EncoderPolicy::ForceGcn: return EncoderKind::Gcn;
    case EncoderPolicy::ForceGat: return EncoderKind::Gat;
    case EncoderPolicy::Auto: break;
  }
  return missing_rate <= beta ? EncoderKind::Gcn : EncoderKind::Gat;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["e_rounds"] = c.e_rounds;
  j["t_epochs"] = c.t_epochs;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["num_clusters"] = c.num_clusters;
  j["seed"] = c.seed;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["pretrain_lr"] = c.pretrain_lr;
  j["train_lr"] = c.train_lr;
  j["gcn_dims"] = {c.gcn_dims.hidden, c.gcn_dims.embed};
  j["gat_dims"] = {c.gat_dims.hidden, c.gat_dims.embed};
  j["encoder"] = std::string(to_string(c.encoder));
  j["gcn_output"] = std::string(to_string(c.gcn_output));
  j["knn_k"] = c.knn_k;
  j["nmi"] = c.nmi == NmiNormalization::Geometric ? "sqrt" : "arithmetic";
  j["standardize_views"] = c.standardize_views;
  j["kmeans"] = {{"restarts", c.kmeans.restarts},
                 {"max_iter", c.kmeans.max_iter},
                 {"tol", c.kmeans.tol}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.e_rounds = j.at("e_rounds").get<std::size_t>();
  c.t_epochs = j.at("t_epochs").get<std::size_t>();
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.num_clusters = j.at("num_clusters").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.pretrain_epochs = j.at("pretrain_epochs").get<std::size_t>();
  c.pretrain_lr = j.at("pretrain_lr").get<double>();
  c.train_lr = j.at("train_lr").get<double>();
  c.gcn_dims = {j.at("gcn_dims").at(0).get<std::size_t>(), j.at("gcn_dims").at(1).get<std::size_t>()};
  c.gat_dims = {j.at("gat_dims").at(0).get<std::size_t>(), j.at("gat_dims").at(1).get<std::size_t>()};
  c.encoder = parse_encoder_policy(j.at("encoder").get<std::string>());
  c.gcn_output = parse_output_activation(j.at("gcn_output").get<std::string>());
  c.knn_k = j.at("knn_k").get<std::size_t>();
  c.nmi = j.at("nmi").get<std::string>() == "arithmetic" ? NmiNormalization::Arithmetic
                                                         : NmiNormalization::Geometric;
  c.standardize_views = j.value("standardize_views", false);
  c.kmeans.restarts = j.at("kmeans").at("restarts").get<std::size_t>();
  c.kmeans.max_iter = j.at("kmeans").at("max_iter").get<std::size_t>();
  c.kmeans.tol = j.at("kmeans").at("tol").get<double>();
  return c;
}

}  // namespace fimgnn
