#include "fimgnn/report.hpp"

namespace fimgnn {

namespace {

nlohmann::ordered_json scores_json(const std::optional<ClusterScores>& s) {
  if (!s) return nullptr;
  return {{"acc", s->acc}, {"nmi", s->nmi}, {"ari", s->ari}};
}

std::optional<ClusterScores> scores_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return ClusterScores{j.at("acc").get<double>(), j.at("nmi").get<double>(), j.at("ari").get<double>()};
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["dataset"] = r.dataset;
  j["num_samples"] = r.num_samples;
  j["num_views"] = r.num_views;
  j["num_clusters"] = r.num_clusters;
  j["overlap_size"] = r.overlap_size;
  j["seed"] = r.seed;
  j["config"] = r.config;
  j["experiment"] = r.experiment;
  j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& round : r.rounds) {
    nlohmann::ordered_json rj;
    rj["round"] = round.round;
    rj["clients"] = nlohmann::ordered_json::array();
    for (const auto& c : round.clients) {
      nlohmann::ordered_json cj;
      cj["view_id"] = c.view_id;
      cj["encoder"] = c.encoder;
      cj["missing_rate"] = c.missing_rate;
      cj["reconstruction_loss"] = c.reconstruction_loss;
      cj["clustering_loss"] = c.clustering_loss ? nlohmann::ordered_json(*c.clustering_loss) : nullptr;
      cj["weight"] = c.weight;
      rj["clients"].push_back(std::move(cj));
    }
    rj["server_inertia"] = round.server_inertia;
    rj["metrics"] = scores_json(round.scores);
    j["rounds"].push_back(std::move(rj));
  }
  j["final"] = scores_json(r.final_scores);
  return j;
}

MetricsReport metrics_report_from_json(const nlohmann::ordered_json& j) {
  MetricsReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.num_samples = j.at("num_samples").get<std::size_t>();
  r.num_views = j.at("num_views").get<std::size_t>();
  r.num_clusters = j.at("num_clusters").get<std::size_t>();
  r.overlap_size = j.at("overlap_size").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  r.experiment = j.at("experiment");
  for (const auto& rj : j.at("rounds")) {
    RoundReport round;
    round.round = rj.at("round").get<std::size_t>();
    for (const auto& cj : rj.at("clients")) {
      ClientRoundReport c;
      c.view_id = cj.at("view_id").get<std::size_t>();
      c.encoder = cj.at("encoder").get<std::string>();
      c.missing_rate = cj.at("missing_rate").get<double>();
      c.reconstruction_loss = cj.at("reconstruction_loss").get<double>();
      if (!cj.at("clustering_loss").is_null()) c.clustering_loss = cj.at("clustering_loss").get<double>();
      c.weight = cj.at("weight").get<double>();
      round.clients.push_back(std::move(c));
    }
    round.server_inertia = rj.at("server_inertia").get<double>();
    round.scores = scores_from(rj.at("metrics"));
    r.rounds.push_back(std::move(round));
  }
  r.final_scores = scores_from(j.at("final"));
  return r;
}

std::string validate_report_json(const nlohmann::json& j) {
  auto need = [&](const nlohmann::json& obj, const char* key, auto pred, const char* type,
                  const std::string& where) -> std::string {
    if (!obj.is_object() || !obj.contains(key)) return where + ": missing '" + key + "'";
    if (!pred(obj.at(key))) return where + ": '" + key + "' must be " + type;
    return {};
  };
  const auto is_uint = [](const nlohmann::json& v) { return v.is_number_unsigned(); };
  const auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
  const auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
  const auto is_obj = [](const nlohmann::json& v) { return v.is_object(); };
  const auto is_arr = [](const nlohmann::json& v) { return v.is_array(); };
  const auto scores_ok = [&](const nlohmann::json& v, const std::string& where) -> std::string {
    if (v.is_null()) return {};
    for (const char* k : {"acc", "nmi", "ari"})
      if (auto e = need(v, k, is_num, "a number", where); !e.empty()) return e;
    return {};
  };

  for (auto [key, pred, type] : {std::tuple{"schema_version", +[](const nlohmann::json& v) { return v.is_number_integer(); }, "an integer"}}) {
    if (auto e = need(j, key, pred, type, "report"); !e.empty()) return e;
  }
  if (j.at("schema_version").get<int>() != kReportSchemaVersion) return "report: unsupported schema_version";
  if (auto e = need(j, "dataset", is_str, "a string", "report"); !e.empty()) return e;
  for (const char* k : {"num_samples", "num_views", "num_clusters", "overlap_size", "seed"})
    if (auto e = need(j, k, is_uint, "a non-negative integer", "report"); !e.empty()) return e;
  if (auto e = need(j, "config", is_obj, "an object", "report"); !e.empty()) return e;
  if (auto e = need(j, "experiment", is_obj, "an object", "report"); !e.empty()) return e;
  if (auto e = need(j, "rounds", is_arr, "an array", "report"); !e.empty()) return e;
  if (!j.contains("final")) return "report: missing 'final'";
  if (auto e = scores_ok(j.at("final"), "final"); !e.empty()) return e;

  std::size_t expected = 1;
  for (const auto& r : j.at("rounds")) {
    const std::string where = "round " + std::to_string(expected);
    if (auto e = need(r, "round", is_uint, "a non-negative integer", where); !e.empty()) return e;
    if (r.at("round").get<std::size_t>() != expected) return where + ": rounds are not contiguous";
    if (auto e = need(r, "server_inertia", is_num, "a number", where); !e.empty()) return e;
    if (auto e = need(r, "clients", is_arr, "an array", where); !e.empty()) return e;
    if (!r.contains("metrics")) return where + ": missing 'metrics'";
    if (auto e = scores_ok(r.at("metrics"), where); !e.empty()) return e;
    for (const auto& c : r.at("clients")) {
      if (auto e = need(c, "view_id", is_uint, "a non-negative integer", where); !e.empty()) return e;
      if (auto e = need(c, "encoder", is_str, "a string", where); !e.empty()) return e;
      for (const char* k : {"missing_rate", "reconstruction_loss", "weight"})
        if (auto e = need(c, k, is_num, "a number", where); !e.empty()) return e;
      if (!c.contains("clustering_loss")) return where + ": missing 'clustering_loss'";
    }
    ++expected;
  }
  if (j.at("config").contains("e_rounds") &&
      j.at("config").at("e_rounds").get<std::size_t>() != j.at("rounds").size()) {
    return "report: round count differs from config.e_rounds";
  }
  return {};
}

}  // namespace fimgnn
