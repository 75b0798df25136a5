#include "fimgnn/federation.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "fimgnn/errors.hpp"
#include "fimgnn/matrix_io.hpp"
#include "fimgnn/metrics.hpp"

namespace fimgnn {

namespace fs = std::filesystem;

RunData prepare_run_data(std::string name, std::span<const Matrix> complete_views,
                         const PresenceMask& mask, std::size_t num_clusters,
                         std::optional<std::vector<std::int64_t>> labels, std::size_t knn_k) {
  if (complete_views.empty()) throw std::invalid_argument("prepare_run_data: no views");
  const std::size_t n = complete_views.front().rows();
  if (labels && labels->size() != n) {
    throw std::invalid_argument("prepare_run_data: " + std::to_string(labels->size()) +
                                " labels for " + std::to_string(n) + " samples");
  }
  RunData data;
  data.name = std::move(name);
  data.num_samples = n;
  data.num_clusters = num_clusters;
  data.views = build_view_datasets(complete_views, mask, knn_k);
  data.labels = std::move(labels);
  return data;
}

std::vector<std::int64_t> final_predict(std::span<const Matrix> assignments,
                                        std::span<const std::vector<std::size_t>> global_ids,
                                        std::size_t num_samples) {
  if (assignments.size() != global_ids.size()) {
    throw std::invalid_argument("final_predict: assignments and id lists differ in count");
  }
  if (assignments.empty()) throw std::invalid_argument("final_predict: no views");
  const std::size_t k = assignments.front().cols();
  Matrix sum(num_samples, k);
  std::vector<std::size_t> count(num_samples, 0);
  for (std::size_t v = 0; v < assignments.size(); ++v) {
    const Matrix& q = assignments[v];
    if (q.cols() != k || q.rows() != global_ids[v].size()) {
      throw ShapeError("final_predict: view " + std::to_string(v) + " shape mismatch");
    }
    for (std::size_t r = 0; r < q.rows(); ++r) {
      const std::size_t j = global_ids[v][r];
      if (j >= num_samples) throw std::out_of_range("final_predict: sample id out of range");
      for (std::size_t c = 0; c < k; ++c) sum(j, c) += q(r, c);
      ++count[j];
    }
  }
  std::vector<std::int64_t> labels(num_samples);
  for (std::size_t j = 0; j < num_samples; ++j) {
    if (count[j] == 0) {
      throw std::invalid_argument("final_predict: sample " + std::to_string(j) +
                                  " is present in no view");
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (sum(j, c) / static_cast<double>(count[j]) > sum(j, best) / static_cast<double>(count[j]))
        best = c;
    }
    labels[j] = static_cast<std::int64_t>(best);
  }
  return labels;
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are rethrown for the lowest i.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string round_tag(std::size_t round) {
  std::ostringstream os;
  os << "round " << round << ": ";
  return os.str();
}

nlohmann::ordered_json shape_json(const Matrix& m) { return {m.rows(), m.cols()}; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string indexed(const std::string& prefix, std::size_t a, const std::string& mid, std::size_t b) {
  return prefix + std::to_string(a) + mid + std::to_string(b) + ".fvm";
}

}  // namespace

struct Federation::State {
  RunData data;
  RunConfig config;
  RunHooks hooks;
  std::vector<Client> clients;
  Server server;
  std::vector<std::size_t> overlap_ids;
  std::uint64_t digest = 0;
  std::size_t completed = 0;
  MetricsReport report;
  std::vector<nlohmann::ordered_json> trace;
  std::vector<std::int64_t> predictions;

  State(RunData d, RunConfig c, RunHooks h)
      : data(std::move(d)),
        config(std::move(c)),
        hooks(std::move(h)),
        server(resolve_k(data, config), config.seed, config.kmeans, config.standardize_views) {}

  static std::size_t resolve_k(const RunData& data, RunConfig& config) {
    config.validate();
    if (config.num_clusters == 0) config.num_clusters = data.num_clusters;
    if (data.num_clusters != 0 && config.num_clusters != data.num_clusters) {
      throw std::invalid_argument("config: num_clusters " + std::to_string(config.num_clusters) +
                                  " differs from the dataset's " +
                                  std::to_string(data.num_clusters));
    }
    if (config.num_clusters < 1) throw std::invalid_argument("config: num_clusters must be positive");
    return config.num_clusters;
  }

  void build() {
    if (data.views.empty()) throw std::invalid_argument("federation: no views");
    for (std::size_t v = 0; v < data.views.size(); ++v) {
      if (data.views[v].view_id != v) throw std::invalid_argument("federation: view ids must be 0..m-1");
    }
    const ViewDataset& first = data.views.front();
    for (std::size_t r : first.overlap_rows) overlap_ids.push_back(first.global_ids[r]);
    if (overlap_ids.empty()) {
      throw ProtocolError("no sample is present in every view; the overlap set is empty");
    }
    if (overlap_ids.size() < config.num_clusters) {
      throw ProtocolError("overlap set has " + std::to_string(overlap_ids.size()) +
                          " samples, fewer than the " + std::to_string(config.num_clusters) +
                          " clusters");
    }
    digest = overlap_digest(overlap_ids);

    for (const ViewDataset& view : data.views) {
      ClientOptions o;
      o.kind = config.encoder_for(view.missing_rate);
      const LayerDims dims = o.kind == EncoderKind::Gcn ? config.gcn_dims : config.gat_dims;
      o.hidden_dim = dims.hidden;
      o.embed_dim = dims.embed;
      o.gcn_output = config.gcn_output;
      o.num_clusters = config.num_clusters;
      o.seed = config.seed;
      o.pretrain_lr = config.pretrain_lr;
      o.train_lr = config.train_lr;
      o.kmeans = config.kmeans;
      clients.emplace_back(view, o);
    }

    report.dataset = data.name;
    report.num_samples = data.num_samples;
    report.num_views = data.views.size();
    report.num_clusters = config.num_clusters;
    report.overlap_size = overlap_ids.size();
    report.seed = config.seed;
    report.config = to_json(config);
  }

  ClientUpdate make_update(std::size_t round, const Client& c, Matrix z, Matrix centers) const {
    ClientUpdate u;
    u.round = round;
    u.view_id = c.view_id();
    u.overlap_digest = digest;
    u.overlap_embeddings = std::move(z);
    u.centers = std::move(centers);
    u.encoder = c.kind();
    u.missing_rate = c.missing_rate();
    return u;
  }

  std::vector<ClientUpdate> client_phase(std::size_t round) {
    std::vector<ClientUpdate> updates(clients.size());
    const std::size_t threads = config.threads;
    if (round == 1) {
      parallel_for(clients.size(), threads, [&](std::size_t i) {
        Client& c = clients[i];
        const std::vector<double> trace = c.pretrain(config.pretrain_epochs);
        updates[i] = make_update(round, c, c.overlap_embeddings(), c.centers());
        updates[i].reconstruction_loss = trace.back();
      });
    } else {
      const Matrix& p = server.state().pseudo_labels;
      parallel_for(clients.size(), threads, [&](std::size_t i) {
        Client& c = clients[i];
        c.align_to(p);
        LocalRoundResult r = c.local_train_round(p, config.gamma, config.t_epochs);
        updates[i] = make_update(round, c, std::move(r.overlap_embeddings), std::move(r.centers));
        updates[i].reconstruction_loss = r.last_loss.reconstruction;
        updates[i].has_clustering_loss = true;
        updates[i].clustering_loss = r.last_loss.clustering;
      });
    }
    return updates;
  }

  void record_upload(const ClientUpdate& u) {
    nlohmann::ordered_json j;
    j["round"] = u.round;
    j["direction"] = "upload";
    j["view_id"] = u.view_id;
    j["encoder"] = std::string(to_string(u.encoder));
    j["missing_rate"] = u.missing_rate;
    j["overlap_digest"] = u.overlap_digest;
    j["shapes"] = {{"overlap_embeddings", shape_json(u.overlap_embeddings)},
                   {"centers", shape_json(u.centers)}};
    j["loss"] = {{"reconstruction", u.reconstruction_loss},
                 {"clustering", u.has_clustering_loss ? nlohmann::ordered_json(u.clustering_loss)
                                                      : nlohmann::ordered_json(nullptr)}};
    trace.push_back(std::move(j));
  }

  void record_broadcast(const ServerBroadcast& b, const GlobalState& g) {
    nlohmann::ordered_json j;
    j["round"] = b.round;
    j["direction"] = "broadcast";
    j["view_id"] = nullptr;
    j["shapes"] = {{"z", shape_json(g.z)}, {"pseudo_labels", shape_json(b.pseudo_labels)}};
    j["weights"] = g.weights;
    j["permutation"] = b.permutation;
    j["inertia"] = g.inertia;
    trace.push_back(std::move(j));
  }

  // Full-graph Q per client with columns mapped into the label space of P.
  std::vector<Matrix> aligned_assignments(const Matrix& p) const {
    const auto global = argmax_rows(p);
    std::vector<Matrix> out(clients.size());
    parallel_for(clients.size(), config.threads, [&](std::size_t i) {
      const Client& c = clients[i];
      Matrix q = c.full_soft_assignments();
      const auto mine = argmax_rows(c.overlap_rows_of(q));
      out[i] = permute_columns(q, matching_permutation(mine, global, config.num_clusters));
    });
    return out;
  }

  void run_round(std::size_t round, RunResult& result) {
    std::vector<ClientUpdate> updates;
    try {
      updates = client_phase(round);
    } catch (const NumericalError& e) {
      throw NumericalError(round_tag(round) + e.what());
    } catch (const ProtocolError& e) {
      throw ProtocolError(round_tag(round) + e.what());
    }
    for (const auto& u : updates) {
      record_upload(u);
      if (hooks.observer) hooks.observer->on_client_update(u);
    }

    ServerHooks sh;
    if (hooks.on_kmeans) sh.on_kmeans = [&](KMeansResult& r) { hooks.on_kmeans(round, r); };
    if (hooks.on_sharpened) sh.on_sharpened = [&](Matrix& s) { hooks.on_sharpened(round, s); };
    const ServerBroadcast broadcast = server.step(round, updates, sh);
    const GlobalState& g = server.state();
    record_broadcast(broadcast, g);
    if (hooks.observer) hooks.observer->on_broadcast(broadcast, g);
    result.global_embeddings.emplace_back(round, g.z);

    const std::vector<Matrix> q = aligned_assignments(broadcast.pseudo_labels);
    std::vector<std::vector<std::size_t>> ids;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      if (hooks.observer) hooks.observer->on_client_assignments(round, clients[i].view_id(), q[i]);
      ids.push_back(clients[i].data().global_ids);
    }
    predictions = final_predict(q, ids, data.num_samples);
    if (hooks.observer) hooks.observer->on_predictions(round, predictions);

    RoundReport rr;
    rr.round = round;
    for (std::size_t i = 0; i < updates.size(); ++i) {
      const ClientUpdate& u = updates[i];
      ClientRoundReport cr;
      cr.view_id = u.view_id;
      cr.encoder = std::string(to_string(u.encoder));
      cr.missing_rate = u.missing_rate;
      cr.reconstruction_loss = u.reconstruction_loss;
      if (u.has_clustering_loss) cr.clustering_loss = u.clustering_loss;
      cr.weight = g.weights.at(i);
      rr.clients.push_back(std::move(cr));
    }
    rr.server_inertia = g.inertia;
    if (data.labels) rr.scores = evaluate_clustering(*data.labels, predictions, config.nmi);
    report.final_scores = rr.scores;
    report.rounds.push_back(std::move(rr));
    completed = round;
  }
};

Federation::Federation(RunData data, RunConfig config, RunHooks hooks)
    : state_(std::make_unique<State>(std::move(data), std::move(config), std::move(hooks))) {
  state_->build();
}

Federation::~Federation() = default;
Federation::Federation(Federation&&) noexcept = default;
Federation& Federation::operator=(Federation&&) noexcept = default;

std::size_t Federation::completed_rounds() const noexcept { return state_->completed; }
const std::vector<Client>& Federation::clients() const noexcept { return state_->clients; }
const Server& Federation::server() const noexcept { return state_->server; }
const RunConfig& Federation::config() const noexcept { return state_->config; }

RunResult Federation::run(const std::optional<fs::path>& checkpoint_dir) {
  using clock = std::chrono::steady_clock;
  State& s = *state_;
  RunResult result;
  for (std::size_t round = s.completed + 1; round <= s.config.e_rounds; ++round) {
    const auto t0 = clock::now();
    s.run_round(round, result);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    result.round_seconds.emplace_back(round, secs);
    if (round == 1) result.pretrain_seconds = secs;
    if (checkpoint_dir) {
      std::ostringstream name;
      name << "round_" << std::setw(4) << std::setfill('0') << round;
      save_checkpoint(*checkpoint_dir / name.str());
    }
  }
  result.report = s.report;
  result.predictions = s.predictions;
  result.trace = s.trace;
  return result;
}

void Federation::save_checkpoint(const fs::path& dir) const {
  const State& s = *state_;
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["format"] = "fimgnn-checkpoint";
  meta["version"] = 1;
  meta["completed_rounds"] = s.completed;
  meta["num_samples"] = s.data.num_samples;
  meta["overlap_digest"] = s.digest;
  meta["config"] = to_json(s.config);
  meta["clients"] = nlohmann::ordered_json::array();
  for (const Client& c : s.clients) {
    const std::size_t v = c.view_id();
    const auto params = encoder_parameters(c.encoder());
    for (std::size_t i = 0; i < params.size(); ++i)
      save_matrix(dir / indexed("client_", v, "_param_", i), *params[i]);
    save_matrix(dir / ("client_" + std::to_string(v) + "_centers.fvm"), c.centers());
    nlohmann::ordered_json cj;
    cj["view_id"] = v;
    cj["encoder"] = std::string(to_string(c.kind()));
    cj["num_params"] = params.size();
    if (c.has_train_optimizer()) {
      const AdamState& a = c.train_optimizer();
      for (std::size_t i = 0; i < a.num_params(); ++i) {
        save_matrix(dir / indexed("client_", v, "_adam_m_", i), a.first_moment(i));
        save_matrix(dir / indexed("client_", v, "_adam_v_", i), a.second_moment(i));
      }
      cj["adam"] = {{"step", a.step_count()}, {"num_params", a.num_params()}};
    } else {
      cj["adam"] = nullptr;
    }
    meta["clients"].push_back(std::move(cj));
  }
  const GlobalState& g = s.server.state();
  save_matrix(dir / "server_z.fvm", g.z);
  save_matrix(dir / "server_centers.fvm", g.centers);
  save_matrix(dir / "server_soft.fvm", g.soft);
  save_matrix(dir / "server_pseudo_labels.fvm", g.pseudo_labels);
  const auto& prev = s.server.aligner().previous();
  meta["server"] = {{"round", g.round},
                    {"weights", g.weights},
                    {"permutation", g.permutation},
                    {"inertia", g.inertia},
                    {"aligner_previous", prev ? nlohmann::ordered_json(*prev) : nullptr}};
  meta["predictions"] = s.predictions;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  write_text(dir / "report.json", to_json(s.report).dump(2) + "\n");
  std::string trace;
  for (const auto& t : s.trace) trace += t.dump() + "\n";
  write_text(dir / "trace.jsonl", trace);
}

Federation Federation::resume(const fs::path& dir, RunData data, RunHooks hooks, std::size_t threads) {
  const nlohmann::json meta = nlohmann::json::parse(read_text(dir / "meta.json"));
  if (meta.value("format", "") != "fimgnn-checkpoint" || meta.value("version", 0) != 1) {
    throw std::runtime_error(dir.string() + " is not a supported checkpoint");
  }
  RunConfig config = run_config_from_json(meta.at("config"));
  config.threads = threads;
  Federation fed(std::move(data), config, std::move(hooks));
  State& s = *fed.state_;
  if (meta.at("num_samples").get<std::size_t>() != s.data.num_samples ||
      meta.at("overlap_digest").get<std::uint64_t>() != s.digest) {
    throw ProtocolError("checkpoint does not match the supplied dataset");
  }
  const auto& cmeta = meta.at("clients");
  if (cmeta.size() != s.clients.size()) throw ProtocolError("checkpoint client count mismatch");
  for (Client& c : s.clients) {
    const std::size_t v = c.view_id();
    const auto& cj = cmeta.at(v);
    if (cj.at("encoder").get<std::string>() != to_string(c.kind())) {
      throw ProtocolError("checkpoint encoder kind differs for view " + std::to_string(v));
    }
    Encoder enc = c.encoder();
    auto params = encoder_parameters(enc);
    for (std::size_t i = 0; i < params.size(); ++i)
      *params[i] = load_matrix(dir / indexed("client_", v, "_param_", i));
    Matrix centers = load_matrix(dir / ("client_" + std::to_string(v) + "_centers.fvm"));
    std::optional<AdamState> adam;
    if (!cj.at("adam").is_null()) {
      const std::size_t n = cj.at("adam").at("num_params").get<std::size_t>();
      std::vector<const Matrix*> shapes(params.begin(), params.end());
      shapes.push_back(&centers);
      if (n != shapes.size()) throw ProtocolError("checkpoint optimizer size mismatch");
      AdamState a({.lr = config.train_lr}, shapes);
      std::vector<Matrix> first, second;
      for (std::size_t i = 0; i < n; ++i) {
        first.push_back(load_matrix(dir / indexed("client_", v, "_adam_m_", i)));
        second.push_back(load_matrix(dir / indexed("client_", v, "_adam_v_", i)));
      }
      a.restore(cj.at("adam").at("step").get<std::uint64_t>(), std::move(first), std::move(second));
      adam = std::move(a);
    }
    c.restore(std::move(enc), std::move(centers), std::move(adam));
  }

  const auto& sj = meta.at("server");
  GlobalState g;
  g.round = sj.at("round").get<std::size_t>();
  g.weights = sj.at("weights").get<std::vector<double>>();
  g.permutation = sj.at("permutation").get<std::vector<std::size_t>>();
  g.inertia = sj.at("inertia").get<double>();
  g.z = load_matrix(dir / "server_z.fvm");
  g.centers = load_matrix(dir / "server_centers.fvm");
  g.soft = load_matrix(dir / "server_soft.fvm");
  g.pseudo_labels = load_matrix(dir / "server_pseudo_labels.fvm");
  LabelAligner aligner;
  if (!sj.at("aligner_previous").is_null())
    aligner.restore(sj.at("aligner_previous").get<std::vector<std::size_t>>());
  s.server.restore(std::move(g), std::move(aligner));

  s.completed = meta.at("completed_rounds").get<std::size_t>();
  s.predictions = meta.at("predictions").get<std::vector<std::int64_t>>();
  s.report = metrics_report_from_json(nlohmann::ordered_json::parse(read_text(dir / "report.json")));
  std::istringstream trace(read_text(dir / "trace.jsonl"));
  for (std::string line; std::getline(trace, line);) {
    if (!line.empty()) s.trace.push_back(nlohmann::ordered_json::parse(line));
  }
  return fed;
}

}  // namespace fimgnn
