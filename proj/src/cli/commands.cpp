#include "fimgnn/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fimgnn/errors.hpp"
#include "fimgnn/federation.hpp"
#include "fimgnn/manifest.hpp"
#include "fimgnn/mask.hpp"
#include "fimgnn/matrix_io.hpp"
#include "fimgnn/metrics.hpp"
#include "fimgnn/synthetic.hpp"
#include "fimgnn/view_dataset.hpp"

namespace fimgnn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Thrown for bad flag values; maps to the usage exit code.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(trim(item));
  return parts;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("expected a non-negative integer, got '" + s + "'");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_u64(p));
  return out;
}

LayerDims parse_dims(const std::string& text) {
  const auto v = parse_size_list(text);
  if (v.size() != 2) throw UsageError("layer dims must be 'hidden,embed', got '" + text + "'");
  return {v[0], v[1]};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ojson scores_json(const ClusterScores& s) { return {{"acc", s.acc}, {"nmi", s.nmi}, {"ari", s.ari}}; }

struct SynthArgs {
  std::size_t n = 300;
  std::size_t k = 3;
  std::string dims = "32,24,16";
  double sep = 6.0;
  std::uint64_t seed = 0;
  std::string name;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto dims = parse_size_list(a.dims);
  if (dims.empty()) throw UsageError("--dims needs at least one view");
  const SyntheticData syn = generate_synthetic(a.n, a.k, dims, a.sep, a.seed);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  Manifest m;
  m.name = a.name.empty() ? "synthetic" : a.name;
  m.n_samples = a.n;
  m.n_clusters = a.k;
  for (std::size_t v = 0; v < dims.size(); ++v) {
    const fs::path file = dir / ("view_" + std::to_string(v) + ".fvm");
    save_matrix(file, syn.views[v]);
    m.views.push_back({v, file, dims[v]});
  }
  save_labels(dir / "labels.txt", syn.labels);
  m.labels_path = dir / "labels.txt";
  save_manifest(dir / "manifest.json", m);
  out << (dir / "manifest.json").string() << "\n";
  return kExitOk;
}

struct MaskArgs {
  std::string manifest;
  std::size_t n = 0;
  std::string rates;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  const auto rates = parse_double_list(a.rates);
  std::size_t n = a.n;
  if (!a.manifest.empty()) {
    const Manifest m = load_manifest(a.manifest);
    if (m.views.size() != rates.size()) {
      throw UsageError(std::to_string(rates.size()) + " rates for " + std::to_string(m.views.size()) +
                       " views");
    }
    if (n != 0 && n != m.n_samples) throw UsageError("--n disagrees with the manifest");
    n = m.n_samples;
  }
  if (n == 0) throw UsageError("need --n or --manifest");
  const PresenceMask mask = generate_mask(n, rates, a.seed);
  save_mask_csv(a.out, mask);
  out << a.out << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string manifest;
  std::string masks;
  std::string rates;
  std::optional<std::uint64_t> mask_seed;
  std::string seeds = "0";
  std::size_t threads = 1;
  std::string out;
  std::size_t e_rounds = 10;
  std::size_t t_epochs = 3;
  double beta = 0.1;
  double gamma = 1.0;
  std::string encoder = "auto";
  std::string gcn_output = "linear";
  std::string nmi = "sqrt";
  std::size_t pretrain_epochs = 50;
  double pretrain_lr = 0.005;
  double train_lr = 0.001;
  std::size_t knn_k = 10;
  std::string gcn_dims = "128,16";
  std::string gat_dims = "128,16";
  bool checkpoint = false;
  std::string resume;
  bool no_embeddings = false;
  bool standardize_views = false;
};

void add_run_options(CLI::App* sub, RunArgs& a) {
  sub->add_option("--manifest", a.manifest, "Dataset manifest (JSON)")->required();
  auto* masks = sub->add_option("--masks", a.masks, "Presence mask CSV");
  sub->add_option("--rates", a.rates, "Per-view missing rates, e.g. 0.2,0.2,0.1")->excludes(masks);
  sub->add_option("--mask-seed", a.mask_seed, "Seed for --rates masks (default: the run seed)");
  sub->add_option("--seeds", a.seeds, "Run seeds: 'a..b', a comma list, or one integer");
  sub->add_option("--threads", a.threads, "Worker threads for client training")->check(CLI::PositiveNumber);
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--e-rounds", a.e_rounds, "Communication rounds E");
  sub->add_option("--t-epochs", a.t_epochs, "Local epochs T per round");
  sub->add_option("--beta", a.beta, "Missing-rate threshold: GCN at or below, GAT above");
  sub->add_option("--gamma", a.gamma, "Clustering loss weight");
  sub->add_option("--encoder", a.encoder, "Encoder policy")
      ->check(CLI::IsMember({"auto", "force-gcn", "force-gat"}));
  sub->add_option("--gcn-output", a.gcn_output, "GCN output activation")
      ->check(CLI::IsMember({"linear", "softmax"}));
  sub->add_option("--nmi", a.nmi, "NMI normaliser")->check(CLI::IsMember({"sqrt", "arithmetic"}));
  sub->add_option("--pretrain-epochs", a.pretrain_epochs, "Reconstruction-only epochs in round 1");
  sub->add_option("--pretrain-lr", a.pretrain_lr, "Adam learning rate for pretraining");
  sub->add_option("--train-lr", a.train_lr, "Adam learning rate for local rounds");
  sub->add_option("--knn-k", a.knn_k, "Neighbours per node in the view graphs");
  sub->add_option("--gcn-dims", a.gcn_dims, "GCN layer sizes 'hidden,embed'");
  sub->add_option("--gat-dims", a.gat_dims, "GAT layer sizes 'hidden,embed'");
  sub->add_flag("--standardize-views", a.standardize_views,
                "Give every view's overlap embeddings unit spread before server aggregation");
  sub->add_flag("--checkpoint", a.checkpoint, "Write a checkpoint after every round");
  sub->add_option("--resume", a.resume, "Continue from a checkpoint directory");
  sub->add_flag("--no-embeddings", a.no_embeddings, "Skip the FVM1 embedding dumps");
}

RunConfig build_config(const RunArgs& a, std::uint64_t seed) {
  RunConfig c;
  c.e_rounds = a.e_rounds;
  c.t_epochs = a.t_epochs;
  c.beta = a.beta;
  c.gamma = a.gamma;
  c.seed = seed;
  c.pretrain_epochs = a.pretrain_epochs;
  c.pretrain_lr = a.pretrain_lr;
  c.train_lr = a.train_lr;
  c.gcn_dims = parse_dims(a.gcn_dims);
  c.gat_dims = parse_dims(a.gat_dims);
  c.encoder = parse_encoder_policy(a.encoder);
  c.gcn_output = parse_output_activation(a.gcn_output);
  c.knn_k = a.knn_k;
  c.nmi = a.nmi == "arithmetic" ? NmiNormalization::Arithmetic : NmiNormalization::Geometric;
  c.standardize_views = a.standardize_views;
  c.threads = a.threads;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

struct PreparedMask {
  PresenceMask mask;
  ojson description;
};

PreparedMask mask_for(const RunArgs& a, const LoadedDataset& ds, std::uint64_t seed) {
  const std::size_t m = ds.views.size();
  const std::size_t n = ds.manifest.n_samples;
  PreparedMask out;
  if (!a.masks.empty() || (a.rates.empty() && ds.manifest.masks_path)) {
    const fs::path path = a.masks.empty() ? *ds.manifest.masks_path : fs::path(a.masks);
    out.mask = load_mask_csv(path);
    out.description = {{"source", "file"}, {"path", path.string()}};
  } else if (!a.rates.empty()) {
    const auto rates = parse_double_list(a.rates);
    if (rates.size() != m) {
      throw UsageError(std::to_string(rates.size()) + " rates for " + std::to_string(m) + " views");
    }
    const std::uint64_t ms = a.mask_seed.value_or(seed);
    out.mask = generate_mask(n, rates, ms);
    out.description = {{"source", "rates"}, {"rates", rates}, {"mask_seed", ms}};
  } else {
    out.mask = PresenceMask(m, n, true);
    out.description = {{"source", "complete"}};
  }
  if (out.mask.num_views() != m || out.mask.num_samples() != n) {
    throw UsageError("mask is " + std::to_string(out.mask.num_samples()) + "x" +
                     std::to_string(out.mask.num_views()) + ", dataset has " + std::to_string(n) +
                     " samples and " + std::to_string(m) + " views");
  }
  if (!out.mask.covers_every_sample()) {
    throw UsageError("mask leaves at least one sample without any view");
  }
  return out;
}

std::string two_digits(std::size_t v) {
  std::ostringstream os;
  os << std::setw(2) << std::setfill('0') << v;
  return os.str();
}

void write_run_outputs(const fs::path& dir, const RunResult& r, const Federation& fed, bool embeddings) {
  fs::create_directories(dir);
  write_text(dir / "report.json", to_json(r.report).dump(2) + "\n");
  std::string trace;
  for (const auto& t : r.trace) trace += t.dump() + "\n";
  write_text(dir / "trace.jsonl", trace);
  save_labels(dir / "predictions.txt", r.predictions);

  ojson timing;
  timing["pretrain_seconds"] = r.pretrain_seconds;
  timing["rounds"] = ojson::array();
  for (const auto& [round, secs] : r.round_seconds) timing["rounds"].push_back({{"round", round}, {"seconds", secs}});
  write_text(dir / "timing.json", timing.dump(2) + "\n");

  if (embeddings) {
    const fs::path emb = dir / "embeddings";
    fs::create_directories(emb);
    for (const auto& [round, z] : r.global_embeddings)
      save_matrix(emb / ("round_" + two_digits(round) + "_z.fvm"), z);
    for (const Client& c : fed.clients())
      save_matrix(emb / ("view_" + std::to_string(c.view_id()) + "_final.fvm"), c.full_embeddings());
  }
}

std::optional<ClusterScores> run_one(const RunArgs& a, const LoadedDataset& ds, const RunConfig& config,
                                     const fs::path& dir, std::ostream& out) {
  const PreparedMask pm = mask_for(a, ds, config.seed);
  RunData data = prepare_run_data(ds.manifest.name, ds.views, pm.mask, ds.manifest.n_clusters,
                                  ds.labels, config.knn_k);
  std::optional<fs::path> ckpt;
  if (a.checkpoint) ckpt = dir / "checkpoints";
  Federation fed = a.resume.empty() ? Federation(std::move(data), config)
                                    : Federation::resume(a.resume, std::move(data), {}, a.threads);
  RunResult result = fed.run(ckpt);
  result.report.experiment = {{"manifest", a.manifest}, {"mask", pm.description}};
  write_run_outputs(dir, result, fed, !a.no_embeddings);
  out << "seed " << config.seed << ": ";
  if (result.report.final_scores) {
    const auto& s = *result.report.final_scores;
    out << "acc=" << shortest(s.acc) << " nmi=" << shortest(s.nmi) << " ari=" << shortest(s.ari);
  } else {
    out << "no labels";
  }
  out << "\n";
  return result.report.final_scores;
}

ojson summarize(const std::vector<std::uint64_t>& seeds, const std::vector<ClusterScores>& scores) {
  ojson j;
  j["seeds"] = seeds;
  j["per_seed"] = ojson::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    ojson s = scores_json(scores[i]);
    s["seed"] = seeds[i];
    j["per_seed"].push_back(std::move(s));
  }
  auto stats = [&](double ClusterScores::*field) {
    double mean = 0.0;
    for (const auto& s : scores) mean += s.*field;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (const auto& s : scores) var += (s.*field - mean) * (s.*field - mean);
    const double sd = scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  ojson mean, sd;
  for (auto [name, field] : {std::pair{"acc", &ClusterScores::acc}, std::pair{"nmi", &ClusterScores::nmi},
                             std::pair{"ari", &ClusterScores::ari}}) {
    const auto [m, s] = stats(field);
    mean[name] = m;
    sd[name] = s;
  }
  j["mean"] = mean;
  j["std"] = sd;
  return j;
}

std::vector<std::uint64_t> seeds_for(const RunArgs& a) {
  if (a.resume.empty()) return parse_seed_list(a.seeds);
  std::ifstream in(fs::path(a.resume) / "meta.json");
  if (!in) throw std::runtime_error("cannot read checkpoint " + a.resume);
  return {nlohmann::json::parse(in).at("config").at("seed").get<std::uint64_t>()};
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const LoadedDataset ds = load_dataset(a.manifest);
  const auto seeds = seeds_for(a);
  const fs::path root(a.out);
  std::vector<ClusterScores> scores;
  for (std::uint64_t seed : seeds) {
    RunConfig config = build_config(a, seed);
    if (!a.resume.empty()) {
      std::ifstream in(fs::path(a.resume) / "meta.json");
      config = run_config_from_json(nlohmann::json::parse(in).at("config"));
      config.threads = a.threads;
    }
    const auto s = run_one(a, ds, config, root / ("seed_" + std::to_string(seed)), out);
    if (s) scores.push_back(*s);
  }
  if (scores.size() == seeds.size()) write_text(root / "summary.json", summarize(seeds, scores).dump(2) + "\n");
  return kExitOk;
}

struct SweepArgs {
  RunArgs run;
  std::string param;
  std::string values;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const auto values = parse_double_list(a.values);
  if (values.empty()) throw UsageError("--values is empty");
  if (!a.run.resume.empty()) throw UsageError("sweep does not support --resume");
  const LoadedDataset ds = load_dataset(a.run.manifest);
  if (!ds.labels) throw UsageError("sweep needs a manifest with labels_path");
  const auto seeds = parse_seed_list(a.run.seeds);
  const fs::path root(a.run.out);
  std::string csv = "param,value,seed,acc,nmi,ari\n";
  for (double value : values) {
    RunArgs args = a.run;
    if (a.param == "beta") args.beta = value;
    else args.gamma = value;
    for (std::uint64_t seed : seeds) {
      const RunConfig config = build_config(args, seed);
      const fs::path dir = root / (a.param + "_" + shortest(value)) / ("seed_" + std::to_string(seed));
      const ClusterScores s = *run_one(args, ds, config, dir, out);
      csv += a.param + "," + shortest(value) + "," + std::to_string(seed) + "," + shortest(s.acc) + "," +
             shortest(s.nmi) + "," + shortest(s.ari) + "\n";
    }
  }
  write_text(root / "sweep.csv", csv);
  return kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string nmi = "sqrt";
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto pred = load_labels(a.pred);
  const auto truth = load_labels(a.truth);
  if (pred.size() != truth.size()) {
    throw UsageError("length mismatch: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " labels");
  }
  const auto norm = a.nmi == "arithmetic" ? NmiNormalization::Arithmetic : NmiNormalization::Geometric;
  ojson j = scores_json(evaluate_clustering(truth, pred, norm));
  j["n"] = pred.size();
  const std::string text = j.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  out << text;
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw UsageError("empty seed list");
  std::vector<std::uint64_t> seeds;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = parse_u64(trim(t.substr(0, dots)));
    const std::uint64_t hi = parse_u64(trim(t.substr(dots + 2)));
    if (hi < lo) throw UsageError("seed range '" + t + "' is descending");
    if (hi - lo >= 100000) throw UsageError("seed range '" + t + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (const auto& p : split(t, ',')) seeds.push_back(parse_u64(p));
  return seeds;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& p : split(text, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || ec != std::errc() || ptr != p.data() + p.size() || !std::isfinite(v))
      throw UsageError("expected a number, got '" + p + "'");
    out.push_back(v);
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated incomplete multi-view clustering simulator"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a Gaussian-blob multi-view dataset");
  s->add_option("--n", synth.n, "Samples")->check(CLI::PositiveNumber);
  s->add_option("--k", synth.k, "Clusters")->check(CLI::Range(2, 1 << 20));
  s->add_option("--dims", synth.dims, "Per-view dimensions, e.g. 32,24,16");
  s->add_option("--sep", synth.sep, "Pairwise center distance in noise standard deviations");
  s->add_option("--seed", synth.seed, "Generator seed");
  s->add_option("--name", synth.name, "Dataset name");
  s->add_option("--out", synth.out, "Output directory")->required();

  MaskArgs mask;
  auto* mk = app.add_subcommand("mask", "Generate a presence mask CSV");
  mk->add_option("--manifest", mask.manifest, "Take N and the view count from a manifest");
  mk->add_option("--n", mask.n, "Samples");
  mk->add_option("--rates", mask.rates, "Per-view missing rates")->required();
  mk->add_option("--seed", mask.seed, "Mask seed");
  mk->add_option("--out", mask.out, "Output CSV")->required();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run federated training for one or more seeds");
  add_run_options(r, run);

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Run a beta or gamma sensitivity sweep");
  add_run_options(sw, sweep.run);
  sw->add_option("--param", sweep.param, "Swept parameter")->required()->check(CLI::IsMember({"beta", "gamma"}));
  sw->add_option("--values", sweep.values, "Comma-separated values")->required();

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Score predicted labels against ground truth");
  ev->add_option("--pred", eval.pred, "Predicted labels file")->required();
  ev->add_option("--truth", eval.truth, "Ground-truth labels file")->required();
  ev->add_option("--nmi", eval.nmi, "NMI normaliser")->check(CLI::IsMember({"sqrt", "arithmetic"}));
  ev->add_option("--out", eval.out, "Also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth, out);
    if (*mk) return cmd_mask(mask, out);
    if (*r) return cmd_run(run, out);
    if (*sw) return cmd_sweep(sweep, out);
    if (*ev) return cmd_eval(eval, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fimgnn
