// tgen: train / generate / evaluate / walks over temporal edge lists.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tgen/assembly.hpp"
#include "tgen/graph.hpp"
#include "tgen/inductive.hpp"
#include "tgen/metrics.hpp"
#include "tgen/seqmodel.hpp"
#include "tgen/walker.hpp"

namespace {

using namespace tgen;

constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string input, output, checkpoint, provenance;
  std::string mode = "transductive";
  std::string snapshot_mode = "at";
  std::uint64_t seed = 1;
  int walk_len = 20;
  int gen_len = 5;
  int window = 500;
  int components = 128;
  int clusters = 300;
  double beta = 1e-5;
  std::int64_t target_edges = -1;  // -1: match the source edge count
  int target_nodes = -1;           // -1: match the source node count
  int threads = 1;
  // training
  int epochs = 10;
  int d_v = 100;
  int d_t = 64;
  int d_h = 200;
  int d_emb = 128;
  int d_z = 128;
  int batch_size = 128;
  double lr = 1e-3;
  std::int64_t walks = -1;  // -1: epoch mode, one walk per edge
  // inductive auxiliary training
  int sage_epochs = 30;
  int wgan_rounds = 40;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input);
  cmd->add_option("--output", o.output);
  cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"transductive", "inductive"}));
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--walk-len", o.walk_len);
  cmd->add_option("--gen-len", o.gen_len);
  cmd->add_option("--window", o.window);
  cmd->add_option("--components", o.components);
  cmd->add_option("--clusters", o.clusters);
  cmd->add_option("--beta", o.beta);
  cmd->add_option("--target-edges", o.target_edges);
  cmd->add_option("--target-nodes", o.target_nodes);
  cmd->add_option("--snapshot-mode", o.snapshot_mode)
      ->check(CLI::IsMember({"at", "upto"}));
  cmd->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--d-v", o.d_v);
  cmd->add_option("--d-t", o.d_t);
  cmd->add_option("--d-h", o.d_h);
  cmd->add_option("--d-emb", o.d_emb);
  cmd->add_option("--d-z", o.d_z);
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--lr", o.lr);
  cmd->add_option("--walks", o.walks);
  cmd->add_option("--checkpoint", o.checkpoint);
  cmd->add_option("--provenance", o.provenance);
  cmd->add_option("--sage-epochs", o.sage_epochs);
  cmd->add_option("--wgan-rounds", o.wgan_rounds);
  cmd->add_option("--config", "key=value config file; explicit flags win")
      ->expected(0, 1);
  // explicit flags must override config-file values, which are injected as
  // ordinary arguments ahead of the real command line
  for (CLI::Option* op : cmd->get_options())
    op->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Expands `--config file` into plain --key=value arguments placed right after
// the subcommand token, so anything typed on the command line takes priority.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  bool injected = false;
  size_t i = 0;
  auto inject = [&](const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::string> extra;
    std::string line;
    while (std::getline(f, line)) {
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto e = line.find_last_not_of(" \t\r");
      const std::string item = line.substr(b, e - b + 1);
      if (item.find('=') == std::string::npos)
        throw std::runtime_error("malformed config line: " + item);
      extra.push_back("--" + item);
    }
    // config keys go immediately after the subcommand name
    const size_t at = injected || out.empty() ? out.size() : 1;
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(),
               extra.end());
    injected = true;
  };
  for (; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      inject(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      inject(args[i].substr(9));
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

void write_resolved_config(const CLI::App& app, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << app.config_to_str(true, false);
}

std::string join_labels(const std::vector<std::string>& labels) {
  std::ostringstream os;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) os << '\n';
    os << labels[i];
  }
  return os.str();
}

std::vector<std::string> split_labels(const std::string& joined) {
  std::vector<std::string> out;
  std::istringstream is(joined);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::vector<Walk> strip_end(const std::vector<Walk>& walks) {
  std::vector<Walk> out;
  for (const auto& w : walks) {
    Walk c = w;
    while (!c.steps.empty() && c.steps.back().v == kEndSentinel) c.steps.pop_back();
    if (c.steps.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

Eigen::MatrixXd s1_matrix(const std::vector<WalkTuple>& s1) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s1.size()), 2);
  for (size_t i = 0; i < s1.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = s1[i].v;
    m(static_cast<Eigen::Index>(i), 1) = s1[i].t;
  }
  return m;
}

void save_loss_csv(const std::string& path, const std::vector<double>& loss) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "epoch,loss\n";
  f.precision(17);
  for (size_t i = 0; i < loss.size(); ++i) f << i << "," << loss[i] << "\n";
}

int cmd_train(const CLI::App& app, Options& o) {
  if (o.input.empty() || o.output.empty())
    throw std::runtime_error("--input and --output are required");
  LoadResult lr = load_edge_list(o.input);
  const TemporalGraph& g = lr.graph;

  WalkerConfig wcfg;
  wcfg.max_len = o.walk_len;
  wcfg.window = o.window;
  const std::int64_t walk_count = o.walks;  // -1 keeps epoch mode

  Checkpoint ck;
  std::vector<double> loss_curve;
  if (o.mode == "transductive") {
    WalkSet ws = sample_walk_set(g, walk_count, wcfg, split_seed(o.seed, 0), o.threads);
    TrainConfig tc;
    tc.walk_len = o.walk_len;
    tc.d_v = o.d_v;
    tc.d_t = o.d_t;
    tc.d_h = o.d_h;
    tc.components = o.components;
    tc.lr = o.lr;
    tc.batch_size = o.batch_size;
    tc.epochs = o.epochs;
    tc.seed = o.seed;
    Rng rng(split_seed(o.seed, 1));
    TransductiveModel model(g.num_nodes(), tc, rng);
    ResampleHook hook = [&](int epoch) {
      WalkSet nw = sample_walk_set(g, walk_count, wcfg,
                                   split_seed(o.seed, 100 + epoch), o.threads);
      return nw.walks;
    };
    TrainReport rep = model.train(ws.walks, hook);
    loss_curve = rep.epoch_loss;
    ck = model.to_checkpoint();
    ck.tensors["s1"] = s1_matrix(ws.first_tuples);
  } else {
    StaticGraph gs = g.static_projection();
    SageConfig sc;
    sc.dim = o.d_emb;
    sc.epochs = o.sage_epochs;
    sc.seed = split_seed(o.seed, 2);
    Eigen::MatrixXd emb = sage_embed_boosted(gs, sc, 0.95, gs.num_nodes / 4, 3);
    ClusterModel km = kmeans_fit(emb, o.clusters, split_seed(o.seed, 3));
    WganConfig wc;
    wc.seed = split_seed(o.seed, 4);
    wc.rounds = o.wgan_rounds;
    WganPair wgan = wgan_train(emb, wc);

    WalkSet ws = sample_walk_set(g, walk_count, wcfg, split_seed(o.seed, 0), o.threads);
    InductiveConfig ic;
    ic.walk_len = o.walk_len;
    ic.d_emb = o.d_emb;
    ic.d_z = o.d_z;
    ic.d_t = o.d_t;
    ic.d_h = o.d_h;
    ic.clusters = o.clusters;
    ic.components = o.components;
    ic.beta = o.beta;
    ic.lr = o.lr;
    ic.batch_size = o.batch_size;
    ic.epochs = o.epochs;
    ic.seed = o.seed;
    Rng rng(split_seed(o.seed, 1));
    InductiveModel model(ic, rng);
    TrainReportI rep = model.train(strip_end(ws.walks), emb, km.assignment);
    loss_curve = rep.epoch_loss;
    ck = model.to_checkpoint();
    ck.tensors["emb"] = emb;
    Eigen::MatrixXd assign(g.num_nodes(), 1);
    for (int v = 0; v < g.num_nodes(); ++v) assign(v, 0) = km.assignment[v];
    ck.tensors["assign"] = assign;
    ck.tensors["centroids"] = km.centroids;
    ck.tensors["wgan_g_w1"] = wgan.g_w1;
    ck.tensors["wgan_g_b1"] = wgan.g_b1;
    ck.tensors["wgan_g_w2"] = wgan.g_w2;
    ck.tensors["wgan_g_b2"] = wgan.g_b2;
    ck.tensors["wgan_g_w3"] = wgan.g_w3;
    ck.tensors["wgan_g_b3"] = wgan.g_b3;
    ck.meta["wgan_noise_dim"] = std::to_string(wc.noise_dim);
    ck.meta["wgan_hidden"] = std::to_string(wc.hidden);
    ck.tensors["s1"] = s1_matrix(ws.first_tuples);
  }
  ck.meta["num_nodes"] = std::to_string(g.num_nodes());
  ck.meta["num_source_edges"] = std::to_string(g.num_edges());
  ck.meta["t_max"] = std::to_string(g.t_max());
  ck.meta["labels"] = join_labels(lr.labels);
  ck.save(o.output);
  save_loss_csv(o.output + ".loss.csv", loss_curve);
  write_resolved_config(app, o.output + ".config.txt");
  return 0;
}

int cmd_generate(const CLI::App& app, Options& o) {
  if (o.checkpoint.empty() || o.output.empty())
    throw std::runtime_error("--checkpoint and --output are required");
  Checkpoint ck = Checkpoint::load(o.checkpoint);
  const std::string mode = ck.meta.at("mode");
  if (mode != o.mode)
    throw std::runtime_error("checkpoint mode '" + mode + "' does not match --mode");
  const int src_nodes = std::stoi(ck.meta.at("num_nodes"));
  const std::int64_t src_edges = std::stoll(ck.meta.at("num_source_edges"));
  const double t_max = std::stod(ck.meta.at("t_max"));
  const std::int64_t target = o.target_edges > 0 ? o.target_edges : src_edges;
  if (o.mode == "transductive" && o.target_nodes > 0 && o.target_nodes != src_nodes)
    throw std::runtime_error("--target-nodes requires inductive mode");

  const Eigen::MatrixXd& s1 = ck.at("s1");
  const auto t0 = std::chrono::steady_clock::now();

  GeneratedGraph gg;
  std::vector<std::string> gen_labels;
  if (o.mode == "transductive") {
    TransductiveModel model = TransductiveModel::from_checkpoint(ck);
    std::vector<WalkTuple> seeds;
    for (Eigen::Index r = 0; r < s1.rows(); ++r)
      seeds.push_back({static_cast<int>(s1(r, 0)), s1(r, 1)});
    std::vector<Walk> walks =
        model.generate_walks(seeds, o.gen_len, split_seed(o.seed, 7), o.threads);
    CountOptions copt;
    copt.t_max = t_max;
    copt.truncate = true;
    AlphaCounts alpha = count_alpha(walks, copt, o.threads);
    gg = assemble(alpha, src_nodes, target, split_seed(o.seed, 8));
    gen_labels = split_labels(ck.meta.at("labels"));
  } else {
    InductiveModel model = InductiveModel::from_checkpoint(ck);
    const int n_prime = o.target_nodes > 0 ? o.target_nodes : src_nodes;
    WganPair wgan;
    wgan.cfg.noise_dim = std::stoi(ck.meta.at("wgan_noise_dim"));
    wgan.cfg.hidden = std::stoi(ck.meta.at("wgan_hidden"));
    wgan.g_w1 = ck.at("wgan_g_w1");
    wgan.g_b1 = ck.at("wgan_g_b1");
    wgan.g_w2 = ck.at("wgan_g_w2");
    wgan.g_b2 = ck.at("wgan_g_b2");
    wgan.g_w3 = ck.at("wgan_g_w3");
    wgan.g_b3 = ck.at("wgan_g_b3");
    Eigen::MatrixXd table = wgan_sample(wgan, n_prime, split_seed(o.seed, 9));
    // seed tuples carry source node IDs; their stored embeddings open the walks
    const Eigen::MatrixXd& emb = ck.at("emb");
    const Eigen::Index m = s1.rows();
    Eigen::MatrixXd seed_embs(m, table.cols());
    std::vector<double> seed_times(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      seed_embs.row(i) = emb.row(static_cast<Eigen::Index>(s1(i, 0)));
      seed_times[static_cast<size_t>(i)] = s1(i, 1);
    }
    std::vector<Walk> walks = model.generate_walks(
        seed_embs, seed_times, o.gen_len, table, split_seed(o.seed, 11), o.threads);
    CountOptions copt;
    copt.t_max = t_max;
    copt.truncate = true;
    AlphaCounts alpha = count_alpha(walks, copt, o.threads);
    gg = assemble(alpha, n_prime, target, split_seed(o.seed, 8));
    for (int v = 0; v < n_prime; ++v) gen_labels.push_back("g" + std::to_string(v));
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double wall = std::chrono::duration<double>(t1 - t0).count();

  gg.seed = o.seed;
  gg.gen_len = o.gen_len;
  gg.model_hash = ck.meta.count("seed") ? ck.meta.at("seed") : "";
  save_edge_list(o.output, gg.graph, gen_labels);
  {
    std::ofstream f(o.output + ".provenance.txt");
    if (!f) throw std::runtime_error("cannot open provenance file");
    f << "model_hash=" << gg.model_hash << "\n";
    f << "seed=" << gg.seed << "\n";
    f << "gen_len=" << gg.gen_len << "\n";
    f << "num_edges=" << gg.graph.num_edges() << "\n";
    f << "num_nodes=" << gg.graph.num_nodes() << "\n";
    f << "gen_wall_time_sec=" << wall << "\n";
  }
  write_resolved_config(app, o.output + ".config.txt");
  return 0;
}

int cmd_evaluate(const CLI::App& app, Options& o, const std::string& gen_path) {
  if (o.input.empty() || gen_path.empty() || o.output.empty())
    throw std::runtime_error("--input, --generated and --output are required");
  LoadResult src = load_edge_list(o.input);
  LoadResult gen = load_edge_list(gen_path);
  ReportOptions ropt;
  ropt.upto = o.snapshot_mode == "upto";
  ropt.src_labels = &src.labels;
  ropt.gen_labels = &gen.labels;
  ropt.threads = o.threads;
  ErrorReport rep = error_report(src.graph, gen.graph, ropt);
  if (!o.provenance.empty()) {
    std::ifstream f(o.provenance);
    if (!f) throw std::runtime_error("cannot open " + o.provenance);
    std::string line;
    while (std::getline(f, line))
      if (line.rfind("gen_wall_time_sec=", 0) == 0)
        rep.wall_time_sec = std::stod(line.substr(18));
  }
  save_report_csv(o.output + ".csv", rep);
  save_report_json(o.output + ".json", rep);
  write_resolved_config(app, o.output + ".config.txt");
  return 0;
}

int cmd_walks(const CLI::App& app, Options& o) {
  if (o.input.empty() || o.output.empty())
    throw std::runtime_error("--input and --output are required");
  LoadResult lr = load_edge_list(o.input);
  WalkerConfig wcfg;
  wcfg.max_len = o.walk_len;
  wcfg.window = o.window;
  WalkSet ws =
      sample_walk_set(lr.graph, o.walks, wcfg, split_seed(o.seed, 0), o.threads);
  std::ofstream f(o.output);
  if (!f) throw std::runtime_error("cannot open " + o.output);
  for (const auto& w : ws.walks) f << format_walk(w) << "\n";
  write_resolved_config(app, o.output + ".config.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal graph generative modeling toolkit"};
  app.require_subcommand(1);
  Options o;
  std::string gen_path;

  CLI::App* train = app.add_subcommand("train", "fit a generator to an edge list");
  add_common(train, o);
  CLI::App* generate =
      app.add_subcommand("generate", "sample a synthetic graph from a checkpoint");
  add_common(generate, o);
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "fidelity report for a generated graph");
  add_common(evaluate, o);
  evaluate->add_option("--generated", gen_path);
  CLI::App* walks = app.add_subcommand("walks", "dump sampled temporal walks");
  add_common(walks, o);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (train->parsed()) return cmd_train(*train, o);
    if (generate->parsed()) return cmd_generate(*generate, o);
    if (evaluate->parsed()) return cmd_evaluate(*evaluate, o, gen_path);
    if (walks->parsed()) return cmd_walks(*walks, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string msg = e.what();
    if (msg.find("NaN") != std::string::npos ||
        msg.find("diverged") != std::string::npos ||
        msg.find("numerical") != std::string::npos)
      return kExitNumeric;
    return kExitIo;
  }
  return 0;
}
