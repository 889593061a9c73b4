// flowgnn command-line tool.
//
//   flowgnn ingest    NetFlow v5 captures or flow CSV -> normalized flow CSV
//   flowgnn curate    flow CSV -> kept flow CSV + curation report
//   flowgnn featurize flow CSV -> edge feature CSV and/or graph dump
//   flowgnn synth     synthetic flow CSV
//   flowgnn train     flow CSV -> checkpoint + loss history
//   flowgnn eval      checkpoint + flow CSV -> metrics report
//   flowgnn pipeline  curate -> featurize -> train -> eval in one seeded run
//
// Every subcommand accepts --config FILE with flat "key = value" lines whose
// keys are the long option names. Command-line flags override the file. The
// fully resolved settings are written next to the outputs.
//
// Exit status: 0 success, 1 data or validation error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowgnn/checkpoint.hpp"
#include "flowgnn/curation.hpp"
#include "flowgnn/egraphsage.hpp"
#include "flowgnn/features.hpp"
#include "flowgnn/flow_csv.hpp"
#include "flowgnn/flowgraph.hpp"
#include "flowgnn/metrics.hpp"
#include "flowgnn/netflow_v5.hpp"
#include "flowgnn/pipeline.hpp"
#include "flowgnn/synth.hpp"
#include "flowgnn/text.hpp"

namespace fs = std::filesystem;
using namespace flowgnn;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

// Flat "key = value" config. '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto value = std::string(text::trim(t.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    entries[std::string(text::trim(t.substr(0, eq)))] = value;
  }
  return entries;
}

// Splices config-file entries in front of the user's flags. Options take the
// last value given, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (args.empty() || config_path.empty()) return args;
  out.push_back(args.front());  // subcommand name
  for (const auto& [key, value] : read_config_file(config_path)) out.push_back("--" + key + "=" + value);
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// name = value for every option of a subcommand, defaults included.
void write_resolved_config(const CLI::App& sub, const std::string& path) {
  auto out = open_out(path);
  out << "# flowgnn " << sub.get_name() << " resolved configuration\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->get_expected_max() == 0) {
      value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
    } else if (opt->count() > 0) {
      value = opt->as<std::string>();
    } else {
      value = opt->get_default_str();
    }
    out << name << " = " << value << '\n';
  }
}

std::string resolved_config_path(const std::string& output) {
  auto p = fs::path(output);
  if (fs::is_directory(p)) return (p / "config.resolved").string();
  return output + ".config";
}

struct FlowInput {
  std::string path;
  std::string schema;
  bool ton_iot = false;
  bool lenient = false;

  void add_to(CLI::App& sub, bool required = true) {
    auto* in = sub.add_option("--in", path, "Flow CSV input");
    if (required) in->required();
    sub.add_option("--schema", schema, "Column overrides, e.g. protocol=proto,attack_type=type");
    sub.add_flag("--ton-iot", ton_iot, "Use ToN-IoT column names (proto, type)");
    sub.add_flag("--lenient", lenient, "Skip malformed rows instead of aborting");
  }

  std::vector<RawFlow> read() const {
    auto schema_map = ton_iot ? csv::Schema::ton_iot() : csv::Schema{};
    schema_map.apply_overrides(schema);
    auto in = open_in(path);
    auto result = csv::read_flow_csv(in, schema_map, lenient);
    for (const auto& s : result.skipped) {
      std::cerr << "flowgnn: warning[MalformedRow]: skipped row " << s.row << ": " << s.reason << '\n';
    }
    return std::move(result.flows);
  }
};

struct CurationOptions {
  std::string subnets;
  std::string infra_hosts = "192.168.1.1";
  std::string infra_ports = "53";
  bool no_dedupe = false;

  void add_to(CLI::App& sub, bool subnets_required) {
    auto* s = sub.add_option("--subnets", subnets, "Testbed CIDR blocks, comma separated");
    if (subnets_required) s->required();
    sub.add_option("--infra-hosts", infra_hosts, "Infrastructure hosts, comma separated");
    sub.add_option("--infra-ports", infra_ports, "Infrastructure service ports, comma separated");
    sub.add_flag("--no-dedupe", no_dedupe, "Keep conflicting duplicate flows");
  }

  CurationConfig build() const {
    CurationConfig c;
    for (const auto& s : split_list(subnets)) c.testbed_subnets.push_back(Cidr::parse(s));
    c.infra_hosts.clear();
    for (const auto& h : split_list(infra_hosts)) {
      try {
        c.infra_hosts.push_back(Ipv4::parse(h));
      } catch (const Error&) {
        throw Error(ErrorCode::InvalidConfig, "invalid infrastructure host '" + h + "'");
      }
    }
    c.infra_ports.clear();
    for (const auto& p : split_list(infra_ports)) {
      auto v = text::parse_number<unsigned>(p);
      if (!v || *v > 65535) throw Error(ErrorCode::InvalidConfig, "invalid infrastructure port '" + p + "'");
      c.infra_ports.push_back(static_cast<std::uint16_t>(*v));
    }
    c.dedupe = !no_dedupe;
    return c;
  }
};

struct NormOptions {
  NormCoefficients k;

  void add_to(CLI::App& sub) {
    sub.add_option("--k-duration", k.duration, "Duration scale (s)");
    sub.add_option("--k-src-pkts", k.src_pkts, "Source packet scale");
    sub.add_option("--k-src-bytes", k.src_ip_bytes, "Source byte scale");
    sub.add_option("--k-dst-pkts", k.dst_pkts, "Destination packet scale");
    sub.add_option("--k-dst-bytes", k.dst_ip_bytes, "Destination byte scale");
    sub.add_option("--k-degree", k.degree, "Node degree scale");
  }
};

struct TrainOptions {
  sage::TrainConfig config;
  std::string class_weights;
  bool no_mask = false;

  void add_to(CLI::App& sub) {
    sub.add_option("--epochs", config.epochs, "Full-batch gradient steps");
    sub.add_option("--lr", config.learning_rate, "Learning rate");
    sub.add_option("--max-neighbors", config.max_neighbors, "Sampled neighborhood size");
    sub.add_option("--hidden", config.hidden, "Hidden width");
    sub.add_option("--class-weights", class_weights,
                   "Per-class loss weights in class order, comma separated (default: inverse frequency)");
    sub.add_flag("--no-mask", no_mask, "Do not mask DDoS source addresses");
  }

  sage::TrainConfig build(std::uint64_t seed) const {
    auto c = config;
    c.seed = seed;
    for (const auto& w : split_list(class_weights)) {
      auto v = text::parse_number<double>(w);
      if (!v) throw Error(ErrorCode::InvalidConfig, "invalid class weight '" + w + "'");
      c.class_weights.push_back(*v);
    }
    if (!c.class_weights.empty() && c.class_weights.size() != kNumAttackTypes) {
      throw Error(ErrorCode::InvalidConfig, "expected " + std::to_string(kNumAttackTypes) + " class weights");
    }
    c.validate();
    return c;
  }
};

void write_loss_history(const std::string& path, const std::vector<double>& history) {
  auto out = open_out(path);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << text::format_double(history[i]) << '\n';
}

void write_metrics(const MetricsReport& report, const std::string& json_path, const std::string& csv_path) {
  if (!json_path.empty()) write_json(json_path, to_json(report));
  if (!csv_path.empty()) {
    auto out = open_out(csv_path);
    write_metrics_csv(out, report);
  }
}

void print_metrics(const MetricsReport& report) {
  write_metrics_csv(std::cout, report);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  args = expand_config(args);

  CLI::App app{"Flow-graph intrusion detection toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Flat key = value configuration file");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert NetFlow v5 captures or flow CSV to a flow CSV");
  add_common(ingest);
  std::string netflow_paths, ingest_out;
  double idle_window = netflow_v5::kDefaultIdleWindowSeconds;
  FlowInput ingest_in;
  ingest->add_option("--netflow", netflow_paths, "NetFlow v5 capture files (concatenated packets), comma separated");
  ingest_in.add_to(*ingest, false);
  ingest->add_option("--idle-window", idle_window, "Pairing window in seconds");
  ingest->add_option("--out", ingest_out, "Output flow CSV")->required();

  // curate
  auto* curate_cmd = app.add_subcommand("curate", "Apply drop/relabel/dedupe rules");
  add_common(curate_cmd);
  FlowInput curate_in;
  CurationOptions curate_opts;
  std::string curate_out, curate_report, curate_report_csv;
  curate_in.add_to(*curate_cmd);
  curate_opts.add_to(*curate_cmd, true);
  curate_cmd->add_option("--out", curate_out, "Kept flows CSV")->required();
  curate_cmd->add_option("--report", curate_report, "Curation report JSON");
  curate_cmd->add_option("--report-csv", curate_report_csv, "Curation report CSV (per category)");

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Write edge features and/or the flow graph");
  add_common(featurize);
  FlowInput feat_in;
  NormOptions feat_norm;
  std::string feat_out, nodes_out, edges_out;
  bool feat_mask = false;
  feat_in.add_to(*featurize);
  feat_norm.add_to(*featurize);
  featurize->add_option("--features", feat_out, "Edge feature CSV");
  featurize->add_option("--nodes", nodes_out, "Node CSV of the flow graph");
  featurize->add_option("--edges", edges_out, "Edge CSV of the flow graph");
  featurize->add_flag("--mask", feat_mask, "Mask DDoS sources before building the graph");
  featurize->add_option("--seed", seed, "Seed for masking");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic labelled flows");
  add_common(synth_cmd);
  synth::SynthConfig synth_cfg;
  std::string synth_subnet = "192.168.1.0/24", synth_out;
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed")->required();
  synth_cmd->add_option("--n-benign", synth_cfg.n_benign);
  synth_cmd->add_option("--n-ddos", synth_cfg.n_ddos);
  synth_cmd->add_option("--n-scan", synth_cfg.n_scan);
  synth_cmd->add_option("--n-password", synth_cfg.n_password);
  synth_cmd->add_option("--n-dos", synth_cfg.n_dos);
  synth_cmd->add_option("--subnet", synth_subnet, "Testbed subnet");
  synth_cmd->add_option("--out", synth_out, "Output flow CSV")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the edge classifier on all input flows");
  add_common(train_cmd);
  FlowInput train_in;
  NormOptions train_norm;
  TrainOptions train_opts;
  std::string checkpoint_out = "checkpoint.json", history_out = "loss.csv";
  train_in.add_to(*train_cmd);
  train_norm.add_to(*train_cmd);
  train_opts.add_to(*train_cmd);
  train_cmd->add_option("--seed", seed, "Seed for initialization, sampling and masking")->required();
  train_cmd->add_option("--checkpoint", checkpoint_out, "Checkpoint JSON output");
  train_cmd->add_option("--history", history_out, "Loss history CSV output");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on labelled flows");
  add_common(eval_cmd);
  FlowInput eval_in;
  NormOptions eval_norm;
  std::string checkpoint_in, eval_report, eval_report_csv;
  std::size_t eval_max_neighbors = kDefaultMaxNeighbors;
  bool eval_no_mask = false;
  eval_in.add_to(*eval_cmd);
  eval_norm.add_to(*eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint_in, "Checkpoint JSON")->required();
  eval_cmd->add_option("--report", eval_report, "Metrics JSON output");
  eval_cmd->add_option("--report-csv", eval_report_csv, "Metrics CSV output");
  eval_cmd->add_option("--max-neighbors", eval_max_neighbors, "Sampled neighborhood size");
  eval_cmd->add_flag("--no-mask", eval_no_mask, "Do not mask DDoS source addresses");
  eval_cmd->add_option("--seed", seed, "Seed for sampling and masking (default: checkpoint seed)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Curate, featurize, train and evaluate in one seeded run");
  add_common(pipeline);
  FlowInput pipe_in;
  CurationOptions pipe_curation;
  NormOptions pipe_norm;
  TrainOptions pipe_train;
  std::string out_dir;
  double train_fraction = 0.7;
  bool no_curate = false;
  pipe_in.add_to(*pipeline);
  pipe_curation.add_to(*pipeline, false);
  pipe_norm.add_to(*pipeline);
  pipe_train.add_to(*pipeline);
  pipeline->add_option("--seed", seed, "Seed for every random choice in the run")->required();
  pipeline->add_option("--out-dir", out_dir, "Directory for all outputs")->required();
  pipeline->add_option("--train-fraction", train_fraction, "Per-class training share");
  pipeline->add_flag("--no-curate", no_curate, "Skip curation");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "flowgnn: error[Usage]: " << e.what() << '\n';
    std::cerr << "run 'flowgnn --help' for usage\n";
    return kExitUsage;
  }

  if (ingest->parsed()) {
    std::vector<RawFlow> flows;
    if (!netflow_paths.empty() == !ingest_in.path.empty()) {
      std::cerr << "flowgnn: error[Usage]: ingest needs exactly one of --netflow or --in\n";
      return kExitUsage;
    }
    if (!netflow_paths.empty()) {
      std::vector<netflow_v5::Record> records;
      for (const auto& path : split_list(netflow_paths)) {
        auto in = open_in(path, std::ios::binary);
        const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto packets = netflow_v5::parse(bytes);
        const auto recs = netflow_v5::all_records(packets);
        records.insert(records.end(), recs.begin(), recs.end());
      }
      flows = netflow_v5::pair_unidirectional(records, idle_window);
    } else {
      flows = ingest_in.read();
    }
    auto out = open_out(ingest_out);
    csv::write_flow_csv(out, flows);
    write_resolved_config(*ingest, resolved_config_path(ingest_out));
    std::cout << "wrote " << flows.size() << " flows to " << ingest_out << '\n';
    return 0;
  }

  if (curate_cmd->parsed()) {
    const auto flows = curate_in.read();
    const auto result = curate(flows, curate_opts.build());
    auto out = open_out(curate_out);
    csv::write_flow_csv(out, result.flows);
    if (!curate_report.empty()) write_json(curate_report, to_json(result.report));
    if (!curate_report_csv.empty()) {
      auto rc = open_out(curate_report_csv);
      write_report_csv(rc, result.report);
    }
    write_resolved_config(*curate_cmd, resolved_config_path(curate_out));
    write_report_csv(std::cout, result.report);
    return 0;
  }

  if (featurize->parsed()) {
    feat_norm.k.validate();
    auto flows = feat_in.read();
    if (feat_mask) flows = mask_ddos_sources(std::move(flows), seed);
    if (feat_out.empty() && nodes_out.empty() && edges_out.empty()) {
      std::cerr << "flowgnn: error[Usage]: featurize needs --features, --nodes or --edges\n";
      return kExitUsage;
    }
    std::string anchor;
    if (!feat_out.empty()) {
      auto out = open_out(feat_out);
      write_feature_csv(out, flows, feat_norm.k);
      anchor = feat_out;
    }
    if (!nodes_out.empty() || !edges_out.empty()) {
      const auto graph = build_graph(flows, feat_norm.k);
      if (!nodes_out.empty()) {
        auto out = open_out(nodes_out);
        write_node_csv(out, graph);
        if (anchor.empty()) anchor = nodes_out;
      }
      if (!edges_out.empty()) {
        auto out = open_out(edges_out);
        write_edge_csv(out, graph);
        if (anchor.empty()) anchor = edges_out;
      }
    }
    write_resolved_config(*featurize, resolved_config_path(anchor));
    return 0;
  }

  if (synth_cmd->parsed()) {
    synth_cfg.subnet = Cidr::parse(synth_subnet);
    const auto flows = synth::generate(synth_cfg);
    auto out = open_out(synth_out);
    csv::write_flow_csv(out, flows);
    write_resolved_config(*synth_cmd, resolved_config_path(synth_out));
    std::cout << "wrote " << flows.size() << " flows to " << synth_out << '\n';
    return 0;
  }

  if (train_cmd->parsed()) {
    train_norm.k.validate();
    const auto config = train_opts.build(seed);
    auto flows = train_in.read();
    if (!train_opts.no_mask) flows = mask_ddos_sources(std::move(flows), seed);
    const auto graph = build_graph(flows, train_norm.k);
    const auto result = sage::train(graph, config);
    write_json(checkpoint_out, sage::checkpoint_to_json(result.params, seed));
    write_loss_history(history_out, result.loss_history);
    write_resolved_config(*train_cmd, resolved_config_path(checkpoint_out));
    std::cout << "trained " << config.epochs << " epochs on " << graph.edge_count() << " edges, final loss "
              << text::format_double(result.loss_history.back()) << '\n';
    return 0;
  }

  if (eval_cmd->parsed()) {
    eval_norm.k.validate();
    const auto checkpoint = [&] {
      auto in = open_in(checkpoint_in);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("checkpoint is not JSON: ") + e.what());
      }
      return sage::checkpoint_from_json(j);
    }();
    if (eval_cmd->get_option("--seed")->count() == 0) seed = checkpoint.seed;
    auto flows = eval_in.read();
    if (!eval_no_mask) flows = mask_ddos_sources(std::move(flows), seed);
    const auto graph = build_graph(flows, eval_norm.k);
    const sage::Sampling sampling{seed, 0x74657374ull, eval_max_neighbors};
    const auto predictions = sage::predict(graph, checkpoint.params, sampling);
    const auto report = evaluate(predictions, sage::edge_labels(graph), checkpoint.params.dims.classes);
    write_metrics(report, eval_report, eval_report_csv);
    if (!eval_report.empty()) write_resolved_config(*eval_cmd, resolved_config_path(eval_report));
    print_metrics(report);
    return 0;
  }

  if (pipeline->parsed()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    auto flows = pipe_in.read();
    if (!no_curate) {
      const auto curated = curate(flows, pipe_curation.build());
      write_json((dir / "curation.json").string(), to_json(curated.report));
      auto rc = open_out((dir / "curation.csv").string());
      write_report_csv(rc, curated.report);
      flows = curated.flows;
    }
    {
      auto kept = open_out((dir / "flows.csv").string());
      csv::write_flow_csv(kept, flows);
      auto feats = open_out((dir / "features.csv").string());
      write_feature_csv(feats, flows, pipe_norm.k);
    }
    ExperimentConfig ec;
    ec.norm = pipe_norm.k;
    ec.train = pipe_train.build(seed);
    ec.train_fraction = train_fraction;
    ec.mask_ddos = !pipe_train.no_mask;
    const auto result = run_experiment(flows, ec);
    write_json((dir / "checkpoint.json").string(), sage::checkpoint_to_json(result.model.params, seed));
    write_loss_history((dir / "loss.csv").string(), result.model.loss_history);
    write_metrics(result.metrics, (dir / "metrics.json").string(), (dir / "metrics.csv").string());
    write_resolved_config(*pipeline, (dir / "config.resolved").string());
    print_metrics(result.metrics);
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "flowgnn: error[" << code_name(e.code()) << "]: " << e.message() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "flowgnn: error[IoError]: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "flowgnn: error[Internal]: " << e.what() << '\n';
    return kExitData;
  }
}
