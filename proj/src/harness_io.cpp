#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "nsp/errors.hpp"
#include "nsp/harness.hpp"

namespace nsp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset files

void write_dataset(std::ostream& out, const Dataset& data) {
  out << "#nspdata problem=" << to_string(data.problem) << " N=" << data.sites << " d=" << data.site_dim
      << " c=" << data.labels << " seed=" << data.seed << " count=" << data.size()
      << " replacement=" << (data.with_replacement ? 1 : 0) << '\n';
  for (const auto& s : data.samples) {
    const auto& digits = s.state.digits();
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (i) out << ',';
      out << digits[i];
    }
    out << '\t' << s.label << '\n';
  }
}

namespace {

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError("bad " + what + " '" + text + "'");
  }
  errno = 0;
  const auto v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw FormatError(what + " out of range");
  return v;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#nspdata", 0) != 0) {
    throw FormatError("dataset header must start with #nspdata");
  }
  std::map<std::string, std::string> fields;
  std::istringstream header(line.substr(8));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("bad header field '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  for (const char* key : {"problem", "N", "d", "c", "seed", "count"}) {
    if (!fields.count(key)) throw FormatError(std::string("dataset header lacks ") + key);
  }

  Dataset data;
  try {
    data.problem = problem_from_string(fields["problem"]);
  } catch (const ConfigError&) {
    throw FormatError("unknown problem '" + fields["problem"] + "' in dataset header");
  }
  data.sites = static_cast<std::uint32_t>(parse_uint(fields["N"], "N"));
  data.site_dim = static_cast<Dim>(parse_uint(fields["d"], "d"));
  data.labels = static_cast<Dim>(parse_uint(fields["c"], "c"));
  data.seed = parse_uint(fields["seed"], "seed");
  data.with_replacement = !fields.count("replacement") || fields["replacement"] != "0";
  const auto count = parse_uint(fields["count"], "count");
  if (data.sites == 0 || data.site_dim == 0 || data.labels == 0) throw FormatError("dataset header has a zero size");
  if (data.problem != Problem::custom &&
      (data.site_dim != site_dim_of(data.problem) || data.labels != label_count_of(data.problem))) {
    throw FormatError("dataset header d/c disagree with the problem");
  }

  const std::vector<Dim> bases(data.sites, data.site_dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = " on line " + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("missing tab" + where);
    std::vector<Digit> digits;
    std::istringstream cells(line.substr(0, tab));
    std::string cell;
    while (std::getline(cells, cell, ',')) digits.push_back(static_cast<Digit>(parse_uint(cell, "digit" + where)));
    if (digits.size() != data.sites) throw FormatError("expected " + std::to_string(data.sites) + " digits" + where);
    for (Digit x : digits) {
      if (x >= data.site_dim) throw FormatError("digit out of range" + where);
    }
    const auto label = parse_uint(line.substr(tab + 1), "label" + where);
    if (label >= data.labels) throw FormatError("label out of range" + where);
    data.samples.push_back({NumberState(std::move(digits), bases), static_cast<Digit>(label)});
  }
  if (data.samples.size() != count) {
    throw FormatError("header count " + std::to_string(count) + " but " + std::to_string(data.samples.size()) +
                      " samples");
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_dataset(out, data);
  if (!out.flush()) throw IoError("cannot write " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return read_dataset(in);
}

// ---------------------------------------------------------------------------
// Model files

json model_to_json(const Network& net, const ModelInfo& info) {
  const auto& p = net.params();
  if (p.kind == NetworkKind::custom) throw ConfigError("only standard networks can be saved", "network");
  json nodes = json::array();
  for (const auto& n : net.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"role", to_string(n.role)},
                     {"in_dims", n.payload.in_dims()},
                     {"out_dims", n.payload.out_dims()},
                     {"table", n.payload.table()}});
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"index_convention", kIndexConvention},
          {"network",
           {{"kind", to_string(p.kind)},
            {"sites", p.sites},
            {"site_dim", p.site_dim},
            {"labels", p.labels},
            {"chi_max", p.chi_max},
            {"disentanglers_enabled", p.disentanglers_enabled},
            {"share_layers", p.share_layers}}},
          {"task", {{"problem", to_string(info.problem)}}},
          {"provenance", {{"seed", info.seed}, {"config_hash", info.config_hash}}},
          {"nodes", nodes}};
}

Model model_from_json(const json& doc) {
  try {
    if (doc.at("format") != kModelFormat) throw FormatError("not an nsp-model document");
    if (doc.at("version") != kModelVersion) {
      throw FormatError("unsupported model version " + doc.at("version").dump());
    }
    if (doc.at("index_convention") != kIndexConvention) throw FormatError("unsupported index convention");
    const auto& jn = doc.at("network");
    BuildParams p;
    try {
      p.kind = network_kind_from_string(jn.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw FormatError(e.what());
    }
    p.sites = jn.at("sites").get<std::uint32_t>();
    p.site_dim = jn.at("site_dim").get<Dim>();
    p.labels = jn.at("labels").get<Dim>();
    p.chi_max = jn.at("chi_max").get<Dim>();
    p.disentanglers_enabled = jn.at("disentanglers_enabled").get<bool>();
    p.share_layers = jn.at("share_layers").get<bool>();

    Model model;
    try {
      model.network = build_network(p);
    } catch (const ConfigError& e) {
      throw FormatError(std::string("model build parameters rejected: ") + e.what());
    }
    if (model.network.params() != p) throw FormatError("model build parameters do not round-trip");
    const auto& jnodes = doc.at("nodes");
    if (jnodes.size() != model.network.node_count()) throw FormatError("model node count does not match its network");
    for (const auto& jnode : jnodes) {
      const auto id = jnode.at("id").get<NodeId>();
      if (id >= model.network.node_count()) throw FormatError("model node id out of range");
      const auto& node = model.network.node(id);
      const auto in_dims = jnode.at("in_dims").get<std::vector<Dim>>();
      const auto out_dims = jnode.at("out_dims").get<std::vector<Dim>>();
      if (in_dims != node.payload.in_dims() || out_dims != node.payload.out_dims()) {
        throw FormatError("dims of node " + std::to_string(id) + " do not match the network");
      }
      try {
        model.network.set_payload(id, UnitalTensor(in_dims, out_dims, jnode.at("table").get<std::vector<std::uint32_t>>()));
      } catch (const DomainError& e) {
        throw FormatError("node " + std::to_string(id) + ": " + e.what());
      }
    }
    if (doc.contains("task")) {
      try {
        model.info.problem = problem_from_string(doc.at("task").at("problem").get<std::string>());
      } catch (const ConfigError& e) {
        throw FormatError(e.what());
      }
    }
    if (doc.contains("provenance")) {
      model.info.seed = doc.at("provenance").at("seed").get<std::uint64_t>();
      model.info.config_hash = doc.at("provenance").at("config_hash").get<std::string>();
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const std::string& path, const Network& net, const ModelInfo& info) {
  const auto doc = model_to_json(net, info);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(1) << '\n';
  if (!out.flush()) throw IoError("cannot write " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return model_from_json(doc);
}

// ---------------------------------------------------------------------------
// Run configuration

std::string RunConfig::default_output_dir() {
  const char* env = std::getenv("NSPNET_OUTPUT_DIR");
  return env && *env ? env : ".";
}

namespace {

std::string to_string(TestMode m) {
  switch (m) {
    case TestMode::automatic: return "automatic";
    case TestMode::exhaustive: return "exhaustive";
    case TestMode::sampled: return "sampled";
  }
  return "automatic";
}

TestMode test_mode_from_string(const std::string& name) {
  if (name == "automatic") return TestMode::automatic;
  if (name == "exhaustive") return TestMode::exhaustive;
  if (name == "sampled") return TestMode::sampled;
  throw ConfigError("unknown test mode '" + name + "'", "test");
}

}  // namespace

void RunConfig::validate() const {
  if (n_trials == 0) throw ConfigError("n_trials must be at least 1", "n_trials");
  if (jobs == 0) throw ConfigError("jobs must be at least 1", "jobs");
  if (output_dir.empty()) throw ConfigError("output directory is empty", "output_dir");
  if (schedule && network != NetworkKind::mera) {
    throw ConfigError("a ttn/mera schedule needs network=mera", "schedule");
  }
  if (schedule && schedule->frozen_sweeps + schedule->active_sweeps == 0) {
    throw ConfigError("schedule runs no sweeps", "schedule");
  }
  sweep_config().validate();
  const auto spec = problem_spec();
  spec.validate();
  spec.build();
}

ProblemSpec RunConfig::problem_spec() const {
  ProblemSpec spec;
  spec.problem = problem;
  spec.sites = sites;
  spec.count = count();
  spec.network = network;
  spec.chi_max = chi_max;
  spec.share_layers = share_layers;
  spec.test = test;
  return spec;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig cfg;
  cfg.alpha = alpha;
  cfg.n_sweeps = n_sweeps;
  cfg.order = order;
  cfg.schedule = schedule;
  cfg.seed = seed;
  cfg.convergence_window = convergence_window;
  cfg.early_stop = early_stop;
  return cfg;
}

json RunConfig::to_json() const {
  json doc = {{"problem", to_string(problem)},
              {"N", sites},
              {"n_samp", n_samp},
              {"n_per_class", n_per_class},
              {"network", nsp::to_string(network)},
              {"chi_max", chi_max},
              {"share_layers", share_layers},
              {"alpha", alpha},
              {"n_sweeps", n_sweeps},
              {"order", nsp::to_string(order)},
              {"convergence_window", convergence_window},
              {"early_stop", early_stop},
              {"test", to_string(test)},
              {"n_trials", n_trials},
              {"seed", seed},
              {"output_dir", output_dir},
              {"jobs", jobs}};
  doc["schedule"] = schedule ? json{{"frozen", schedule->frozen_sweeps}, {"active", schedule->active_sweeps}}
                             : json(nullptr);
  return doc;
}

void RunConfig::merge_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "problem") problem = problem_from_string(value.get<std::string>());
      else if (key == "N") sites = value.get<std::uint32_t>();
      else if (key == "n_samp") n_samp = value.get<std::size_t>();
      else if (key == "n_per_class") n_per_class = value.get<std::size_t>();
      else if (key == "network") network = network_kind_from_string(value.get<std::string>());
      else if (key == "chi_max") chi_max = value.get<Dim>();
      else if (key == "share_layers") share_layers = value.get<bool>();
      else if (key == "alpha") alpha = value.get<double>();
      else if (key == "n_sweeps") n_sweeps = value.get<std::uint32_t>();
      else if (key == "order") order = sweep_order_from_string(value.get<std::string>());
      else if (key == "convergence_window") convergence_window = value.get<std::uint32_t>();
      else if (key == "early_stop") early_stop = value.get<bool>();
      else if (key == "test") test = test_mode_from_string(value.get<std::string>());
      else if (key == "n_trials") n_trials = value.get<std::uint32_t>();
      else if (key == "seed") seed = value.get<std::uint64_t>();
      else if (key == "output_dir") output_dir = value.get<std::string>();
      else if (key == "jobs") jobs = value.get<std::uint32_t>();
      else if (key == "schedule") {
        if (value.is_null()) schedule.reset();
        else schedule = Schedule{value.at("frozen").get<std::uint32_t>(), value.at("active").get<std::uint32_t>()};
      } else {
        throw ConfigError("unknown config key '" + key + "'", key);
      }
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what(), key);
    }
  }
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash() const {
  json doc = to_json();
  doc.erase("output_dir");
  doc.erase("jobs");
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
  return buf;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  RunConfig cfg;
  cfg.output_dir = RunConfig::default_output_dir();
  try {
    cfg.merge_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what(), "config");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

std::string format_error(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8f", e);
  return buf;
}

}  // namespace

std::string metrics_row(std::uint32_t trial, const SweepRecord& r) {
  return std::to_string(trial) + ',' + std::to_string(r.sweep) + ',' + r.phase + ',' + std::to_string(r.n_correct) +
         ',' + format_error(r.train_error);
}

std::string summary_row(std::uint32_t trial, const PhaseResult& p) {
  return std::to_string(trial) + ',' + p.phase + ',' + format_error(p.train_error) + ',' +
         format_error(p.test_error) + ',' + (p.perfect ? "1" : "0") + ',' + std::to_string(p.sweeps_run) + ',' +
         std::to_string(p.sweeps_to_convergence) + ',' + (p.converged ? "1" : "0");
}

std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw FormatError("metrics file lacks its header");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const auto where = " on metrics line " + std::to_string(line_no);
    if (cells.size() != 5) throw FormatError("expected 5 columns" + where);
    MetricsRow r;
    r.trial = static_cast<std::uint32_t>(parse_uint(cells[0], "trial" + where));
    r.sweep = static_cast<std::uint32_t>(parse_uint(cells[1], "sweep" + where));
    r.phase = cells[2];
    r.n_correct = parse_uint(cells[3], "n_correct" + where);
    char* end = nullptr;
    r.train_error = std::strtod(cells[4].c_str(), &end);
    if (cells[4].empty() || *end != '\0' || !std::isfinite(r.train_error)) {
      throw FormatError("bad train_error" + where);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace nsp
