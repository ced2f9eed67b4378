#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "nsp/errors.hpp"
#include "nsp/harness.hpp"

namespace nsp {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int places = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Streams metrics rows in trial order: the lowest unfinished trial writes
// through, later trials are buffered until their predecessors finish.
class MetricsWriter {
 public:
  MetricsWriter(std::ostream& out, std::uint32_t trials) : out_(out), pending_(trials), done_(trials, false) {
    out_ << kMetricsHeader << '\n';
    out_.flush();
  }

  void row(std::uint32_t trial, const SweepRecord& r) {
    std::lock_guard lock(mutex_);
    if (trial == next_) {
      out_ << metrics_row(trial, r) << '\n';
      out_.flush();
    } else {
      pending_[trial].push_back(metrics_row(trial, r));
    }
  }

  void finish(std::uint32_t trial) {
    std::lock_guard lock(mutex_);
    done_[trial] = true;
    while (next_ < done_.size()) {
      for (const auto& line : pending_[next_]) out_ << line << '\n';
      pending_[next_].clear();
      if (!done_[next_]) break;
      ++next_;
    }
    out_.flush();
  }

 private:
  std::ostream& out_;
  std::mutex mutex_;
  std::vector<std::vector<std::string>> pending_;
  std::vector<bool> done_;
  std::uint32_t next_ = 0;
};

}  // namespace

int cmd_gen_data(const RunConfig& cfg, const GenDataOptions& opts, std::ostream& out) {
  cfg.problem_spec().validate();
  if (opts.path.empty()) throw ConfigError("output path is empty", "out");
  const auto data = opts.test_set ? gen_test_set(cfg.problem, cfg.sites, cfg.count(), cfg.seed)
                                  : generate(cfg.problem, cfg.sites, cfg.count(), cfg.seed);
  save_dataset(opts.path, data);
  out << "wrote " << data.size() << " " << to_string(cfg.problem) << " samples to " << opts.path << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, const TrainOptions& opts, std::ostream& out) {
  cfg.validate();
  const auto spec = cfg.problem_spec();
  const auto sweep_cfg = cfg.sweep_config();

  std::optional<Dataset> shared;
  if (opts.dataset) {
    shared = load_dataset(*opts.dataset);
    if (shared->problem != cfg.problem || shared->sites != cfg.sites) {
      throw FormatError("dataset header (problem=" + to_string(shared->problem) + " N=" +
                        std::to_string(shared->sites) + ") does not match the run config");
    }
    if (shared->empty()) throw FormatError("dataset is empty");
  }

  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto metrics_file = open_output(dir / "metrics.csv");
  MetricsWriter writer(metrics_file, cfg.n_trials);

  std::vector<std::optional<TrialResult>> results(cfg.n_trials);
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&]() {
    while (true) {
      const auto trial = next.fetch_add(1);
      if (trial >= cfg.n_trials) return;
      try {
        auto data = trial_data(spec, cfg.seed, trial);
        if (shared) data.train = *shared;
        results[trial] = run_trial(spec, sweep_cfg, trial, data,
                                   [&](const SweepRecord& r) { writer.row(trial, r); });
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.n_trials;
      }
      writer.finish(trial);
    }
  };
  const auto workers = std::min(cfg.jobs, cfg.n_trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  auto summary = open_output(dir / "summary.csv");
  summary << kSummaryHeader << '\n';
  std::uint32_t best = 0;
  for (std::uint32_t t = 0; t < cfg.n_trials; ++t) {
    for (const auto& p : results[t]->phases) summary << summary_row(t, p) << '\n';
    if (results[t]->test_error < results[best]->test_error) best = t;
  }
  if (!summary.flush()) throw IoError("cannot write summary.csv");

  ModelInfo info{cfg.problem, results[best]->trial_seed, cfg.hash()};
  save_model((dir / "model.json").string(), results[best]->network, info);

  std::vector<std::string> phase_names;
  for (const auto& p : results[0]->phases) phase_names.push_back(p.phase);
  for (std::size_t k = 0; k < phase_names.size(); ++k) {
    double train = 0.0;
    double test = 0.0;
    std::uint32_t perfect = 0;
    for (const auto& r : results) {
      train += r->phases[k].train_error;
      test += r->phases[k].test_error;
      perfect += r->phases[k].perfect;
    }
    out << phase_names[k] << ": n_perfect " << perfect << "/" << cfg.n_trials << ", mean train error "
        << fixed(train / cfg.n_trials) << ", mean test error " << fixed(test / cfg.n_trials)
        << (results[0]->exhaustive_test ? " (exhaustive)" : " (sampled)") << '\n';
  }
  out << "best trial " << best << " saved to " << (dir / "model.json").string() << '\n';
  return kExitOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out) {
  const auto model = load_model(opts.model);
  const Network& net = model.network;
  const Dim c = net.label_count();
  std::vector<std::vector<std::uint64_t>> confusion(c, std::vector<std::uint64_t>(c, 0));
  std::uint64_t total = 0;
  std::uint64_t correct = 0;
  const auto tally = [&](Digit truth, Digit predicted) {
    if (truth >= c) throw FormatError("label " + std::to_string(truth) + " outside the model's label range");
    ++confusion[truth][predicted];
    ++total;
    correct += truth == predicted;
  };

  if (opts.exhaustive) {
    const Problem problem = opts.problem.value_or(model.info.problem);
    if (problem == Problem::custom) throw ConfigError("exhaustive evaluation needs the problem", "problem");
    if (site_dim_of(problem) != net.site_bases().front() || label_count_of(problem) != c) {
      throw FormatError("model shape does not fit problem " + to_string(problem));
    }
    std::uint64_t space = 1;
    for (Dim b : net.site_bases()) {
      space *= b;
      if (space > kExhaustiveCap) {
        throw SizeCapError("exhaustive evaluation exceeds 2^20 inputs; evaluate on a sampled dataset instead");
      }
    }
    std::vector<Digit> digits(net.site_bases().size());
    std::vector<Digit> values(net.edge_count());
    for (Composite x = 0; x < space; ++x) {
      decompose_into(x, net.site_bases(), digits);
      net.evaluate_edges(digits, values);
      tally(ground_truth(problem, digits), values[net.output_edge()]);
    }
  } else if (opts.dataset) {
    const auto data = load_dataset(*opts.dataset);
    if (data.sites != net.site_bases().size() || data.site_dim != net.site_bases().front()) {
      throw FormatError("dataset shape does not match the model");
    }
    for (const auto& s : data.samples) tally(s.label, forward_evaluate(net, s.state));
  } else {
    throw ConfigError("eval needs a dataset or --exhaustive", "data");
  }
  if (total == 0) throw FormatError("nothing to evaluate");

  out << "accuracy " << fixed(static_cast<double>(correct) / static_cast<double>(total)) << " (" << correct << "/"
      << total << ")\n";
  out << "confusion (rows: true label, columns: predicted)\n";
  for (Dim t = 0; t < c; ++t) {
    out << t << ":";
    for (Dim p = 0; p < c; ++p) out << ' ' << confusion[t][p];
    out << '\n';
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out) {
  const auto checks = run_verification(opts);
  bool ok = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_summarize(const std::string& path, std::ostream& out) {
  fs::path metrics_path(path);
  if (fs::is_directory(metrics_path)) metrics_path /= "metrics.csv";
  std::ifstream in(metrics_path, std::ios::binary);
  if (!in) throw IoError("cannot read " + metrics_path.string());
  const auto rows = read_metrics(in);
  if (rows.empty()) throw FormatError("metrics file has no rows");

  std::map<std::uint32_t, const MetricsRow*> last;
  for (const auto& r : rows) last[r.trial] = &r;
  double mean = 0.0;
  out << "trial sweeps phase n_correct train_error\n";
  for (const auto& [trial, r] : last) {
    out << trial << ' ' << r->sweep << ' ' << r->phase << ' ' << r->n_correct << ' ' << fixed(r->train_error) << '\n';
    mean += r->train_error;
  }
  out << "trials " << last.size() << ", mean final train error " << fixed(mean / last.size()) << '\n';

  const auto summary_path = metrics_path.parent_path() / "summary.csv";
  std::ifstream sin(summary_path, std::ios::binary);
  if (!sin) return kExitOk;
  std::string line;
  if (!std::getline(sin, line) || line != kSummaryHeader) throw FormatError("summary.csv lacks its header");
  struct Totals {
    std::uint32_t trials = 0;
    std::uint32_t perfect = 0;
    double test = 0.0;
  };
  std::vector<std::pair<std::string, Totals>> phases;
  while (std::getline(sin, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw FormatError("expected 8 columns in summary.csv");
    auto it = std::find_if(phases.begin(), phases.end(), [&](const auto& p) { return p.first == cells[1]; });
    if (it == phases.end()) it = phases.insert(phases.end(), {cells[1], Totals{}});
    ++it->second.trials;
    it->second.perfect += cells[4] == "1";
    it->second.test += std::strtod(cells[3].c_str(), nullptr);
  }
  for (const auto& [name, t] : phases) {
    out << name << ": n_perfect " << t.perfect << "/" << t.trials << ", mean test error " << fixed(t.test / t.trials)
        << '\n';
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e, std::ostream& err) {
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    err << "config error";
    if (!c->field().empty()) err << " [" << c->field() << "]";
    err << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DomainError*>(&e)) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (dynamic_cast<const FormatError*>(&e)) {
    err << "format error: " << e.what() << '\n';
    return kExitFormat;
  }
  if (dynamic_cast<const SizeCapError*>(&e)) {
    err << "size cap: " << e.what() << '\n';
    return kExitSizeCap;
  }
  err << "internal error: " << e.what() << '\n';
  return kExitVerifyFailed;
}

}  // namespace nsp
