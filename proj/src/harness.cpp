#include "galclean/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace galclean {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

KvConfig KvConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    cfg.values_[key] = value;
    cfg.consumed_[key] = false;
  }
  return cfg;
}

void KvConfig::override_value(const std::string& key, const std::string& value) {
  values_[key] = value;
  consumed_[key] = false;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  return it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  double v = 0.0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
    throw ConfigError("config key '" + key + "': bad number '" + it->second + "'");
  return v;
}

int KvConfig::get_int(const std::string& key, int fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  int v = 0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
    throw ConfigError("config key '" + key + "': bad integer '" + it->second + "'");
  return v;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key '" + key + "': bad boolean '" + it->second + "'");
}

std::vector<double> KvConfig::get_double_list(const std::string& key, const std::vector<double>& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  std::vector<double> out;
  for (const auto& piece : split(it->second, ',')) {
    const std::string p = trim(piece);
    if (p.empty()) continue;
    double v = 0.0;
    auto res = std::from_chars(p.data(), p.data() + p.size(), v);
    if (res.ec != std::errc{} || res.ptr != p.data() + p.size())
      throw ConfigError("config key '" + key + "': bad number '" + p + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<std::uint64_t> KvConfig::get_seed_list(const std::string& key, const std::vector<std::uint64_t>& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  std::vector<std::uint64_t> out;
  for (const auto& piece : split(it->second, ',')) {
    const std::string p = trim(piece);
    if (p.empty()) continue;
    std::uint64_t v = 0;
    auto res = std::from_chars(p.data(), p.data() + p.size(), v);
    if (res.ec != std::errc{} || res.ptr != p.data() + p.size())
      throw ConfigError("config key '" + key + "': bad seed '" + p + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

void KvConfig::fail_on_unconsumed() const {
  std::string unknown;
  for (const auto& [key, used] : consumed_)
    if (!used) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("config: unknown key(s): " + unknown);
}

Method method_from_string(const std::string& s) {
  if (s == "galclean") return Method::galclean;
  if (s == "galclean_plus") return Method::galclean_plus;
  if (s == "random") return Method::random;
  if (s == "random_precleaned") return Method::random_precleaned;
  throw ConfigError("unknown method '" + s + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::galclean: return "galclean";
    case Method::galclean_plus: return "galclean_plus";
    case Method::random: return "random";
    case Method::random_precleaned: return "random_precleaned";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_kv(KvConfig& kv) {
  ExperimentConfig cfg;
  cfg.dataset = kv.get_string("dataset", cfg.dataset);
  cfg.synth.classes = kv.get_int("synth.classes", cfg.synth.classes);
  cfg.synth.per_class = kv.get_int("synth.per_class", cfg.synth.per_class);
  cfg.synth.p_in = kv.get_double("synth.p_in", cfg.synth.p_in);
  cfg.synth.p_out = kv.get_double("synth.p_out", cfg.synth.p_out);
  cfg.synth.feature_dim = kv.get_int("synth.feature_dim", cfg.synth.feature_dim);
  cfg.synth.feature_noise = kv.get_double("synth.feature_noise", cfg.synth.feature_noise);
  cfg.synth.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", static_cast<int>(cfg.synth.seed)));

  cfg.noise_mechanism = kv.get_string("noise.mechanism", cfg.noise_mechanism);
  if (cfg.noise_mechanism != "random" && cfg.noise_mechanism != "none")
    throw ConfigError("noise.mechanism must be 'random' or 'none'");
  cfg.noise_ratios = kv.get_double_list("noise.ratios", cfg.noise_ratios);
  for (double r : cfg.noise_ratios)
    if (r < 0.0) throw ConfigError("noise.ratios must be >= 0");

  cfg.method = method_from_string(kv.get_string("method", to_string(cfg.method)));
  cfg.gal.scenario = scenario_from_string(kv.get_string("scenario", to_string(cfg.gal.scenario)));
  cfg.seeds = kv.get_seed_list("seeds", cfg.seeds);
  cfg.output_dir = kv.get_string("output", cfg.output_dir);
  cfg.budget_per_class = kv.get_int("budget_per_class", cfg.budget_per_class);
  if (kv.has("budget")) cfg.budget_absolute = kv.get_int("budget", 0);
  cfg.preclean_threshold = kv.get_double("preclean_threshold", cfg.preclean_threshold);
  cfg.valid_size = kv.get_int("valid_size", cfg.valid_size);
  cfg.test_size = kv.get_int("test_size", cfg.test_size);
  cfg.jobs = kv.get_int("jobs", cfg.jobs);

  cfg.gal.select.batch_size = kv.get_int("select.batch_size", cfg.gal.select.batch_size);
  cfg.gal.select.coverage_factor = kv.get_double("select.coverage_factor", cfg.gal.select.coverage_factor);
  cfg.gal.select.beta = kv.get_double("select.beta", cfg.gal.select.beta);
  cfg.gal.select.kmeans_iters = kv.get_int("select.kmeans_iters", cfg.gal.select.kmeans_iters);
  cfg.gal.select.global_argmin = kv.get_bool("select.global_argmin", cfg.gal.select.global_argmin);

  cfg.gal.repr.alpha = kv.get_double("repr.alpha", cfg.gal.repr.alpha);
  cfg.gal.repr.tau = kv.get_double("repr.tau", cfg.gal.repr.tau);
  cfg.gal.repr.epochs = kv.get_int("repr.epochs", cfg.gal.repr.epochs);
  cfg.gal.repr.hidden_dim = kv.get_int("repr.hidden_dim", cfg.gal.repr.hidden_dim);
  cfg.gal.repr.embed_dim = kv.get_int("repr.embed_dim", cfg.gal.repr.embed_dim);
  cfg.gal.repr.negatives_per_node = kv.get_int("repr.negatives_per_node", cfg.gal.repr.negatives_per_node);
  cfg.gal.repr.full_negative_limit = kv.get_int("repr.full_negative_limit", cfg.gal.repr.full_negative_limit);
  cfg.gal.repr.warm_start = kv.get_bool("repr.warm_start", cfg.gal.repr.warm_start);

  cfg.gal.cleaning.kappa = kv.get_double("cleaning.kappa", cfg.gal.cleaning.kappa);
  cfg.gal.cleaning.edge_epochs = kv.get_int("cleaning.edge_epochs", cfg.gal.cleaning.edge_epochs);
  cfg.gal.cleaning.hidden_dim = kv.get_int("cleaning.hidden_dim", cfg.gal.cleaning.hidden_dim);
  cfg.gal.cleaning.z_dim = kv.get_int("cleaning.z_dim", cfg.gal.cleaning.z_dim);
  cfg.gal.cleaning.warm_start = kv.get_bool("cleaning.warm_start", cfg.gal.cleaning.warm_start);

  cfg.gal.refinement_iters = kv.get_int("refinement_iters", cfg.gal.refinement_iters);
  cfg.gal.refine_pseudo_in_classification =
      kv.get_bool("refine_pseudo_in_classification", cfg.gal.refine_pseudo_in_classification);

  cfg.gcn.hidden_dim = kv.get_int("gcn.hidden_dim", cfg.gcn.hidden_dim);
  cfg.gcn.max_epochs = kv.get_int("gcn.max_epochs", cfg.gcn.max_epochs);
  cfg.gcn.patience = kv.get_int("gcn.patience", cfg.gcn.patience);

  kv.fail_on_unconsumed();

  if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  return cfg;
}

std::string result_csv_header(bool with_setting) {
  std::string h =
      "dataset,method,scenario,noise_ratio,seed,budget,test_accuracy,runtime_seconds,"
      "final_mean_clean_edge_weight,final_mean_noisy_edge_weight";
  if (with_setting) h += ",setting";
  return h;
}

std::string to_csv_row(const ResultRow& row, bool with_setting) {
  std::string s = row.dataset + "," + row.method + "," + row.scenario + "," + format_double(row.noise_ratio) + "," +
                  std::to_string(row.seed) + "," + std::to_string(row.budget) + "," +
                  format_double(row.test_accuracy) + "," + format_double(row.runtime_seconds) + "," +
                  format_double(row.final_mean_clean_edge_weight) + "," +
                  format_double(row.final_mean_noisy_edge_weight);
  if (with_setting) s += "," + row.setting;
  return s;
}

ResultRow result_row_from_csv(const std::string& line, bool with_setting) {
  const auto cells = split(line, ',');
  const std::size_t expect = with_setting ? 11 : 10;
  if (cells.size() != expect) throw std::runtime_error("result row: wrong column count: " + line);
  ResultRow r;
  r.dataset = cells[0];
  r.method = cells[1];
  r.scenario = cells[2];
  r.noise_ratio = std::strtod(cells[3].c_str(), nullptr);
  r.seed = std::strtoull(cells[4].c_str(), nullptr, 10);
  r.budget = std::atoi(cells[5].c_str());
  r.test_accuracy = std::strtod(cells[6].c_str(), nullptr);
  r.runtime_seconds = std::strtod(cells[7].c_str(), nullptr);
  r.final_mean_clean_edge_weight = std::strtod(cells[8].c_str(), nullptr);
  r.final_mean_noisy_edge_weight = std::strtod(cells[9].c_str(), nullptr);
  if (with_setting) r.setting = cells[10];
  return r;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows) {
  std::map<std::string, AggregateRow> groups;
  std::map<std::string, std::vector<double>> accs;
  for (const ResultRow& r : rows) {
    const std::string key = r.dataset + "|" + r.method + "|" + r.scenario + "|" + format_double(r.noise_ratio) + "|" +
                            std::to_string(r.budget) + "|" + r.setting;
    auto& g = groups[key];
    g.dataset = r.dataset;
    g.method = r.method;
    g.scenario = r.scenario;
    g.noise_ratio = r.noise_ratio;
    g.budget = r.budget;
    g.setting = r.setting;
    accs[key].push_back(r.test_accuracy);
  }
  std::vector<AggregateRow> out;
  for (auto& [key, g] : groups) {
    const auto& a = accs[key];
    g.runs = static_cast<int>(a.size());
    double sum = 0.0;
    for (double v : a) sum += v;
    g.mean_accuracy = sum / g.runs;
    double var = 0.0;
    for (double v : a) var += (v - g.mean_accuracy) * (v - g.mean_accuracy);
    g.std_accuracy = g.runs > 1 ? std::sqrt(var / (g.runs - 1)) : 0.0;
    out.push_back(g);
  }
  return out;
}

LoadedData load_dataset(const ExperimentConfig& cfg) {
  LoadedData data;
  if (cfg.dataset == "synth") {
    data.bundle = generate_sbm(cfg.synth.classes, cfg.synth.per_class, cfg.synth.p_in, cfg.synth.p_out,
                               cfg.synth.feature_dim, cfg.synth.feature_noise, cfg.synth.seed);
    data.name = "synth";
  } else {
    if (!std::filesystem::is_directory(cfg.dataset))
      throw ConfigError("dataset path not found: " + cfg.dataset);
    data.bundle = load_bundle(cfg.dataset);
    data.name = std::filesystem::path(cfg.dataset).filename().string();
    if (data.name.empty()) data.name = cfg.dataset;
  }
  return data;
}

namespace {

json trace_to_json(const RunTrace& trace) {
  json arr = json::array();
  for (const IterationRecord& rec : trace.iterations) {
    json j{{"iteration", rec.iteration},       {"refinement", rec.refinement}, {"selected", rec.selected},
           {"labeled_size", rec.labeled_size}, {"repr_loss", rec.repr_loss},   {"edge_loss", rec.edge_loss},
           {"cleaned", rec.cleaned}};
    if (rec.mean_clean_weight) j["mean_clean_weight"] = *rec.mean_clean_weight;
    if (rec.mean_noisy_weight) j["mean_noisy_weight"] = *rec.mean_noisy_weight;
    if (rec.downstream_accuracy) j["downstream_accuracy"] = *rec.downstream_accuracy;
    arr.push_back(std::move(j));
  }
  return arr;
}

struct CellSeeds {
  std::uint64_t noise;
  std::uint64_t split;
  std::uint64_t run;
};

// Data-related seeds depend only on (seed, ratio) so that method and
// hyper-parameter arms see identical noise and splits.
CellSeeds cell_seeds(std::uint64_t seed, double ratio) {
  const std::uint64_t ratio_bits = static_cast<std::uint64_t>(std::llround(ratio * 1e6));
  return {mix_seed(seed, 0xD001 + ratio_bits), mix_seed(seed, 0xD002 + ratio_bits), mix_seed(seed, 0xD003 + ratio_bits)};
}

}  // namespace

CellOutcome run_cell(const ExperimentConfig& cfg, const LoadedData& data, double noise_ratio, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const CellSeeds seeds = cell_seeds(seed, noise_ratio);

  ExperimentConfig ecfg = cfg;
  if (ecfg.method == Method::random_precleaned) ecfg.gal.scenario = Scenario::precleaned;
  const Scenario scenario = ecfg.gal.scenario;

  const WeightedGraph& clean = data.bundle.graph;
  WeightedGraph noisy = clean;
  std::vector<std::pair<int, int>> provenance;
  if (cfg.noise_mechanism == "random" && noise_ratio > 0.0) {
    auto injected = inject_random_interclass_edges(clean, data.bundle.labels, noise_ratio, seeds.noise);
    noisy = std::move(injected.graph);
    provenance = std::move(injected.added);
  }

  WeightedGraph precleaned;
  const WeightedGraph* al_graph = nullptr;
  switch (scenario) {
    case Scenario::noise_free: al_graph = &clean; break;
    case Scenario::perturbed_data_only:
    case Scenario::perturbed_full: al_graph = &noisy; break;
    case Scenario::precleaned:
      precleaned = jaccard_preclean(noisy, data.bundle.features, cfg.preclean_threshold);
      al_graph = &precleaned;
      break;
  }

  const SplitSet splits = make_splits(data.bundle.labels, seeds.split, cfg.valid_size, cfg.test_size);
  const int budget = cfg.budget_absolute.value_or(cfg.budget_per_class * data.bundle.labels.num_classes);
  ecfg.gal.budget = budget;

  DataView view;
  view.graph = al_graph;
  view.x = &data.bundle.features;
  view.labels = &data.bundle.labels;
  view.noise_provenance = provenance.empty() ? nullptr : &provenance;

  LabelOracle oracle(data.bundle.labels, budget);
  GalcleanResult result;
  switch (ecfg.method) {
    case Method::galclean:
      result = run_galclean(view, splits, oracle, ecfg.gal, seeds.run);
      break;
    case Method::galclean_plus:
      result = run_galclean(view, splits, oracle, ecfg.gal, seeds.run);
      run_refinement(result, view, ecfg.gal, ecfg.gal.refinement_iters, seeds.run);
      break;
    case Method::random:
    case Method::random_precleaned:
      result = run_random_baseline(view, splits, oracle, ecfg.gal, seeds.run);
      break;
  }

  const bool cleans = ecfg.method == Method::galclean || ecfg.method == Method::galclean_plus;
  const WeightedGraph* eval_graph = nullptr;
  switch (scenario) {
    case Scenario::noise_free:
    case Scenario::perturbed_data_only: eval_graph = &clean; break;
    case Scenario::perturbed_full:
    case Scenario::precleaned: eval_graph = cleans ? &result.graph : al_graph; break;
  }

  const GcnParams gcn =
      train_gcn(*eval_graph, data.bundle.features, result.labeled, data.bundle.labels, splits.valid, cfg.gcn, seeds.run);
  const double accuracy = evaluate(gcn, *eval_graph, data.bundle.features, splits.test, data.bundle.labels);

  CellOutcome outcome;
  outcome.trace = std::move(result.trace);
  if (!outcome.trace.iterations.empty()) outcome.trace.iterations.back().downstream_accuracy = accuracy;
  outcome.row.dataset = data.name;
  outcome.row.method = to_string(ecfg.method);
  outcome.row.scenario = to_string(scenario);
  outcome.row.noise_ratio = noise_ratio;
  outcome.row.seed = seed;
  outcome.row.budget = budget;
  outcome.row.test_accuracy = accuracy;
  if (!outcome.trace.iterations.empty()) {
    const auto& last = outcome.trace.iterations.back();
    if (last.mean_clean_weight) outcome.row.final_mean_clean_edge_weight = *last.mean_clean_weight;
    if (last.mean_noisy_weight) outcome.row.final_mean_noisy_edge_weight = *last.mean_noisy_weight;
  }
  outcome.row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

namespace {

struct CellJob {
  ExperimentConfig cfg;
  double ratio;
  std::uint64_t seed;
  std::string setting;
};

std::vector<CellOutcome> run_jobs(const std::vector<CellJob>& jobs, const LoadedData& data, int parallel) {
  std::vector<CellOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        outcomes[i] = run_cell(jobs[i].cfg, data, jobs[i].ratio, jobs[i].seed);
        outcomes[i].row.setting = jobs[i].setting;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(parallel, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

json config_echo(const ExperimentConfig& cfg) {
  return json{{"dataset", cfg.dataset},
              {"method", to_string(cfg.method)},
              {"scenario", to_string(cfg.gal.scenario)},
              {"budget_per_class", cfg.budget_per_class},
              {"budget_absolute", cfg.budget_absolute ? json(*cfg.budget_absolute) : json(nullptr)},
              {"preclean_threshold", cfg.preclean_threshold},
              {"repr", {{"alpha", cfg.gal.repr.alpha},
                        {"tau", cfg.gal.repr.tau},
                        {"epochs", cfg.gal.repr.epochs},
                        {"hidden_dim", cfg.gal.repr.hidden_dim},
                        {"embed_dim", cfg.gal.repr.embed_dim},
                        {"warm_start", cfg.gal.repr.warm_start}}},
              {"select", {{"batch_size", cfg.gal.select.batch_size},
                          {"coverage_factor", cfg.gal.select.coverage_factor},
                          {"beta", cfg.gal.select.beta},
                          {"kmeans_iters", cfg.gal.select.kmeans_iters}}},
              {"cleaning", {{"kappa", cfg.gal.cleaning.kappa},
                            {"edge_epochs", cfg.gal.cleaning.edge_epochs},
                            {"warm_start", cfg.gal.cleaning.warm_start}}},
              {"refinement_iters", cfg.gal.refinement_iters},
              {"gcn", {{"hidden_dim", cfg.gcn.hidden_dim},
                       {"max_epochs", cfg.gcn.max_epochs},
                       {"patience", cfg.gcn.patience}}}};
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<CellJob>& jobs,
                   const std::vector<CellOutcome>& outcomes, const std::string& results_name, bool with_setting) {
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  std::string csv = result_csv_header(with_setting) + "\n";
  std::vector<ResultRow> rows;
  rows.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    csv += to_csv_row(o.row, with_setting) + "\n";
    rows.push_back(o.row);
  }
  write_file_atomic(out_dir / (results_name + ".csv"), csv);

  std::string agg = "dataset,method,scenario,noise_ratio,budget,setting,runs,mean_accuracy,std_accuracy\n";
  for (const AggregateRow& g : aggregate_rows(rows))
    agg += g.dataset + "," + g.method + "," + g.scenario + "," + format_double(g.noise_ratio) + "," +
           std::to_string(g.budget) + "," + g.setting + "," + std::to_string(g.runs) + "," +
           format_double(g.mean_accuracy) + "," + format_double(g.std_accuracy) + "\n";
  write_file_atomic(out_dir / (results_name + "_aggregate.csv"), agg);

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    json j{{"config", config_echo(jobs[i].cfg)},
           {"method", outcomes[i].row.method},
           {"scenario", outcomes[i].row.scenario},
           {"noise_ratio", outcomes[i].row.noise_ratio},
           {"seed", outcomes[i].row.seed},
           {"budget", outcomes[i].row.budget},
           {"setting", outcomes[i].row.setting},
           {"iterations", trace_to_json(outcomes[i].trace)},
           {"final", {{"test_accuracy", outcomes[i].row.test_accuracy},
                      {"runtime_seconds", outcomes[i].row.runtime_seconds}}}};
    std::string name = "trace_" + outcomes[i].row.method + "_r" + format_double(outcomes[i].row.noise_ratio) + "_s" +
                       std::to_string(outcomes[i].row.seed);
    if (!outcomes[i].row.setting.empty()) name += "_" + outcomes[i].row.setting;
    write_file_atomic(out_dir / (name + ".json"), j.dump(2) + "\n");
  }
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  const LoadedData data = load_dataset(cfg);
  std::vector<CellJob> jobs;
  for (double ratio : cfg.noise_ratios)
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({cfg, ratio, seed, ""});
  const auto outcomes = run_jobs(jobs, data, cfg.jobs);
  write_outputs(cfg, jobs, outcomes, "results", false);
  std::vector<ResultRow> rows;
  for (const auto& o : outcomes) rows.push_back(o.row);
  return rows;
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "cleanliness") return Ablation::cleanliness;
  if (s == "refinement") return Ablation::refinement;
  if (s == "kappa_sweep") return Ablation::kappa_sweep;
  if (s == "budget_sweep") return Ablation::budget_sweep;
  throw ConfigError("unknown ablation '" + s + "' (expected cleanliness, refinement, kappa_sweep, budget_sweep)");
}

std::vector<ResultRow> run_ablation(const ExperimentConfig& cfg, Ablation which) {
  const LoadedData data = load_dataset(cfg);
  std::vector<CellJob> jobs;
  std::string name;
  switch (which) {
    case Ablation::cleanliness: {
      name = "ablate_cleanliness";
      ExperimentConfig without = cfg;
      without.gal.select.beta = 0.0;
      for (double ratio : cfg.noise_ratios)
        for (std::uint64_t seed : cfg.seeds) {
          jobs.push_back({cfg, ratio, seed, "with_cscore"});
          jobs.push_back({without, ratio, seed, "without_cscore"});
        }
      break;
    }
    case Ablation::refinement: {
      name = "ablate_refinement";
      ExperimentConfig base = cfg;
      base.method = Method::galclean;
      ExperimentConfig plus = cfg;
      plus.method = Method::galclean_plus;
      for (double ratio : cfg.noise_ratios)
        for (std::uint64_t seed : cfg.seeds) {
          jobs.push_back({base, ratio, seed, "galclean"});
          jobs.push_back({plus, ratio, seed, "galclean_plus"});
        }
      break;
    }
    case Ablation::kappa_sweep: {
      name = "ablate_kappa";
      for (double kappa : {0.0, 0.5, 0.7, 0.9, 0.99}) {
        ExperimentConfig variant = cfg;
        variant.gal.cleaning.kappa = kappa;
        for (double ratio : cfg.noise_ratios)
          for (std::uint64_t seed : cfg.seeds) jobs.push_back({variant, ratio, seed, "kappa=" + format_double(kappa)});
      }
      break;
    }
    case Ablation::budget_sweep: {
      name = "ablate_budget";
      for (int per_class : {5, 8, 10, 15, 20}) {
        ExperimentConfig variant = cfg;
        variant.budget_per_class = per_class;
        variant.budget_absolute.reset();
        for (double ratio : cfg.noise_ratios)
          for (std::uint64_t seed : cfg.seeds)
            jobs.push_back({variant, ratio, seed, "budget=" + std::to_string(per_class) + "_per_class"});
      }
      break;
    }
  }
  const auto outcomes = run_jobs(jobs, data, cfg.jobs);
  write_outputs(cfg, jobs, outcomes, name, true);
  std::vector<ResultRow> rows;
  for (const auto& o : outcomes) rows.push_back(o.row);
  return rows;
}

void write_synth_bundle(const SynthSpec& spec, double noise_ratio, std::uint64_t noise_seed,
                        const std::filesystem::path& out_dir) {
  Bundle bundle = generate_sbm(spec.classes, spec.per_class, spec.p_in, spec.p_out, spec.feature_dim,
                               spec.feature_noise, spec.seed);
  std::vector<std::pair<int, int>> added;
  if (noise_ratio > 0.0) {
    auto injected = inject_random_interclass_edges(bundle.graph, bundle.labels, noise_ratio, noise_seed);
    bundle.graph = std::move(injected.graph);
    added = std::move(injected.added);
  }
  save_bundle(out_dir, bundle);
  std::string csv = "src,dst\n";
  for (auto [u, v] : added) csv += std::to_string(u) + "," + std::to_string(v) + "\n";
  write_file_atomic(out_dir / "noise_edges.csv", csv);
}

void clean_bundle_to_csv(const ExperimentConfig& cfg, const std::filesystem::path& out_csv) {
  const LoadedData data = load_dataset(cfg);
  const std::uint64_t seed = cfg.seeds.front();
  const CellSeeds seeds = cell_seeds(seed, 0.0);
  const SplitSet splits = make_splits(data.bundle.labels, seeds.split, cfg.valid_size, cfg.test_size);
  const int budget = cfg.budget_absolute.value_or(cfg.budget_per_class * data.bundle.labels.num_classes);

  GalcleanConfig gal = cfg.gal;
  gal.budget = budget;
  DataView view;
  view.graph = &data.bundle.graph;
  view.x = &data.bundle.features;
  view.labels = &data.bundle.labels;

  LabelOracle oracle(data.bundle.labels, budget);
  GalcleanResult result = run_galclean(view, splits, oracle, gal, seeds.run);
  if (cfg.method == Method::galclean_plus) run_refinement(result, view, gal, gal.refinement_iters, seeds.run);

  std::string csv = "src,dst,weight\n";
  char buf[64];
  for (const Edge& e : result.graph.edge_list()) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6f\n", e.u, e.v, e.weight);
    csv += buf;
  }
  write_file_atomic(out_csv, csv);
}

}  // namespace galclean
