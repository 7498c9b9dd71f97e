#include "rwclust/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "rwclust/clusterers.hpp"
#include "rwclust/dataset_io.hpp"
#include "rwclust/random.hpp"
#include "rwclust/recovery.hpp"

namespace rwclust {

using nlohmann::json;

namespace {

// JSON has no inf/nan; spell them as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ParseError("expected a number, got '" + s + "'");
}

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json to_json(const TestOutcome& t) {
  return {{"method", to_string(t.method)}, {"statistic", num(t.statistic)}, {"threshold", num(t.threshold)},
          {"reject", t.reject}};
}

TestOutcome test_outcome_from_json(const json& j) {
  TestOutcome t;
  t.method = test_method_from_string(j.at("method").get<std::string>());
  t.statistic = num_from(j.at("statistic"));
  t.threshold = num_from(j.at("threshold"));
  t.reject = j.at("reject").get<bool>();
  return t;
}

json to_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", num(s.mean)}, {"median", num(s.median)}, {"ci", to_json(s.ci)}};
}

json to_json(const TestError& e) {
  return {{"type1", e.type1}, {"type2", e.type2}, {"sum", e.sum}, {"type1_ci", to_json(e.type1_ci)},
          {"type2_ci", to_json(e.type2_ci)}};
}

std::optional<Summary> summarize(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  Summary s;
  s.count = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(v.size()));
  s.ci = {s.mean - half, s.mean + half};
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string axis_name(StrengthAxis a) {
  switch (a) {
    case StrengthAxis::alpha: return "alpha";
    case StrengthAxis::r: return "r";
    case StrengthAxis::alpha_relative: return "alpha_relative";
  }
  return "alpha";
}

StrengthAxis axis_from(const std::string& s) {
  for (StrengthAxis a : {StrengthAxis::alpha, StrengthAxis::r, StrengthAxis::alpha_relative}) {
    if (axis_name(a) == s) return a;
  }
  throw std::invalid_argument("unknown strength axis: " + s);
}

class TrialRunner {
 public:
  explicit TrialRunner(const TrialSpec& spec)
      : spec_(spec),
        cal_(calibrate(spec.params)),
        noise_(spec.noise.materialize(spec.params.p)),
        ds_(gen_dataset(spec.params, noise_, spec.seed, {spec.null_signal})) {}

  const Dataset& data() const { return ds_; }
  std::size_t n() const { return cal_.n; }

  MethodOutcome evaluate(const MethodSpec& m) {
    MethodOutcome o;
    o.id = m.id;
    try {
      switch (method_family(m.id)) {
        case MethodFamily::clustering: record_clustering(o, cluster(m)); break;
        case MethodFamily::recovery: record_recovery(o, recover(m)); break;
        case MethodFamily::test: run_test(o, m); break;
        case MethodFamily::pipeline: {
          const Pipeline order =
              m.id == "cluster_then_recover" ? Pipeline::cluster_then_recover : Pipeline::recover_then_cluster;
          PipelineResult r = run_pipeline(ds_.X, order, q_of(m));
          record_clustering(o, r.clustering);
          record_recovery(o, r.recovery);
          break;
        }
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  }

 private:
  double expected() const { return cal_.expected_signals(spec_.params.p); }

  std::size_t N_of(const MethodSpec& m) const {
    if (m.N) return *m.N;
    const auto N = static_cast<std::size_t>(std::ceil(expected()));
    return std::clamp<std::size_t>(N, 1, spec_.params.p);
  }

  double q_of(const MethodSpec& m) const {
    if (m.q) return *m.q;
    if (const auto* s = std::get_if<LogAdjustedStrength>(&spec_.params.strength)) {
      return q_star(spec_.params.theta, spec_.params.beta, s->r);
    }
    return 3.0;
  }

  GreedyOptions greedy_of(const MethodSpec& m) const {
    return {m.restarts, derive_seed(spec_.seed, StreamTag::greedy_restart)};
  }

  SolverChoice solver_of(const MethodSpec& m) const {
    SolverChoice c;
    c.budget = m.budget;
    c.greedy = greedy_of(m);
    if (m.solver == "exact") {
      c.exact = true;
    } else if (m.solver == "greedy") {
      c.exact = false;
    } else if (m.solver == "auto") {
      c.exact = binomial(spec_.params.p, N_of(m)) <= m.budget;
    } else {
      throw std::invalid_argument("unknown solver: " + m.solver);
    }
    return c;
  }

  ClusterResult cluster(const MethodSpec& m) {
    switch (method_from_string(m.id)) {
      case Method::simple_agg: return simple_aggregation(ds_.X);
      case Method::classical_pca: return classical_pca(ds_.X);
      case Method::if_pca: return if_pca(ds_.X, q_of(m));
      case Method::sparse_agg: {
        const SolverChoice c = solver_of(m);
        return c.exact ? sparse_aggregation_exact(ds_.X, N_of(m), c.budget)
                       : sparse_aggregation_greedy(ds_.X, N_of(m), c.greedy);
      }
      case Method::signed_sparse_agg: {
        SignedOptions opt;
        opt.budget = m.solver == "greedy" ? 0 : m.budget;
        opt.allow_greedy = m.solver != "exact";
        opt.greedy = greedy_of(m);
        return signed_sparse_aggregation(ds_.X, N_of(m), opt);
      }
    }
    throw std::logic_error("unhandled clustering method");
  }

  RecoveryResult recover(const MethodSpec& m) {
    switch (recovery_method_from_string(m.id)) {
      case RecoveryMethod::sa_star: return recover_sa_star(ds_.X);
      case RecoveryMethod::if_star: return recover_if_star(ds_.X);
      case RecoveryMethod::sa_N: return recover_sa_N(ds_.X, N_of(m), solver_of(m));
      case RecoveryMethod::if_q: return recover_if_q(ds_.X, q_of(m));
      case RecoveryMethod::signed_if: return recover_signed_pca(ds_.X);
    }
    throw std::logic_error("unhandled recovery method");
  }

  void record_clustering(MethodOutcome& o, const ClusterResult& r) const {
    o.clustering_hamming = hamming_clustering(r.labels, *ds_.labels);
    if (r.singular) o.cosine = cos_angle(r.singular->vector, *ds_.labels);
    if (r.selected) o.selected_count = r.selected->size();
    o.fallback_used = o.fallback_used || r.fallback_used;
  }

  void record_recovery(MethodOutcome& o, const RecoveryResult& r) const {
    o.recovery_hamming = hamming_recovery(r.support, *ds_.support, expected());
    o.recovery_hamming_realized = hamming_recovery_realized(r.support, *ds_.support);
    if (r.signs) o.signed_hamming = hamming_recovery_signed(*r.signs, *ds_.mu, expected());
    if (!o.selected_count) o.selected_count = r.support.size();
    if (r.clustering && !o.clustering_hamming) record_clustering(o, *r.clustering);
  }

  const Eigen::MatrixXd& null_matrix() {
    if (!null_ds_) null_ds_ = gen_dataset(spec_.params, noise_, spec_.seed, {true});
    return null_ds_->X;
  }

  TestOutcome test_on(const Eigen::MatrixXd& X, const MethodSpec& m) {
    switch (test_method_from_string(m.id)) {
      case TestMethod::agg_chi2: return test_simple_agg(X);
      case TestMethod::sparse_agg_l1: return test_sparse_agg(X, N_of(m), solver_of(m));
      case TestMethod::higher_criticism: return higher_criticism(X);
    }
    throw std::logic_error("unhandled test");
  }

  void run_test(MethodOutcome& o, const MethodSpec& m) {
    o.test_alt = test_on(ds_.X, m);
    o.test_null = test_on(null_matrix(), m);
  }

  const TrialSpec& spec_;
  Calibration cal_;
  NoiseSpec noise_;
  Dataset ds_;
  std::optional<Dataset> null_ds_;
};

}  // namespace

MethodFamily method_family(const std::string& id) {
  for (const char* s : {"simple_agg", "sparse_agg", "classical_pca", "if_pca", "signed_sparse_agg"}) {
    if (id == s) return MethodFamily::clustering;
  }
  for (const char* s : {"sa_star", "if_star", "sa_N", "if_q", "signed_if"}) {
    if (id == s) return MethodFamily::recovery;
  }
  for (const char* s : {"agg_chi2", "sparse_agg_l1", "higher_criticism"}) {
    if (id == s) return MethodFamily::test;
  }
  if (id == "cluster_then_recover" || id == "recover_then_cluster") return MethodFamily::pipeline;
  throw std::invalid_argument("unknown method id: " + id);
}

NoiseSpec NoiseConfig::materialize(std::size_t p) const {
  return kind == Kind::white ? NoiseSpec::white() : make_diagonal_coloring(p, coloring_seed);
}

bool TrialRecord::has_errors() const {
  return std::any_of(outcomes.begin(), outcomes.end(), [](const MethodOutcome& o) { return o.error.has_value(); });
}

TrialRecord run_trial(const TrialSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  if (spec.methods.empty()) throw std::invalid_argument("trial spec lists no methods");
  for (const auto& m : spec.methods) method_family(m.id);

  TrialRunner runner(spec);
  TrialRecord rec;
  rec.spec = spec;
  rec.spec_hash = spec_hash(spec);
  rec.n = runner.n();
  rec.realized_signals = runner.data().support->size();
  for (const auto& m : spec.methods) rec.outcomes.push_back(runner.evaluate(m));
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

std::string spec_hash(const TrialSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_json(spec).dump());
  return os.str();
}

json to_json(const MethodSpec& m) {
  json j{{"id", m.id}, {"solver", m.solver}, {"budget", m.budget}, {"restarts", m.restarts}};
  put_opt(j, "q", m.q);
  put_opt(j, "N", m.N);
  return j;
}

MethodSpec method_spec_from_json(const json& j) {
  MethodSpec m;
  if (j.is_string()) {
    m.id = j.get<std::string>();
  } else {
    m.id = j.at("id").get<std::string>();
    m.q = get_opt<double>(j, "q");
    m.N = get_opt<std::size_t>(j, "N");
    m.solver = j.value("solver", std::string("auto"));
    m.budget = j.value("budget", m.budget);
    m.restarts = j.value("restarts", m.restarts);
  }
  method_family(m.id);
  if (m.q && !(*m.q > 0.0)) throw std::invalid_argument("method " + m.id + ": q must be positive");
  if (m.N && *m.N == 0) throw std::invalid_argument("method " + m.id + ": N must be positive");
  return m;
}

namespace {

json to_json(const NoiseConfig& n) {
  return {{"kind", n.kind == NoiseConfig::Kind::white ? "white" : "diagonal"}, {"coloring_seed", n.coloring_seed}};
}

NoiseConfig noise_from_json(const json& j) {
  NoiseConfig n;
  const auto kind = j.value("kind", std::string("white"));
  if (kind == "white") {
    n.kind = NoiseConfig::Kind::white;
  } else if (kind == "diagonal") {
    n.kind = NoiseConfig::Kind::diagonal;
  } else {
    throw std::invalid_argument("unknown noise kind: " + kind);
  }
  n.coloring_seed = j.value("coloring_seed", std::uint64_t{0});
  return n;
}

json methods_json(const std::vector<MethodSpec>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(to_json(m));
  return a;
}

std::vector<MethodSpec> methods_from(const json& j) {
  std::vector<MethodSpec> out;
  for (const auto& m : j) out.push_back(method_spec_from_json(m));
  return out;
}

}  // namespace

json to_json(const TrialSpec& s) {
  return {{"params", to_json(s.params)}, {"noise", to_json(s.noise)}, {"methods", methods_json(s.methods)},
          {"seed", s.seed}, {"null_signal", s.null_signal}};
}

TrialSpec trial_spec_from_json(const json& j) {
  TrialSpec s;
  s.params = params_from_json(j.at("params"));
  if (j.contains("noise")) s.noise = noise_from_json(j["noise"]);
  s.methods = methods_from(j.at("methods"));
  s.seed = j.at("seed").get<std::uint64_t>();
  s.null_signal = j.value("null_signal", false);
  return s;
}

json to_json(const TrialRecord& r) {
  json outs = json::array();
  for (const auto& o : r.outcomes) {
    json jo{{"id", o.id}, {"fallback_used", o.fallback_used}};
    put_opt(jo, "error", o.error);
    put_opt(jo, "clustering_hamming", o.clustering_hamming);
    put_opt(jo, "recovery_hamming", o.recovery_hamming);
    put_opt(jo, "recovery_hamming_realized", o.recovery_hamming_realized);
    put_opt(jo, "signed_hamming", o.signed_hamming);
    put_opt(jo, "cosine", o.cosine);
    put_opt(jo, "selected_count", o.selected_count);
    if (o.test_alt) jo["test_alt"] = to_json(*o.test_alt);
    if (o.test_null) jo["test_null"] = to_json(*o.test_null);
    outs.push_back(std::move(jo));
  }
  return {{"spec_hash", r.spec_hash}, {"spec", to_json(r.spec)}, {"n", r.n},
          {"realized_signals", r.realized_signals}, {"outcomes", std::move(outs)}};
}

TrialRecord trial_record_from_json(const json& j) {
  TrialRecord r;
  try {
    r.spec_hash = j.at("spec_hash").get<std::string>();
    r.spec = trial_spec_from_json(j.at("spec"));
    r.n = j.at("n").get<std::size_t>();
    r.realized_signals = j.at("realized_signals").get<std::size_t>();
    for (const auto& jo : j.at("outcomes")) {
      MethodOutcome o;
      o.id = jo.at("id").get<std::string>();
      o.fallback_used = jo.value("fallback_used", false);
      o.error = get_opt<std::string>(jo, "error");
      o.clustering_hamming = get_opt<double>(jo, "clustering_hamming");
      o.recovery_hamming = get_opt<double>(jo, "recovery_hamming");
      o.recovery_hamming_realized = get_opt<double>(jo, "recovery_hamming_realized");
      o.signed_hamming = get_opt<double>(jo, "signed_hamming");
      o.cosine = get_opt<double>(jo, "cosine");
      o.selected_count = get_opt<std::size_t>(jo, "selected_count");
      if (jo.contains("test_alt")) o.test_alt = test_outcome_from_json(jo["test_alt"]);
      if (jo.contains("test_null")) o.test_null = test_outcome_from_json(jo["test_null"]);
      r.outcomes.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("trial record: ") + e.what());
  }
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

void persist_record(const TrialRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  json j{{"metadata", {{"wall_seconds", rec.wall_seconds}}}, {"record", to_json(rec)}};
  out << j.dump(2) << '\n';
}

TrialRecord load_record(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    TrialRecord r = trial_record_from_json(j.contains("record") ? j["record"] : j);
    if (j.contains("metadata")) r.wall_seconds = j["metadata"].value("wall_seconds", 0.0);
    return r;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ArwParams cell_params(const SweepSpec& sweep, double beta, double strength) {
  ArwParams p;
  p.p = sweep.p;
  p.theta = sweep.theta;
  p.beta = beta;
  p.sign_mix_a = sweep.sign_mix_a;
  switch (sweep.axis) {
    case StrengthAxis::alpha: p.strength = PlainStrength{strength}; break;
    case StrengthAxis::r: p.strength = LogAdjustedStrength{strength}; break;
    case StrengthAxis::alpha_relative: {
      const Variant v = sweep.sign_mix_a > 0.0 ? Variant::signed_mix : Variant::one_sided;
      const double b = boundary({sweep.relative_problem, sweep.relative_kind, v, sweep.theta, beta}).alpha_boundary;
      p.strength = PlainStrength{strength * b};
      break;
    }
  }
  return p;
}

std::uint64_t trial_seed(std::uint64_t master, double beta, double strength, std::size_t rep) {
  const std::uint64_t cell = mix64(std::bit_cast<std::uint64_t>(beta)) ^ mix64(~std::bit_cast<std::uint64_t>(strength));
  return derive_seed(derive_seed(master, StreamTag::sweep_cell, cell), StreamTag::trial, rep);
}

bool SweepResult::has_failures() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) {
    if (c.failed_trials) return true;
    return std::any_of(c.methods.begin(), c.methods.end(), [](const MethodCellSummary& m) { return m.errors > 0; });
  });
}

const MethodCellSummary* SweepResult::find(std::size_t cell, const std::string& id) const {
  for (const auto& m : cells.at(cell).methods) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

SweepResult run_sweep(const SweepSpec& sweep) {
  const auto t0 = std::chrono::steady_clock::now();
  if (sweep.betas.empty() || sweep.strengths.empty()) throw std::invalid_argument("sweep grids must be nonempty");
  if (sweep.reps < 1) throw std::invalid_argument("sweep needs reps >= 1");
  if (sweep.methods.empty()) throw std::invalid_argument("sweep lists no methods");
  const std::size_t n_cells = sweep.betas.size() * sweep.strengths.size();
  const std::size_t total = n_cells * sweep.reps;
  if (total > sweep.max_trials) {
    throw std::invalid_argument("sweep needs " + std::to_string(total) + " trials, over max_trials " +
                                std::to_string(sweep.max_trials));
  }
  if (sweep.designated &&
      std::none_of(sweep.methods.begin(), sweep.methods.end(), [&](const MethodSpec& m) { return m.id == *sweep.designated; })) {
    throw std::invalid_argument("designated method is not among the sweep methods");
  }

  SweepResult result;
  result.spec = sweep;
  result.timestamp = utc_timestamp();
  std::vector<TrialSpec> trials;
  trials.reserve(total);
  for (double beta : sweep.betas) {
    for (double s : sweep.strengths) {
      CellResult cell;
      cell.index = result.cells.size();
      cell.beta = beta;
      cell.strength = s;
      cell.params = cell_params(sweep, beta, s);
      const Calibration cal = calibrate(cell.params);
      cell.alpha = -std::log(cal.tau) / std::log(static_cast<double>(sweep.p));
      const Variant v = sweep.sign_mix_a > 0.0 ? Variant::signed_mix : Variant::one_sided;
      for (Problem pr : {Problem::clustering, Problem::signal_recovery, Problem::hypothesis_testing}) {
        for (BoundKind k : {BoundKind::statistical, BoundKind::ctub}) {
          cell.regions.emplace_back(to_string(pr) + "/" + to_string(k),
                                    to_string(classify(pr, k, v, sweep.theta, beta, cell.alpha)));
        }
      }
      for (std::size_t rep = 0; rep < sweep.reps; ++rep) {
        trials.push_back({cell.params, sweep.noise, sweep.methods, trial_seed(sweep.seed, beta, s, rep), false});
      }
      result.cells.push_back(std::move(cell));
    }
  }

  std::vector<std::optional<TrialRecord>> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      try {
        records[k] = run_trial(trials[k]);
      } catch (const std::exception&) {
        records[k].reset();
      }
    }
  };
  unsigned threads = sweep.threads ? sweep.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  result.threads_used = threads;
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& cell : result.cells) {
    const std::size_t base = cell.index * sweep.reps;
    for (const auto& m : sweep.methods) {
      MethodCellSummary ms;
      ms.id = m.id;
      std::vector<double> clu, rec, sgn, cosv, sel;
      std::vector<bool> null_rej, alt_rej;
      for (std::size_t r = 0; r < sweep.reps; ++r) {
        const auto& tr = records[base + r];
        if (!tr) continue;
        for (const auto& o : tr->outcomes) {
          if (o.id != m.id) continue;
          if (o.error) {
            ++ms.errors;
            continue;
          }
          if (o.clustering_hamming) clu.push_back(*o.clustering_hamming);
          if (o.recovery_hamming) rec.push_back(*o.recovery_hamming);
          if (o.signed_hamming) sgn.push_back(*o.signed_hamming);
          if (o.cosine) cosv.push_back(*o.cosine);
          if (o.selected_count) sel.push_back(static_cast<double>(*o.selected_count));
          if (o.fallback_used) ++ms.fallbacks;
          if (o.test_null) null_rej.push_back(o.test_null->reject);
          if (o.test_alt) alt_rej.push_back(o.test_alt->reject);
          break;
        }
      }
      ms.clustering_hamming = summarize(std::move(clu));
      ms.recovery_hamming = summarize(std::move(rec));
      ms.signed_hamming = summarize(std::move(sgn));
      ms.cosine = summarize(std::move(cosv));
      ms.selected_count = summarize(std::move(sel));
      if (!null_rej.empty() && !alt_rej.empty()) ms.test_error = empirical_test_error(null_rej, alt_rej);
      cell.methods.push_back(std::move(ms));
    }
    for (std::size_t r = 0; r < sweep.reps; ++r) {
      const auto& tr = records[base + r];
      if (!tr) {
        ++cell.failed_trials;
      } else {
        cell.wall_seconds += tr->wall_seconds;
      }
    }
  }
  result.wall_seconds = seconds_since(t0);
  return result;
}

json to_json(const SweepSpec& s) {
  json j{{"p", s.p},
         {"theta", s.theta},
         {"a", s.sign_mix_a},
         {"betas", s.betas},
         {"axis", axis_name(s.axis)},
         {"strengths", s.strengths},
         {"reps", s.reps},
         {"methods", methods_json(s.methods)},
         {"noise", to_json(s.noise)},
         {"seed", s.seed},
         {"max_trials", s.max_trials}};
  if (s.axis == StrengthAxis::alpha_relative) {
    j["relative_to"] = {{"problem", to_string(s.relative_problem)}, {"bound_kind", to_string(s.relative_kind)}};
  }
  put_opt(j, "designated", s.designated);
  return j;
}

SweepSpec sweep_spec_from_json(const json& j) {
  SweepSpec s;
  try {
    s.p = j.at("p").get<std::size_t>();
    s.theta = j.at("theta").get<double>();
    s.sign_mix_a = j.value("a", 0.0);
    s.betas = j.at("betas").get<std::vector<double>>();
    s.axis = axis_from(j.value("axis", std::string("alpha")));
    s.strengths = j.at("strengths").get<std::vector<double>>();
    if (j.contains("relative_to")) {
      s.relative_problem = problem_from_string(j["relative_to"].value("problem", std::string("clustering")));
      s.relative_kind = bound_kind_from_string(j["relative_to"].value("bound_kind", std::string("statistical")));
    }
    s.reps = j.value("reps", s.reps);
    s.methods = methods_from(j.at("methods"));
    s.designated = get_opt<std::string>(j, "designated");
    if (j.contains("noise")) s.noise = noise_from_json(j["noise"]);
    s.seed = j.value("seed", s.seed);
    s.max_trials = j.value("max_trials", s.max_trials);
    s.threads = j.value("threads", 0u);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("sweep spec: ") + e.what());
  }
  return s;
}

json to_json(const SweepResult& r) {
  json cells = json::array();
  json cell_walls = json::array();
  for (const auto& c : r.cells) {
    json regions = json::object();
    for (const auto& [k, v] : c.regions) regions[k] = v;
    json methods = json::array();
    for (const auto& m : c.methods) {
      json jm{{"id", m.id}, {"errors", m.errors}, {"fallbacks", m.fallbacks}};
      if (m.clustering_hamming) jm["clustering_hamming"] = to_json(*m.clustering_hamming);
      if (m.recovery_hamming) jm["recovery_hamming"] = to_json(*m.recovery_hamming);
      if (m.signed_hamming) jm["signed_hamming"] = to_json(*m.signed_hamming);
      if (m.cosine) jm["cosine"] = to_json(*m.cosine);
      if (m.selected_count) jm["selected_count"] = to_json(*m.selected_count);
      if (m.test_error) jm["test_error"] = to_json(*m.test_error);
      methods.push_back(std::move(jm));
    }
    json jc{{"index", c.index},      {"beta", c.beta},       {"strength", c.strength},
            {"alpha", c.alpha},      {"params", to_json(c.params)}, {"regions", std::move(regions)},
            {"methods", std::move(methods)}, {"failed_trials", c.failed_trials}};
    if (r.spec.designated) {
      for (const auto& m : c.methods) {
        if (m.id == *r.spec.designated && m.clustering_hamming) {
          jc["designated_clustering_hamming"] = num(m.clustering_hamming->mean);
        }
      }
    }
    cells.push_back(std::move(jc));
    cell_walls.push_back(c.wall_seconds);
  }
  return {{"metadata",
           {{"timestamp", r.timestamp},
            {"wall_seconds", r.wall_seconds},
            {"threads", r.threads_used},
            {"cell_wall_seconds", std::move(cell_walls)}}},
          {"spec", to_json(r.spec)},
          {"cells", std::move(cells)}};
}

std::string deterministic_dump(const SweepResult& r) {
  json j = to_json(r);
  j.erase("metadata");
  return j.dump(2);
}

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto opt = [](const std::optional<Summary>& s) { return s ? format_double(s->mean) : std::string(); };
  out << "cell,beta,strength,alpha";
  if (!r.cells.empty()) {
    for (const auto& [k, v] : r.cells.front().regions) out << ',' << k;
  }
  for (const auto& m : r.spec.methods) {
    const std::string& id = m.id;
    out << ',' << id << "_clustering_hamming," << id << "_recovery_hamming," << id << "_cosine," << id
        << "_selected," << id << "_type1," << id << "_type2," << id << "_errors";
  }
  out << '\n';
  for (const auto& c : r.cells) {
    out << c.index << ',' << format_double(c.beta) << ',' << format_double(c.strength) << ',' << format_double(c.alpha);
    for (const auto& [k, v] : c.regions) out << ',' << v;
    for (const auto& m : c.methods) {
      out << ',' << opt(m.clustering_hamming) << ',' << opt(m.recovery_hamming) << ',' << opt(m.cosine) << ','
          << opt(m.selected_count) << ',' << (m.test_error ? format_double(m.test_error->type1) : "") << ','
          << (m.test_error ? format_double(m.test_error->type2) : "") << ',' << m.errors;
    }
    out << '\n';
  }
}

void persist_sweep(const SweepResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(r).dump(2) << '\n';
}

}  // namespace rwclust
