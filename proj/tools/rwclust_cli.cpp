// rwclust: command-line front end for simulations, sweeps, phase boundaries
// and the real-data IF-PCA pipeline.
//
// Exit codes: 0 success, 2 invalid spec or arguments, 3 partial failures.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rwclust/applied_ifpca.hpp"
#include "rwclust/dataset_io.hpp"
#include "rwclust/harness.hpp"
#include "rwclust/phase_geometry.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kPartial = 3;

struct Range {
  double lo, hi, step;
};

Range parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(rwclust::parse_double_field(item, "range '" + text + "'"));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw std::invalid_argument("range must look like lo:hi:step with step > 0, got '" + text + "'");
  }
  return {parts[0], parts[1], parts[2]};
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

std::string fmt(const std::optional<double>& v) { return v ? rwclust::format_double(*v) : std::string(); }

std::string record_csv(const rwclust::TrialRecord& rec) {
  std::ostringstream os;
  os << "method,clustering_hamming,recovery_hamming,cosine,selected,fallback,alt_statistic,alt_reject,"
        "null_statistic,null_reject,error\n";
  for (const auto& o : rec.outcomes) {
    os << o.id << ',' << fmt(o.clustering_hamming) << ',' << fmt(o.recovery_hamming) << ',' << fmt(o.cosine) << ','
       << (o.selected_count ? std::to_string(*o.selected_count) : "") << ',' << o.fallback_used << ','
       << (o.test_alt ? rwclust::format_double(o.test_alt->statistic) : "") << ','
       << (o.test_alt ? std::to_string(o.test_alt->reject) : "") << ','
       << (o.test_null ? rwclust::format_double(o.test_null->statistic) : "") << ','
       << (o.test_null ? std::to_string(o.test_null->reject) : "") << ",\"" << o.error.value_or("") << "\"\n";
  }
  return os.str();
}

struct SimulateArgs {
  std::string spec_file;
  std::size_t p = 5000;
  double theta = 0.5, beta = 0.3, a = 0.0;
  std::optional<double> alpha, r, q;
  std::optional<std::size_t> N;
  std::uint64_t seed = 1;
  std::string methods = "simple_agg,classical_pca,if_pca";
  std::string noise = "white";
  bool null_signal = false;
  std::string out, format = "json";
};

int run_simulate(const SimulateArgs& a) {
  rwclust::TrialSpec spec;
  if (!a.spec_file.empty()) {
    spec = rwclust::trial_spec_from_json(rwclust::read_json_file(a.spec_file));
  } else {
    if (a.alpha.has_value() == a.r.has_value()) throw std::invalid_argument("give exactly one of --alpha or --r");
    spec.params.p = a.p;
    spec.params.theta = a.theta;
    spec.params.beta = a.beta;
    spec.params.sign_mix_a = a.a;
    if (a.alpha) {
      spec.params.strength = rwclust::PlainStrength{*a.alpha};
    } else {
      spec.params.strength = rwclust::LogAdjustedStrength{*a.r};
    }
    for (const auto& id : split_commas(a.methods)) {
      rwclust::MethodSpec m;
      m.id = id;
      m.q = a.q;
      m.N = a.N;
      rwclust::method_family(id);
      spec.methods.push_back(m);
    }
    spec.seed = a.seed;
    spec.null_signal = a.null_signal;
    if (a.noise == "diagonal") {
      spec.noise.kind = rwclust::NoiseConfig::Kind::diagonal;
      spec.noise.coloring_seed = a.seed;
    } else if (a.noise != "white") {
      throw std::invalid_argument("--noise must be white or diagonal");
    }
  }
  const rwclust::TrialRecord rec = rwclust::run_trial(spec);
  if (a.format == "csv") {
    emit(record_csv(rec), a.out);
  } else if (a.out.empty()) {
    nlohmann::json j{{"metadata", {{"wall_seconds", rec.wall_seconds}}}, {"record", rwclust::to_json(rec)}};
    std::cout << j.dump(2) << '\n';
  } else {
    rwclust::persist_record(rec, a.out);
  }
  return rec.has_errors() ? kPartial : kOk;
}

struct SweepArgs {
  std::string spec_file, out, format = "json";
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

int run_sweep_cmd(const SweepArgs& a) {
  rwclust::SweepSpec spec = rwclust::sweep_spec_from_json(rwclust::read_json_file(a.spec_file));
  if (a.reps) spec.reps = *a.reps;
  if (a.seed) spec.seed = *a.seed;
  if (a.threads) spec.threads = *a.threads;
  const rwclust::SweepResult res = rwclust::run_sweep(spec);
  if (a.format == "csv") {
    if (a.out.empty()) throw std::invalid_argument("--format csv needs --out");
    rwclust::write_sweep_csv(res, a.out);
  } else if (a.out.empty()) {
    std::cout << rwclust::to_json(res).dump(2) << '\n';
  } else {
    rwclust::persist_sweep(res, a.out);
  }
  return res.has_failures() ? kPartial : kOk;
}

struct BoundaryArgs {
  double theta = 0.5;
  std::string problem = "clustering", kind = "statistical", variant = "one_sided";
  std::string grid = "0.01:0.99:0.01";
  std::string out;
};

int run_boundary(const BoundaryArgs& a) {
  const Range g = parse_range(a.grid);
  rwclust::PhaseQuery q;
  q.problem = rwclust::problem_from_string(a.problem);
  q.bound_kind = rwclust::bound_kind_from_string(a.kind);
  q.variant = rwclust::variant_from_string(a.variant);
  q.theta = a.theta;
  std::ostringstream os;
  os << "beta,alpha_boundary,segment\n";
  for (std::size_t k = 0;; ++k) {
    const double beta = g.lo + static_cast<double>(k) * g.step;
    if (beta > g.hi + 1e-12 * g.step) break;
    q.beta = beta;
    const auto ans = rwclust::boundary(q);
    os << rwclust::format_double(beta) << ',' << rwclust::format_double(ans.alpha_boundary) << ',' << ans.segment
       << '\n';
  }
  emit(os.str(), a.out);
  return kOk;
}

struct IfpcaArgs {
  std::string data, labels, label_column, sweep, out;
  std::optional<double> q, fdr;
  std::optional<std::size_t> top_k;
  bool all = false, literal = false;
  int baseline_restarts = 0;
  std::uint64_t seed = 1;
};

int run_ifpca(const IfpcaArgs& a) {
  const int modes = a.q.has_value() + a.fdr.has_value() + !a.sweep.empty() + a.top_k.has_value() + a.all;
  if (modes != 1) throw std::invalid_argument("give exactly one of --q, --fdr, --sweep, --top-k, --all");
  std::optional<std::filesystem::path> label_file;
  std::optional<std::string> label_column;
  if (!a.labels.empty()) label_file = a.labels;
  if (!a.label_column.empty()) label_column = a.label_column;
  const rwclust::LabeledMatrix data = rwclust::load_labeled_matrix(a.data, label_file, label_column);

  rwclust::QMode mode = rwclust::AllFeatures{};
  if (a.q) mode = rwclust::FixedQ{*a.q};
  if (a.fdr) mode = rwclust::FdrLevel{*a.fdr};
  if (a.top_k) mode = rwclust::TopK{*a.top_k};
  if (!a.sweep.empty()) {
    const Range r = parse_range(a.sweep);
    mode = rwclust::QSweep{r.lo, r.hi, r.step};
  }
  const rwclust::IfpcaReport report = rwclust::ifpca_pipeline(data, mode, {a.literal});
  nlohmann::json j = rwclust::to_json(report);
  if (a.baseline_restarts > 0) {
    const auto norm = rwclust::mad_normalize(data.X);
    const auto base = rwclust::baseline_kmeans(norm.X, rwclust::encode_classes(data.class_labels),
                                               a.baseline_restarts, a.seed);
    j["baseline_kmeans"] = {{"restarts", a.baseline_restarts},
                            {"mean_errors", base.mean_errors},
                            {"best_objective_errors", base.best_objective_errors}};
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  emit(j.dump(2) + "\n", a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rare/weak two-class clustering laboratory"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run one Monte Carlo trial");
  s->add_option("--spec", sim.spec_file, "TrialSpec JSON file (overrides the flags)");
  s->add_option("--p", sim.p, "Number of features");
  s->add_option("--theta", sim.theta, "n = round(p^theta)");
  s->add_option("--beta", sim.beta, "epsilon = p^-beta");
  auto* alpha_opt = s->add_option("--alpha", sim.alpha, "tau = p^-alpha");
  auto* r_opt = s->add_option("--r", sim.r, "tau = p^(-theta/4) (4 r log p)^(1/4)");
  alpha_opt->excludes(r_opt);
  s->add_option("--a", sim.a, "Fraction of negative signals, in [0, 1/2]");
  s->add_option("--q", sim.q, "Screening level for if_pca / if_q / pipelines");
  s->add_option("--N", sim.N, "Subset size for sparse aggregation");
  s->add_option("--seed", sim.seed, "Trial seed");
  s->add_option("--methods", sim.methods, "Comma-separated method ids");
  s->add_option("--noise", sim.noise, "white or diagonal");
  s->add_flag("--null", sim.null_signal, "Generate with mu = 0");
  s->add_option("--out", sim.out, "Output path (stdout if omitted)");
  s->add_option("--format", sim.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Run a phase-plane sweep from a SweepSpec JSON file");
  w->add_option("--spec", sw.spec_file, "SweepSpec JSON file")->required();
  w->add_option("--reps", sw.reps, "Override reps per cell");
  w->add_option("--seed", sw.seed, "Override the master seed");
  w->add_option("--threads", sw.threads, "Worker threads (0: all cores)");
  w->add_option("--out", sw.out, "Output path");
  w->add_option("--format", sw.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  BoundaryArgs bd;
  auto* b = app.add_subcommand("boundary", "Print a phase boundary on a beta grid as CSV");
  b->add_option("--theta", bd.theta, "theta in (0,1)");
  b->add_option("--problem", bd.problem, "clustering, signal_recovery or hypothesis_testing");
  b->add_option("--kind", bd.kind, "statistical or ctub");
  b->add_option("--variant", bd.variant, "one_sided or signed");
  b->add_option("--grid", bd.grid, "beta grid lo:hi:step");
  b->add_option("--out", bd.out, "Output path (stdout if omitted)");
  std::string boundary_format = "csv";
  b->add_option("--format", boundary_format, "csv")->check(CLI::IsMember({"csv"}));

  IfpcaArgs ia;
  auto* f = app.add_subcommand("ifpca-run", "IF-PCA on a labeled expression matrix");
  f->add_option("--data", ia.data, "CSV, rows = samples, header = feature names")->required();
  f->add_option("--labels", ia.labels, "Label file, one label per sample");
  f->add_option("--label-column", ia.label_column, "Name of the label column inside --data");
  f->add_option("--q", ia.q, "Fixed screening level");
  f->add_option("--fdr", ia.fdr, "Benjamini-Hochberg level");
  f->add_option("--sweep", ia.sweep, "q grid lo:hi:step");
  f->add_option("--top-k", ia.top_k, "Keep the k largest screening scores");
  f->add_flag("--all", ia.all, "No screening");
  f->add_flag("--literal-scaling", ia.literal, "Screen on (2n)^-1 |.| instead of (2n)^-1/2 |.|");
  f->add_option("--baseline-restarts", ia.baseline_restarts, "Also run Lloyd 2-means with this many restarts");
  f->add_option("--seed", ia.seed, "Seed for the baseline");
  f->add_option("--out", ia.out, "Report JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*w) return run_sweep_cmd(sw);
    if (*b) return run_boundary(bd);
    if (*f) return run_ifpca(ia);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kInvalid;
  } catch (const rwclust::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
