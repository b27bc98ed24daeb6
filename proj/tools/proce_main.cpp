// proce: counterfactual explanations for binary tabular classifiers.
//
// Subcommands cover the whole pipeline: gen-simple-bn -> train -> fit-scm ->
// explain -> evaluate. Every tunable resolves as CLI flag > --config file >
// PROCE_SEED (seed only) > built-in default, and the resolved configuration
// is echoed into every artifact written.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proce/error.hpp"
#include "proce/pipeline.hpp"
#include "proce/version.hpp"

namespace {

using proce::Json;

// Values from an optional --config JSON object, applied only where the
// command line stayed silent.
class ConfigLayer {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    doc_ = proce::load_json_file(path);
    if (!doc_.is_object()) {
      throw proce::ConfigError("config file must hold a JSON object");
    }
  }

  template <typename T>
  void apply(const CLI::Option* opt, const char* key, T& var) const {
    if (opt->count() > 0 || !doc_.contains(key)) return;
    try {
      var = doc_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw proce::ConfigError(std::string("config key '") + key +
                               "': " + e.what());
    }
  }

  bool has(const char* key) const { return doc_.contains(key); }

 private:
  Json doc_ = Json::object();
};

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw proce::ConfigError(what + ": expected an unsigned integer, got '" +
                             text + "'");
  }
  return value;
}

// PROCE_SEED fills in the seed when neither the flag nor the config did.
void apply_env_seed(const CLI::Option* seed_opt, const ConfigLayer& cfg,
                    std::uint64_t& seed) {
  if (seed_opt->count() > 0 || cfg.has("seed")) return;
  const char* env = std::getenv("PROCE_SEED");
  if (env == nullptr || *env == '\0') return;
  seed = parse_u64(env, "PROCE_SEED");
}

proce::SimpleBnParams load_params_file(const std::string& path) {
  proce::SimpleBnParams p;
  if (path.empty()) return p;
  const Json doc = proce::load_json_file(path);
  if (!doc.is_object()) {
    throw proce::ParseError("params file must hold a JSON object");
  }
  const std::vector<std::pair<const char*, double*>> keys = {
      {"mu1", &p.mu1}, {"sigma1", &p.sigma1}, {"mu2", &p.mu2},
      {"sigma2", &p.sigma2}, {"k3", &p.k3}, {"b3", &p.b3},
      {"sigma3", &p.sigma3}, {"k_y", &p.k_y}, {"b_y", &p.b_y}};
  for (const auto& [name, value] : doc.items()) {
    bool known = false;
    for (const auto& [key, slot] : keys) {
      if (name == key) {
        if (!value.is_number()) {
          throw proce::ParseError(std::string("params key '") + key +
                                  "' must be a number");
        }
        *slot = value.get<double>();
        known = true;
        break;
      }
    }
    if (!known) {
      throw proce::ParseError("unknown params key '" + name + "'");
    }
  }
  return p;
}

Json params_to_json(const proce::SimpleBnParams& p) {
  return Json{{"mu1", p.mu1},       {"sigma1", p.sigma1}, {"mu2", p.mu2},
              {"sigma2", p.sigma2}, {"k3", p.k3},         {"b3", p.b3},
              {"sigma3", p.sigma3}, {"k_y", p.k_y},       {"b_y", p.b_y}};
}

// Shared --config/--print-config plumbing per subcommand.
struct CommonFlags {
  std::string config_path;
  bool print_config = false;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON file supplying defaults for any flag not given");
    sub->add_flag("--print-config", print_config,
                  "Print the effective configuration and exit");
  }
};

bool emit_config_if_requested(const CommonFlags& common, const Json& echo) {
  if (!common.print_config) return false;
  std::cout << echo.dump(2) << '\n';
  return true;
}

void add_gen_simple_bn(CLI::App& app, int& /*exit_code*/) {
  auto sub = app.add_subcommand(
      "gen-simple-bn", "Generate the three-variable synthetic dataset");
  auto state = std::make_shared<proce::GenSimpleBnOptions>();
  auto common = std::make_shared<CommonFlags>();
  auto params_path = std::make_shared<std::string>();

  auto* n_opt = sub->add_option("--n", state->n, "Number of rows")
                    ->capture_default_str();
  auto* seed_opt = sub->add_option("--seed", state->seed, "Generator seed")
                       ->capture_default_str();
  auto* params_opt = sub->add_option("--params", *params_path,
                                     "JSON file overriding generator params");
  auto* out_opt = sub->add_option("--out", state->out_csv, "Output CSV path");
  common->attach(sub);

  sub->callback([=]() {
    ConfigLayer cfg;
    cfg.load(common->config_path);
    cfg.apply(n_opt, "n", state->n);
    cfg.apply(seed_opt, "seed", state->seed);
    cfg.apply(params_opt, "params", *params_path);
    cfg.apply(out_opt, "out", state->out_csv);
    apply_env_seed(seed_opt, cfg, state->seed);
    state->params = load_params_file(*params_path);

    const Json echo{{"command", "gen-simple-bn"},
                    {"tool_version", proce::kVersion},
                    {"n", state->n},
                    {"seed", state->seed},
                    {"params", params_to_json(state->params)},
                    {"out", state->out_csv}};
    if (emit_config_if_requested(*common, echo)) return;
    if (state->out_csv.empty()) {
      throw proce::ConfigError("gen-simple-bn needs --out");
    }

    const proce::GenSimpleBnResult result = proce::run_gen_simple_bn(*state,
                                                                     echo);
    std::cout << "wrote " << result.n << " rows to " << result.csv_path
              << " (class 1 fraction " << result.positive_fraction << ")\n"
              << "schema: " << result.schema_path << '\n'
              << "graph:  " << result.graph_path << '\n';
    for (const std::string& w : result.warnings) {
      std::cerr << "warning: " << w << '\n';
    }
  });
}

void add_train(CLI::App& app, int& /*exit_code*/) {
  auto sub = app.add_subcommand(
      "train", "Train the classifier and autoencoders into a bundle");
  auto state = std::make_shared<proce::TrainOptions>();
  auto common = std::make_shared<CommonFlags>();
  auto preset_name = std::make_shared<std::string>("net3");

  auto* data_opt = sub->add_option("--data", state->data_csv, "Training CSV");
  auto* schema_opt = sub->add_option("--schema", state->schema_path,
                                     "Feature schema JSON");
  auto* label_opt = sub->add_option("--label", state->label_override,
                                    "Label column name (overrides schema)");
  auto* preset_opt = sub->add_option("--preset", *preset_name,
                                     "Classifier preset")
                         ->check(CLI::IsMember({"net3", "net5"}))
                         ->capture_default_str();
  auto* emb_opt = sub->add_option("--embedding-dim", state->embedding_dim,
                                  "Autoencoder latent width")
                      ->capture_default_str();
  auto* cat_opt = sub->add_option("--cat-embedding-dim",
                                  state->cat_embedding_dim,
                                  "Categorical embedding width")
                      ->capture_default_str();
  auto* hidden_opt = sub->add_option("--ae-hidden-dim", state->ae_hidden_dim,
                                     "Autoencoder hidden width")
                         ->capture_default_str();
  auto* ce_opt = sub->add_option("--classifier-epochs",
                                 state->classifier_epochs,
                                 "Classifier training epochs")
                     ->capture_default_str();
  auto* ae_opt = sub->add_option("--ae-epochs", state->ae_epochs,
                                 "Autoencoder training epochs")
                     ->capture_default_str();
  auto* batch_opt = sub->add_option("--batch-size", state->batch_size,
                                    "Minibatch size")
                        ->capture_default_str();
  auto* lr_opt = sub->add_option("--learning-rate", state->learning_rate,
                                 "Adam learning rate")
                     ->capture_default_str();
  auto* ratio_opt = sub->add_option("--train-ratio", state->train_ratio,
                                    "Train split fraction")
                        ->capture_default_str();
  auto* seed_opt = sub->add_option("--seed", state->seed, "Training seed")
                       ->capture_default_str();
  auto* out_opt = sub->add_option("--out", state->out_dir,
                                  "Output bundle directory");
  common->attach(sub);

  sub->callback([=]() {
    ConfigLayer cfg;
    cfg.load(common->config_path);
    cfg.apply(data_opt, "data", state->data_csv);
    cfg.apply(schema_opt, "schema", state->schema_path);
    cfg.apply(label_opt, "label", state->label_override);
    cfg.apply(preset_opt, "preset", *preset_name);
    cfg.apply(emb_opt, "embedding_dim", state->embedding_dim);
    cfg.apply(cat_opt, "cat_embedding_dim", state->cat_embedding_dim);
    cfg.apply(hidden_opt, "ae_hidden_dim", state->ae_hidden_dim);
    cfg.apply(ce_opt, "classifier_epochs", state->classifier_epochs);
    cfg.apply(ae_opt, "ae_epochs", state->ae_epochs);
    cfg.apply(batch_opt, "batch_size", state->batch_size);
    cfg.apply(lr_opt, "learning_rate", state->learning_rate);
    cfg.apply(ratio_opt, "train_ratio", state->train_ratio);
    cfg.apply(seed_opt, "seed", state->seed);
    cfg.apply(out_opt, "out", state->out_dir);
    apply_env_seed(seed_opt, cfg, state->seed);
    state->preset = proce::classifier_preset_from_name(*preset_name);

    const Json echo{{"command", "train"},
                    {"tool_version", proce::kVersion},
                    {"data", state->data_csv},
                    {"schema", state->schema_path},
                    {"label", state->label_override},
                    {"preset", *preset_name},
                    {"embedding_dim", state->embedding_dim},
                    {"cat_embedding_dim", state->cat_embedding_dim},
                    {"ae_hidden_dim", state->ae_hidden_dim},
                    {"classifier_epochs", state->classifier_epochs},
                    {"ae_epochs", state->ae_epochs},
                    {"batch_size", state->batch_size},
                    {"learning_rate", state->learning_rate},
                    {"train_ratio", state->train_ratio},
                    {"seed", state->seed},
                    {"out", state->out_dir}};
    if (emit_config_if_requested(*common, echo)) return;

    const proce::TrainSummary summary = proce::run_train(*state, echo);
    std::cout << "train rows: " << summary.train_rows
              << "  test rows: " << summary.test_rows << '\n'
              << "train accuracy: " << summary.train_accuracy << '\n'
              << "test accuracy:  " << summary.test_accuracy << '\n'
              << "bundle: " << state->out_dir << '\n';
  });
}

void add_fit_scm(CLI::App& app, int& /*exit_code*/) {
  auto sub = app.add_subcommand(
      "fit-scm", "Fit linear structural equations over a causal graph");
  auto state = std::make_shared<proce::FitScmOptions>();
  auto common = std::make_shared<CommonFlags>();

  auto* data_opt = sub->add_option("--data", state->data_csv, "Data CSV");
  auto* graph_opt = sub->add_option("--graph", state->graph_path,
                                    "Causal graph JSON");
  auto* out_opt = sub->add_option("--out", state->out_path,
                                  "Output model JSON");
  auto* schema_opt = sub->add_option("--schema", state->schema_path,
                                     "Feature schema JSON (self-normalizes)");
  auto* bundle_opt = sub->add_option("--bundle", state->bundle_dir,
                                     "Bundle supplying schema + normalizer");
  auto* force_opt =
      sub->add_flag("--force-categorical-exogenous",
                    state->force_categorical_exogenous,
                    "Treat categorical children as exogenous instead of "
                    "failing");
  common->attach(sub);

  sub->callback([=]() {
    ConfigLayer cfg;
    cfg.load(common->config_path);
    cfg.apply(data_opt, "data", state->data_csv);
    cfg.apply(graph_opt, "graph", state->graph_path);
    cfg.apply(out_opt, "out", state->out_path);
    cfg.apply(schema_opt, "schema", state->schema_path);
    cfg.apply(bundle_opt, "bundle", state->bundle_dir);
    cfg.apply(force_opt, "force_categorical_exogenous",
              state->force_categorical_exogenous);

    const Json echo{{"command", "fit-scm"},
                    {"tool_version", proce::kVersion},
                    {"data", state->data_csv},
                    {"graph", state->graph_path},
                    {"out", state->out_path},
                    {"schema", state->schema_path},
                    {"bundle", state->bundle_dir},
                    {"force_categorical_exogenous",
                     state->force_categorical_exogenous}};
    if (emit_config_if_requested(*common, echo)) return;

    const proce::StructuralModel model = proce::run_fit_scm(*state, echo);
    for (const proce::StructuralEquation& eq : model.equations) {
      std::cout << eq.child << " <-";
      for (const std::string& p : eq.parents) std::cout << ' ' << p;
      std::cout << "  R^2 = " << eq.r_squared;
      if (eq.ridge_fallback) std::cout << "  (ridge fallback)";
      std::cout << '\n';
    }
    for (const std::string& w : model.warnings) {
      std::cerr << "warning: " << w << '\n';
    }
    std::cout << "model: " << state->out_path << '\n';
  });
}

void add_explain(CLI::App& app, int& exit_code) {
  auto sub = app.add_subcommand(
      "explain", "Search for counterfactual explanations");
  auto state = std::make_shared<proce::ExplainOptions>();
  auto common = std::make_shared<CommonFlags>();
  auto instance_args = std::make_shared<std::vector<std::string>>();

  auto* bundle_opt = sub->add_option("--bundle", state->bundle_dir,
                                     "Trained bundle directory");
  auto* scm_opt = sub->add_option("--scm", state->scm_path,
                                  "Fitted structural model JSON");
  auto* out_opt = sub->add_option("--out", state->out_dir,
                                  "Output directory for report JSONs");
  auto* inst_opt = sub->add_option(
      "--instance", *instance_args,
      "Test-split row index, or one inline JSON object of raw values");
  auto* file_opt = sub->add_option("--instance-file",
                                   state->instance_json_path,
                                   "JSON file holding one raw-valued instance");
  auto* count_opt = sub->add_option("--count", state->count,
                                    "Explain the first N test rows");
  auto* target_opt = sub->add_option("--target-class", state->target_class,
                                     "Desired class (default: flip)")
                         ->check(CLI::IsMember({0, 1}));
  auto* gen_opt = sub->add_option("--generations", state->ga.generations,
                                  "Search generations")
                      ->capture_default_str();
  auto* pop_opt = sub->add_option("--population", state->ga.population_size,
                                  "Population size (even, >= 4)")
                      ->capture_default_str();
  auto* cx_opt = sub->add_option("--crossover-prob", state->ga.crossover_prob,
                                 "Per-pair crossover probability")
                     ->capture_default_str();
  auto* mut_opt = sub->add_option("--mutation-prob", state->ga.mutation_prob,
                                  "Per-gene mutation probability")
                      ->capture_default_str();
  auto* msig_opt = sub->add_option("--mutation-sigma",
                                   state->ga.mutation_sigma,
                                   "Continuous mutation spread")
                       ->capture_default_str();
  auto* isig_opt = sub->add_option("--init-sigma", state->ga.init_sigma,
                                   "Initial population spread")
                       ->capture_default_str();
  auto* keep_opt = sub->add_option("--init-cat-keep-prob",
                                   state->ga.init_cat_keep_prob,
                                   "Initial categorical keep probability")
                       ->capture_default_str();
  auto* std_opt = sub->add_flag("--standard-crowding",
                                state->ga.standard_crowding,
                                "Use sorted-neighbor crowding distance");
  auto* early_opt = sub->add_flag("--early-stop", state->ga.early_stop,
                                  "Stop after 10 stable generations");
  auto* k_opt = sub->add_option("--k-neighbors", state->k_neighbors,
                                "Prototype neighborhood size")
                    ->capture_default_str();
  auto* seed_opt = sub->add_option("--seed", state->ga.seed, "Search seed")
                       ->capture_default_str();
  auto* jobs_opt = sub->add_option("--jobs", state->jobs,
                                   "Concurrent instances")
                       ->capture_default_str();
  common->attach(sub);

  sub->callback([=, &exit_code]() {
    ConfigLayer cfg;
    cfg.load(common->config_path);
    cfg.apply(bundle_opt, "bundle", state->bundle_dir);
    cfg.apply(scm_opt, "scm", state->scm_path);
    cfg.apply(out_opt, "out", state->out_dir);
    cfg.apply(inst_opt, "instance", *instance_args);
    cfg.apply(file_opt, "instance_file", state->instance_json_path);
    cfg.apply(count_opt, "count", state->count);
    cfg.apply(target_opt, "target_class", state->target_class);
    cfg.apply(gen_opt, "generations", state->ga.generations);
    cfg.apply(pop_opt, "population", state->ga.population_size);
    cfg.apply(cx_opt, "crossover_prob", state->ga.crossover_prob);
    cfg.apply(mut_opt, "mutation_prob", state->ga.mutation_prob);
    cfg.apply(msig_opt, "mutation_sigma", state->ga.mutation_sigma);
    cfg.apply(isig_opt, "init_sigma", state->ga.init_sigma);
    cfg.apply(keep_opt, "init_cat_keep_prob", state->ga.init_cat_keep_prob);
    cfg.apply(std_opt, "standard_crowding", state->ga.standard_crowding);
    cfg.apply(early_opt, "early_stop", state->ga.early_stop);
    cfg.apply(k_opt, "k_neighbors", state->k_neighbors);
    cfg.apply(seed_opt, "seed", state->ga.seed);
    cfg.apply(jobs_opt, "jobs", state->jobs);
    apply_env_seed(seed_opt, cfg, state->ga.seed);

    state->indices.clear();
    state->instance_json_text.clear();
    for (const std::string& arg : *instance_args) {
      if (!arg.empty() && arg.front() == '{') {
        if (!state->instance_json_text.empty()) {
          throw proce::ConfigError("only one inline JSON instance is allowed");
        }
        state->instance_json_text = arg;
      } else {
        state->indices.push_back(static_cast<std::size_t>(
            parse_u64(arg, "--instance")));
      }
    }

    const Json echo{{"command", "explain"},
                    {"tool_version", proce::kVersion},
                    {"bundle", state->bundle_dir},
                    {"scm", state->scm_path},
                    {"out", state->out_dir},
                    {"instance", *instance_args},
                    {"instance_file", state->instance_json_path},
                    {"count", state->count},
                    {"target_class", state->target_class},
                    {"generations", state->ga.generations},
                    {"population", state->ga.population_size},
                    {"crossover_prob", state->ga.crossover_prob},
                    {"mutation_prob", state->ga.mutation_prob},
                    {"mutation_sigma", state->ga.mutation_sigma},
                    {"init_sigma", state->ga.init_sigma},
                    {"init_cat_keep_prob", state->ga.init_cat_keep_prob},
                    {"standard_crowding", state->ga.standard_crowding},
                    {"early_stop", state->ga.early_stop},
                    {"k_neighbors", state->k_neighbors},
                    {"seed", state->ga.seed},
                    {"jobs", state->jobs}};
    if (emit_config_if_requested(*common, echo)) return;

    const proce::ExplainSummary summary = proce::run_explain(*state, echo);
    std::cout << summary.valid << '/' << summary.total
              << " counterfactuals valid; reports in " << state->out_dir
              << '\n'
              << "mean search time: " << summary.mean_runtime_seconds
              << " s\n";
    if (summary.valid < summary.total) exit_code = 3;
  });
}

void add_evaluate(CLI::App& app, int& /*exit_code*/) {
  auto sub = app.add_subcommand(
      "evaluate", "Score a directory of explanation reports");
  auto state = std::make_shared<proce::EvaluateOptions>();
  auto common = std::make_shared<CommonFlags>();

  auto* reports_opt = sub->add_option("--reports", state->reports_dir,
                                      "Directory of report_*.json files");
  auto* bundle_opt = sub->add_option("--bundle", state->bundle_dir,
                                     "Trained bundle directory");
  auto* constraints_opt = sub->add_option("--constraints",
                                          state->constraints_path,
                                          "Constraint list JSON");
  auto* out_opt = sub->add_option("--out", state->out_csv,
                                  "Output metrics CSV (JSON sibling added)");
  auto* method_opt = sub->add_option("--method", state->method_tag,
                                     "Method tag for the CSV row")
                         ->capture_default_str();
  auto* dataset_opt = sub->add_option("--dataset", state->dataset_tag,
                                      "Dataset tag for the CSV row")
                          ->capture_default_str();
  auto* compare_opt = sub->add_option("--compare", state->compare_path,
                                      "Other metrics JSON for paired t-tests");
  common->attach(sub);

  sub->callback([=]() {
    ConfigLayer cfg;
    cfg.load(common->config_path);
    cfg.apply(reports_opt, "reports", state->reports_dir);
    cfg.apply(bundle_opt, "bundle", state->bundle_dir);
    cfg.apply(constraints_opt, "constraints", state->constraints_path);
    cfg.apply(out_opt, "out", state->out_csv);
    cfg.apply(method_opt, "method", state->method_tag);
    cfg.apply(dataset_opt, "dataset", state->dataset_tag);
    cfg.apply(compare_opt, "compare", state->compare_path);

    const Json echo{{"command", "evaluate"},
                    {"tool_version", proce::kVersion},
                    {"reports", state->reports_dir},
                    {"bundle", state->bundle_dir},
                    {"constraints", state->constraints_path},
                    {"out", state->out_csv},
                    {"method", state->method_tag},
                    {"dataset", state->dataset_tag},
                    {"compare", state->compare_path}};
    if (emit_config_if_requested(*common, echo)) return;

    const proce::EvaluateSummary summary = proce::run_evaluate(*state, echo);
    const proce::MetricsReport& m = summary.metrics;
    std::cout << "samples: " << m.n << '\n'
              << "tcv: " << m.tcv << "  ccv: " << m.ccv << '\n'
              << "cat_proximity: " << m.cat_prox
              << "  con_proximity: " << m.con_prox << '\n'
              << "im1: " << m.im1 << "  im2: " << m.im2
              << "  im2_x10: " << m.im2_x10 << '\n'
              << "mean runtime: " << m.runtime_seconds << " s\n"
              << "csv:  " << summary.csv_path << '\n'
              << "json: " << summary.json_path << '\n';
    for (const proce::MetricComparison& c : summary.comparisons) {
      std::cout << "t-test " << c.metric << ": t = " << c.test.t
                << ", p = " << c.test.p
                << (c.test.degenerate ? " (degenerate)" : "") << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causality-preserving counterfactual explanations"};
  app.set_version_flag("--version", std::string(proce::kVersion));
  app.require_subcommand(1);

  int exit_code = 0;
  add_gen_simple_bn(app, exit_code);
  add_train(app, exit_code);
  add_fit_scm(app, exit_code);
  add_explain(app, exit_code);
  add_evaluate(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const proce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == proce::ErrorKind::kIo ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
