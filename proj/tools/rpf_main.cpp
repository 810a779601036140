#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "rpf/csv.hpp"
#include "rpf/grow.hpp"
#include "rpf/purify.hpp"
#include "rpf/serialize.hpp"
#include "rpf/sim.hpp"
#include "rpf/theory.hpp"

namespace {

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void cmd_fit(const std::string& data_path, const std::string& out_path,
             const rpf::FitParams& params, int threads) {
  const rpf::Dataset data = rpf::read_dataset_csv(data_path);
  const rpf::ForestModel model = rpf::fit_forest(data, params, threads);
  rpf::save_model(model, out_path);

  // mean training SSR across families at a few checkpoints
  const std::size_t len = model.families.front().ssr_trajectory.size();
  std::cout << "fitted " << params.ntrees << " families on n=" << data.n() << " d=" << data.d()
            << "\nmean training SSR:";
  for (const double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const std::size_t it = std::min(len - 1, static_cast<std::size_t>(frac * (len - 1) + 0.5));
    double acc = 0.0;
    for (const rpf::TreeFamily& family : model.families) acc += family.ssr_trajectory[it];
    std::cout << "  iter " << it << ": " << acc / params.ntrees;
  }
  std::cout << "\nmodel written to " << out_path << "\n";
}

void cmd_predict(const std::string& model_path, const std::string& data_path,
                 const std::string& out_path) {
  const rpf::ForestModel model = rpf::load_model(model_path);
  const rpf::PredictorTable table = rpf::read_predictors_csv(data_path);
  if (static_cast<int>(table.x.cols()) != model.d)
    throw std::invalid_argument("model expects " + std::to_string(model.d) +
                                " predictors, data has " + std::to_string(table.x.cols()));
  const Eigen::VectorXd preds = rpf::forest_predict(model, table.x);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < preds.size(); ++i) rows.push_back({rpf::format_double(preds(i))});
  rpf::write_csv(out_path, {"prediction"}, rows);
  std::cout << preds.size() << " predictions written to " << out_path << "\n";
}

void cmd_components(const std::string& model_path, const std::string& out_path, int order,
                    int grid_size) {
  if (order != 1 && order != 2) throw std::invalid_argument("--order must be 1 or 2");
  if (grid_size < 0) throw std::invalid_argument("--grid-size must be nonnegative");
  const rpf::ForestModel model = rpf::load_model(model_path);
  rpf::PurifiedModel purified = rpf::flatten(model);
  rpf::purify(purified);
  rpf::write_csv(out_path, rpf::component_csv_header(),
                 rpf::component_csv_rows(purified, order, grid_size));
  std::cout << "components written to " << out_path
            << " (constant " << purified.constant << ")\n";
}

void cmd_simulate(const std::string& model_id, int d, int n, int reps, const std::string& variant,
                  const std::string& grid_preset, int tune_reps, bool use_cv, double rho,
                  double noise_sd, std::uint64_t seed, int threads, const std::string& out_path) {
  rpf::SimModelSpec spec = rpf::parse_sim_model(model_id, d);
  spec.rho = rho;
  spec.noise_sd = noise_sd;
  const rpf::SimReport report =
      rpf::run_simulation(spec, n, reps, variant, grid_preset, tune_reps, use_cv, seed, threads);
  if (!out_path.empty()) rpf::write_csv(out_path, rpf::sim_report_header(), rpf::sim_report_rows(report));
  std::cout << model_id << " d=" << d << " n=" << n << " " << variant
            << (use_cv ? " (10-fold CV)" : " (tuned)") << ": mean mse " << report.mean_mse
            << " (sd " << report.sd_mse << ") over " << reps << " reps\n"
            << "params: t_try=" << report.chosen.t_try << " split_try=" << report.chosen.split_try
            << " nsplits=" << report.chosen.nsplits
            << " max_interaction=" << report.chosen.max_interaction
            << " ntrees=" << report.chosen.ntrees << "\n";
}

void cmd_convergence(const std::vector<int>& n_list, int reps, int d, std::uint64_t seed,
                     int threads, const std::string& out_path) {
  const rpf::ConvergenceResult result =
      rpf::convergence_experiment(n_list, reps, d, seed, threads);
  if (!out_path.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const rpf::ConvergenceRow& row : result.rows)
      rows.push_back({std::to_string(row.n), std::to_string(row.rep),
                      rpf::format_double(row.sup_interior), rpf::format_double(row.sup_full)});
    rows.push_back({"slope", "", rpf::format_double(result.slope), ""});
    rpf::write_csv(out_path, {"n", "rep", "sup_error_interior", "sup_error_full"}, rows);
  }
  for (std::size_t i = 0; i < result.n_list.size(); ++i)
    std::cout << "n=" << result.n_list[i] << ": median sup error interior "
              << result.median_interior[i] << ", full " << result.median_full[i] << "\n";
  std::cout << "log-log slope: " << result.slope << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random planted forest: additive and interaction regression on overlapping leaves"};
  app.set_config("--config", "", "read defaults from an ini file (flags win)");
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "fit a forest to a CSV with a y column");
  std::string fit_data, fit_out = "model.json";
  rpf::FitParams params;
  int fit_threads = default_threads();
  bool no_bootstrap = false;
  fit->add_option("--data", fit_data, "training CSV (one y column)")->required();
  fit->add_option("--out", fit_out, "model output path");
  fit->add_option("--ntrees", params.ntrees, "families in the forest");
  fit->add_option("--nsplits", params.nsplits, "growth iterations per family");
  fit->add_option("--t-try", params.t_try, "fraction of viable (tree, coordinate) pairs tried");
  fit->add_option("--split-try", params.split_try, "random candidate points per pair and leaf");
  fit->add_option("--max-interaction", params.max_interaction,
                  "interaction order cap (0 = unbounded)");
  fit->add_option("--seed", params.seed, "rng seed");
  fit->add_flag("--no-bootstrap", no_bootstrap, "fit every family on the raw sample");
  fit->add_option("--threads", fit_threads, "worker threads");

  // predict
  auto* predict = app.add_subcommand("predict", "predict rows of a CSV with a saved model");
  std::string pred_model, pred_data, pred_out = "predictions.csv";
  predict->add_option("--model", pred_model, "model file from fit")->required();
  predict->add_option("--data", pred_data, "CSV of predictors (y column ignored)")->required();
  predict->add_option("--out", pred_out, "predictions output path");

  // components
  auto* components = app.add_subcommand(
      "components", "export purified ANOVA components of a saved model as CSV");
  std::string comp_model, comp_out = "components.csv";
  int comp_order = 2, comp_grid = 0;
  components->add_option("--model", comp_model, "model file from fit")->required();
  components->add_option("--out", comp_out, "components output path");
  components->add_option("--order", comp_order, "highest component order to export (1 or 2)");
  components->add_option("--grid-size", comp_grid,
                         "resample each axis to this many equal cells (0 = native)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "benchmark on a synthetic model");
  std::string sim_model = "additive-sparse-smooth", sim_variant = "additive";
  std::string sim_grid = "small", sim_out;
  int sim_d = 4, sim_n = 500, sim_reps = 20, sim_tune_reps = 10;
  int sim_threads = default_threads();
  bool sim_cv = false;
  double sim_rho = 0.3, sim_noise = 1.0;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--model", sim_model,
                       "{additive,hierarchical,pure-interaction}-{sparse,dense}-{smooth,jump}");
  simulate->add_option("--d", sim_d, "number of predictors");
  simulate->add_option("--n", sim_n, "sample size per replication");
  simulate->add_option("--reps", sim_reps, "evaluation replications");
  simulate->add_option("--variant", sim_variant, "additive | interaction2 | interaction-unbounded");
  simulate->add_option("--grid", sim_grid, "parameter grid preset: small | full");
  simulate->add_option("--tune-reps", sim_tune_reps, "tuning replications");
  simulate->add_flag("--cv", sim_cv, "select parameters by 10-fold CV instead of the oracle");
  simulate->add_option("--rho", sim_rho, "latent predictor correlation");
  simulate->add_option("--noise-sd", sim_noise, "response noise standard deviation");
  simulate->add_option("--seed", sim_seed, "rng seed");
  simulate->add_option("--threads", sim_threads, "worker threads");
  simulate->add_option("--out", sim_out, "per-replication CSV output path");

  // convergence
  auto* convergence =
      app.add_subcommand("convergence", "rate experiment for the randomized additive fit");
  std::vector<int> conv_n{500, 2000, 8000};
  int conv_reps = 10, conv_d = 2;
  int conv_threads = default_threads();
  std::uint64_t conv_seed = 0;
  std::string conv_out;
  convergence->add_option("--n-list", conv_n, "increasing sample sizes (at least 3)")
      ->delimiter(',');
  convergence->add_option("--reps", conv_reps, "replications per sample size");
  convergence->add_option("--d", conv_d, "number of predictors");
  convergence->add_option("--seed", conv_seed, "rng seed");
  convergence->add_option("--threads", conv_threads, "worker threads");
  convergence->add_option("--out", conv_out, "per-replication CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) {
      params.bootstrap = !no_bootstrap;
      cmd_fit(fit_data, fit_out, params, fit_threads);
    } else if (*predict) {
      cmd_predict(pred_model, pred_data, pred_out);
    } else if (*components) {
      cmd_components(comp_model, comp_out, comp_order, comp_grid);
    } else if (*simulate) {
      cmd_simulate(sim_model, sim_d, sim_n, sim_reps, sim_variant, sim_grid, sim_tune_reps,
                   sim_cv, sim_rho, sim_noise, sim_seed, sim_threads, sim_out);
    } else if (*convergence) {
      cmd_convergence(conv_n, conv_reps, conv_d, conv_seed, conv_threads, conv_out);
    }
  } catch (const rpf::DegenerateDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const rpf::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const rpf::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rpf::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
