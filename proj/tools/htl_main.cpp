#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "htl/bounds.hpp"
#include "htl/dataset.hpp"
#include "htl/experiments.hpp"
#include "htl/losses.hpp"
#include "htl/model_io.hpp"
#include "htl/regularizers.hpp"
#include "htl/rng.hpp"
#include "htl/solver.hpp"
#include "htl/sources.hpp"
#include "htl/synth.hpp"

using nlohmann::json;
using namespace htl;

namespace {

Eigen::VectorXd parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

struct CommonModelArgs {
  std::string loss = "square";
  std::string reg = "sq_l2";
  double reg_scale = 1.0;
  double reg_scale1 = 0.0;
  double lambda = 0.1;
};

void add_model_flags(CLI::App* cmd, CommonModelArgs& args) {
  cmd->add_option("--loss", args.loss, "square|squared_hinge|logistic");
  cmd->add_option("--reg", args.reg, "sq_l2|biased_sq_l2|elastic");
  cmd->add_option("--reg-scale", args.reg_scale, "quadratic penalty coefficient");
  cmd->add_option("--reg-scale1", args.reg_scale1, "l1 coefficient (elastic)");
  cmd->add_option("--lambda", args.lambda, "regularization weight");
}

// Attaches declared source-prediction columns or an ensemble loaded from files.
struct SourceContext {
  sources::SourceEnsemble ensemble;
  Eigen::MatrixXd S;  // m x n predictions on the dataset
  bool present = false;
};

SourceContext resolve_sources(const std::vector<std::string>& files,
                              const Dataset& data) {
  SourceContext ctx;
  if (!files.empty()) {
    ctx.ensemble = io::load_source_files(files);
    ctx.S = sources::source_matrix(ctx.ensemble, data);
    ctx.present = true;
  } else if (data.has_sources()) {
    ctx.S = data.S;
    ctx.ensemble.output_bound = ctx.S.size() > 0
                                    ? ctx.S.array().abs().maxCoeff()
                                    : 1.0;
    for (Eigen::Index j = 0; j < data.source_count(); ++j) {
      sources::Source src;
      src.kind = sources::Source::Kind::table;
      src.predictions = data.S.col(j);
      ctx.ensemble.sources.push_back(std::move(src));
    }
    ctx.present = true;
  }
  return ctx;
}

json train_report_to_json(const solver::TrainReport& rep) {
  return json{{"final_objective", rep.final_objective},
              {"empirical_risk", rep.empirical_risk},
              {"source_empirical_risk", rep.source_empirical_risk},
              {"reg_value", rep.reg_value},
              {"iterations", rep.iterations},
              {"grad_mapping_norm", rep.grad_mapping_norm},
              {"converged", rep.converged},
              {"certificate_a", rep.certificate_a},
              {"certificate_b", rep.certificate_b}};
}

int cmd_gen(const synth::TaskSpec& spec, const std::string& out) {
  const auto task = synth::generate(spec);
  Dataset train = task.train;
  Dataset holdout = task.holdout;
  train.S = sources::source_matrix(task.ensemble, train);
  holdout.S = sources::source_matrix(task.ensemble, holdout);
  save_dataset_csv(train, out + "_train.csv");
  save_dataset_csv(holdout, out + "_holdout.csv");
  io::save_sources(task.ensemble, out + "_sources.json");
  json j{{"train", out + "_train.csv"},
         {"holdout", out + "_holdout.csv"},
         {"sources", out + "_sources.json"},
         {"d", spec.d},
         {"m", spec.m},
         {"m_holdout", spec.m_holdout},
         {"mode", synth::mode_name(spec.mode)},
         {"gamma", spec.source_quality},
         {"seed", spec.seed}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regularized ERM with source-hypothesis transfer"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic task");
  synth::TaskSpec spec;
  std::string gen_out = "task";
  std::string gen_mode = "regression_square";
  gen->add_option("--d", spec.d, "feature dimension");
  gen->add_option("--m", spec.m, "train size");
  gen->add_option("--m-holdout", spec.m_holdout, "holdout size");
  gen->add_option("--noise", spec.noise_std, "label noise std (regression)");
  gen->add_option("--label-bound", spec.C, "label bound C");
  gen->add_option("--source-count", spec.source_count, "number of sources");
  gen->add_option("--gamma", spec.source_quality, "source perturbation scale");
  gen->add_option("--seed", spec.seed, "seed");
  gen->add_option("--mode", gen_mode,
                  "regression_square|classification_squared_hinge");
  gen->add_option("--out", gen_out, "output path prefix");

  // train
  auto* train = app.add_subcommand("train", "fit the regularized ERM model");
  CommonModelArgs train_args;
  std::string train_data, train_out = "model.json", train_beta, train_policy = "reject";
  std::vector<std::string> train_sources;
  double train_label_bound = 1.0;
  train->add_option("--data", train_data, "training CSV")->required();
  add_model_flags(train, train_args);
  train->add_option("--sources", train_sources, "source model files");
  train->add_option("--beta", train_beta, "comma-separated source weights");
  train->add_option("--label-bound", train_label_bound, "label bound C");
  train->add_option("--row-policy", train_policy, "reject|normalize");
  train->add_option("--out", train_out, "model output file");

  // tune-beta
  auto* tune = app.add_subcommand("tune-beta", "tune source weights and the model");
  CommonModelArgs tune_args;
  std::string tune_data, tune_out = "model.json";
  std::vector<std::string> tune_sources;
  double tune_rho = 1.0, tune_label_bound = 1.0;
  tune->add_option("--data", tune_data, "training CSV")->required();
  add_model_flags(tune, tune_args);
  tune->add_option("--sources", tune_sources, "source model files");
  tune->add_option("--rho", tune_rho, "budget on Omega(beta)")->required();
  tune->add_option("--label-bound", tune_label_bound, "label bound C");
  tune->add_option("--out", tune_out, "model output file");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "evaluate the explicit-constant bounds");
  std::string bnd_model, bnd_data, bnd_out;
  std::vector<std::string> bnd_sources;
  double bnd_eta = 3.0, bnd_rho = 1.0, bnd_label_bound = 1.0;
  bnd->add_option("--model", bnd_model, "model file")->required();
  bnd->add_option("--data", bnd_data, "evaluation CSV (plug-in risk estimates)")
      ->required();
  bnd->add_option("--sources", bnd_sources, "source model files");
  bnd->add_option("--eta", bnd_eta, "confidence exponent");
  bnd->add_option("--rho", bnd_rho, "budget on Omega(beta)");
  bnd->add_option("--label-bound", bnd_label_bound, "label bound C");
  bnd->add_option("--out", bnd_out, "write the report here instead of stdout");

  // rademacher
  auto* rad = app.add_subcommand("rademacher", "empirical Rademacher complexity");
  std::string rad_class = "linear", rad_data, rad_model;
  std::vector<std::string> rad_sources;
  double rad_radius = 1.0, rad_scale = 1.0, rad_label_bound = 1.0;
  long rad_draws = 1000;
  bool rad_exact = false;
  std::uint64_t rad_seed = 0;
  rad->add_option("--class", rad_class, "linear|loss");
  rad->add_option("--data", rad_data, "sample CSV")->required();
  rad->add_option("--model", rad_model, "model file (loss class)");
  rad->add_option("--sources", rad_sources, "source model files (loss class)");
  rad->add_option("--radius", rad_radius, "ball radius Omega(w) <= radius");
  rad->add_option("--reg-scale", rad_scale, "quadratic penalty coefficient");
  rad->add_option("--label-bound", rad_label_bound, "label bound C");
  rad->add_option("--draws", rad_draws, "Monte Carlo sign draws");
  rad->add_flag("--exact", rad_exact, "full sign enumeration (m <= 16)");
  rad->add_option("--seed", rad_seed, "seed for the sign draws");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run an experiment suite");
  std::string exp_name, exp_config, exp_out;
  int exp_workers = -1;
  exp->add_option("name", exp_name, "rates|perfect|bound_validity|excess");
  exp->add_option("--config", exp_config, "key=value config file")->required();
  exp->add_option("--out", exp_out, "output path prefix (overrides config)");
  exp->add_option("--workers", exp_workers, "parallelism degree (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      spec.mode = synth::parse_mode(gen_mode);
      return cmd_gen(spec, gen_out);
    }

    if (*train) {
      int clipped = 0;
      const RowPolicy policy =
          train_policy == "normalize" ? RowPolicy::normalize : RowPolicy::reject;
      Dataset data = load_dataset_csv(train_data, train_label_bound, policy, &clipped);
      if (clipped > 0)
        std::cerr << "warning: clipped " << clipped << " labels to [-"
                  << train_label_bound << ", " << train_label_bound << "]\n";
      const auto ctx = resolve_sources(train_sources, data);
      const auto loss = losses::make_loss(train_args.loss);
      const auto reg_w =
          reg::make_reg(train_args.reg, train_args.reg_scale, train_args.reg_scale1);
      Eigen::VectorXd beta =
          train_beta.empty()
              ? Eigen::VectorXd(Eigen::VectorXd::Zero(ctx.present ? ctx.S.cols() : 0))
              : parse_vector(train_beta);
      if (ctx.present && beta.size() != ctx.S.cols())
        throw std::runtime_error("beta length does not match the source count");
      const Eigen::VectorXd offsets =
          ctx.present ? Eigen::VectorXd(ctx.S * beta)
                      : Eigen::VectorXd(Eigen::VectorXd::Zero(data.rows()));
      const auto result =
          solver::solve_erm(data, loss, reg_w, train_args.lambda, offsets);
      solver::TargetModel model{result.w, beta, loss, reg_w, train_args.lambda};
      io::save_model(model, train_out);
      json j{{"model", train_out}, {"report", train_report_to_json(result.report)}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*tune) {
      Dataset data = load_dataset_csv(tune_data, tune_label_bound);
      const auto ctx = resolve_sources(tune_sources, data);
      if (!ctx.present) throw std::runtime_error("tune-beta requires sources");
      const auto loss = losses::make_loss(tune_args.loss);
      const auto reg_w =
          reg::make_reg(tune_args.reg, tune_args.reg_scale, tune_args.reg_scale1);
      const auto result =
          sources::tune_beta(ctx.ensemble, data, loss, reg_w, tune_args.lambda,
                             tune_rho, reg::make_sq_l2(1.0));
      io::save_model(result.model, tune_out);
      json j{{"model", tune_out},
             {"beta", vector_to_json(result.combination.beta)},
             {"objective", result.objective},
             {"objective_history", result.objective_history}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*bnd) {
      const auto model = io::load_model(bnd_model);
      Dataset data = load_dataset_csv(bnd_data, bnd_label_bound);
      const auto ctx = resolve_sources(bnd_sources, data);
      if (ctx.present && model.beta.size() != ctx.S.cols())
        throw std::runtime_error("model beta length does not match the source count");
      const Eigen::VectorXd offsets =
          ctx.present ? Eigen::VectorXd(ctx.S * model.beta)
                      : Eigen::VectorXd(Eigen::VectorXd::Zero(data.rows()));

      bounds::BoundInputs in;
      in.H = model.loss.H;
      in.sigma = model.regularizer.sigma();
      in.m = data.rows();
      in.lambda = model.lambda;
      in.rho = bnd_rho;
      in.B = 1.0;
      in.C_src = ctx.present ? std::sqrt(static_cast<double>(ctx.S.cols())) *
                                   ctx.ensemble.output_bound
                             : 1.0;
      in.eta = bnd_eta;
      // plug-in estimates from the supplied sample
      in.R_src_hat = solver::empirical_risk(data, model.loss, offsets,
                                            Eigen::VectorXd::Zero(data.dim()));
      in.r = in.R_src_hat;
      const double reg_value_w = reg::reg_value(model.regularizer, model.w);
      const double pred_bound = solver::prediction_magnitude_bound(
          std::max(reg_value_w, in.R_src_hat / std::max(model.lambda, 1e-300)),
          in.sigma, model.beta,
          ctx.present ? ctx.ensemble.output_bound : 1.0);
      in.M = model.loss.range_bound(pred_bound, data.C);

      const double risk = solver::empirical_risk(data, model.loss, offsets, model.w);
      const double rad_smooth = bounds::rad_bound_smooth(in);
      const auto gap = bounds::gen_gap_bound(rad_smooth, in);
      const double lipschitz = std::sqrt(4.0 * in.H * in.M);
      const auto cmp = bounds::comparison_bounds(in, lipschitz, risk);
      const double z = bounds::excess_risk_z(in);
      const double tau_class = in.R_src_hat / std::max(model.lambda, 1e-300);
      const double kappa = in.kappa();
      const double u_src =
          in.R_src_hat * (static_cast<double>(in.m) +
                          kappa * std::sqrt(static_cast<double>(in.m)) / in.lambda) +
          kappa * std::sqrt(in.R_src_hat * static_cast<double>(in.m) * in.rho /
                            in.lambda);

      json j{
          {"inputs",
           {{"H", in.H},
            {"sigma", in.sigma},
            {"M", in.M},
            {"m", in.m},
            {"lambda", in.lambda},
            {"rho", in.rho},
            {"eta", in.eta},
            {"R_src_hat", in.R_src_hat},
            {"r", in.r},
            {"r_is_estimate", true}}},
          {"empirical_risk", risk},
          {"reg_value", reg_value_w},
          {"rad_bound_smooth", rad_smooth},
          {"gen_gap", {{"tight", gap.tight}, {"relaxed", gap.relaxed}}},
          {"comparison",
           {{"worst_case", cmp.worst_case},
            {"worst_case_note", "up to unspecified log factors"},
            {"localized_r_star", cmp.localized_r_star},
            {"loglog_term", cmp.loglog_term},
            {"localized_risk", cmp.localized_risk},
            {"localized_gap", cmp.localized_gap}}},
          {"excess",
           {{"Z", z},
            {"lambda_star",
             tau_class > 0 ? bounds::excess_lambda_star(in, tau_class) : 0.0},
            {"gap_bound",
             tau_class > 0 ? bounds::excess_gap_bound(in, tau_class) : 0.0}}},
          {"u_src", u_src}};
      if (bnd_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(bnd_out);
        if (!out) throw std::runtime_error("cannot open " + bnd_out);
        out << j.dump(2) << "\n";
      }
      return 0;
    }

    if (*rad) {
      Dataset data = load_dataset_csv(rad_data, rad_label_bound);
      Rng rng(rad_seed, 0);
      bounds::RademacherEstimate est;
      if (rad_class == "linear") {
        est = bounds::empirical_rademacher_linear(data.X, reg::make_sq_l2(rad_scale),
                                                  rad_radius, rad_draws, rad_exact,
                                                  rng);
      } else if (rad_class == "loss") {
        if (rad_model.empty())
          throw std::runtime_error("--class loss requires --model");
        const auto model = io::load_model(rad_model);
        const auto ctx = resolve_sources(rad_sources, data);
        const Eigen::VectorXd offsets =
            ctx.present ? Eigen::VectorXd(ctx.S * model.beta)
                        : Eigen::VectorXd(Eigen::VectorXd::Zero(data.rows()));
        const double r_src = solver::empirical_risk(
            data, model.loss, offsets, Eigen::VectorXd::Zero(data.dim()));
        const double alpha = 1.0 / std::max(model.lambda, 1e-300);
        const auto tau =
            bounds::tau_vector(model.loss, offsets, data.y, r_src, alpha, 1.0,
                               model.regularizer.sigma());
        est = bounds::rademacher_smooth_surrogate_linear(
            data.X, model.loss.H, tau.tau, model.regularizer, alpha * r_src,
            rad_draws, rad_exact, rng);
      } else {
        throw std::runtime_error("unknown class: " + rad_class);
      }
      json j{{"class", rad_class},
             {"mean", est.mean},
             {"std_error", est.std_error},
             {"exact", est.exact},
             {"draws", est.draws}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*exp) {
      auto config = experiments::load_config(exp_config);
      if (!exp_name.empty()) config.experiment = exp_name;
      if (!exp_out.empty()) config.out = exp_out;
      if (exp_workers > 0) config.workers = exp_workers;
      const auto result = experiments::run_experiment(config);
      if (!config.out.empty()) experiments::save_results(result, config, config.out);
      json j{{"experiment", result.experiment},
             {"rows", result.rows.size()},
             {"failures", result.failures},
             {"summary", result.summary}};
      std::cout << j.dump(2) << "\n";
      return result.failures * 100 >
                     static_cast<long>(result.rows.size())  // > 1% fails the run
                 ? 1
                 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
