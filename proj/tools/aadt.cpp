// aadt: estimate AADT from 24-hour short-term counts.
//
//   aadt fetch    --config FILE --atr-list FILE --year YYYY --out DIR
//   aadt train    --atr-dir DIR --atr-list FILE [--mapping FILE] (--params-in FILE | --grid) --params-out FILE
//   aadt estimate --counts FILE --factors FILE --params FILE --atr-dir DIR --atr-list FILE [--mapping FILE] --out DIR
//   aadt evaluate --predictions FILE --truth FILE --out FILE [--mapping FILE] [--round-per-row]

#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

using namespace aadt;

struct RangeArg {
    int first;
    int last;
};

void add_model_inputs(CLI::App* cmd, cli::ModelInputs& in, std::optional<std::string>& year)
{
    cmd->add_option("--atr-dir", in.atr_dir, "Directory of <county>_<station>.csv ATR files")->required();
    cmd->add_option("--atr-list", in.atr_list, "ATR station list (County,Station,FClass)")->required();
    cmd->add_option("--mapping", in.mapping, "Extra FClass,Group rows on top of the default class mapping");
    cmd->add_option("--year", year, "ATR data year (default: the most common year in the files)");
    cmd->add_option("--max-days-per-station", in.max_days_per_station,
                    "Use at most N evenly spaced days per station for training (0 = all)");
}

bool resolve_year(const std::optional<std::string>& text, cli::ModelInputs& in)
{
    if (!text) return true;
    auto y = cli::parse_year(*text);
    if (!y) {
        std::cerr << "error: --year must be a four-digit year (e.g. 2017), got '" << *text << "'\n";
        return false;
    }
    in.year = *y;
    return true;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"AADT estimation from short-term counts: SVR model and expansion-factor baseline"};
    app.require_subcommand(1);

    cli::FetchArgs fetch;
    auto* fetch_cmd = app.add_subcommand("fetch", "Download ATR hourly files for a year");
    fetch_cmd->add_option("--config", fetch.config, "key=value file with url_template")->required();
    fetch_cmd->add_option("--atr-list", fetch.atr_list, "ATR station list")->required();
    fetch_cmd->add_option("--year", fetch.year, "Four-digit year, e.g. 2017")->required();
    fetch_cmd->add_option("--out", fetch.out, "Output directory")->required();

    cli::TrainArgs train;
    std::optional<std::string> train_year;
    std::optional<std::uint64_t> seed;
    RangeArg c_range{train.spec.c_exponents.first, train.spec.c_exponents.last};
    RangeArg g_range{train.spec.gamma_exponents.first, train.spec.gamma_exponents.last};
    auto* train_cmd = app.add_subcommand("train", "Fit the three group models (optionally tuning C and gamma)");
    add_model_inputs(train_cmd, train.inputs, train_year);
    auto* params_in = train_cmd->add_option("--params-in", train.params_in, "Known hyperparameters; fit only");
    auto* grid = train_cmd->add_flag("--grid", train.grid, "Search C and gamma by k-fold cross-validation");
    params_in->excludes(grid);
    grid->excludes(params_in);
    train_cmd->add_option("--params-out", train.params_out, "Hyperparameter CSV to write")->required();
    train_cmd->add_option("--grid-step", train.spec.step, "Exponent step of the 2^i grid")->capture_default_str();
    train_cmd->add_option("--c-min", c_range.first, "Smallest C exponent")->capture_default_str();
    train_cmd->add_option("--c-max", c_range.last, "Largest C exponent")->capture_default_str();
    train_cmd->add_option("--gamma-min", g_range.first, "Smallest gamma exponent")->capture_default_str();
    train_cmd->add_option("--gamma-max", g_range.last, "Largest gamma exponent")->capture_default_str();
    train_cmd->add_option("--folds", train.spec.folds, "Cross-validation folds")->capture_default_str();
    train_cmd->add_option("--seed", seed, "Fold seed (default: AADT_SEED or 0)");
    train_cmd->add_option("--max-iterations", train.spec.max_iterations,
                          "Pair-update budget per grid fit; cells over budget are skipped")
        ->capture_default_str();
    train_cmd->add_option("--threads", train.spec.threads, "Grid worker threads (0 = all cores)")->capture_default_str();

    cli::EstimateArgs estimate;
    std::optional<std::string> estimate_year;
    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate AADT for short-term counts");
    estimate_cmd->add_option("--counts", estimate.counts, "Short-term count CSV")->required();
    estimate_cmd->add_option("--factors", estimate.factors, "Expansion factor CSV")->required();
    estimate_cmd->add_option("--params", estimate.params, "Hyperparameter CSV")->required();
    add_model_inputs(estimate_cmd, estimate.inputs, estimate_year);
    estimate_cmd->add_option("--out", estimate.out_dir, "Output directory")->required();

    cli::EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "MAPE of both estimators against ground truth");
    evaluate_cmd->add_option("--predictions", evaluate.predictions, "Estimate file (output format)")->required();
    evaluate_cmd->add_option("--truth", evaluate.truth, "County,Station,AADT file")->required();
    evaluate_cmd->add_option("--out", evaluate.out, "Report CSV to write")->required();
    evaluate_cmd->add_option("--mapping", evaluate.mapping, "Extra FClass,Group rows");
    evaluate_cmd->add_flag("--round-per-row", evaluate.round_per_row,
                           "Round each percentage error to a whole percent before averaging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitError;
    }

    if (*fetch_cmd) return cli::cmd_fetch(fetch, std::cout, std::cerr);
    if (*train_cmd) {
        if (!resolve_year(train_year, train.inputs)) return cli::kExitError;
        train.spec.c_exponents = {c_range.first, c_range.last};
        train.spec.gamma_exponents = {g_range.first, g_range.last};
        if (seed) {
            train.spec.seed = *seed;
            train.seed_set = true;
        }
        return cli::cmd_train(train, std::cout, std::cerr);
    }
    if (*estimate_cmd) {
        if (!resolve_year(estimate_year, estimate.inputs)) return cli::kExitError;
        return cli::cmd_estimate(estimate, std::cout, std::cerr);
    }
    if (*evaluate_cmd) return cli::cmd_evaluate(evaluate, std::cout, std::cerr);
    return cli::kExitError;
}
