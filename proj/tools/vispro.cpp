// Command-line front end for the two-phase RUL prediction pipeline.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vispro/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string manifest;
    std::string config_file;
    std::string out = "out";
    std::string mode = vispro::kModeFull;
    std::string levels;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool needs_manifest = true) {
    auto* manifest = cmd->add_option("--manifest", args.manifest, "dataset manifest file");
    if (needs_manifest) manifest->required();
    cmd->add_option("--config", args.config_file, "key=value config file");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--mode", args.mode, "full | phase1-only | se-baseline");
    cmd->add_option("--levels", args.levels, "confidence levels, e.g. 80,90,95");
    cmd->add_option("--seed", args.seed, "seed for training and GP fitting");
    cmd->add_option("--horizon", args.horizon, "extrapolation horizon in seconds");
}

vispro::PipelineConfig build_config(const CommonArgs& args) {
    vispro::PipelineConfig config;
    config.manifest_path = args.manifest;
    config.out_dir = args.out;
    config.mode = args.mode;
    if (!args.config_file.empty()) vispro::load_config_file(config, args.config_file);
    if (!args.levels.empty()) {
        config.levels.clear();
        for (const auto& item : vispro::split_list(args.levels)) {
            config.levels.push_back(std::stod(item) / 100.0);
        }
    }
    if (args.seed) {
        config.train.seed = *args.seed;
        config.gp.seed = *args.seed;
    }
    if (args.horizon) config.horizon_seconds = *args.horizon;
    config.validate_mode();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase bearing RUL prediction pipeline"};
    app.require_subcommand(1);

    CommonArgs preprocess_args, train_args, predict_args, evaluate_args;
    std::string predict_bearing;

    auto* preprocess = app.add_subcommand(
        "preprocess", "compute time-frequency image files for every bearing");
    add_common_options(preprocess, preprocess_args);

    auto* train =
        app.add_subcommand("train", "train one network archive per operating condition");
    add_common_options(train, train_args);

    auto* predict = app.add_subcommand(
        "predict", "phase-I trajectory plus smoothed posterior for one bearing");
    add_common_options(predict, predict_args);
    predict->add_option("--bearing", predict_bearing, "testing bearing id")->required();

    auto* evaluate =
        app.add_subcommand("evaluate", "score predictions against ground truth");
    add_common_options(evaluate, evaluate_args);

    vispro::SynthConfig synth_config;
    auto* synth = app.add_subcommand(
        "synth", "materialize a seeded synthetic run-to-failure dataset");
    std::string synth_out;
    synth->add_option("--out", synth_out, "dataset directory")->required();
    synth->add_option("--seed", synth_config.seed, "generator seed");
    synth->add_option("--train-count", synth_config.train_count, "training bearings");
    synth->add_option("--test-count", synth_config.test_count, "testing bearings");
    synth->add_option("--lifetime", synth_config.lifetime, "nominal lifetime, seconds");
    synth->add_option("--truncation", synth_config.truncation_fraction,
                      "testing truncation fraction of lifetime");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (preprocess->parsed()) {
            const auto summary = vispro::cmd_preprocess(build_config(preprocess_args));
            std::printf("preprocessed %d bearings, %d snapshots\n", summary.bearings,
                        summary.snapshots);
        } else if (train->parsed()) {
            const auto output = vispro::cmd_train(build_config(train_args));
            for (const auto& [condition, history] : output.loss) {
                std::printf("condition %d: final loss %.6g after %zu epochs\n", condition,
                            history.back(), history.size());
            }
        } else if (predict->parsed()) {
            const auto record =
                vispro::cmd_predict(build_config(predict_args), predict_bearing);
            std::printf("bearing %s: t_c=%.1fs rul=%.1fs", record.bearing.c_str(),
                        record.t_c, record.y_hat);
            if (record.failure_time) {
                std::printf(" failure at %.1fs", *record.failure_time);
            } else if (record.horizon_exceeded) {
                std::printf(" (no failure inside horizon)");
            }
            std::printf("\n");
        } else if (evaluate->parsed()) {
            const auto output = vispro::cmd_evaluate(build_config(evaluate_args));
            std::printf("score=%.4f mean_er=%.4f std_er=%.4f\n", output.aggregate.score,
                        output.aggregate.mean_er, output.aggregate.std_er);
        } else if (synth->parsed()) {
            synth_config.out_dir = synth_out;
            const auto summary = vispro::cmd_synth(synth_config);
            std::printf("synthesized %zu training and %zu testing bearings\n",
                        summary.train_ids.size(), summary.test_ids.size());
        }
    } catch (const vispro::UserError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const vispro::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const vispro::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
