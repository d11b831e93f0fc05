#pragma once

// Orchestration of the two-phase pipeline behind the CLI subcommands:
// preprocess (snapshots -> TFA image files), train (per-condition network
// archives), predict (phase-I trajectory, smoothed posterior, plots), and
// evaluate (score tables, coverage, mode comparison). A synthetic-dataset
// materializer rounds out desk-scale testing.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/dataio.hpp"
#include "vispro/nsgpr.hpp"
#include "vispro/plot.hpp"
#include "vispro/prosqn.hpp"
#include "vispro/scoring.hpp"
#include "vispro/tfa.hpp"

namespace vispro {

inline constexpr const char* kModeFull = "full";
inline constexpr const char* kModePhase1 = "phase1-only";
inline constexpr const char* kModeSeBaseline = "se-baseline";

struct PipelineConfig {
    fs::path manifest_path;
    fs::path out_dir = "out";
    std::string mode = kModeFull;

    StftConfig stft;
    TrainConfig train;
    int width_divisor = 1;
    FitConfig gp;

    std::vector<double> levels = {0.80, 0.90, 0.95};
    std::optional<double> horizon_seconds;  // default: horizon_fraction * t_c
    double horizon_fraction = 0.5;
    int spectra_stride = 1;

    void validate_mode() const {
        if (mode != kModeFull && mode != kModePhase1 && mode != kModeSeBaseline) {
            throw UserError("unknown mode: " + mode);
        }
    }

    double horizon_for(double t_c) const {
        return horizon_seconds ? *horizon_seconds : horizon_fraction * t_c;
    }
};

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string snapshot_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%05zu", index + 1);
    return buf;
}

}  // namespace detail

// Applies key=value overrides (the --config file) onto a PipelineConfig.
inline void apply_config_text(PipelineConfig& config, const std::string& text,
                              const std::string& origin) {
    for (const auto& [key, value] : parse_key_values(text, origin)) {
        try {
            if (key == "frame_length") {
                config.stft.frame_length = std::stoi(value);
            } else if (key == "hop") {
                config.stft.hop = std::stoi(value);
            } else if (key == "fft_size") {
                config.stft.fft_size = std::stoi(value);
            } else if (key == "window") {
                if (value == "hann") {
                    config.stft.window = WindowKind::kHann;
                } else if (value == "rectangular") {
                    config.stft.window = WindowKind::kRectangular;
                } else {
                    throw UserError("config: unknown window " + value);
                }
            } else if (key == "epochs") {
                config.train.epochs = std::stoi(value);
            } else if (key == "batch_size") {
                config.train.batch_size = std::stoi(value);
            } else if (key == "learning_rate") {
                config.train.learning_rate = std::stod(value);
            } else if (key == "train_seed") {
                config.train.seed = std::stoull(value);
            } else if (key == "width_divisor") {
                config.width_divisor = std::stoi(value);
            } else if (key == "gp_restarts") {
                config.gp.restarts = std::stoi(value);
            } else if (key == "gp_max_iterations") {
                config.gp.max_iterations = std::stoi(value);
            } else if (key == "gp_support_count") {
                config.gp.support_count = std::stoi(value);
            } else if (key == "gp_seed") {
                config.gp.seed = std::stoull(value);
            } else if (key == "levels") {
                config.levels.clear();
                for (const auto& item : split_list(value)) {
                    config.levels.push_back(std::stod(item) / 100.0);
                }
            } else if (key == "horizon") {
                config.horizon_seconds = std::stod(value);
            } else if (key == "horizon_fraction") {
                config.horizon_fraction = std::stod(value);
            } else if (key == "spectra_stride") {
                config.spectra_stride = std::stoi(value);
            } else {
                throw UserError("config: unknown key " + key);
            }
        } catch (const std::invalid_argument&) {
            throw UserError("config: bad value for " + key);
        }
    }
}

inline void load_config_file(PipelineConfig& config, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    apply_config_text(config, text, path.string());
}

// ---------------------------------------------------------------------------
// Synthetic dataset materialization: PHM12-style CSV snapshot files plus a
// manifest and a ground-truth table, all derived from one seed.

struct SynthConfig {
    fs::path out_dir;
    std::uint64_t seed = 1;
    int train_count = 2;
    int test_count = 1;
    double lifetime = 2000.0;
    double cadence = 10.0;
    double sample_rate = 25600.0;
    double truncation_fraction = 0.75;
};

struct SynthSummary {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::map<std::string, double> truth_rul;  // test id -> RUL at t_c
};

inline SynthSummary cmd_synth(const SynthConfig& config) {
    if (config.train_count < 1 || config.test_count < 1) {
        throw UserError("synth: need at least one training and one testing bearing");
    }
    fs::create_directories(config.out_dir);
    Rng rng(config.seed);
    SynthSummary summary;

    auto rounded_lifetime = [&](double scale) {
        const double raw = config.lifetime * scale;
        return std::max(config.cadence,
                        std::round(raw / config.cadence) * config.cadence);
    };

    std::string truth_csv = "bearing,rul_seconds\n";
    const int total = config.train_count + config.test_count;
    for (int i = 0; i < total; ++i) {
        SyntheticSpec spec;
        spec.seed = rng();
        spec.lifetime = rounded_lifetime(uniform(rng, 0.9, 1.1));
        spec.cadence = config.cadence;
        spec.sample_rate = config.sample_rate;

        BearingRun run = generate_synthetic(spec);
        run.id = "1_" + std::to_string(i + 1);
        run.condition = 1;
        const bool training = i < config.train_count;
        if (training) {
            summary.train_ids.push_back(run.id);
            write_bearing_csv(run, config.out_dir);
        } else {
            summary.test_ids.push_back(run.id);
            const double t_c = std::round(spec.lifetime * config.truncation_fraction /
                                          config.cadence) *
                               config.cadence;
            BearingRun truncated = truncate_run(run, t_c);
            write_bearing_csv(truncated, config.out_dir);
            const double rul = spec.lifetime - *truncated.truncation_time;
            summary.truth_rul[run.id] = rul;
            truth_csv += run.id + "," + detail::fmt_g(rul) + "\n";
        }
    }

    std::string manifest = "root=.\n";
    manifest += "sample_rate=" + detail::fmt_g(config.sample_rate) + "\n";
    manifest += "cadence=" + detail::fmt_g(config.cadence) + "\n";
    manifest += "channel=horizontal\n";
    manifest += "truth=truth.csv\n";
    auto join = [](const std::vector<std::string>& ids) {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ',';
            out += ids[i];
        }
        return out;
    };
    manifest += "condition.1.train=" + join(summary.train_ids) + "\n";
    manifest += "condition.1.test=" + join(summary.test_ids) + "\n";
    detail::write_file_bytes((config.out_dir / "manifest.txt").string(), manifest);
    detail::write_file_bytes((config.out_dir / "truth.csv").string(), truth_csv);
    return summary;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessSummary {
    int bearings = 0;
    int snapshots = 0;
};

inline PreprocessSummary cmd_preprocess(const PipelineConfig& config) {
    const DatasetManifest manifest = load_manifest(config.manifest_path);
    fs::create_directories(config.out_dir);

    PreprocessSummary summary;
    std::string summary_csv = "bearing,role,condition,snapshots,last_timestamp\n";
    for (const auto& cond : manifest.conditions) {
        for (const bool training : {true, false}) {
            for (const auto& id : training ? cond.train_ids : cond.test_ids) {
                const BearingRun run = load_bearing(manifest, id);
                const fs::path tfa_dir = config.out_dir / "tfa" / id;
                const fs::path spectra_dir = config.out_dir / "spectra" / id;
                fs::create_directories(tfa_dir);
                fs::create_directories(spectra_dir);

                for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
                    const TfaImage image = stft(run.snapshots[i], config.stft);
                    const std::string stem = detail::snapshot_stem(i);
                    save_vtfa(image, (tfa_dir / (stem + ".vtfa")).string());
                    if (static_cast<int>(i) % std::max(1, config.spectra_stride) == 0) {
                        std::string csv = "band_hz";
                        for (const double t : image.window_times) {
                            csv += "," + detail::fmt_g(image.timestamp + t);
                        }
                        csv += "\n";
                        for (int f = 0; f < image.rows; ++f) {
                            csv += detail::fmt_g(f * image.band_width_hz);
                            for (int m = 0; m < image.cols; ++m) {
                                csv += "," + detail::fmt_g(image.at(f, m));
                            }
                            csv += "\n";
                        }
                        detail::write_file_bytes((spectra_dir / (stem + ".csv")).string(),
                                                 csv);
                    }
                }
                summary.bearings += 1;
                summary.snapshots += static_cast<int>(run.snapshots.size());
                summary_csv += id + "," + (training ? "train" : "test") + "," +
                               std::to_string(cond.condition) + "," +
                               std::to_string(run.snapshots.size()) + "," +
                               detail::fmt_g(run.snapshots.back().timestamp) + "\n";
            }
        }
    }
    detail::write_file_bytes((config.out_dir / "preprocess_summary.csv").string(),
                             summary_csv);
    return summary;
}

// ---------------------------------------------------------------------------
// train

namespace detail {

inline std::vector<fs::path> list_vtfa(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw DataError("missing preprocessed images in " + dir.string() +
                        "; run the preprocess command first");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".vtfa") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw DataError("no preprocessed images in " + dir.string() +
                        "; run the preprocess command first");
    }
    return files;
}

}  // namespace detail

struct TrainOutput {
    std::map<int, fs::path> archives;       // condition -> archive path
    std::map<int, std::vector<double>> loss;  // condition -> loss history
};

inline TrainOutput cmd_train(const PipelineConfig& config) {
    const DatasetManifest manifest = load_manifest(config.manifest_path);
    const fs::path models_dir = config.out_dir / "models";
    fs::create_directories(models_dir);

    TrainOutput output;
    for (const auto& cond : manifest.conditions) {
        if (cond.train_ids.empty()) continue;

        // Gather (image, t, RUL) samples; the failure time of a run-to-failure
        // bearing is its last snapshot timestamp.
        std::vector<TrainSample<float>> samples;
        double t_ref = 0.0;
        for (const auto& id : cond.train_ids) {
            const auto files = detail::list_vtfa(config.out_dir / "tfa" / id);
            const double t_f = load_vtfa(files.back().string()).timestamp;
            t_ref = std::max(t_ref, t_f);
            for (const auto& file : files) {
                const TfaImage raw = load_vtfa(file.string());
                TrainSample<float> sample;
                sample.image = image_to_tensor<float>(tfa_normalize(raw));
                sample.time_seconds = raw.timestamp;
                sample.rul_seconds = t_f - raw.timestamp;
                samples.push_back(std::move(sample));
            }
        }

        TrainConfig train_config = config.train;
        train_config.time_scale = t_ref;
        train_config.rul_scale = t_ref;

        ProSqnNet<float> net = build_prosqn<float>(train_config.seed, config.width_divisor);
        const std::vector<double> history = train(net, samples, train_config);

        const fs::path archive =
            models_dir / ("prosqn_cond" + std::to_string(cond.condition) + ".vspr");
        save_prosqn(net, archive);

        std::string loss_csv = "epoch,mean_loss\n";
        for (std::size_t e = 0; e < history.size(); ++e) {
            loss_csv += std::to_string(e) + "," + detail::fmt_g(history[e]) + "\n";
        }
        detail::write_file_bytes(
            (models_dir / ("loss_cond" + std::to_string(cond.condition) + ".csv")).string(),
            loss_csv);

        output.archives[cond.condition] = archive;
        output.loss[cond.condition] = history;
    }
    if (output.archives.empty()) {
        throw DataError("train: manifest lists no training bearings");
    }
    return output;
}

// ---------------------------------------------------------------------------
// predict

struct PredictionRecord {
    std::string bearing;
    std::string mode;
    double t_c = 0.0;
    double y_hat = 0.0;
    std::optional<double> y_true;
    std::optional<double> sigma;
    std::optional<double> failure_time;
    bool horizon_exceeded = false;
    std::map<double, std::pair<double, double>> bounds;
};

namespace detail {

inline std::string level_tag(double level) {
    return std::to_string(static_cast<int>(std::lround(level * 100.0)));
}

inline std::string record_to_csv(const PredictionRecord& record,
                                 const std::vector<double>& levels) {
    std::string header = "bearing,mode,t_c,y_hat,y_true";
    std::string row = record.bearing + "," + record.mode + "," + fmt_g(record.t_c) +
                      "," + fmt_g(record.y_hat) + "," +
                      (record.y_true ? fmt_g(*record.y_true) : "");
    if (record.mode != kModePhase1) {
        header += ",sigma,failure_time,horizon_exceeded";
        row += "," + (record.sigma ? fmt_g(*record.sigma) : std::string());
        row += "," + (record.failure_time ? fmt_g(*record.failure_time) : std::string());
        row += std::string(",") + (record.horizon_exceeded ? "1" : "0");
        for (const double level : levels) {
            header += ",lb" + level_tag(level) + ",ub" + level_tag(level);
            const auto it = record.bounds.find(level);
            row += "," + fmt_g(it->second.first) + "," + fmt_g(it->second.second);
        }
    }
    return header + "\n" + row + "\n";
}

inline std::map<std::string, std::string> parse_single_row_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing prediction record: " + path.string());
    std::string header, row;
    if (!std::getline(in, header) || !std::getline(in, row)) {
        throw DataError("malformed prediction record: " + path.string());
    }
    const auto headers = split_list(header);
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row_in(row);
    while (std::getline(row_in, cell, ',')) cells.push_back(cell);
    cells.resize(headers.size());
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < headers.size(); ++i) out[headers[i]] = cells[i];
    return out;
}

inline std::map<std::string, double> load_truth(const fs::path& path) {
    std::map<std::string, double> truth;
    std::ifstream in(path);
    if (!in) return truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("bearing", 0) == 0) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) continue;
        truth[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return truth;
}

}  // namespace detail

inline PredictionRecord cmd_predict(const PipelineConfig& config,
                                    const std::string& bearing_id) {
    config.validate_mode();
    const DatasetManifest manifest = load_manifest(config.manifest_path);
    if (!manifest.is_testing(bearing_id)) {
        throw UserError("predict: bearing " + bearing_id +
                        " is not a testing bearing in the manifest");
    }

    const int condition = manifest.condition_of(bearing_id);
    const fs::path archive =
        config.out_dir / "models" / ("prosqn_cond" + std::to_string(condition) + ".vspr");
    if (!fs::exists(archive)) {
        throw DataError("model archive not found: " + archive.string() +
                        "; run the train command first");
    }
    const ProSqnNet<float> net = load_prosqn(archive);

    const BearingRun run = load_bearing(manifest, bearing_id);
    const double t_c = *run.truncation_time;
    const auto trajectory = predict_trajectory(net, run.snapshots, config.stft);

    const fs::path pred_dir = config.out_dir / "predictions" / config.mode;
    fs::create_directories(pred_dir);

    std::string traj_csv = "t_seconds,rul_seconds\n";
    for (const auto& [t, rul] : trajectory) {
        traj_csv += detail::fmt_g(t) + "," + detail::fmt_g(rul) + "\n";
    }
    detail::write_file_bytes((pred_dir / ("trajectory_" + bearing_id + ".csv")).string(),
                             traj_csv);

    PredictionRecord record;
    record.bearing = bearing_id;
    record.mode = config.mode;
    record.t_c = t_c;
    if (!manifest.truth_csv.empty()) {
        const auto truth = detail::load_truth(manifest.truth_csv);
        const auto it = truth.find(bearing_id);
        if (it != truth.end()) record.y_true = it->second;
    }

    SvgPlot plot("RUL prediction, bearing " + bearing_id, "time [s]", "RUL [s]");
    PlotSeries phase1{"phase1", "#888888", trajectory};

    if (config.mode == kModePhase1) {
        record.y_hat = trajectory.back().second;
        plot.add_series(phase1);
    } else {
        FitConfig fit_config = config.gp;
        fit_config.kind = config.mode == kModeSeBaseline ? KernelKind::kUniversalSe
                                                         : KernelKind::kLocalField;
        const GprModel model = fit(GprDataset::from_trajectory(trajectory), fit_config);
        save_gpr(model, pred_dir / ("gpr_" + bearing_id + ".txt"));

        const double horizon = config.horizon_for(t_c);
        const auto prediction = predict_rul(model, t_c, config.levels);
        record.y_hat = prediction.mean_seconds;
        record.sigma = prediction.sigma_seconds;
        for (const auto& bound : prediction.bounds) {
            record.bounds[bound.level] = {bound.lower, bound.upper};
        }
        const FailureForecast forecast =
            predict_failure_time(model, t_c, horizon, manifest.cadence);
        if (forecast.crossed) {
            record.failure_time = forecast.failure_time;
        } else {
            record.horizon_exceeded = true;
        }

        // Posterior trajectory over [t0, t_c + horizon] at the snapshot cadence.
        std::string post_csv = "t_seconds,mean_rul_seconds,sigma_seconds";
        for (const double level : config.levels) {
            post_csv += ",lb" + detail::level_tag(level) + ",ub" + detail::level_tag(level);
        }
        post_csv += "\n";
        PlotSeries mean_series{"posterior mean", "#d62728", {}};
        std::map<double, std::pair<PlotSeries, PlotSeries>> band_series;
        const double mid_level = config.levels[config.levels.size() / 2];
        for (double t = trajectory.front().first; t <= t_c + horizon + 1e-9;
             t += manifest.cadence) {
            const auto point = predict_rul(model, t, config.levels);
            post_csv += detail::fmt_g(t) + "," + detail::fmt_g(point.mean_seconds) + "," +
                        detail::fmt_g(point.sigma_seconds);
            for (const auto& bound : point.bounds) {
                post_csv +=
                    "," + detail::fmt_g(bound.lower) + "," + detail::fmt_g(bound.upper);
                if (std::abs(bound.level - mid_level) < 1e-9) {
                    auto& [lo_series, hi_series] = band_series[bound.level];
                    lo_series.points.emplace_back(t, bound.lower);
                    hi_series.points.emplace_back(t, bound.upper);
                }
            }
            mean_series.points.emplace_back(t, point.mean_seconds);
        }
        detail::write_file_bytes((pred_dir / ("posterior_" + bearing_id + ".csv")).string(),
                                 post_csv);

        plot.add_series(phase1);
        plot.add_series(mean_series);
        for (auto& [level, pair] : band_series) {
            pair.first.name = "lower" + detail::level_tag(level);
            pair.first.color = "#2ca02c";
            pair.second.name = "upper" + detail::level_tag(level);
            pair.second.color = "#2ca02c";
            plot.add_series(pair.first);
            plot.add_series(pair.second);
        }
    }

    detail::write_file_bytes((pred_dir / ("plot_" + bearing_id + ".svg")).string(),
                             plot.render());
    detail::write_file_bytes((pred_dir / ("record_" + bearing_id + ".csv")).string(),
                             detail::record_to_csv(record, config.levels));
    return record;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluationOutput {
    AggregateScore aggregate;
    std::vector<CoverageReport> coverage;
    std::map<std::string, AggregateScore> by_mode;  // comparative, when present
};

namespace detail {

inline std::vector<BearingResult> read_mode_results(const PipelineConfig& config,
                                                    const DatasetManifest& manifest,
                                                    const std::string& mode) {
    std::vector<BearingResult> results;
    for (const auto& cond : manifest.conditions) {
        for (const auto& id : cond.test_ids) {
            const fs::path path =
                config.out_dir / "predictions" / mode / ("record_" + id + ".csv");
            if (!fs::exists(path)) {
                throw DataError("evaluate: missing prediction for bearing " + id +
                                " in mode " + mode + " (" + path.string() + ")");
            }
            const auto row = parse_single_row_csv(path);
            BearingResult result;
            result.bearing = id;
            result.truncation_time = std::stod(row.at("t_c"));
            result.predicted_rul = std::stod(row.at("y_hat"));
            const auto truth = row.find("y_true");
            if (truth == row.end() || truth->second.empty()) {
                throw DataError("evaluate: bearing " + id + " has no ground truth");
            }
            result.true_rul = std::stod(truth->second);
            for (const double level : config.levels) {
                const std::string tag = level_tag(level);
                const auto lb = row.find("lb" + tag), ub = row.find("ub" + tag);
                if (lb != row.end() && ub != row.end() && !lb->second.empty()) {
                    result.bounds[level] = {std::stod(lb->second), std::stod(ub->second)};
                }
            }
            results.push_back(std::move(result));
        }
    }
    if (results.empty()) throw DataError("evaluate: manifest lists no testing bearings");
    return results;
}

inline bool mode_complete(const PipelineConfig& config, const DatasetManifest& manifest,
                          const std::string& mode) {
    for (const auto& cond : manifest.conditions) {
        for (const auto& id : cond.test_ids) {
            if (!fs::exists(config.out_dir / "predictions" / mode /
                            ("record_" + id + ".csv"))) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace detail

inline EvaluationOutput cmd_evaluate(const PipelineConfig& config) {
    config.validate_mode();
    const DatasetManifest manifest = load_manifest(config.manifest_path);
    const auto results = detail::read_mode_results(config, manifest, config.mode);

    EvaluationOutput output;
    output.aggregate = aggregate_score(results);

    const fs::path eval_dir = config.out_dir / "evaluation" / config.mode;
    fs::create_directories(eval_dir);

    const bool has90 =
        std::any_of(config.levels.begin(), config.levels.end(),
                    [](double l) { return std::abs(l - 0.90) < 1e-9; });
    std::string results_csv = "bearing,t_c,y,y_hat,er_pct,accuracy,lower90,upper90\n";
    for (const BearingResult& r : results) {
        const double er = percent_error(r.true_rul, r.predicted_rul);
        results_csv += r.bearing + "," + detail::fmt_g(r.truncation_time) + "," +
                       detail::fmt_g(r.true_rul) + "," + detail::fmt_g(r.predicted_rul) +
                       "," + detail::fmt_g(er) + "," + detail::fmt_g(accuracy_score(er));
        if (has90 && r.bounds.count(0.90)) {
            results_csv += "," + detail::fmt_g(r.bounds.at(0.90).first) + "," +
                           detail::fmt_g(r.bounds.at(0.90).second);
        } else {
            results_csv += ",,";
        }
        results_csv += "\n";
    }
    results_csv += "Mean,,,," + detail::fmt_g(output.aggregate.mean_er) + ",,,\n";
    results_csv += "STD,,,," + detail::fmt_g(output.aggregate.std_er) + ",,,\n";
    results_csv += "Score,,,,," + detail::fmt_g(output.aggregate.score) + ",,\n";
    detail::write_file_bytes((eval_dir / "results.csv").string(), results_csv);

    if (config.mode != kModePhase1 && !results.empty() && !results[0].bounds.empty()) {
        std::string coverage_csv = "level,count,mean_width,invalid\n";
        for (const double level : config.levels) {
            const CoverageReport report = coverage_report(results, level);
            output.coverage.push_back(report);
            coverage_csv += detail::level_tag(level) + "," + std::to_string(report.count) +
                            "," + detail::fmt_g(report.mean_width) + "," +
                            std::to_string(report.invalid) + "\n";
        }
        detail::write_file_bytes((eval_dir / "coverage.csv").string(), coverage_csv);
    }

    // Side-by-side comparison across all modes that have complete predictions.
    std::vector<std::string> complete;
    for (const char* mode : {kModeFull, kModePhase1, kModeSeBaseline}) {
        if (detail::mode_complete(config, manifest, mode)) complete.push_back(mode);
    }
    if (complete.size() > 1) {
        std::string cmp_csv = "mode,score,mean_er,std_er,mean_abs_er\n";
        for (const auto& mode : complete) {
            const auto mode_results = detail::read_mode_results(config, manifest, mode);
            const AggregateScore agg = aggregate_score(mode_results);
            output.by_mode[mode] = agg;
            cmp_csv += mode + "," + detail::fmt_g(agg.score) + "," +
                       detail::fmt_g(agg.mean_er) + "," + detail::fmt_g(agg.std_er) + "," +
                       detail::fmt_g(agg.mean_abs_er) + "\n";
        }
        detail::write_file_bytes((config.out_dir / "evaluation" / "comparison.csv").string(),
                                 cmp_csv);
    }
    return output;
}

}  // namespace vispro
