// Copyright 2026 The masksel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "masksel/config.hpp"
#include "masksel/io.hpp"
#include "masksel/pipeline.hpp"

namespace masksel::cli {

struct MissingInputError : std::runtime_error {
    explicit MissingInputError(const std::string& path)
        : std::runtime_error("missing input file: " + path) {}
};

inline void require_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw MissingInputError(path);
}

/// "a:b:step" inclusive grid, or a single value.
inline std::vector<double> parse_beta_grid(const std::string& spec) {
    std::vector<double> betas;
    const auto c1 = spec.find(':');
    if (c1 == std::string::npos) {
        betas.push_back(std::stod(spec));
        return betas;
    }
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw std::invalid_argument("--betas expects start:end:step, got: " + spec);
    const double start = std::stod(spec.substr(0, c1));
    const double end = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(spec.substr(c2 + 1));
    if (!(step > 0.0)) throw std::invalid_argument("--betas step must be positive");
    for (int i = 0;; ++i) {
        const double value = std::round((start + i * step) * 1e6) / 1e6;
        if (value > end + 1e-9) break;
        betas.push_back(value);
    }
    return betas;
}

inline std::string report_csv_header() {
    return "seed,stage,n_total,beta,score_source,ap_annotation,ap_segmentation,mae_pp,"
           "budget_days\n";
}

inline void append_report_rows(std::string& csv, const ExperimentConfig& config,
                               const ExperimentReport& report) {
    const std::string beta = config.selection.strategy == SelectionStrategy::beta_proximity
                                 ? format_fixed(config.selection.beta, 2)
                                 : "";
    const std::string source = config.score_source == ScoreSource::oracle ? "oracle" : "predicted";
    const std::string shared = std::to_string(config.n_total) + ',' + beta + ',' + source + ',';
    for (const SeedRunResult& r : report.per_seed) {
        csv += std::to_string(r.seed_index) + ",run," + shared +
               format_fixed(r.ap_annotation, 4) + ',' + format_fixed(r.ap_segmentation, 4) + ',' +
               format_fixed(r.mae_pp, 4) + ',' + format_fixed(r.budget_days, 4) + '\n';
    }
    csv += ",mean," + shared + format_fixed(report.ap_annotation.mean, 4) + ',' +
           format_fixed(report.ap_segmentation.mean, 4) + ',' + format_fixed(report.mae_pp.mean, 4) +
           ',' + format_fixed(report.budget_days.mean, 4) + '\n';
    csv += ",std," + shared + format_fixed(report.ap_annotation.stddev, 4) + ',' +
           format_fixed(report.ap_segmentation.stddev, 4) + ',' +
           format_fixed(report.mae_pp.stddev, 4) + ',' + format_fixed(report.budget_days.stddev, 4) +
           '\n';
}

inline std::string analysis_csv_header() { return "beta,mean_objects,mean_object_size\n"; }

inline void append_analysis_row(std::string& csv, const SelectionAnalysisRow& row) {
    csv += format_fixed(row.beta, 2) + ',' + format_fixed(row.mean_objects, 4) + ',' +
           format_fixed(row.mean_object_size, 6) + '\n';
}

/// Mean selected-set statistics across the report's per-seed selections.
inline std::optional<SelectionAnalysisRow> selection_row_for_report(
    const SyntheticDataset& dataset, const ExperimentConfig& config,
    const ExperimentReport& report) {
    if (config.selection.strategy != SelectionStrategy::beta_proximity) return std::nullopt;
    SelectionAnalysisRow mean_row;
    mean_row.beta = config.selection.beta;
    int counted = 0;
    for (const SeedRunResult& r : report.per_seed) {
        if (r.selected_ids.empty()) continue;
        const SelectionAnalysis analysis =
            analyze_selection(dataset, {{config.selection.beta, r.selected_ids}});
        mean_row.mean_objects += analysis.rows[0].mean_objects;
        mean_row.mean_object_size += analysis.rows[0].mean_object_size;
        ++counted;
    }
    if (counted == 0) return std::nullopt;
    mean_row.mean_objects /= counted;
    mean_row.mean_object_size /= counted;
    return mean_row;
}

namespace detail {

struct GenArgs {
    std::uint64_t seed = 0;
    std::string out;
    std::string stats;
    WorldConfig world;
};

inline void run_gen(const GenArgs& args) {
    WorldConfig world = args.world;
    world.seed = args.seed;
    const SyntheticDataset dataset = generate_dataset(world);
    write_dataset(args.out, dataset);
    if (!args.stats.empty()) write_text_file(args.stats, stats_csv(dataset));
}

struct BudgetArgs {
    std::string strategy = "random";
    std::int64_t n_strong = 0;
    std::int64_t pool = 0;
    std::int64_t n_weak = 0;
    double t_il = 20.0, t_ilc = 22.22, t_full = 239.7, t_bb = 38.1;
};

inline void run_budget(const BudgetArgs& args) {
    BudgetModel model;
    const auto to_centi = [](double s) {
        return static_cast<std::int64_t>(std::llround(s * 100.0));
    };
    model.il_centiseconds = to_centi(args.t_il);
    model.ilc_centiseconds = to_centi(args.t_ilc);
    model.full_centiseconds = to_centi(args.t_full);
    model.bb_centiseconds = to_centi(args.t_bb);

    const CampaignStrategy strategy =
        args.strategy == "mask_guided" ? CampaignStrategy::mask_guided : CampaignStrategy::random;
    CampaignPlan plan;
    plan.n_strong = args.n_strong;
    plan.selection_pool = args.pool;
    plan.n_weak = args.n_weak;
    const double seconds = campaign_cost(model, plan, strategy);
    std::cout << "strategy,n_strong,pool,n_weak,seconds,days\n"
              << args.strategy << ',' << plan.n_strong << ',' << plan.selection_pool << ','
              << plan.n_weak << ',' << format_fixed(seconds, 2) << ','
              << format_fixed(seconds_to_days(seconds), 2) << '\n';
}

struct SelectArgs {
    std::string scores;
    std::string strategy = "beta_proximity";
    double beta = 0.5;
    std::size_t n = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

inline void run_select(const SelectArgs& args) {
    require_file(args.scores);
    const ScoredPool pool = scores_from_csv(read_text_file(args.scores));
    std::vector<ImageId> selected;
    if (args.strategy == "beta_proximity") {
        selected = select_by_beta(pool, args.beta, args.n);
    } else {
        if (!args.seed_given)
            throw CLI::ValidationError("select", "--seed is required for random selection");
        std::vector<ImageId> ids;
        ids.reserve(pool.entries.size());
        for (const auto& [id, score] : pool.entries) ids.push_back(id);
        selected = select_random(ids, args.n, args.seed);
    }
    for (const ImageId id : selected) std::cout << id << '\n';
}

struct RunArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    std::string betas;  // sweep only
};

inline ExperimentConfig load_experiment_config(const RunArgs& args) {
    require_file(args.config_path);
    ExperimentConfig config =
        experiment_config_from_json(nlohmann::json::parse(read_text_file(args.config_path)));
    config.base_seed = args.seed;
    return config;
}

inline void run_run(const RunArgs& args) {
    const ExperimentConfig config = load_experiment_config(args);
    config.validate();
    std::filesystem::create_directories(args.out);
    const SyntheticDataset dataset = generate_dataset(config.world);
    const ExperimentReport report = run_experiment(config, dataset);

    std::string report_csv = report_csv_header();
    append_report_rows(report_csv, config, report);
    write_text_file(args.out + "/report.csv", report_csv);

    std::string analysis_csv = analysis_csv_header();
    if (const auto row = selection_row_for_report(dataset, config, report))
        append_analysis_row(analysis_csv, *row);
    write_text_file(args.out + "/analysis.csv", analysis_csv);
}

inline void run_sweep(const RunArgs& args) {
    ExperimentConfig config = load_experiment_config(args);
    config.selection.strategy = SelectionStrategy::beta_proximity;
    config.validate();
    std::filesystem::create_directories(args.out);
    const std::vector<double> betas = parse_beta_grid(args.betas);
    const SyntheticDataset dataset = generate_dataset(config.world);

    std::string report_csv = report_csv_header();
    std::string analysis_csv = analysis_csv_header();
    for (const double beta : betas) {
        config.selection.beta = beta;
        const ExperimentReport report = run_experiment(config, dataset);
        append_report_rows(report_csv, config, report);
        if (const auto row = selection_row_for_report(dataset, config, report))
            append_analysis_row(analysis_csv, *row);
    }
    write_text_file(args.out + "/report.csv", report_csv);
    write_text_file(args.out + "/analysis.csv", analysis_csv);
}

struct AnalyzeArgs {
    std::string dataset;
    std::string scores;
    std::size_t n = 1;
    std::string betas = "0.0:1.0:0.1";
    std::string out;
};

inline void run_analyze(const AnalyzeArgs& args) {
    require_file(args.dataset);
    require_file(args.scores);
    const SyntheticDataset dataset = read_dataset(args.dataset);
    const ScoredPool pool = scores_from_csv(read_text_file(args.scores));
    std::vector<std::pair<double, std::vector<ImageId>>> selections;
    for (const double beta : parse_beta_grid(args.betas))
        selections.emplace_back(beta, select_by_beta(pool, beta, args.n));
    const SelectionAnalysis analysis = analyze_selection(dataset, selections);
    std::string csv = analysis_csv_header();
    for (const SelectionAnalysisRow& row : analysis.rows) append_analysis_row(csv, row);
    write_text_file(args.out, csv);
}

}  // namespace detail

/// Parses and executes one invocation. Returns the process exit status:
/// 0 success, 1 runtime/input failure, 2 usage error.
inline int dispatch(std::vector<std::string> args) {
    CLI::App app{"mask-guided sample selection toolkit for semi-supervised instance segmentation"};
    app.require_subcommand(1);

    detail::GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->add_option("--seed", gen_args.seed, "world seed")->required();
    gen->add_option("--out", gen_args.out, "output dataset JSON path")->required();
    gen->add_option("--stats", gen_args.stats, "optional sidecar stats CSV path");
    gen->add_option("--images", gen_args.world.num_images, "number of images")->default_val(100);
    gen->add_option("--width", gen_args.world.raster_width, "raster width");
    gen->add_option("--height", gen_args.world.raster_height, "raster height");
    gen->add_option("--classes", gen_args.world.num_classes, "number of classes");
    gen->add_option("--mean-objects", gen_args.world.mean_objects_per_image,
                    "mean objects per image");
    gen->add_option("--max-objects", gen_args.world.max_objects_per_image,
                    "max objects per image");
    gen->add_option("--class-repeat", gen_args.world.class_repeat_prob,
                    "probability of reusing a class within an image");
    gen->add_option("--min-area", gen_args.world.min_area_fraction, "min object area fraction");
    gen->add_option("--max-area", gen_args.world.max_area_fraction, "max object area fraction");

    detail::BudgetArgs budget_args;
    CLI::App* budget = app.add_subcommand("budget", "campaign annotation cost");
    budget->add_option("--strategy", budget_args.strategy, "random or mask_guided")
        ->required()
        ->check(CLI::IsMember({"random", "mask_guided"}));
    budget->add_option("--strong", budget_args.n_strong, "strongly annotated images")->required();
    budget->add_option("--pool", budget_args.pool, "selection pool size (mask_guided)");
    budget->add_option("--weak", budget_args.n_weak, "weakly annotated images");
    budget->add_option("--t-il", budget_args.t_il, "image-level cost, s/image");
    budget->add_option("--t-ilc", budget_args.t_ilc, "image-level+counts cost, s/image");
    budget->add_option("--t-full", budget_args.t_full, "full-mask cost, s/image");
    budget->add_option("--t-bb", budget_args.t_bb, "bounding-box cost, s/image");

    detail::SelectArgs select_args;
    CLI::App* select = app.add_subcommand("select", "select images from a scores CSV");
    select->add_option("--scores", select_args.scores, "scores CSV (image_id,iou_score)")
        ->required();
    select->add_option("--strategy", select_args.strategy, "beta_proximity or random")
        ->check(CLI::IsMember({"beta_proximity", "random"}));
    select->add_option("--beta", select_args.beta, "target IoU Score");
    select->add_option("--n", select_args.n, "number of images to select")->required();
    select->add_option("--seed", select_args.seed, "seed (random strategy)")
        ->each([&select_args](const std::string&) { select_args.seed_given = true; });

    detail::RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run one experiment configuration");
    run->add_option("--config", run_args.config_path, "experiment config JSON")->required();
    run->add_option("--seed", run_args.seed, "base seed")->required();
    run->add_option("--out", run_args.out, "output directory")->required();

    detail::RunArgs sweep_args;
    sweep_args.betas = "0.0:1.0:0.1";
    CLI::App* sweep = app.add_subcommand("sweep", "run a beta sweep");
    sweep->add_option("--config", sweep_args.config_path, "experiment config JSON")->required();
    sweep->add_option("--seed", sweep_args.seed, "base seed")->required();
    sweep->add_option("--out", sweep_args.out, "output directory")->required();
    sweep->add_option("--betas", sweep_args.betas, "grid start:end:step");

    detail::AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand("analyze", "selected-set statistics per beta");
    analyze->add_option("--dataset", analyze_args.dataset, "dataset JSON")->required();
    analyze->add_option("--scores", analyze_args.scores, "scores CSV")->required();
    analyze->add_option("--n", analyze_args.n, "selection size")->required();
    analyze->add_option("--betas", analyze_args.betas, "grid start:end:step");
    analyze->add_option("--out", analyze_args.out, "output analysis CSV")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion") return 0;
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            detail::run_gen(gen_args);
        } else if (budget->parsed()) {
            detail::run_budget(budget_args);
        } else if (select->parsed()) {
            detail::run_select(select_args);
        } else if (run->parsed()) {
            detail::run_run(run_args);
        } else if (sweep->parsed()) {
            detail::run_sweep(sweep_args);
        } else if (analyze->parsed()) {
            detail::run_analyze(analyze_args);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace masksel::cli
