// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "sreid/ablate.hpp"
#include "sreid/io.hpp"
#include "sreid/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDimension = 3;
constexpr int kExitSequence = 4;

sreid::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    sreid::RunConfig cfg =
        path.empty() ? sreid::RunConfig{} : sreid::load_run_config(path);
    if (seed) cfg.sim.seed = *seed;
    return cfg;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path) {
    const auto cfg = load_config(config_path, seed);
    const auto records = sreid::simulate_dataset(cfg);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << out_path << "\n";
        return 1;
    }
    sreid::write_dataset(out, records);
    std::size_t detections = 0;
    for (const auto& rec : records) detections += rec.dets.size();
    std::cout << "sequence " << cfg.sim.effective_sequence_id() << ": " << cfg.sim.n_vehicles
              << " vehicles, " << cfg.sim.duration_frames << " frames, 3 cameras, " << detections
              << " detections -> " << out_path << "\n";
    return 0;
}

int cmd_track(const std::string& dataset_path, const std::string& config_path,
              std::optional<std::uint64_t> seed, const std::string& out_path) {
    const auto cfg = load_config(config_path, seed);
    std::ifstream in(dataset_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open dataset file: " << dataset_path << "\n";
        return 1;
    }
    const auto dataset = sreid::read_dataset(in);
    const auto results = sreid::run_tracking(dataset, cfg);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << out_path << "\n";
        return 1;
    }
    sreid::write_results(out, results);
    std::size_t outputs = 0, events = 0;
    for (const auto& rec : results) {
        outputs += rec.outputs.size();
        events += rec.events.size();
    }
    std::cout << "tracked " << sreid::sequence_ids(dataset).size() << " sequence(s): " << outputs
              << " outputs, " << events << " events -> " << out_path << "\n";
    return 0;
}

void print_report_text(const sreid::IcReport& report) {
    char line[256];
    std::snprintf(line, sizeof(line), "total_idsw %lld\ntotal_id %lld\n",
                  report.total_idsw, report.total_id);
    std::cout << line;
    if (report.ic()) {
        std::snprintf(line, sizeof(line), "ic %.4f\n", *report.ic());
        std::cout << line;
    } else {
        std::cout << "ic undefined (no ground-truth target frames)\n";
    }
    for (sreid::CameraId cam : sreid::kAllCameras) {
        const auto& sub = report.cameras[static_cast<int>(cam)];
        if (sub.ic())
            std::snprintf(line, sizeof(line), "camera %-5s idsw %lld id %lld ic %.4f\n",
                          sreid::to_string(cam), sub.idsw, sub.id_total, *sub.ic());
        else
            std::snprintf(line, sizeof(line), "camera %-5s idsw %lld id %lld ic n/a\n",
                          sreid::to_string(cam), sub.idsw, sub.id_total);
        std::cout << line;
    }
}

void print_report_csv(const sreid::IcReport& report) {
    std::cout << "scope,idsw,id,ic\n";
    char line[256];
    auto row = [&](const char* name, long long idsw, long long id, std::optional<double> ic) {
        if (ic)
            std::snprintf(line, sizeof(line), "%s,%lld,%lld,%.4f\n", name, idsw, id, *ic);
        else
            std::snprintf(line, sizeof(line), "%s,%lld,%lld,\n", name, idsw, id);
        std::cout << line;
    };
    row("total", report.total_idsw, report.total_id, report.ic());
    for (sreid::CameraId cam : sreid::kAllCameras) {
        const auto& sub = report.cameras[static_cast<int>(cam)];
        row(sreid::to_string(cam), sub.idsw, sub.id_total, sub.ic());
    }
}

int cmd_evaluate(const std::string& results_path, const std::string& dataset_path,
                 const std::string& config_path, const std::string& out_path,
                 const std::string& format) {
    const auto cfg = load_config(config_path, std::nullopt);
    std::ifstream din(dataset_path, std::ios::binary);
    if (!din) {
        std::cerr << "cannot open dataset file: " << dataset_path << "\n";
        return 1;
    }
    std::ifstream rin(results_path, std::ios::binary);
    if (!rin) {
        std::cerr << "cannot open results file: " << results_path << "\n";
        return 1;
    }
    const auto dataset = sreid::read_dataset(din);
    const auto results = sreid::read_results(rin);
    const auto dseq = sreid::sequence_ids(dataset);
    const auto rseq = sreid::sequence_ids(results);
    if (!rseq.empty() && rseq != dseq)
        throw sreid::SequenceMismatchError("results and dataset name different sequences");

    const auto report = sreid::evaluate_run(dataset, results, cfg.eval);
    if (format == "csv")
        print_report_csv(report);
    else
        print_report_text(report);

    if (!out_path.empty()) {
        sreid::json j;
        j["total_idsw"] = report.total_idsw;
        j["total_id"] = report.total_id;
        j["ic"] = report.ic() ? sreid::json(*report.ic()) : sreid::json(nullptr);
        sreid::json cams;
        for (sreid::CameraId cam : sreid::kAllCameras) {
            const auto& sub = report.cameras[static_cast<int>(cam)];
            sreid::json cj;
            cj["idsw"] = sub.idsw;
            cj["id"] = sub.id_total;
            cj["ic"] = sub.ic() ? sreid::json(*sub.ic()) : sreid::json(nullptr);
            sreid::json frames = sreid::json::object();
            for (const auto& [f, n] : sub.idsw_by_frame) frames[std::to_string(f)] = n;
            cj["idsw_by_frame"] = std::move(frames);
            cams[sreid::to_string(cam)] = std::move(cj);
        }
        j["cameras"] = std::move(cams);
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot open report file: " << out_path << "\n";
            return 1;
        }
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_ablate(const std::string& study, const std::string& config_path,
               std::optional<std::uint64_t> seed, int n_seeds, const std::string& out_path,
               const std::string& format) {
    const auto cfg = load_config(config_path, seed);
    const auto report = sreid::run_study(study, cfg, n_seeds);

    char line[256];
    if (format == "csv") {
        std::cout << "variant,mean_ic,ci_lo,ci_hi,match_accuracy\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            const auto& ci = report.intervals[i];
            if (row.total_matches > 0)
                std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,%.4f\n",
                              row.variant.c_str(), row.mean_ic(), ci.lo, ci.hi, row.accuracy());
            else
                std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,\n", row.variant.c_str(),
                              row.mean_ic(), ci.lo, ci.hi);
            std::cout << line;
        }
    } else {
        std::cout << "study " << report.study << " (" << n_seeds << " seeds)\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            const auto& ci = report.intervals[i];
            if (row.total_matches > 0)
                std::snprintf(line, sizeof(line),
                              "%-18s mean_ic %.4f  ci95 [%.4f, %.4f]  match_acc %.4f (%lld/%lld)\n",
                              row.variant.c_str(), row.mean_ic(), ci.lo, ci.hi, row.accuracy(),
                              row.correct_matches, row.total_matches);
            else
                std::snprintf(line, sizeof(line), "%-18s mean_ic %.4f  ci95 [%.4f, %.4f]\n",
                              row.variant.c_str(), row.mean_ic(), ci.lo, ci.hi);
            std::cout << line;
        }
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot open output file: " << out_path << "\n";
            return 1;
        }
        out << "variant,mean_ic,ci_lo,ci_hi,match_accuracy,seed_ics\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            const auto& ci = report.intervals[i];
            std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,", row.variant.c_str(),
                          row.mean_ic(), ci.lo, ci.hi);
            out << line;
            if (row.total_matches > 0) {
                std::snprintf(line, sizeof(line), "%.6f", row.accuracy());
                out << line;
            }
            out << ",\"";
            for (std::size_t s = 0; s < row.per_seed_ic.size(); ++s) {
                std::snprintf(line, sizeof(line), "%s%.6f", s ? ";" : "", row.per_seed_ic[s]);
                out << line;
            }
            out << "\"\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surround-view multi-camera vehicle re-identification engine"};
    app.require_subcommand(1);

    std::string config_path, dataset_path, results_path, out_path;
    std::string format = "text";
    std::string study;
    std::optional<std::uint64_t> seed;
    int n_seeds = 30;

    auto add_common = [&](CLI::App* cmd, bool with_seed) {
        cmd->add_option("--config", config_path, "run configuration file (JSON)");
        if (with_seed) cmd->add_option("--seed", seed, "override the configured seed");
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"text", "csv"}));
    };

    auto* sim = app.add_subcommand("simulate", "render a synthetic scenario to a dataset file");
    add_common(sim, true);
    sim->add_option("--out", out_path, "dataset output path")->required();

    auto* trk = app.add_subcommand("track", "run the tracking pipeline over a dataset");
    trk->add_option("dataset", dataset_path, "dataset file")->required();
    add_common(trk, true);
    trk->add_option("--out", out_path, "results output path")->required();

    auto* ev = app.add_subcommand("evaluate", "score results against dataset ground truth");
    ev->add_option("results", results_path, "results file")->required();
    ev->add_option("dataset", dataset_path, "dataset file")->required();
    add_common(ev, false);
    ev->add_option("--out", out_path, "structured report output path");

    auto* ab = app.add_subcommand("ablate", "run a comparison study");
    ab->add_option("study", study, "table1|table2|table3")->required();
    add_common(ab, true);
    ab->add_option("--seeds", n_seeds, "number of scenario seeds")
        ->check(CLI::PositiveNumber);
    ab->add_option("--out", out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, out_path);
        if (trk->parsed()) return cmd_track(dataset_path, config_path, seed, out_path);
        if (ev->parsed())
            return cmd_evaluate(results_path, dataset_path, config_path, out_path, format);
        if (ab->parsed()) return cmd_ablate(study, config_path, seed, n_seeds, out_path, format);
    } catch (const sreid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sreid::DimensionError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDimension;
    } catch (const sreid::SequenceMismatchError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitSequence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
