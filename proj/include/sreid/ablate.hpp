// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "sreid/rng.hpp"
#include "sreid/runner.hpp"

namespace sreid {

struct AblateRow {
    std::string variant;
    std::vector<double> per_seed_ic;
    std::vector<double> per_seed_accuracy;  // empty unless the study tracks it
    long long correct_matches = 0;
    long long total_matches = 0;

    double mean_ic() const {
        double acc = 0.0;
        for (double v : per_seed_ic) acc += v;
        return per_seed_ic.empty() ? 0.0 : acc / static_cast<double>(per_seed_ic.size());
    }
    double accuracy() const {
        return total_matches == 0
                   ? 0.0
                   : static_cast<double>(correct_matches) / static_cast<double>(total_matches);
    }
};

struct BootstrapInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap of the mean, 95% by default.
inline BootstrapInterval bootstrap_mean_ci(const std::vector<double>& samples,
                                           std::uint64_t seed = 7, int resamples = 2000,
                                           double coverage = 0.95) {
    if (samples.empty()) return {};
    Rng rng(hash_combine(seed, "bootstrap"));
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            acc += samples[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(samples.size()) - 1))];
        means.push_back(acc / static_cast<double>(samples.size()));
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - coverage) / 2.0;
    const auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(
            std::clamp(q * static_cast<double>(means.size() - 1), 0.0,
                       static_cast<double>(means.size() - 1)));
        return means[idx];
    };
    return {at(tail), at(1.0 - tail)};
}

struct AblateReport {
    std::string study;
    std::vector<AblateRow> rows;
    std::vector<BootstrapInterval> intervals;  // parallel to rows
};

inline int worker_count(std::size_t tasks) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("SURROUND_REID_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed >= 1) cap = parsed;
    }
    return std::max(1, std::min<int>(cap, static_cast<int>(tasks)));
}

/// Runs `task(index)` for every index with a bounded worker pool; results are
/// collected by index so the output order never depends on scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
    const int workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                task(i);
            }
        });
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Scenario bundles: the desk-scale stand-ins for the paper's ablation data.

/// Drift-heavy traffic: distortion bursts plus strong box breathing near the
/// image edges, and a corruption risk on every template re-initialization.
inline RunConfig drift_bundle(RunConfig base, std::uint64_t seed) {
    base.sim.seed = seed;
    base.sim.sequence_id.clear();
    base.sim.n_vehicles = 6;
    base.sim.duration_frames = 420;
    base.sim.noise.occlusions.clear();
    base.sim.embedding.lookalike_pairs.clear();
    base.sim.noise.drift_sigma = 1.0;
    base.sim.noise.edge_noise_gain = 1.2;
    auto& tk = base.sim.tracker;
    tk.walk_rate = 0.02;
    tk.episode_rate = 0.010;
    tk.episode_edge_gain = 2.5;
    tk.episode_min_len = 6;
    tk.episode_max_len = 12;
    tk.episode_step_frac = 0.33;
    tk.breath_sigma = 0.5;
    tk.bad_update_base = 0.04;
    tk.bad_update_size_gain = 0.35;
    return base;
}

/// Paired traffic with scripted occlusions of three duration classes. The
/// sweep over N exercises premature deletion on short hides and stale-track
/// damage on long ones.
inline RunConfig occlusion_bundle(RunConfig base, std::uint64_t seed) {
    base.sim.seed = seed;
    base.sim.sequence_id.clear();
    base.sim.n_vehicles = 7;
    base.sim.duration_frames = 560;
    base.sim.noise.occlusions.clear();
    base.sim.embedding.lookalike_pairs.clear();
    // Convoy pairs: spatially paired, far-apart appearance anchors.
    base.sim.embedding.lookalike_pairs.push_back({0, 1, 2.4, 5.0});
    base.sim.embedding.lookalike_pairs.push_back({2, 3, 2.4, 5.0});
    base.sim.embedding.lookalike_pairs.push_back({4, 5, 2.4, 5.0});
    auto& tk = base.sim.tracker;
    tk.walk_rate = 0.02;
    tk.episode_rate = 0.0;
    tk.breath_sigma = 0.0;
    tk.bad_update_base = 0.0;
    tk.bad_update_size_gain = 0.0;
    tk.prop_jitter_px = 1.2;
    tk.reacquire_max_frames = 4;

    Rng rng(hash_combine(seed, "occl-lengths"));
    const int lengths[3] = {static_cast<int>(rng.uniform_int(2, 3)),
                            static_cast<int>(rng.uniform_int(6, 7)),
                            static_cast<int>(rng.uniform_int(10, 12))};
    const auto world = generate_world(base.sim, base.projection);
    for (int p = 0; p < 3; ++p) {
        const int victim = 2 * p;      // convoy lead, far lane
        const int occluder = 2 * p + 1;  // trailing partner, near lane
        const auto onset =
            find_occlusion_onset(world, base.projection, victim, occluder, lengths[p]);
        if (onset) base.sim.noise.occlusions.push_back({victim, *onset, lengths[p]});
    }
    return base;
}

/// Look-alike convoys crossing the rig: appearance near-ties that only the
/// spatial constraint can separate, at two pair spacings so both the hard
/// gate and the fused score matter.
inline RunConfig lookalike_bundle(RunConfig base, std::uint64_t seed) {
    base.sim.seed = seed;
    base.sim.sequence_id.clear();
    base.sim.n_vehicles = 7;
    base.sim.duration_frames = 560;
    base.sim.noise.occlusions.clear();
    base.sim.embedding.lookalike_pairs.clear();
    base.sim.embedding.lookalike_pairs.push_back({0, 1, 0.18, 4.0});   // tight spacing
    base.sim.embedding.lookalike_pairs.push_back({2, 3, 0.18, 12.0});  // wide spacing
    base.sim.embedding.lookalike_pairs.push_back({4, 5, 0.18, 4.0});
    base.sim.embedding.identity_sigma = 0.10;
    base.sim.embedding.camera_view_sigma = 0.30;
    auto& tk = base.sim.tracker;
    tk.walk_rate = 0.02;
    tk.episode_rate = 0.0;
    tk.breath_sigma = 0.0;
    tk.bad_update_base = 0.0;
    // Lenient disks so tight pairs reach the fused score instead of the gate.
    base.projection.r0 = 0.6;
    base.projection.k_per_meter = 0.4;
    return base;
}

// ---------------------------------------------------------------------------
// Studies

inline AblateReport run_table1(const RunConfig& base, int n_seeds) {
    struct Variant {
        std::string name;
        UpdateMetric metric;
    };
    const std::vector<Variant> variants = {{"default_no_update", UpdateMetric::None},
                                           {"iou_t_c_t", UpdateMetric::IouT},
                                           {"iou_r_c_r", UpdateMetric::IouR}};
    AblateReport report;
    report.study = "table1";
    report.rows.resize(variants.size());
    for (std::size_t v = 0; v < variants.size(); ++v) {
        report.rows[v].variant = variants[v].name;
        report.rows[v].per_seed_ic.resize(static_cast<std::size_t>(n_seeds));
    }
    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t v = 0; v < variants.size(); ++v)
        for (int s = 0; s < n_seeds; ++s) tasks.emplace_back(v, s);
    parallel_for(tasks.size(), [&](std::size_t i) {
        const auto [v, s] = tasks[i];
        RunConfig cfg = drift_bundle(base, base.sim.seed + static_cast<std::uint64_t>(s));
        cfg.quality.update_metric = variants[v].metric;
        const auto art = run_scenario(cfg);
        report.rows[v].per_seed_ic[static_cast<std::size_t>(s)] = art.report.ic().value_or(1.0);
    });
    for (const auto& row : report.rows)
        report.intervals.push_back(bootstrap_mean_ci(row.per_seed_ic));
    return report;
}

inline const std::vector<int>& table2_sweep() {
    static const std::vector<int> ns = {0, 2, 3, 4, 5, 6, 8};
    return ns;
}

inline AblateReport run_table2(const RunConfig& base, int n_seeds) {
    const auto& ns = table2_sweep();
    AblateReport report;
    report.study = "table2";
    report.rows.resize(ns.size());
    for (std::size_t v = 0; v < ns.size(); ++v) {
        report.rows[v].variant = "n_" + std::to_string(ns[v]);
        report.rows[v].per_seed_ic.resize(static_cast<std::size_t>(n_seeds));
    }
    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t v = 0; v < ns.size(); ++v)
        for (int s = 0; s < n_seeds; ++s) tasks.emplace_back(v, s);
    parallel_for(tasks.size(), [&](std::size_t i) {
        const auto [v, s] = tasks[i];
        RunConfig cfg = occlusion_bundle(base, base.sim.seed + static_cast<std::uint64_t>(s));
        cfg.quality.n_occl = ns[v];
        const auto art = run_scenario(cfg);
        report.rows[v].per_seed_ic[static_cast<std::size_t>(s)] = art.report.ic().value_or(1.0);
    });
    for (const auto& row : report.rows)
        report.intervals.push_back(bootstrap_mean_ci(row.per_seed_ic));
    return report;
}

inline AblateReport run_table3(const RunConfig& base, int n_seeds) {
    struct Variant {
        std::string name;
        bool gate;
        double beta;
    };
    const std::vector<Variant> variants = {{"feature_only", false, 0.0},
                                           {"feature_gate", true, 0.0},
                                           {"feature_gate_s2", true, 1.0}};
    AblateReport report;
    report.study = "table3";
    report.rows.resize(variants.size());
    for (std::size_t v = 0; v < variants.size(); ++v) {
        report.rows[v].variant = variants[v].name;
        report.rows[v].per_seed_ic.resize(static_cast<std::size_t>(n_seeds));
        report.rows[v].per_seed_accuracy.resize(static_cast<std::size_t>(n_seeds));
    }
    std::vector<long long> corrects(variants.size() * static_cast<std::size_t>(n_seeds));
    std::vector<long long> totals(variants.size() * static_cast<std::size_t>(n_seeds));
    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t v = 0; v < variants.size(); ++v)
        for (int s = 0; s < n_seeds; ++s) tasks.emplace_back(v, s);
    parallel_for(tasks.size(), [&](std::size_t i) {
        const auto [v, s] = tasks[i];
        RunConfig cfg = lookalike_bundle(base, base.sim.seed + static_cast<std::uint64_t>(s));
        cfg.mct.spatial_gate = variants[v].gate;
        cfg.mct.weights.beta = variants[v].beta;
        const auto art = run_scenario(cfg);
        const auto acc = match_accuracy(art.results);
        report.rows[v].per_seed_ic[static_cast<std::size_t>(s)] = art.report.ic().value_or(1.0);
        report.rows[v].per_seed_accuracy[static_cast<std::size_t>(s)] = acc.value();
        corrects[v * static_cast<std::size_t>(n_seeds) + static_cast<std::size_t>(s)] =
            acc.correct;
        totals[v * static_cast<std::size_t>(n_seeds) + static_cast<std::size_t>(s)] = acc.total;
    });
    for (std::size_t v = 0; v < variants.size(); ++v) {
        for (int s = 0; s < n_seeds; ++s) {
            report.rows[v].correct_matches +=
                corrects[v * static_cast<std::size_t>(n_seeds) + static_cast<std::size_t>(s)];
            report.rows[v].total_matches +=
                totals[v * static_cast<std::size_t>(n_seeds) + static_cast<std::size_t>(s)];
        }
        report.intervals.push_back(bootstrap_mean_ci(report.rows[v].per_seed_ic));
    }
    return report;
}

inline AblateReport run_study(const std::string& study, const RunConfig& base, int n_seeds) {
    if (study == "table1") return run_table1(base, n_seeds);
    if (study == "table2") return run_table2(base, n_seeds);
    if (study == "table3") return run_table3(base, n_seeds);
    throw ConfigError("unknown study '" + study + "' (expected table1|table2|table3)");
}

}  // namespace sreid
