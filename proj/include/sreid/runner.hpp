// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sreid/engine.hpp"
#include "sreid/io.hpp"
#include "sreid/metrics.hpp"
#include "sreid/sim.hpp"

namespace sreid {

/// Renders a whole scenario into dataset records ordered by
/// (sequence, frame, camera) with cameras in Left, Front, Right order.
inline std::vector<DatasetRecord> simulate_dataset(const RunConfig& cfg) {
    const auto world = generate_world(cfg.sim, cfg.projection);
    const std::string seq = cfg.sim.effective_sequence_id();
    std::vector<DatasetRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.sim.duration_frames) * 3);
    for (FrameIndex t = 0; t < cfg.sim.duration_frames; ++t) {
        auto frame = render_frame(world, t, cfg.projection);
        for (CameraId cam : kAllCameras)
            records.push_back({seq, cam, t, std::move(frame[static_cast<int>(cam)])});
    }
    return records;
}

/// Dataset grouped for replay: per sequence, per frame, per camera.
struct GroupedDataset {
    std::map<std::string, std::map<FrameIndex, std::array<std::vector<Detection>, 3>>> sequences;
};

inline GroupedDataset group_dataset(const std::vector<DatasetRecord>& records) {
    GroupedDataset grouped;
    for (const auto& rec : records) {
        auto& slot = grouped.sequences[rec.seq][rec.frame][static_cast<int>(rec.cam)];
        slot.insert(slot.end(), rec.dets.begin(), rec.dets.end());
    }
    return grouped;
}

inline void check_embedding_dims(const std::vector<DatasetRecord>& records) {
    std::size_t dim = 0;
    for (const auto& rec : records)
        for (const auto& det : rec.dets) {
            if (!det.embedding) continue;
            if (dim == 0)
                dim = det.embedding->size();
            else if (det.embedding->size() != dim)
                throw DimensionError("dimension-mismatched embeddings in dataset (" +
                                     std::to_string(dim) + " vs " +
                                     std::to_string(det.embedding->size()) + ")");
        }
}

/// Runs the full pipeline over a dataset: per-camera single-object tracking in
/// Left, Front, Right order, then the cross-camera association passes.
inline std::vector<ResultsRecord> run_tracking(const std::vector<DatasetRecord>& records,
                                               const RunConfig& cfg) {
    check_embedding_dims(records);
    const auto grouped = group_dataset(records);
    std::vector<ResultsRecord> results;
    for (const auto& [seq, frames] : grouped.sequences) {
        SimTrackerBackend backend(cfg.sim, cfg.projection);
        DetectionEmbeddingProvider embedder;
        TrackingEngine engine(cfg.quality, cfg.mct, cfg.projection, backend, embedder);
        for (const auto& [frame, dets] : frames) {
            auto tick = engine.process_tick(frame, dets);
            for (CameraId cam : kAllCameras) {
                ResultsRecord rec;
                rec.seq = seq;
                rec.cam = cam;
                rec.frame = frame;
                auto& fr = tick.cameras[static_cast<int>(cam)];
                rec.outputs = std::move(fr.outputs);
                rec.occluded = std::move(fr.occluded_ids);
                rec.events = std::move(fr.events);
                for (auto& ev : tick.associations)
                    if (ev.camera == cam) rec.associations.push_back(ev);
                results.push_back(std::move(rec));
            }
        }
    }
    return results;
}

/// Builds the evaluation view of one sequence: ground truth from the dataset's
/// annotated detections, hypotheses from the tracker outputs.
inline EvalSequence build_eval_sequence(const std::vector<DatasetRecord>& dataset,
                                        const std::vector<ResultsRecord>& results,
                                        const std::string& seq) {
    std::array<std::map<FrameIndex, EvalFrame>, 3> frames;
    for (const auto& rec : dataset) {
        if (rec.seq != seq) continue;
        auto& fr = frames[static_cast<int>(rec.cam)][rec.frame];
        fr.frame = rec.frame;
        for (const auto& det : rec.dets)
            if (det.gt_id) fr.gt.push_back({*det.gt_id, det.box});
    }
    for (const auto& rec : results) {
        if (rec.seq != seq) continue;
        auto& fr = frames[static_cast<int>(rec.cam)][rec.frame];
        fr.frame = rec.frame;
        for (const auto& out : rec.outputs) fr.hyp.push_back({out.id, out.box});
    }
    EvalSequence out;
    for (CameraId cam : kAllCameras)
        for (auto& [_, fr] : frames[static_cast<int>(cam)])
            out.cameras[static_cast<int>(cam)].push_back(std::move(fr));
    return out;
}

inline std::set<std::string> sequence_ids(const std::vector<DatasetRecord>& dataset) {
    std::set<std::string> out;
    for (const auto& rec : dataset) out.insert(rec.seq);
    return out;
}

inline std::set<std::string> sequence_ids(const std::vector<ResultsRecord>& results) {
    std::set<std::string> out;
    for (const auto& rec : results) out.insert(rec.seq);
    return out;
}

/// Evaluates results against dataset ground truth; sequences are scored
/// independently (state resets between them) and summed.
inline IcReport evaluate_run(const std::vector<DatasetRecord>& dataset,
                             const std::vector<ResultsRecord>& results, const EvalConfig& eval) {
    IcReport total;
    for (const auto& seq : sequence_ids(dataset)) {
        const auto seq_report =
            count_idsw(build_eval_sequence(dataset, results, seq), eval.iou_min, eval.scope);
        total.total_idsw += seq_report.total_idsw;
        total.total_id += seq_report.total_id;
        for (int c = 0; c < 3; ++c) {
            total.cameras[c].idsw += seq_report.cameras[c].idsw;
            total.cameras[c].id_total += seq_report.cameras[c].id_total;
            for (const auto& [f, n] : seq_report.cameras[c].idsw_by_frame)
                total.cameras[c].idsw_by_frame[f] += n;
        }
    }
    return total;
}

/// Simulate, track and evaluate one configuration in memory.
struct RunArtifacts {
    std::vector<DatasetRecord> dataset;
    std::vector<ResultsRecord> results;
    IcReport report;
};

inline RunArtifacts run_scenario(const RunConfig& cfg) {
    RunArtifacts art;
    art.dataset = simulate_dataset(cfg);
    art.results = run_tracking(art.dataset, cfg);
    art.report = evaluate_run(art.dataset, art.results, cfg.eval);
    return art;
}

/// Fraction of inherit decisions whose inherited id was first bound to the
/// query's ground-truth vehicle; the cross-camera match accuracy.
struct MatchAccuracy {
    long long correct = 0;
    long long total = 0;
    double value() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

inline MatchAccuracy match_accuracy(const std::vector<ResultsRecord>& results) {
    MatchAccuracy acc;
    for (const auto& rec : results)
        for (const auto& ev : rec.associations) {
            if (!ev.inherited || !ev.query_gt) continue;
            acc.total += 1;
            if (ev.inherited_gt && *ev.inherited_gt == *ev.query_gt) acc.correct += 1;
        }
    return acc;
}

}  // namespace sreid
