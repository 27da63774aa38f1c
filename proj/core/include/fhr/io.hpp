#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fhr/geometry.hpp"
#include "fhr/heatmap.hpp"
#include "fhr/metrics.hpp"
#include "fhr/stabilizer.hpp"
#include "fhr/training.hpp"

namespace fhr {

// Binary heatmap-stack file:
//   magic "FHRS", u16 version = 1, u32 width, u32 height, u32 num_maps,
//   f64 sigma, f64 scale, then num_maps * height * width f64 values,
//   row-major within a map, map-major overall. All integers and doubles are
//   little-endian. Round-trips bit-exactly.
void write_heatmap_stack(const std::filesystem::path& path, const HeatmapStack& stack);
HeatmapStack read_heatmap_stack(const std::filesystem::path& path);

// Trajectory JSON:
//   {video_id, num_landmarks, norm_distance, frame_box, frames: [[[x, y] x M] x T]}
void write_trajectory(const std::filesystem::path& path, const TrajectorySequence& seq);
TrajectorySequence read_trajectory(const std::filesystem::path& path);

// Stabilizer params JSON:
//   {K, gamma, alpha, beta, gamma_noise_diag, gamma_k_diag, V, M, mode}
// with V flattened row-major and vectors in the interleaved (x0, y0, ...)
// coordinate order.
void write_params(const std::filesystem::path& path, const StabilizerParams& params);
StabilizerParams read_params(const std::filesystem::path& path);

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<HistoryRow>& history);

void write_metrics_report(const std::filesystem::path& path, const MetricsReport& report);

// Plot-ready per-frame CSV: frame, nrmse, stability. The stability column is
// empty for the first frame of each video.
void write_per_frame_csv(const std::filesystem::path& path,
                         const std::vector<TrajectorySequence>& x_seqs,
                         const std::vector<TrajectorySequence>& p_seqs);

// FNV-1a, used for config hashes in manifests.
uint64_t fnv1a64(std::string_view data);

}  // namespace fhr
