#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trackfuse/camtrap.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/trackers.hpp"
#include "trackfuse/types.hpp"

namespace trackfuse {

/// One class name per line; blank lines are ignored. Throws IoError,
/// EmptyFile, InvalidConfig.
LabelSet read_labels(const std::filesystem::path& path);
void write_labels(const LabelSet& labels, const std::filesystem::path& path);

/// Reads detection JSON-lines. Records are grouped by `seq` (sorted by name)
/// and by frame (ascending); detections keep their file order within a frame.
/// Every probs vector goes through validate_distribution.
/// Throws ParseError and SchemaError (both naming the line), EmptyFile, IoError.
std::vector<Sequence> parse_detections(std::istream& in, const LabelSet& labels,
                                       Profiler* profiler = nullptr);
std::vector<Sequence> parse_detections(const std::filesystem::path& path, const LabelSet& labels,
                                       Profiler* profiler = nullptr);

/// One JSON object per detection, fields in the order seq, frame, bbox,
/// score, probs, embedding, gt_class, gt_track, burst. Numbers use the
/// shortest representation that round-trips.
void write_detections(std::ostream& out, const std::vector<Sequence>& sequences);
void write_detections(const std::filesystem::path& path, const std::vector<Sequence>& sequences);

/// One row of the track CSV: frame,track_id,x,y,w,h,score,fused_class,raw_class,seq.
/// Detections without a track are written with track_id -1.
struct TrackRow {
    FrameId frame = 0;
    TrackId track_id = -1;
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double score = 0.0;
    ClassIndex fused_class = 0;
    ClassIndex raw_class = 0;
    std::string seq;

    friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

inline constexpr const char* kTrackCsvHeader = "frame,track_id,x,y,w,h,score,fused_class,raw_class,seq";

/// Rows ordered by (seq, frame, track_id); unassigned detections keep
/// detection order among themselves.
std::vector<TrackRow> track_rows(const std::vector<SequenceResult>& results);
void write_tracks(std::ostream& out, const std::vector<SequenceResult>& results);
void write_tracks(const std::filesystem::path& path, const std::vector<SequenceResult>& results);
/// Throws ParseError, IoError.
std::vector<TrackRow> read_tracks(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Run configuration file: {"tracker": {...}, "trigger": {...}} with the
/// field names of TrackerConfig, MotionModelSpec (under tracker.motion) and
/// TriggerConfig. Unknown keys are rejected.
struct RunConfig {
    TrackerConfig tracker;
    TriggerConfig trigger;
};

/// Values missing from the file keep those of `base`. Throws InvalidConfig, IoError.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});

struct MetricsReport {
    std::string tracker;
    std::string fusion;
    std::vector<std::string> labels;
    std::uint64_t evaluated = 0;
    double raw_accuracy = 0.0;
    F1Scores raw_f1;
    double accuracy = 0.0;
    F1Scores f1;
    std::optional<double> raw_flip_rate;
    std::optional<double> fused_flip_rate;
};

std::string metrics_json(const MetricsReport& report);
std::string metrics_text(const MetricsReport& report, bool per_class);
std::string timing_json(const std::vector<std::pair<std::string, TimingProfile>>& rows);

}  // namespace trackfuse
