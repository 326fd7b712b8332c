#pragma once

#include "infraqa/core.hpp"
#include "infraqa/ladder.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace infraqa {

/// Shortest "%.9g" rendering used by every text writer.
std::string format_float(double value);
/// Rounds to the value format_float would print.
double round_to_written(double value);

// ---- Frames JSONL -------------------------------------------------------
// One object per line:
//   {"frame":int,"ts_us":int,"objects":[{"cls":str,"x":..,"y":..,"z":..,
//    "l":..,"w":..,"h":..,"yaw":..,"score"?:..,"track_id"?:int}]}
// Yaw in radians. Blank lines are skipped.

/// Parses frames. Scores outside [0, 1] are clamped with a warning on stderr
/// and yaw is wrapped into (-pi, pi]. Malformed lines and unknown classes
/// throw ValidationError naming the line.
std::vector<FrameRecord> load_frames_jsonl(std::istream& in, const std::string& source = "<stream>");
std::vector<FrameRecord> load_frames_jsonl(const std::filesystem::path& path);

void write_frames_jsonl(std::ostream& out, const std::vector<FrameRecord>& frames);
void write_frames_jsonl(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);

/// Ground truth plus predictions, validated (ValidationError on any violation).
SequenceRecord load_sequence(const std::filesystem::path& gt_path, const std::filesystem::path& pred_path);

// ---- Timing CSV ---------------------------------------------------------
// Header `frame,t_detection_ms,t_tracking_ms`, one row per frame.

std::vector<TimingRecord> load_timing_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<TimingRecord> load_timing_csv(const std::filesystem::path& path);
void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRecord>& timing);

// ---- DAIR-V2X labels ----------------------------------------------------

/// Maps a DAIR-V2X source class to the reduced set; nullopt if unknown.
std::optional<ObjectClass> reduce_dair_class(std::string_view source);

/// Reads per-frame DAIR label files (<stem>.json, a JSON array of objects with
/// "type", "3d_location", "3d_dimensions", "rotation", optional "track_id")
/// and the matching calibration (<stem>.json with "rotation" 3x3 and
/// "translation" 3x1) mapping the label frame into the evaluation frame.
/// Frame index is the numeric file stem; timestamps assume 10 Hz.
std::vector<FrameRecord> load_labels_dair(const std::filesystem::path& label_dir,
                                          const std::filesystem::path& calib_dir);

// ---- Calibration --------------------------------------------------------

/// {"intrinsics": 3x3, "rotation": 3x3, "translation": [x, y, z]}.
CalibrationSet read_calibration(const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Prints a warning line to stderr.
void warn(const std::string& message);

}  // namespace infraqa
