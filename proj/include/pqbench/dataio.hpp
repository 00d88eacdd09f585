#pragma once

#include <string>
#include <vector>

#include "pqbench/eval.hpp"
#include "pqbench/features.hpp"
#include "pqbench/models.hpp"
#include "pqbench/synth.hpp"

namespace pqbench::dataio {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// Shortest round-trip decimal representation of a double; the single float
// format used by every text artifact so identical values give identical
// bytes.
std::string format_double(double v);

// Atomic text write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Dataset: manifest.json (UTF-8, key-sorted) plus waveforms.f64le
// (record-major, channel-major, little-endian doubles). Returns the
// manifest path.
std::string write_dataset(const std::vector<synth::WaveformRecord>& records,
                          const std::string& directory,
                          const std::string& split_tag = "train");
std::vector<synth::WaveformRecord> read_dataset(const std::string& directory);

// Features CSV: header record_id,label,f000..f287; one row per record.
void write_features(const std::vector<features::FeatureVector>& rows,
                    const std::string& path);
std::vector<features::FeatureVector> read_features(const std::string& path);

// Versioned model JSON; write -> read -> write is byte-identical.
void write_model(const models::TrainedModel& model, const std::string& path);
models::TrainedModel read_model(const std::string& path);
std::string model_to_json(const models::TrainedModel& model);
models::TrainedModel model_from_json(const std::string& text);

// Evaluation report JSON.
void write_report(const eval::EvalReport& report, const std::string& path);

// Leaderboard CSV: model,accuracy,status rows in leaderboard order.
// Deliberately excludes wall times so identical runs are byte-identical.
std::string leaderboard_csv(const eval::Leaderboard& board);

}  // namespace pqbench::dataio
