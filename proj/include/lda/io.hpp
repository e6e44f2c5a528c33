#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lda/aps.hpp"
#include "lda/lda_head.hpp"
#include "lda/model.hpp"
#include "lda/synthdata.hpp"
#include "lda/trainer.hpp"

namespace lda::io {

// Shortest-roundtrip-safe decimal form of a double ("%.17g").
std::string fmt_double(double x);

// CSV: one row per prototype: class, index-within-class, coordinates.
std::string bank_to_csv(const PrototypeBank& bank);
PrototypeBank bank_from_csv(const std::string& csv);

// CSV: x0..x{d-1}, y, spoof_type, illum, cluster.
std::string samples_to_csv(const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> samples_from_csv(const std::string& csv);

// CSV: epoch, total, pd, pc_inter, pc_intra, aux, train_acer, max_proto_norm_err.
std::string history_to_csv(const TrainHistory& history);

// CSV rows (metric, split, threshold, value).
std::string metrics_to_csv(const EvalReport& report, const std::string& split);

nlohmann::json model_to_json(const MlpParams& params);
MlpParams model_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const TrainConfig& cfg);
// Missing fields keep their defaults; unknown fields are rejected.
TrainConfig config_from_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const MixtureSpec& spec);
MixtureSpec spec_from_json(const nlohmann::json& j);

nlohmann::json eval_to_json(const EvalReport& report);

// Full effective config + seed + metric summary; re-running from a manifest
// reproduces artifacts bit-for-bit within one implementation.
nlohmann::json manifest_json(const TrainConfig& cfg, const EvalReport& final_dev);

nlohmann::json aps_log_json(const SelectionResult& result);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace lda::io
