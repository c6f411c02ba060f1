#pragma once

// Batch runner: scene/task config loading, seeded placement, episode batches for
// both pipelines, CSV metrics and persisted traces.

#include "vlmpc/episode.hpp"

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace vlmpc::harness {

/// Config problems; the message names the offending field.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

enum class Pipeline { vlmpc, traj };

std::string_view to_string(Pipeline pipeline);
Pipeline pipeline_from_string(std::string_view text);

enum class PlacementMode { none, uniform, jitter };

struct PlacementSpec {
    PlacementMode mode = PlacementMode::none;
    double min_separation = 0.08;
    /// Keeps uniform placements this far inside the workspace xy bounds.
    double margin = 0.05;
    /// Half-width of the xy perturbation in jitter mode.
    double jitter = 0.02;
    /// Objects to move; empty means all of them.
    std::vector<std::string> ids;
    bool end_effector = true;
    int max_attempts = 1000;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    sim::WorldState world;
    EpisodeConfig episode;
    PlacementSpec placement;
};

ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// World for one episode; placement draws come from a stream separate from the planner's.
sim::WorldState place_objects(const ScenarioConfig& config, std::uint64_t episode_seed);

/// "reach", "pick-place", or stage kinds joined with '+' for multi-stage tasks.
std::string task_label(const EpisodeConfig& episode);

EpisodeTrace run_single(const ScenarioConfig& config, Pipeline pipeline, Variant variant, std::uint64_t episode_seed);

struct BatchSpec {
    ScenarioConfig config;
    Pipeline pipeline = Pipeline::vlmpc;
    Variant variant = Variant::full;
    int episodes = 1;
    std::uint64_t seed_base = 0;
    std::optional<std::filesystem::path> output_dir;
};

struct MetricsRow {
    std::string task;
    Pipeline pipeline = Pipeline::vlmpc;
    Variant variant = Variant::full;
    int episodes = 0;
    double success_rate = 0.0;
    double mean_steps = 0.0;
    /// Mean over episodes with a finite clearance; +inf when no episode had interference.
    double mean_min_clearance = kInf;
    double mean_perception_calls = 0.0;
};

struct EpisodeSummary {
    int index = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::timeout;
    int steps_used = 0;
    double min_clearance = kInf;
    int perception_calls = 0;
    int grasp_events = 0;
};

struct BatchResult {
    MetricsRow metrics;
    std::vector<EpisodeSummary> episodes;
    std::vector<EpisodeTrace> traces;
};

/// Runs episodes seed_base + i; when output_dir is set writes metrics.csv,
/// episodes.csv and traces/episode_NNNN.json.
BatchResult run_batch(const BatchSpec& spec);

MetricsRow aggregate(const std::string& task, Pipeline pipeline, Variant variant,
                     const std::vector<EpisodeSummary>& episodes);
EpisodeSummary summarize(int index, std::uint64_t seed, const EpisodeTrace& trace);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string episodes_csv(const std::vector<EpisodeSummary>& episodes);

nlohmann::json trace_to_json(const EpisodeTrace& trace, const EpisodeSummary& summary, const MetricsRow& batch);

/// Rebuilds the metrics row from a batch directory's traces/ folder.
MetricsRow metrics_from_traces(const std::filesystem::path& batch_dir);

/// Runs every spec and returns their rows in order; writes comparison.csv when
/// `output_dir` is set. Throws InvalidInput when pipelines cover different task sets.
std::vector<MetricsRow> compare_pipelines(const std::vector<BatchSpec>& specs,
                                          const std::optional<std::filesystem::path>& output_dir);

/// Plans once from the episode-0 placement and writes the value map.
void dump_value_map(const ScenarioConfig& config, const std::filesystem::path& out);

}  // namespace vlmpc::harness
