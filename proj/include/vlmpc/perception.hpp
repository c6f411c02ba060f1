#pragma once

// Perception stand-ins: ground-truth oracle, seeded noisy oracle, and a remote
// JSON-over-HTTP adapter, plus the task phase machine.

#include "vlmpc/sim.hpp"

#include <array>
#include <memory>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlmpc::perception {

/// Recoverable failure of a perceiver (network, malformed reply). Callers fall back.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DirectionHint {
    std::array<int, 3> d_hat{0, 0, 0};
    std::array<int, 3> r_hat{0, 0, 0};
    int g = 0;

    bool operator==(const DirectionHint&) const = default;
};

struct EntityBox {
    std::string id;
    sim::BoundingBox box;

    bool operator==(const EntityBox&) const = default;
};

struct PerceptionReport {
    sim::BoundingBox end_effector;
    EntityBox sub_goal;
    std::vector<EntityBox> interference;
    DirectionHint hint;
    double switch_weight = 1.0;

    bool operator==(const PerceptionReport&) const = default;
};

bool in_alphabet(const DirectionHint& hint);
bool is_switch_weight(double w);

enum class Phase { approach, transport, release, wipe };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view text);

struct PhaseMemory {
    Phase phase = Phase::approach;
    std::vector<Phase> history{Phase::approach};
    int grasp_events = 0;
    bool goal_held = false;

    bool operator==(const PhaseMemory&) const = default;
};

/// Advances the phase from the post-step state; phases never regress.
PhaseMemory phase_update(const PerceptionReport& report, const sim::WorldState& state, const sim::TaskSpec& task,
                         const PhaseMemory& memory);

enum class Variant { oracle, noisy, remote };

struct PerceiverConfig {
    Variant variant = Variant::oracle;
    double hallucination_rate = 0.0;
    double direction_flip_rate = 0.0;
    std::optional<std::string> endpoint;
    std::uint64_t seed = 0;
    double deadband = 0.01;
    double grasp_radius = 0.03;
    double timeout_s = 5.0;
};

class Perceiver {
public:
    virtual ~Perceiver() = default;
    virtual PerceptionReport perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                                      const PhaseMemory& memory) const = 0;
};

class OraclePerceiver : public Perceiver {
public:
    explicit OraclePerceiver(PerceiverConfig config) : config_(std::move(config)) {}
    PerceptionReport perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                              const PhaseMemory& memory) const override;

private:
    PerceiverConfig config_;
};

/// Oracle plus sub-goal hallucination and hint sign flips, seeded by (seed, step index).
class NoisyPerceiver : public Perceiver {
public:
    explicit NoisyPerceiver(PerceiverConfig config);
    PerceptionReport perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                              const PhaseMemory& memory) const override;

private:
    PerceiverConfig config_;
    OraclePerceiver oracle_;
};

class RemotePerceiver : public Perceiver {
public:
    explicit RemotePerceiver(PerceiverConfig config);
    PerceptionReport perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                              const PhaseMemory& memory) const override;

private:
    PerceiverConfig config_;
    std::string host_;
    int port_ = 80;
};

std::unique_ptr<Perceiver> make_perceiver(const PerceiverConfig& config);

/// Sub-goal entity the oracle targets for the current state.
std::string current_target(const sim::WorldState& state, const sim::TaskSpec& task);

// ---------------------------------------------------------------------------
// Wire protocol (POST /perceive)

nlohmann::json make_request(std::uint64_t request_id, const sim::Observation& observation,
                            const sim::TaskSpec& task, const PhaseMemory& memory);
nlohmann::json serialize_response(std::uint64_t request_id, const PerceptionReport& report);
/// Parses a response body; entity ids are recovered by matching boxes against the
/// observation. Any schema violation throws TransportError.
PerceptionReport parse_response(const nlohmann::json& body, std::uint64_t expected_request_id,
                                const sim::Observation& observation);

}  // namespace vlmpc::perception
