// Command-line entry point: run batches, compare pipelines, dump value maps.

#include "vlmpc/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace vlmpc;

harness::BatchSpec load_batch_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw harness::ConfigError("cannot open spec " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw harness::ConfigError("spec " + path.string() + " is not valid JSON: " + e.what());
    }
    auto field = [&](const char* key) -> const nlohmann::json& {
        if (!doc.contains(key)) {
            throw harness::ConfigError("spec " + path.string() + ": field '" + std::string(key) + "' missing");
        }
        return doc.at(key);
    };
    harness::BatchSpec spec;
    std::filesystem::path config = field("config").get<std::string>();
    if (config.is_relative()) {
        config = path.parent_path() / config;
    }
    spec.config = harness::load_config(config);
    spec.pipeline = harness::pipeline_from_string(field("pipeline").get<std::string>());
    spec.variant = variant_from_string(doc.value("variant", std::string("full")));
    spec.episodes = doc.value("episodes", 1);
    spec.seed_base = doc.value("seed", spec.config.seed);
    return spec;
}

void print_rows(const std::vector<harness::MetricsRow>& rows) { std::cout << harness::metrics_csv(rows); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based visual MPC planner and batch harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string pipeline = "vlmpc";
    std::string variant = "full";
    int episodes = 1;
    std::uint64_t seed = 0;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run a batch of seeded episodes");
    run->add_option("--config", config_path, "Scene/task config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--pipeline", pipeline, "vlmpc or traj")->check(CLI::IsMember({"vlmpc", "traj"}));
    run->add_option("--variant", variant, "full, RS, PD or VS")->check(CLI::IsMember({"full", "RS", "PD", "VS"}));
    run->add_option("--episodes", episodes, "Episode count")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Seed base (defaults to the config's seed)");
    run->add_option("--out", out_dir, "Output directory")->required();

    std::vector<std::string> spec_paths;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "Run several batch specs side by side");
    compare->add_option("--specs", spec_paths, "Batch spec files (JSON)")->required()->check(CLI::ExistingFile);
    compare->add_option("--out", compare_out, "Output directory")->required();

    std::string map_config;
    std::string map_out;
    auto* dump = app.add_subcommand("dump-map", "Write the first value map of a scene");
    dump->add_option("--config", map_config, "Scene/task config (JSON)")->required()->check(CLI::ExistingFile);
    dump->add_option("--out", map_out, "Output file (float32 LE, plus .hdr)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            harness::BatchSpec spec;
            spec.config = harness::load_config(config_path);
            spec.pipeline = harness::pipeline_from_string(pipeline);
            spec.variant = variant_from_string(variant);
            spec.episodes = episodes;
            spec.seed_base = seed_opt->count() > 0 ? seed : spec.config.seed;
            spec.output_dir = out_dir;
            print_rows({harness::run_batch(spec).metrics});
        } else if (*compare) {
            std::vector<harness::BatchSpec> specs;
            for (const auto& p : spec_paths) {
                specs.push_back(load_batch_spec(p));
            }
            print_rows(harness::compare_pipelines(specs, std::filesystem::path(compare_out)));
        } else if (*dump) {
            harness::dump_value_map(harness::load_config(map_config), map_out);
        }
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
