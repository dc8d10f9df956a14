#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shelby/sim.hpp"

namespace shelby {

// A batch experiment description, loaded from a JSON scenario file. The
// economics block is validated against the four incentive inequalities
// before any simulation unless force is set.
struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::string experiment = "simulate"; // simulate | nash | mutual_dishonesty | coalition
    std::uint32_t epochs = 8;
    std::uint32_t trials = 20;
    WorldConfig world;
    std::map<SpId, Strategy> strategies;
    std::vector<std::string> deviation_names;
    std::vector<std::uint32_t> coalition_sizes;

    struct Expectations {
        bool check_zero_slashes = false;
        bool check_all_scores_one = false;
        bool check_per_one_negative = false;
        bool check_within_3_sigma = false;
        bool check_defection_improves = false;
        bool check_nash_all_pass = false;
        bool check_coalition_all_pass = false;
    } expect;

    static Scenario parse(const std::string& json_text);
    static Scenario load_file(const std::string& path);
};

Strategy strategy_preset(const std::string& name);
Strategy deviation_preset(const std::string& name);
std::vector<std::string> default_deviation_names();

struct ScenarioOutcome {
    bool expectations_ok = true;
    std::vector<std::string> failed_expectations;
    std::string summary_json;
};

// Runs the scenario and writes ledger_events.ndjson, incentive_report.{json,txt},
// results.csv, reliability.csv and summary.json under out_dir. With
// `deterministic`, outputs carry no timestamps and replay byte-identically.
ScenarioOutcome run_scenario(const Scenario& scenario, const std::string& out_dir,
                             bool deterministic, bool force);

// CLI file pipeline: prepare splits/encodes/commits a local file into
// out_dir/chunks plus a JSON manifest; reassemble reverses it from any k
// surviving chunks per chunkset.
std::string prepare_file(const std::string& input_path, const std::string& out_dir,
                         const CodingParams& params, std::uint64_t chunkset_size,
                         std::uint32_t sample_size);

void reassemble_file(const std::string& manifest_path, const std::string& output_path,
                     std::uint64_t offset, std::uint64_t length /* UINT64_MAX = all */);

} // namespace shelby
