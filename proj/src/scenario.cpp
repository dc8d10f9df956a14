#include "shelby/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "shelby/errors.hpp"
#include "shelby/reliability.hpp"

namespace shelby {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(Errc::io, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Bytes read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(Errc::io, "cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(Errc::io, "cannot write " + path);
    out << text;
}

void write_file_bytes(const std::string& path, ByteSpan data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(Errc::io, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

ChallengeResponse parse_response(const std::string& s) {
    if (s == "honest") return ChallengeResponse::Honest;
    if (s == "ignore") return ChallengeResponse::Ignore;
    if (s == "retrieve_externally") return ChallengeResponse::RetrieveExternally;
    if (s == "forge") return ChallengeResponse::Forge;
    throw_error(Errc::param, "unknown challenge_response: " + s);
}

AuditorPolicy parse_auditor(const std::string& s) {
    if (s == "verify_and_retain") return AuditorPolicy::VerifyAndRetain;
    if (s == "rubber_stamp") return AuditorPolicy::RubberStamp;
    if (s == "report_all_zero") return AuditorPolicy::ReportAllZero;
    if (s == "drop_proofs") return AuditorPolicy::DropProofs;
    if (s == "trust_coalition") return AuditorPolicy::TrustCoalition;
    if (s == "zero_outsiders") return AuditorPolicy::ZeroOutsiders;
    throw_error(Errc::param, "unknown auditor_policy: " + s);
}

Strategy parse_strategy(const json& j) {
    if (j.is_string()) return strategy_preset(j.get<std::string>());
    Strategy s;
    if (j.contains("storage_policy")) s.storage_policy = j.at("storage_policy").get<double>();
    if (j.contains("challenge_response")) {
        s.challenge_response = parse_response(j.at("challenge_response").get<std::string>());
    }
    if (j.contains("auditor_policy")) {
        s.auditor_policy = parse_auditor(j.at("auditor_policy").get<std::string>());
    }
    if (j.contains("evidence_policy")) {
        const auto v = j.at("evidence_policy").get<std::string>();
        if (v == "submit") {
            s.evidence_policy = EvidencePolicy::Submit;
        } else if (v == "withhold") {
            s.evidence_policy = EvidencePolicy::Withhold;
        } else {
            throw_error(Errc::param, "unknown evidence_policy: " + v);
        }
    }
    if (j.contains("scoreboard_policy")) {
        const auto v = j.at("scoreboard_policy").get<std::string>();
        if (v == "truthful") {
            s.scoreboard_policy = ScoreboardPolicy::Truthful;
        } else if (v == "all_ones") {
            s.scoreboard_policy = ScoreboardPolicy::AllOnes;
        } else if (v == "withhold") {
            s.scoreboard_policy = ScoreboardPolicy::Withhold;
        } else {
            throw_error(Errc::param, "unknown scoreboard_policy: " + v);
        }
    }
    return s;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += "\"";
    return out;
}

} // namespace

Strategy strategy_preset(const std::string& name) {
    if (name == "honest") return Strategy::honest();
    if (name == "mutual_dishonesty") return Strategy::mutual_dishonesty();
    return deviation_preset(name);
}

Strategy deviation_preset(const std::string& name) {
    Strategy s = Strategy::honest();
    if (name == "ignore") {
        s.challenge_response = ChallengeResponse::Ignore;
    } else if (name == "retrieve_externally") {
        s.storage_policy = 0.0;
        s.challenge_response = ChallengeResponse::RetrieveExternally;
    } else if (name == "forge") {
        s.storage_policy = 0.0;
        s.challenge_response = ChallengeResponse::Forge;
    } else if (name == "rubber_stamp") {
        s.auditor_policy = AuditorPolicy::RubberStamp;
    } else if (name == "drop_proofs") {
        s.auditor_policy = AuditorPolicy::DropProofs;
    } else if (name == "store_0") {
        s.storage_policy = 0.0;
    } else if (name == "store_50") {
        s.storage_policy = 0.5;
    } else if (name == "store_90") {
        s.storage_policy = 0.9;
    } else if (name == "trust_coalition") {
        s.auditor_policy = AuditorPolicy::TrustCoalition;
    } else if (name == "zero_outsiders") {
        s.auditor_policy = AuditorPolicy::ZeroOutsiders;
    } else {
        throw_error(Errc::param, "unknown strategy preset: " + name);
    }
    return s;
}

std::vector<std::string> default_deviation_names() {
    return {"ignore",      "retrieve_externally", "forge",    "rubber_stamp",
            "drop_proofs", "store_0",             "store_50", "store_90"};
}

Scenario Scenario::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw_error(Errc::format, std::string("scenario: ") + e.what());
    }

    Scenario sc;
    if (j.contains("name")) sc.name = j.at("name").get<std::string>();
    if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("experiment")) sc.experiment = j.at("experiment").get<std::string>();
    if (j.contains("epochs")) sc.epochs = j.at("epochs").get<std::uint32_t>();
    if (j.contains("trials")) sc.trials = j.at("trials").get<std::uint32_t>();

    WorldConfig& w = sc.world;
    if (j.contains("sp_count")) w.sp_count = j.at("sp_count").get<std::uint32_t>();
    if (j.contains("sp")) {
        const auto& sp = j.at("sp");
        if (sp.contains("stake")) w.sp_stake = sp.at("stake").get<double>();
        if (sp.contains("balance")) w.sp_balance = sp.at("balance").get<double>();
        if (sp.contains("capacity_bytes")) {
            w.sp_capacity = sp.at("capacity_bytes").get<std::uint64_t>();
        }
    }
    if (j.contains("workload")) {
        const auto& wl = j.at("workload");
        if (wl.contains("blob_count")) w.blob_count = wl.at("blob_count").get<std::uint32_t>();
        if (wl.contains("chunksets_per_blob")) {
            w.chunksets_per_blob = wl.at("chunksets_per_blob").get<std::uint32_t>();
        }
    }
    if (j.contains("coding")) {
        const auto& c = j.at("coding");
        const auto scheme = c.value("scheme", std::string("reed_solomon"));
        const auto k = c.value("k", 4u);
        const auto m = c.value("m", 2u);
        const auto chunk = c.value("chunk_size", std::uint64_t(512));
        if (scheme == "clay") {
            w.coding = CodingParams::clay(k, m, c.value("d", k + m - 1), chunk);
        } else if (scheme == "reed_solomon") {
            w.coding = CodingParams::reed_solomon(k, m, chunk);
        } else {
            throw_error(Errc::param, "unknown coding scheme: " + scheme);
        }
    }
    if (j.contains("sample_size")) w.sample_size = j.at("sample_size").get<std::uint32_t>();
    if (j.contains("duration_epochs")) {
        w.duration_epochs = j.at("duration_epochs").get<std::uint64_t>();
    }

    if (j.contains("economics")) {
        EconomicParams econ = EconomicParams::from_json(j.at("economics").dump());
        const auto& ej = j.at("economics");
        if (ej.contains("split")) {
            const auto norm =
                normalize_rewards(econ.W, econ.p_a, econ.chunks_per_gb, econ.auditors_per_audit,
                                  econ.epochs_per_month, ej.at("split").get<double>());
            econ.rwd_st = norm.rwd_st_per_chunk_epoch;
            econ.rwd_au = norm.rwd_au;
            econ.n_a = norm.n_a;
        }
        if (ej.contains("S_ata_factor")) {
            if (econ.p_ata <= 0.0 || econ.epsilon <= 0.0) {
                throw_error(Errc::param, "S_ata_factor needs positive p_ata and epsilon");
            }
            econ.S_ata =
                ej.at("S_ata_factor").get<double>() * econ.rwd_au / (econ.p_ata * econ.epsilon);
        }
        w.econ = econ;
    }

    if (j.contains("strategy_mix")) {
        const auto& mix = j.at("strategy_mix");
        Strategy def = Strategy::honest();
        if (mix.contains("default")) def = parse_strategy(mix.at("default"));
        for (SpId i = 0; i < w.sp_count; ++i) sc.strategies[i] = def;
        if (mix.contains("overrides")) {
            for (const auto& [key, value] : mix.at("overrides").items()) {
                const auto sp = static_cast<SpId>(std::stoul(key));
                if (sp >= w.sp_count) {
                    throw_error(Errc::param, "strategy override for unknown SP");
                }
                sc.strategies[sp] = parse_strategy(value);
            }
        }
    } else {
        for (SpId i = 0; i < w.sp_count; ++i) sc.strategies[i] = Strategy::honest();
    }

    sc.deviation_names = default_deviation_names();
    if (j.contains("nash") && j.at("nash").contains("deviations")) {
        sc.deviation_names = j.at("nash").at("deviations").get<std::vector<std::string>>();
    }
    sc.coalition_sizes = {2, sc.world.f_trim()};
    if (j.contains("coalition")) {
        const auto& c = j.at("coalition");
        if (c.contains("sizes")) {
            sc.coalition_sizes = c.at("sizes").get<std::vector<std::uint32_t>>();
        }
        if (c.contains("deviations")) {
            sc.deviation_names = c.at("deviations").get<std::vector<std::string>>();
        }
    }

    if (j.contains("expect")) {
        const auto& e = j.at("expect");
        sc.expect.check_zero_slashes = e.value("zero_slash_events", false);
        sc.expect.check_all_scores_one = e.value("all_scores_one", false);
        sc.expect.check_per_one_negative = e.value("per_one_utility_negative", false);
        sc.expect.check_within_3_sigma = e.value("per_one_within_3_sigma", false);
        sc.expect.check_defection_improves = e.value("defection_improves", false);
        sc.expect.check_nash_all_pass = e.value("nash_all_pass", false);
        sc.expect.check_coalition_all_pass = e.value("coalition_all_pass", false);
    }
    return sc;
}

Scenario Scenario::load_file(const std::string& path) {
    return parse(read_file(path));
}

ScenarioOutcome run_scenario(const Scenario& scenario, const std::string& out_dir,
                             bool deterministic, bool force) {
    fs::create_directories(out_dir);
    const auto out = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    // Economics gate.
    const auto report = full_report(scenario.world.econ, 0.1, 30.0);
    if (!report.all_satisfied() && !force) {
        throw_error(Errc::param,
                    "scenario economics fail the incentive inequalities (use force to override)");
    }
    write_file(out("incentive_report.json"), report.to_json());
    write_file(out("incentive_report.txt"), report.to_table());
    write_file(out("reliability.csv"), reliability_table_csv());

    ScenarioOutcome outcome;
    auto expect_failed = [&](const std::string& what) {
        outcome.expectations_ok = false;
        outcome.failed_expectations.push_back(what);
    };

    ordered_json summary;
    summary["schema_version"] = 1;
    summary["scenario"] = scenario.name;
    summary["experiment"] = scenario.experiment;
    summary["seed"] = scenario.seed;
    summary["epochs"] = scenario.epochs;
    summary["trials"] = scenario.trials;
    if (!deterministic) {
        summary["generated_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count();
    }
    summary["economics_ok"] = report.all_satisfied();

    const auto workload = Workload::build(scenario.world);

    if (scenario.experiment == "simulate") {
        // Trial zero is the canonical replayable run; its event log is kept.
        std::map<SpId, double> net_sum;
        std::uint64_t slash_total = 0;
        bool scores_all_one = true;
        std::string events;
        for (std::uint32_t t = 0; t < scenario.trials; ++t) {
            World world(scenario.world, workload, scenario.strategies, scenario.seed + t);
            for (std::uint32_t e = 0; e < scenario.epochs; ++e) {
                const auto stats = world.run_epoch();
                if (t == 0) {
                    slash_total += stats.slash_events;
                    for (const auto& [sp, score] : stats.scores) {
                        if (score != 1.0) scores_all_one = false;
                    }
                }
            }
            for (const auto& [sp, u] : world.utilities()) {
                net_sum[sp] += to_value(u.net());
            }
            if (t == 0) {
                for (const auto& line : world.ledger().events()) {
                    events += line;
                    events += '\n';
                }
            }
        }
        write_file(out("ledger_events.ndjson"), events);

        std::string csv = "sp,mean_net_utility\n";
        char line[96];
        for (const auto& [sp, sum] : net_sum) {
            std::snprintf(line, sizeof(line), "%u,%.12g\n", sp, sum / scenario.trials);
            csv += line;
        }
        write_file(out("results.csv"), csv);

        summary["trial0_slash_events"] = slash_total;
        summary["trial0_all_scores_one"] = scores_all_one;
        if (scenario.expect.check_zero_slashes && slash_total != 0) {
            expect_failed("zero_slash_events");
        }
        if (scenario.expect.check_all_scores_one && !scores_all_one) {
            expect_failed("all_scores_one");
        }
    } else if (scenario.experiment == "nash") {
        std::vector<std::pair<std::string, Strategy>> deviations;
        for (const auto& name : scenario.deviation_names) {
            deviations.emplace_back(name, deviation_preset(name));
        }
        const auto rows = nash_test(scenario.world, deviations, scenario.epochs, scenario.trials,
                                    scenario.seed);
        std::string csv = "deviation,honest_mean,deviant_mean,diff_mean,diff_stderr,z,pass\n";
        char line[256];
        bool all_pass = true;
        auto rows_json = ordered_json::array();
        for (const auto& r : rows) {
            std::snprintf(line, sizeof(line), "%s,%.12g,%.12g,%.12g,%.12g,%.6g,%d\n",
                          csv_escape(r.deviation).c_str(), r.honest_mean, r.deviant_mean,
                          r.diff_mean, r.diff_stderr, r.z, r.pass ? 1 : 0);
            csv += line;
            all_pass = all_pass && r.pass;
            rows_json.push_back({{"deviation", r.deviation},
                                 {"honest_mean", r.honest_mean},
                                 {"deviant_mean", r.deviant_mean},
                                 {"diff_mean", r.diff_mean},
                                 {"diff_stderr", r.diff_stderr},
                                 {"z", r.z},
                                 {"pass", r.pass}});
        }
        write_file(out("results.csv"), csv);
        write_file(out("ledger_events.ndjson"), "");
        summary["nash"] = rows_json;
        summary["nash_all_pass"] = all_pass;
        if (scenario.expect.check_nash_all_pass && !all_pass) expect_failed("nash_all_pass");
    } else if (scenario.experiment == "mutual_dishonesty") {
        const auto r =
            mutual_dishonesty_test(scenario.world, scenario.epochs, scenario.trials, scenario.seed);
        std::string csv =
            "measured_per_one,closed_form,sigma,total_ones,negative,within_3_sigma,"
            "defector_mean_net,colluder_mean_net,defection_improves\n";
        char line[320];
        std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%llu,%d,%d,%.12g,%.12g,%d\n",
                      r.measured_per_one, r.closed_form, r.sigma,
                      static_cast<unsigned long long>(r.total_ones), r.negative ? 1 : 0,
                      r.within_3_sigma ? 1 : 0, r.defector_mean_net, r.colluder_mean_net,
                      r.defection_improves ? 1 : 0);
        csv += line;
        write_file(out("results.csv"), csv);
        write_file(out("ledger_events.ndjson"), "");
        summary["mutual_dishonesty"] = {{"measured_per_one", r.measured_per_one},
                                        {"closed_form", r.closed_form},
                                        {"sigma", r.sigma},
                                        {"total_ones", r.total_ones},
                                        {"negative", r.negative},
                                        {"within_3_sigma", r.within_3_sigma},
                                        {"defector_mean_net", r.defector_mean_net},
                                        {"colluder_mean_net", r.colluder_mean_net},
                                        {"defection_improves", r.defection_improves}};
        if (scenario.expect.check_per_one_negative && !r.negative) {
            expect_failed("per_one_utility_negative");
        }
        if (scenario.expect.check_within_3_sigma && !r.within_3_sigma) {
            expect_failed("per_one_within_3_sigma");
        }
        if (scenario.expect.check_defection_improves && !r.defection_improves) {
            expect_failed("defection_improves");
        }
    } else if (scenario.experiment == "coalition") {
        std::vector<std::pair<std::string, Strategy>> deviations;
        for (const auto& name : scenario.deviation_names) {
            deviations.emplace_back(name, deviation_preset(name));
        }
        const auto rows = coalition_test(scenario.world, scenario.coalition_sizes, deviations,
                                         scenario.epochs, scenario.trials, scenario.seed);
        std::string csv = "deviation,coalition_size,gain,gain_stderr,epsilon_budget,pass\n";
        char line[256];
        bool all_pass = true;
        auto rows_json = ordered_json::array();
        for (const auto& r : rows) {
            std::snprintf(line, sizeof(line), "%s,%u,%.12g,%.12g,%.12g,%d\n",
                          csv_escape(r.deviation).c_str(), r.coalition_size, r.coalition_gain,
                          r.gain_stderr, r.epsilon_budget, r.pass ? 1 : 0);
            csv += line;
            all_pass = all_pass && r.pass;
            rows_json.push_back({{"deviation", r.deviation},
                                 {"coalition_size", r.coalition_size},
                                 {"gain", r.coalition_gain},
                                 {"gain_stderr", r.gain_stderr},
                                 {"epsilon_budget", r.epsilon_budget},
                                 {"pass", r.pass}});
        }
        write_file(out("results.csv"), csv);
        write_file(out("ledger_events.ndjson"), "");
        summary["coalition"] = rows_json;
        summary["coalition_all_pass"] = all_pass;
        if (scenario.expect.check_coalition_all_pass && !all_pass) {
            expect_failed("coalition_all_pass");
        }
    } else {
        throw_error(Errc::param, "unknown experiment type: " + scenario.experiment);
    }

    summary["expectations_ok"] = outcome.expectations_ok;
    summary["failed_expectations"] = outcome.failed_expectations;
    outcome.summary_json = summary.dump(2);
    write_file(out("summary.json"), outcome.summary_json);
    return outcome;
}

std::string prepare_file(const std::string& input_path, const std::string& out_dir,
                         const CodingParams& params, std::uint64_t chunkset_size,
                         std::uint32_t sample_size) {
    Blob blob;
    blob.id = fs::path(input_path).filename().string();
    blob.bytes = read_file_bytes(input_path);
    const auto prepared = prepare(blob, params, chunkset_size, sample_size);

    fs::create_directories(fs::path(out_dir) / "chunks");
    ordered_json manifest = ordered_json::parse(manifest_json(prepared));
    auto files = ordered_json::array();
    for (const auto& cs : prepared.chunksets) {
        for (const auto& chunk : cs.chunks) {
            char name[64];
            std::snprintf(name, sizeof(name), "chunks/cs%05u_c%03u.bin", cs.chunkset_index,
                          chunk.index);
            write_file_bytes((fs::path(out_dir) / name).string(),
                             ByteSpan(chunk.payload.data(), chunk.payload.size()));
            files.push_back(name);
        }
    }
    manifest["chunk_files"] = files;

    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    write_file(manifest_path, manifest.dump(2));
    return manifest_path;
}

void reassemble_file(const std::string& manifest_path, const std::string& output_path,
                     std::uint64_t offset, std::uint64_t length) {
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw_error(Errc::format, std::string("manifest: ") + e.what());
    }
    const auto& coding = manifest.at("coding");
    const auto scheme = coding.at("scheme").get<std::string>();
    const auto k = coding.at("k").get<std::uint32_t>();
    const auto m = coding.at("m").get<std::uint32_t>();
    const auto chunk_size = coding.at("chunk_size").get<std::uint64_t>();
    const CodingParams params =
        scheme == "clay"
            ? CodingParams::clay(k, m, coding.at("d").get<std::uint32_t>(), chunk_size)
            : CodingParams::reed_solomon(k, m, chunk_size);
    const auto original_length = manifest.at("original_length").get<std::uint64_t>();
    const auto chunkset_size = manifest.at("chunkset_size").get<std::uint64_t>();
    const auto chunkset_count = manifest.at("chunksets").size();

    if (length == std::uint64_t(-1)) {
        length = original_length - std::min(offset, original_length);
    }
    if (offset + length > original_length) {
        throw_error(Errc::range, "reassemble: range beyond original length");
    }

    const fs::path base = fs::path(manifest_path).parent_path();
    Codec codec(params);

    std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(Errc::io, "cannot write " + output_path);
    if (length == 0) return;

    const std::uint64_t first = offset / chunkset_size;
    const std::uint64_t last = (offset + length - 1) / chunkset_size;
    if (last >= chunkset_count) {
        throw_error(Errc::format, "manifest: chunkset index out of range");
    }

    for (std::uint64_t cs = first; cs <= last; ++cs) {
        std::vector<CodedChunk> available;
        for (std::uint32_t ci = 0; ci < params.n(); ++ci) {
            char name[64];
            std::snprintf(name, sizeof(name), "chunks/cs%05llu_c%03u.bin",
                          static_cast<unsigned long long>(cs), ci);
            const fs::path p = base / name;
            if (!fs::exists(p)) continue; // lost chunk, the MDS property covers it
            available.push_back(CodedChunk{ci, read_file_bytes(p.string())});
        }
        const Bytes data = codec.decode(available); // throws when below k
        const std::uint64_t cs_begin = cs * chunkset_size;
        const std::uint64_t lo = std::max(offset, cs_begin) - cs_begin;
        const std::uint64_t hi = std::min(offset + length, cs_begin + chunkset_size) - cs_begin;
        out.write(reinterpret_cast<const char*>(data.data() + lo),
                  static_cast<std::streamsize>(hi - lo));
    }
}

} // namespace shelby
