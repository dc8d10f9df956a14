// shelby-lab: batch scenario runner and report emitter for the protocol
// laboratory. Thin shell over the C API in shelby.h; all protocol logic
// lives in the shared library.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>

#include "CLI11.hpp"

#include "shelby.h"

namespace {

int fail_with(shelby_status status) {
    std::fprintf(stderr, "error: %s\n", shelby_last_error());
    return status == SHELBY_ERR_EXPECTATION ? 2 : 1;
}

void print_and_free(char* text) {
    if (!text) return;
    const size_t len = std::strlen(text);
    std::fputs(text, stdout);
    if (len > 0 && text[len - 1] != '\n') std::fputc('\n', stdout);
    shelby_string_free(text);
}

std::string read_text_file(const std::string& path, bool* ok) {
    *ok = false;
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return {};
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
    *ok = true;
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shelby-lab: decentralized hot-storage protocol laboratory"};
    app.require_subcommand(1);

    // Shared experiment flags.
    std::uint64_t seed = 0;
    std::uint32_t trials = 0;
    std::string out_dir = "out";
    bool deterministic = false;
    bool force = false;

    // prepare
    auto* prepare = app.add_subcommand("prepare", "erasure-code and commit a local file");
    std::string prep_input, prep_out = "prepared";
    std::string prep_scheme = "reed_solomon";
    std::uint32_t prep_k = 10, prep_m = 6, prep_d = 0;
    std::uint64_t prep_chunkset = 10ull << 20;
    std::uint32_t prep_sample = 1024;
    prepare->add_option("input", prep_input, "file to prepare")->required();
    prepare->add_option("--out", prep_out, "output directory");
    prepare->add_option("--scheme", prep_scheme, "reed_solomon or clay");
    prepare->add_option("--k", prep_k, "data chunks per chunkset");
    prepare->add_option("--m", prep_m, "parity chunks per chunkset");
    prepare->add_option("--d", prep_d, "repair helpers (clay; default n-1)");
    prepare->add_option("--chunkset-size", prep_chunkset, "chunkset bytes (default 10 MiB)");
    prepare->add_option("--sample-size", prep_sample, "audit sample bytes (default 1 KiB)");

    // reassemble
    auto* reassemble = app.add_subcommand("reassemble", "rebuild a file from its chunks");
    std::string re_manifest, re_output = "reassembled.bin";
    std::uint64_t re_offset = 0;
    std::uint64_t re_length = UINT64_MAX;
    reassemble->add_option("manifest", re_manifest, "manifest.json from prepare")->required();
    reassemble->add_option("--out", re_output, "output file");
    reassemble->add_option("--offset", re_offset, "byte range start");
    reassemble->add_option("--length", re_length, "byte range length (default: to end)");

    // econ-check
    auto* econ = app.add_subcommand("econ-check", "evaluate the incentive inequalities");
    std::string econ_params;
    bool econ_json = false;
    econ->add_option("--params", econ_params, "JSON parameter file (defaults when omitted)");
    econ->add_flag("--json", econ_json, "emit machine-readable JSON instead of the table");

    // reliability
    auto* reliability = app.add_subcommand("reliability", "durability/availability tables");
    bool rel_json = false;
    reliability->add_flag("--json", rel_json, "emit the JSON report instead of CSV");

    // scenario runners
    auto add_scenario_opts = [&](CLI::App* cmd, std::string& path) {
        cmd->add_option("scenario", path, "scenario file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the scenario seed");
        cmd->add_option("--trials", trials, "override the scenario trial count");
        cmd->add_flag("--deterministic", deterministic, "omit timestamps from outputs");
        cmd->add_flag("--force", force, "run even when economics checks fail");
    };
    std::string sim_path, nash_path, coalition_path;
    auto* simulate = app.add_subcommand("simulate", "run the scenario's experiment");
    add_scenario_opts(simulate, sim_path);
    auto* nash = app.add_subcommand("nash-test", "unilateral-deviation equilibrium test");
    add_scenario_opts(nash, nash_path);
    auto* coalition = app.add_subcommand("coalition-test", "joint-deviation bound test");
    add_scenario_opts(coalition, coalition_path);

    CLI11_PARSE(app, argc, argv);

    shelby_status status = SHELBY_OK;

    if (prepare->parsed()) {
        char params[256];
        std::snprintf(params, sizeof params,
                      "{\"scheme\":\"%s\",\"k\":%u,\"m\":%u,\"d\":%u,"
                      "\"chunkset_size\":%" PRIu64 ",\"sample_size\":%u}",
                      prep_scheme.c_str(), prep_k, prep_m,
                      prep_d == 0 ? prep_k + prep_m - 1 : prep_d, prep_chunkset, prep_sample);
        char* manifest = nullptr;
        status = shelby_prepare_file(prep_input.c_str(), prep_out.c_str(), params, &manifest);
        if (status == SHELBY_OK) {
            std::printf("manifest: %s\n", manifest);
            shelby_string_free(manifest);
        }
    } else if (reassemble->parsed()) {
        status = shelby_reassemble_file(re_manifest.c_str(), re_output.c_str(), re_offset,
                                        re_length);
        if (status == SHELBY_OK) std::printf("wrote %s\n", re_output.c_str());
    } else if (econ->parsed()) {
        std::string params_text = "{}";
        if (!econ_params.empty()) {
            bool ok = false;
            params_text = read_text_file(econ_params, &ok);
            if (!ok) {
                std::fprintf(stderr, "error: cannot read %s\n", econ_params.c_str());
                return 1;
            }
        }
        char* text = nullptr;
        status = econ_json ? shelby_econ_check(params_text.c_str(), &text)
                           : shelby_econ_check_table(params_text.c_str(), &text);
        if (status == SHELBY_OK) print_and_free(text);
    } else if (reliability->parsed()) {
        char* text = nullptr;
        status = rel_json ? shelby_reliability_report(&text) : shelby_reliability_table(&text);
        if (status == SHELBY_OK) print_and_free(text);
    } else {
        const char* override_experiment = nullptr;
        std::string path;
        if (simulate->parsed()) {
            path = sim_path;
        } else if (nash->parsed()) {
            path = nash_path;
            override_experiment = "nash";
        } else {
            path = coalition_path;
            override_experiment = "coalition";
        }
        char* summary = nullptr;
        status = shelby_run_scenario(path.c_str(), out_dir.c_str(), override_experiment,
                                     deterministic ? 1 : 0, force ? 1 : 0, seed, trials,
                                     &summary);
        if (summary) print_and_free(summary);
    }

    return status == SHELBY_OK ? 0 : fail_with(status);
}
