/*
 * C API for the shelby protocol laboratory.
 *
 * The library is a C++ core exposed through this stable extern-C surface:
 * opaque handles, integer status codes, caller-owned output buffers. Every
 * function returns SHELBY_OK on success; on failure, shelby_last_error()
 * carries a thread-local message describing what went wrong.
 *
 * Strings returned through char** outputs are heap-allocated; release them
 * with shelby_string_free(). Byte buffers returned through uint8_t** go to
 * shelby_buffer_free().
 */

#ifndef SHELBY_H
#define SHELBY_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum shelby_status {
    SHELBY_OK = 0,
    SHELBY_ERR_PARAM = 1,
    SHELBY_ERR_INSUFFICIENT_SHARDS = 2,
    SHELBY_ERR_FORMAT = 3,
    SHELBY_ERR_PAYMENT = 4,
    SHELBY_ERR_CONFLICT = 5,
    SHELBY_ERR_NOT_FOUND = 6,
    SHELBY_ERR_PROTOCOL = 7,
    SHELBY_ERR_TOO_EARLY = 8,
    SHELBY_ERR_RANGE = 9,
    SHELBY_ERR_IRRECOVERABLE = 10,
    SHELBY_ERR_IO = 11,
    SHELBY_ERR_EXPECTATION = 12, /* scenario expectations failed (CLI exit 2) */
    SHELBY_ERR_INTERNAL = 13
} shelby_status;

const char* shelby_version(void);
const char* shelby_last_error(void);
void shelby_string_free(char* s);
void shelby_buffer_free(uint8_t* p);

/* ------------------------------------------------------------------ */
/* Erasure codec: Reed-Solomon baseline and the coupled-layer scheme.  */

typedef struct shelby_codec shelby_codec;

#define SHELBY_SCHEME_REED_SOLOMON 0u
#define SHELBY_SCHEME_CLAY 1u

shelby_status shelby_codec_create(uint32_t k, uint32_t m, uint32_t d, uint32_t scheme,
                                  uint64_t chunk_size, shelby_codec** out);
void shelby_codec_destroy(shelby_codec* codec);

uint32_t shelby_codec_n(const shelby_codec* codec);
uint32_t shelby_codec_alpha(const shelby_codec* codec);
uint64_t shelby_codec_chunk_size(const shelby_codec* codec);

/* data: k * chunk_size bytes in; out_chunks: n * chunk_size bytes out,
 * chunk i at offset i * chunk_size. */
shelby_status shelby_codec_encode(const shelby_codec* codec, const uint8_t* data,
                                  size_t data_len, uint8_t* out_chunks);

/* Any >= k distinct chunks; out_data receives k * chunk_size bytes. */
shelby_status shelby_codec_decode(const shelby_codec* codec, const uint32_t* indices,
                                  const uint8_t* const* chunks, size_t count,
                                  uint8_t* out_data);

/* Rebuilds one chunk. out_chunk: chunk_size bytes. The report values are the
 * helper bytes actually read and what a full-decode repair would read. */
shelby_status shelby_codec_repair(const shelby_codec* codec, uint32_t lost_index,
                                  const uint32_t* helper_indices,
                                  const uint8_t* const* helper_chunks, size_t helper_count,
                                  uint8_t* out_chunk, uint64_t* out_bytes_downloaded,
                                  uint64_t* out_rs_equivalent_bytes);

/* ------------------------------------------------------------------ */
/* Merkle vector commitments over fixed-width leaves.                  */

shelby_status shelby_merkle_commit(const uint8_t* data, size_t data_len, uint32_t leaf_width,
                                   uint8_t out_root[32], uint64_t* out_leaf_count);

/* Serialized inclusion proof (length-prefixed wire format). */
shelby_status shelby_merkle_open(const uint8_t* data, size_t data_len, uint32_t leaf_width,
                                 uint64_t leaf_index, uint8_t** out_proof,
                                 size_t* out_proof_len);

/* Returns 1 when the serialized proof verifies against root/leaf_count,
 * 0 otherwise (including malformed input). */
int shelby_merkle_verify(const uint8_t root[32], uint64_t leaf_count, const uint8_t* proof,
                         size_t proof_len);

/* ------------------------------------------------------------------ */
/* File pipeline used by the CLI.                                      */

/* params_json keys: scheme ("reed_solomon"|"clay"), k, m, d, chunkset_size,
 * sample_size. Writes chunks/ and manifest.json under out_dir; returns the
 * manifest path. */
shelby_status shelby_prepare_file(const char* input_path, const char* out_dir,
                                  const char* params_json, char** out_manifest_path);

/* length = UINT64_MAX reassembles to the end of the blob. */
shelby_status shelby_reassemble_file(const char* manifest_path, const char* output_path,
                                     uint64_t offset, uint64_t length);

/* ------------------------------------------------------------------ */
/* Analysis reports.                                                   */

/* params_json: the EconomicParams parameter file. */
shelby_status shelby_econ_check(const char* params_json, char** out_report_json);
shelby_status shelby_econ_check_table(const char* params_json, char** out_table_text);

shelby_status shelby_reliability_report(char** out_report_json);
shelby_status shelby_reliability_table(char** out_csv);

/* ------------------------------------------------------------------ */
/* Scenario experiments.                                               */

/* experiment_override: NULL keeps the scenario's own experiment field;
 * otherwise one of "simulate", "nash", "mutual_dishonesty", "coalition".
 * Writes the report set under out_dir. SHELBY_ERR_EXPECTATION signals that
 * the run finished but scenario expectations failed. */
shelby_status shelby_run_scenario(const char* scenario_path, const char* out_dir,
                                  const char* experiment_override, int deterministic,
                                  int force, uint64_t seed_override /* 0 = keep */,
                                  uint32_t trials_override /* 0 = keep */,
                                  char** out_summary_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SHELBY_H */
