/* secgate C API.
 *
 * Every call returns an sg_status. On failure a message is available from
 * sg_last_error() on the calling thread until its next API call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with sg_string_free. All strings are UTF-8; structured data is
 * exchanged as JSON text.
 */
#ifndef SECGATE_SECGATE_H
#define SECGATE_SECGATE_H

#include <stddef.h>

#if defined(SECGATE_BUILDING_LIBRARY)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_E_INVALID_ARGUMENT = 1,
  SG_E_BACKEND_UNAVAILABLE = 2,
  SG_E_BACKEND_AUTH = 3,
  SG_E_BACKEND_UPSTREAM = 4,
  SG_E_MALFORMED_REPLY = 5,
  SG_E_DUPLICATE_DIMENSION = 6,
  SG_E_MISSING_DIMENSION = 7,
  SG_E_EMPTY_CORPUS = 8,
  SG_E_DUPLICATE_FORM = 9,
  SG_E_EMPTY_FORM = 10,
  SG_E_SHRINK_NOT_SUPPORTED = 11,
  SG_E_NON_FINITE_LOSS = 12,
  SG_E_IO = 13,
  SG_E_MALFORMED = 14,
  SG_E_DUPLICATE_ID = 15,
  SG_E_CORPUS_TOO_SMALL = 16,
  SG_E_ALREADY_ANSWERED = 17,
  SG_E_OUT_OF_RANGE = 18,
  SG_E_STRATEGY_MISMATCH = 19,
  SG_E_PLACEHOLDER_COUNT = 20,
  SG_E_NOT_FOUND = 21,
  SG_E_CORRUPT = 22,
  SG_E_CONFIG_INVALID = 23,
  SG_E_BIND_FAILURE = 24,
  SG_E_REJECTED = 25,
  SG_E_BUSY = 26,
  SG_E_INTERNAL = 27
} sg_status;

typedef struct sg_gateway sg_gateway;

SG_API const char* sg_version(void);
SG_API const char* sg_status_name(sg_status status);
SG_API const char* sg_last_error(void);
SG_API void sg_string_free(char* s);

/* Gateway: configuration, backends, session store. */
SG_API sg_status sg_gateway_open(const char* config_path, sg_gateway** out);
SG_API void sg_gateway_close(sg_gateway* gw);

/* Request/response bodies are those of the HTTP API. */
SG_API sg_status sg_health(sg_gateway* gw, char** out_json);
SG_API sg_status sg_evaluate(sg_gateway* gw, const char* request_json, char** out_json);
SG_API sg_status sg_quiz_create(sg_gateway* gw, const char* request_json, char** out_json);
SG_API sg_status sg_quiz_get(sg_gateway* gw, const char* session_id, char** out_json);
SG_API sg_status sg_quiz_answer(sg_gateway* gw, const char* session_id, const char* request_json,
                                char** out_json);
SG_API sg_status sg_quiz_report(sg_gateway* gw, const char* session_id, char** out_json);
SG_API sg_status sg_simulate(sg_gateway* gw, const char* request_json, char** out_json);
SG_API sg_status sg_simulate_reports(sg_gateway* gw, char** out_json);
SG_API sg_status sg_feedback(sg_gateway* gw, const char* request_json, char** out_json);

/* Generates Q&A pairs with a configured backend.
 * request: {"topic": str, "n": int, "backend": str (default "default")}
 * result: JSON array of {id, question, answer, topic, suggestion}. */
SG_API sg_status sg_corpus_build(sg_gateway* gw, const char* request_json, char** out_json);

/* HTTP serving. host may be NULL and port negative to use the configured
 * listen address; port 0 picks a free port. sg_serve_run blocks until
 * sg_serve_stop is called from another thread. */
SG_API sg_status sg_serve_bind(sg_gateway* gw, const char* host, int port, int* bound_port);
SG_API sg_status sg_serve_run(sg_gateway* gw);
SG_API sg_status sg_serve_stop(sg_gateway* gw);

/* Vocabulary expansion training. Only one training job runs at a time per
 * process; a concurrent call fails with SG_E_BUSY. See the README for the
 * request fields. */
SG_API sg_status sg_vet_train(const char* request_json, char** out_json);
SG_API sg_status sg_vet_expand(const char* request_json, char** out_json);
/* 2*vocab*width/total, as a fraction (not percent). */
SG_API sg_status sg_vet_fraction(double vocab, double width, double total_params, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SECGATE_SECGATE_H */
