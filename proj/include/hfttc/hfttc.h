// Copyright 2026 The hfttc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface of the hfttc library: scene sets, the hypergraph-transformer
 * predictor and stochastic time-to-collision analysis.
 *
 * Every function returns an hfttc_status. On failure, hfttc_last_error()
 * describes the problem for the calling thread. Strings returned through
 * `char **` parameters are owned by the caller and released with
 * hfttc_string_free(). Configuration is passed as JSON text; unknown keys are
 * rejected with HFTTC_ERR_CONFIG. */
#ifndef HFTTC_HFTTC_H_
#define HFTTC_HFTTC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(HFTTC_BUILDING_LIBRARY)
#define HFTTC_API __attribute__((visibility("default")))
#else
#define HFTTC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hfttc_status
{
  HFTTC_OK = 0,
  HFTTC_ERR_INTERNAL = 1,
  HFTTC_ERR_CONFIG = 2,
  HFTTC_ERR_DATA = 3,
  HFTTC_ERR_NUMERIC = 4,
  HFTTC_ERR_CONTRACT = 5,
  HFTTC_ERR_INVALID_ARGUMENT = 6
} hfttc_status;

typedef struct hfttc_scenes hfttc_scenes;
typedef struct hfttc_model hfttc_model;

HFTTC_API const char * hfttc_version(void);
/* Message of the last failed call on this thread; empty after success. */
HFTTC_API const char * hfttc_last_error(void);
HFTTC_API void hfttc_string_free(char * s);

/* ---- scene sets -------------------------------------------------------- */

/* Loads a CSV recording, a directory of recordings, a scene cache (.hfsc) or
 * a scenario spec (.json), and windows recordings into scenes.
 * window_json: {history, horizon, stride, radius, max_ambient}, all optional.
 * stats_json (optional): {recordings, windows, scenes, skipped, dropped_neighbors}. */
HFTTC_API hfttc_status hfttc_scenes_load(
  const char * path, const char * window_json, hfttc_scenes ** out, char ** stats_json);
/* Scripted scenario; snapshot_interval > 0 yields one scene per interval
 * over the spec's window, otherwise a single scene. */
HFTTC_API hfttc_status hfttc_scenes_from_scenario(
  const char * spec_json, double snapshot_interval, hfttc_scenes ** out);
/* Randomized braking platoons and lane changes. */
HFTTC_API hfttc_status hfttc_scenes_synthetic_corpus(
  size_t count, uint64_t seed, size_t history, size_t horizon, hfttc_scenes ** out);
/* Recording-grouped split; *warning (optional) receives NULL or a message. */
HFTTC_API hfttc_status hfttc_scenes_split(const hfttc_scenes * scenes, double train_fraction, uint64_t seed,
  hfttc_scenes ** train, hfttc_scenes ** test, char ** warning);
/* New set holding copies of the listed scenes in the given order. */
HFTTC_API hfttc_status hfttc_scenes_subset(
  const hfttc_scenes * scenes, const size_t * indices, size_t count, hfttc_scenes ** out);
HFTTC_API hfttc_status hfttc_scenes_save_cache(const hfttc_scenes * scenes, const char * path);
HFTTC_API size_t hfttc_scenes_count(const hfttc_scenes * scenes);
HFTTC_API hfttc_status hfttc_scenes_id(const hfttc_scenes * scenes, size_t index, char ** out);
/* {id, recording, host_id, ambient_ids, dt, origin, rotation, anchor_frame,
 * past, future}; positions in the host-normalized frame. */
HFTTC_API hfttc_status hfttc_scenes_to_json(const hfttc_scenes * scenes, size_t index, char ** out);
HFTTC_API void hfttc_scenes_free(hfttc_scenes * scenes);

/* Writes the simulated recording of a scenario spec as trajectory CSV. */
HFTTC_API hfttc_status hfttc_scenario_write_csv(const char * spec_json, const char * path);

/* ---- model ------------------------------------------------------------- */

/* config_json: {node_dim, layers, ffn_hidden, modes, tau, history, horizon,
 * dt, input_scale, gnn, deterministic, kinematic}, all optional. */
HFTTC_API hfttc_status hfttc_model_create(const char * config_json, uint64_t seed, hfttc_model ** out);
/* expected_json: configuration keys that must match the checkpoint sidecar
 * (HFTTC_ERR_CONFIG otherwise). overrides_json: evaluation-only switches,
 * currently {kinematic}. Either may be NULL. */
HFTTC_API hfttc_status hfttc_model_load(
  const char * path, const char * expected_json, const char * overrides_json, hfttc_model ** out);
/* Checkpoint plus `<stem>.hparams.json` sidecar. */
HFTTC_API hfttc_status hfttc_model_save(const hfttc_model * model, const char * path);
HFTTC_API hfttc_status hfttc_model_config(const hfttc_model * model, char ** out_json);
/* loss_json: {lambda, lr, steps, batch_size, seed, confidence_loss,
 * confidence_weight}. *log_csv (optional) receives the per-step loss log.
 * HFTTC_ERR_NUMERIC when the loss diverges. */
HFTTC_API hfttc_status hfttc_model_train(
  hfttc_model * model, const hfttc_scenes * scenes, const char * loss_json, char ** log_csv);
/* behaviors: "all" or a comma-separated list of last_step, average,
 * self_prediction. baseline != 0 adds the constant-velocity block. */
HFTTC_API hfttc_status hfttc_model_evaluate(const hfttc_model * model, const hfttc_scenes * scenes,
  const char * behaviors, int baseline, char ** metrics_json, char ** rmse_csv);
/* Mode sets of one scene under one behavior hypothesis:
 * {scene, behavior, ambient: [{vehicle_id, probabilities, trajectories}]}. */
HFTTC_API hfttc_status hfttc_model_predict(
  const hfttc_model * model, const hfttc_scenes * scenes, size_t index, const char * behavior, char ** out_json);
HFTTC_API void hfttc_model_free(hfttc_model * model);

/* ---- safety ------------------------------------------------------------ */

/* Risk report of one scene. model == NULL selects the constant-velocity
 * predictor (one mode per vehicle, constant-velocity host).
 * thresholds_json: {rx, ry, horizon, dt}; dt defaults to the scene's. */
HFTTC_API hfttc_status hfttc_scenario_risk(const hfttc_model * model, const hfttc_scenes * scenes, size_t index,
  const char * thresholds_json, const char * behaviors, char ** report_json);
/* CSV `t,F(t)` of the HF-TTC CDF of one pair of a risk report, sampled on
 * the report's time grid. */
HFTTC_API hfttc_status hfttc_risk_cdf_csv(const char * report_json, size_t pair, char ** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* HFTTC_HFTTC_H_ */
