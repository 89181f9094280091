// Copyright 2026 The mace-matting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mace/mace.h"

#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "mace/error.hpp"
#include "mace/image_io.hpp"
#include "mace/metrics.hpp"
#include "mace/pipeline.hpp"
#include "mace/synth.hpp"

struct mace_config {
  mace::PipelineConfig value;
};

// Exactly one of rgb / matte is in use, selected by channels.
struct mace_image {
  int channels = 3;
  mace::Image rgb;
  mace::Matte matte;
};

struct mace_batch {
  std::vector<mace::FrameJob> jobs;
};

struct mace_report {
  mace::MetricReport metrics;
  std::vector<std::string> failures;
};

struct mace_synth {
  mace::SyntheticSequence seq;
};

namespace {

thread_local std::string g_last_error;

mace_status code_of(mace::ErrorCode code) {
  switch (code) {
    case mace::ErrorCode::invalid_argument: return MACE_ERR_INVALID_ARGUMENT;
    case mace::ErrorCode::dimension_mismatch: return MACE_ERR_DIMENSION_MISMATCH;
    case mace::ErrorCode::io: return MACE_ERR_IO;
    case mace::ErrorCode::numeric: return MACE_ERR_NUMERIC;
    case mace::ErrorCode::not_converged: return MACE_ERR_NOT_CONVERGED;
    case mace::ErrorCode::indefinite: return MACE_ERR_INDEFINITE;
    case mace::ErrorCode::internal: return MACE_ERR_INTERNAL;
  }
  return MACE_ERR_INTERNAL;
}

mace_status fail(mace_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body, mapping every exception to a status and the last-error text.
template <typename Body>
mace_status guarded(Body&& body) {
  try {
    return body();
  } catch (const mace::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MACE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MACE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MACE_ERR_INTERNAL, "unknown error");
  }
}

#define MACE_REQUIRE(cond, msg) \
  do {                          \
    if (!(cond)) return fail(MACE_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

const mace::Image& color_of(const mace_image* img) {
  if (img->channels != 3)
    throw mace::Error(mace::ErrorCode::invalid_argument, "expected a 3-channel image");
  return img->rgb;
}

mace::Matte matte_of(const mace_image* img) {
  if (img->channels == 1) return img->matte;
  mace::Matte m(img->rgb.width(), img->rgb.height());
  for (std::size_t i = 0; i < m.pixel_count(); ++i)
    m.values()[i] = (img->rgb.values()[3 * i] + img->rgb.values()[3 * i + 1] +
                     img->rgb.values()[3 * i + 2]) / 3.0;
  return m;
}

mace_image* wrap(mace::Matte m) {
  auto* img = new mace_image;
  img->channels = 1;
  img->matte = std::move(m);
  return img;
}

mace_image* wrap(mace::Image m) {
  auto* img = new mace_image;
  img->channels = 3;
  img->rgb = std::move(m);
  return img;
}

mace::SceneSpec to_spec(const mace_scene& s) {
  mace::SceneSpec spec;
  spec.width = s.width;
  spec.height = s.height;
  spec.frames = s.frames;
  spec.shape = s.shape == 1 ? mace::ShapeKind::disk : mace::ShapeKind::square;
  spec.shape_size = s.shape_size;
  spec.motion_x = s.motion_x;
  spec.motion_y = s.motion_y;
  spec.fg_r = s.fg_rgb[0];
  spec.fg_g = s.fg_rgb[1];
  spec.fg_b = s.fg_rgb[2];
  spec.fg_texture = s.fg_texture;
  spec.bg_contrast = s.bg_contrast;
  spec.color_similarity = s.color_similarity;
  spec.brightness_drift = s.brightness_drift;
  spec.noise_sigma = s.noise_sigma;
  spec.jitter_px = s.jitter_px;
  return spec;
}

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d.png", index);
  return buf;
}

}  // namespace

extern "C" {

const char* mace_version(void) { return "0.1.0"; }

const char* mace_status_string(mace_status status) {
  switch (status) {
    case MACE_OK: return "ok";
    case MACE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MACE_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case MACE_ERR_IO: return "i/o error";
    case MACE_ERR_NUMERIC: return "numeric error";
    case MACE_ERR_NOT_CONVERGED: return "not converged";
    case MACE_ERR_INDEFINITE: return "indefinite system";
    case MACE_ERR_INTERNAL: return "internal error";
    case MACE_ERR_BATCH_FAILED: return "batch had failing frames";
  }
  return "unknown status";
}

const char* mace_last_error(void) { return g_last_error.c_str(); }

mace_status mace_config_create(mace_config** out) {
  MACE_REQUIRE(out, "mace_config_create: null output");
  return guarded([&] {
    *out = new mace_config;
    return MACE_OK;
  });
}

void mace_config_destroy(mace_config* config) { delete config; }

mace_status mace_config_set(mace_config* config, const char* key, const char* value) {
  MACE_REQUIRE(config && key && value, "mace_config_set: null argument");
  return guarded([&] {
    mace::PipelineConfig next = config->value;
    next.set(key, value);
    config->value = next;
    return MACE_OK;
  });
}

mace_status mace_config_get(const mace_config* config, const char* key, char* buf,
                            size_t buf_len, size_t* needed) {
  MACE_REQUIRE(config && key, "mace_config_get: null argument");
  return guarded([&] {
    const std::string v = config->value.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_len > 0) {
      const std::size_t n = std::min(v.size(), buf_len - 1);
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
    return MACE_OK;
  });
}

mace_status mace_config_load(mace_config* config, const char* path) {
  MACE_REQUIRE(config && path, "mace_config_load: null argument");
  return guarded([&] {
    config->value = mace::load_config_file(path, config->value);
    return MACE_OK;
  });
}

mace_status mace_config_validate(const mace_config* config) {
  MACE_REQUIRE(config, "mace_config_validate: null config");
  return guarded([&] {
    config->value.validate();
    return MACE_OK;
  });
}

size_t mace_config_key_count(void) {
  static const std::size_t n = mace::PipelineConfig{}.keys().size();
  return n;
}

const char* mace_config_key(size_t index) {
  static const std::vector<std::string> keys = mace::PipelineConfig{}.keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

mace_status mace_image_create(int width, int height, int channels, mace_image** out) {
  MACE_REQUIRE(out, "mace_image_create: null output");
  MACE_REQUIRE(channels == 1 || channels == 3, "mace_image_create: channels must be 1 or 3");
  MACE_REQUIRE(width > 0 && height > 0, "mace_image_create: dimensions must be positive");
  return guarded([&] {
    *out = channels == 1 ? wrap(mace::Matte(width, height)) : wrap(mace::Image(width, height));
    return MACE_OK;
  });
}

mace_status mace_image_load(const char* path, int channels, mace_image** out) {
  MACE_REQUIRE(path && out, "mace_image_load: null argument");
  MACE_REQUIRE(channels == 1 || channels == 3, "mace_image_load: channels must be 1 or 3");
  return guarded([&] {
    *out = channels == 1 ? wrap(mace::load_matte(path)) : wrap(mace::load_image(path));
    return MACE_OK;
  });
}

mace_status mace_image_save(const mace_image* image, const char* path, int bit_depth) {
  MACE_REQUIRE(image && path, "mace_image_save: null argument");
  return guarded([&] {
    if (image->channels == 1)
      mace::save_matte(image->matte, path, bit_depth);
    else
      mace::save_image(image->rgb, path, bit_depth);
    return MACE_OK;
  });
}

void mace_image_destroy(mace_image* image) { delete image; }

int mace_image_width(const mace_image* image) {
  if (!image) return 0;
  return image->channels == 1 ? image->matte.width() : image->rgb.width();
}

int mace_image_height(const mace_image* image) {
  if (!image) return 0;
  return image->channels == 1 ? image->matte.height() : image->rgb.height();
}

int mace_image_channels(const mace_image* image) { return image ? image->channels : 0; }

double* mace_image_data(mace_image* image) {
  if (!image) return nullptr;
  return image->channels == 1 ? image->matte.storage().data() : image->rgb.storage().data();
}

const double* mace_image_const_data(const mace_image* image) {
  if (!image) return nullptr;
  return image->channels == 1 ? image->matte.storage().data() : image->rgb.storage().data();
}

mace_status mace_extract(const mace_config* config, const mace_image* frame,
                         const mace_image* plate, mace_image** matte_out,
                         mace_extract_stats* stats) {
  MACE_REQUIRE(config && frame && plate && matte_out, "mace_extract: null argument");
  return guarded([&] {
    mace::FrameResult r =
        mace::extract_frame(color_of(frame), color_of(plate), config->value);
    if (stats) {
      stats->iterations = r.report.iterations_used;
      stats->converged = r.report.converged ? 1 : 0;
      stats->final_residual =
          r.report.residual_history.empty() ? 0.0 : r.report.residual_history.back();
      stats->consensus_residual = r.diagnostics.consensus_residual;
      double worst = 0.0;
      for (double v : r.diagnostics.agent_residuals) worst = std::max(worst, v);
      stats->max_agent_residual = worst;
      stats->equilibrium_pass = r.diagnostics.pass ? 1 : 0;
    }
    *matte_out = wrap(std::move(r.matte));
    return MACE_OK;
  });
}

mace_status mace_metrics(const mace_image* pred, const mace_image* truth, int tol_px,
                         double* iou, double* mae, double* contour_f) {
  MACE_REQUIRE(pred && truth, "mace_metrics: null image");
  return guarded([&] {
    const mace::Matte p = matte_of(pred), g = matte_of(truth);
    if (iou) *iou = mace::iou(p, g);
    if (mae) *mae = mace::mae(p, g);
    if (contour_f) *contour_f = mace::contour_f(p, g, tol_px);
    return MACE_OK;
  });
}

mace_status mace_evaluate_paths(const char* pred, const char* truth, int tol_px,
                                mace_report** out) {
  MACE_REQUIRE(pred && truth && out, "mace_evaluate_paths: null argument");
  return guarded([&] {
    auto report = std::make_unique<mace_report>();
    report->metrics = mace::evaluate_paths(pred, truth, tol_px);
    *out = report.release();
    return MACE_OK;
  });
}

mace_status mace_batch_create(mace_batch** out) {
  MACE_REQUIRE(out, "mace_batch_create: null output");
  return guarded([&] {
    *out = new mace_batch;
    return MACE_OK;
  });
}

void mace_batch_destroy(mace_batch* batch) { delete batch; }

mace_status mace_batch_add(mace_batch* batch, const char* frame, const char* plate,
                           const char* output, const char* truth) {
  MACE_REQUIRE(batch && frame && plate && output, "mace_batch_add: null argument");
  return guarded([&] {
    mace::FrameJob job;
    job.frame_path = frame;
    job.plate_path = plate;
    job.output_path = output;
    if (truth) job.truth_path = std::string(truth);
    job.frame_index = static_cast<int>(batch->jobs.size());
    batch->jobs.push_back(std::move(job));
    return MACE_OK;
  });
}

mace_status mace_batch_add_directory(mace_batch* batch, const char* frames_dir,
                                     const char* plate, const char* output_dir,
                                     const char* truth_dir) {
  MACE_REQUIRE(batch && frames_dir && plate && output_dir,
               "mace_batch_add_directory: null argument");
  return guarded([&] {
    auto jobs = mace::jobs_from_directory(frames_dir, plate, output_dir,
                                          truth_dir ? truth_dir : "");
    batch->jobs.insert(batch->jobs.end(), jobs.begin(), jobs.end());
    return MACE_OK;
  });
}

mace_status mace_batch_add_manifest(mace_batch* batch, const char* path) {
  MACE_REQUIRE(batch && path, "mace_batch_add_manifest: null argument");
  return guarded([&] {
    auto jobs = mace::read_manifest(path);
    batch->jobs.insert(batch->jobs.end(), jobs.begin(), jobs.end());
    return MACE_OK;
  });
}

size_t mace_batch_size(const mace_batch* batch) { return batch ? batch->jobs.size() : 0; }

mace_status mace_batch_run(mace_batch* batch, const mace_config* config, int temporal,
                           int bit_depth, mace_report** report_out) {
  MACE_REQUIRE(batch && config && report_out, "mace_batch_run: null argument");
  return guarded([&] {
    for (const auto& job : batch->jobs) {
      const auto parent = std::filesystem::path(job.output_path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    mace::BatchResult r =
        mace::run_batch(batch->jobs, config->value, temporal != 0, bit_depth);
    auto report = std::make_unique<mace_report>();
    report->metrics = std::move(r.metrics);
    for (const auto& e : r.sequence.errors)
      if (!e.empty()) report->failures.push_back(e);
    *report_out = report.release();
    if (!r.ok()) return fail(MACE_ERR_BATCH_FAILED, r.first_failure);
    return MACE_OK;
  });
}

void mace_report_destroy(mace_report* report) { delete report; }

size_t mace_report_frame_count(const mace_report* report) {
  return report ? report->metrics.frames.size() : 0;
}

mace_status mace_report_frame(const mace_report* report, size_t index,
                              const char** frame_id, double* iou, double* mae,
                              double* contour_f) {
  MACE_REQUIRE(report, "mace_report_frame: null report");
  MACE_REQUIRE(index < report->metrics.frames.size(), "mace_report_frame: index out of range");
  const auto& f = report->metrics.frames[index];
  if (frame_id) *frame_id = f.frame_id.c_str();
  if (iou) *iou = f.iou;
  if (mae) *mae = f.mae;
  if (contour_f) *contour_f = f.contour_f;
  return MACE_OK;
}

mace_status mace_report_aggregate(const mace_report* report, double* iou, double* mae,
                                  double* contour_f) {
  MACE_REQUIRE(report, "mace_report_aggregate: null report");
  MACE_REQUIRE(!report->metrics.frames.empty(), "mace_report_aggregate: report has no metrics");
  if (iou) *iou = report->metrics.iou;
  if (mae) *mae = report->metrics.mae;
  if (contour_f) *contour_f = report->metrics.contour_f;
  return MACE_OK;
}

size_t mace_report_failure_count(const mace_report* report) {
  return report ? report->failures.size() : 0;
}

const char* mace_report_failure(const mace_report* report, size_t index) {
  if (!report || index >= report->failures.size()) return nullptr;
  return report->failures[index].c_str();
}

mace_status mace_report_write(const mace_report* report, const char* path) {
  MACE_REQUIRE(report && path, "mace_report_write: null argument");
  return guarded([&] {
    if (std::strcmp(path, "-") == 0) {
      mace::write_report(report->metrics, std::cout);
      std::cout.flush();
      return MACE_OK;
    }
    std::ofstream out(path);
    if (!out) return fail(MACE_ERR_IO, std::string("cannot write report '") + path + "'");
    mace::write_report(report->metrics, out);
    if (!out) return fail(MACE_ERR_IO, std::string("failed writing report '") + path + "'");
    return MACE_OK;
  });
}

void mace_scene_defaults(mace_scene* scene) {
  if (!scene) return;
  const mace::SceneSpec d;
  scene->width = d.width;
  scene->height = d.height;
  scene->frames = d.frames;
  scene->shape = d.shape == mace::ShapeKind::disk ? 1 : 0;
  scene->shape_size = d.shape_size;
  scene->motion_x = d.motion_x;
  scene->motion_y = d.motion_y;
  scene->fg_rgb[0] = d.fg_r;
  scene->fg_rgb[1] = d.fg_g;
  scene->fg_rgb[2] = d.fg_b;
  scene->fg_texture = d.fg_texture;
  scene->bg_contrast = d.bg_contrast;
  scene->color_similarity = d.color_similarity;
  scene->brightness_drift = d.brightness_drift;
  scene->noise_sigma = d.noise_sigma;
  scene->jitter_px = d.jitter_px;
}

mace_status mace_synth_create(const mace_scene* scene, unsigned long long seed,
                              mace_synth** out) {
  MACE_REQUIRE(scene && out, "mace_synth_create: null argument");
  MACE_REQUIRE(scene->width > 0 && scene->height > 0 && scene->frames > 0,
               "mace_synth_create: width, height and frames must be positive");
  MACE_REQUIRE(scene->shape == 0 || scene->shape == 1, "mace_synth_create: shape must be 0 or 1");
  return guarded([&] {
    auto s = std::make_unique<mace_synth>();
    s->seq = mace::synth_generate(to_spec(*scene), seed);
    *out = s.release();
    return MACE_OK;
  });
}

void mace_synth_destroy(mace_synth* synth) { delete synth; }

int mace_synth_frame_count(const mace_synth* synth) {
  return synth ? static_cast<int>(synth->seq.frames.size()) : 0;
}

mace_status mace_synth_plate(const mace_synth* synth, mace_image** out) {
  MACE_REQUIRE(synth && out, "mace_synth_plate: null argument");
  return guarded([&] {
    *out = wrap(synth->seq.plate);
    return MACE_OK;
  });
}

mace_status mace_synth_frame(const mace_synth* synth, int index, mace_image** out) {
  MACE_REQUIRE(synth && out, "mace_synth_frame: null argument");
  MACE_REQUIRE(index >= 0 && index < mace_synth_frame_count(synth),
               "mace_synth_frame: index out of range");
  return guarded([&] {
    *out = wrap(synth->seq.frames[index]);
    return MACE_OK;
  });
}

mace_status mace_synth_truth(const mace_synth* synth, int index, mace_image** out) {
  MACE_REQUIRE(synth && out, "mace_synth_truth: null argument");
  MACE_REQUIRE(index >= 0 && index < mace_synth_frame_count(synth),
               "mace_synth_truth: index out of range");
  return guarded([&] {
    *out = wrap(synth->seq.truth[index]);
    return MACE_OK;
  });
}

mace_status mace_synth_write(const mace_synth* synth, const char* dir, int bit_depth) {
  MACE_REQUIRE(synth && dir, "mace_synth_write: null argument");
  return guarded([&] {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "frames");
    fs::create_directories(root / "truth");
    mace::save_image(synth->seq.plate, (root / "plate.png").string(), bit_depth);
    for (std::size_t i = 0; i < synth->seq.frames.size(); ++i) {
      const std::string name = frame_name(static_cast<int>(i));
      mace::save_image(synth->seq.frames[i], (root / "frames" / name).string(), bit_depth);
      mace::save_matte(synth->seq.truth[i], (root / "truth" / name).string(), bit_depth);
    }
    return MACE_OK;
  });
}

}  // extern "C"
