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

#include "mace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "mace/error.hpp"
#include "mace/image_io.hpp"

namespace mace {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)).size() != 0)
    throw Error(ErrorCode::invalid_argument, key + ": '" + text + "' is not a number");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw Error(ErrorCode::invalid_argument, key + ": '" + text + "' is not an integer");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::invalid_argument, key + ": '" + text + "' is not a boolean");
}

TvWeights parse_weights(const std::string& key, const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::string a, b, c, extra;
  if (!(in >> a >> b >> c) || (in >> extra))
    throw Error(ErrorCode::invalid_argument, key + ": expected three weights 'x,y,t'");
  return {parse_double(key, a), parse_double(key, b), parse_double(key, c)};
}

std::string weights_string(const TvWeights& w) {
  return format_number(w.x) + "," + format_number(w.y) + "," + format_number(w.t);
}

struct Field {
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field number_field(T PipelineConfig::*member) {
  return {[member](PipelineConfig& c, const std::string& key, const std::string& v) {
            if constexpr (std::is_same_v<T, int>)
              c.*member = parse_int(key, v);
            else
              c.*member = parse_double(key, v);
          },
          [member](const PipelineConfig& c) { return format_number(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["lambda1"] = number_field(&PipelineConfig::lambda1);
    f["lambda2"] = number_field(&PipelineConfig::lambda2);
    f["lambda3"] = number_field(&PipelineConfig::lambda3);
    f["gamma"] = number_field(&PipelineConfig::gamma);
    f["tauA"] = number_field(&PipelineConfig::tauA);
    f["tauTheta"] = number_field(&PipelineConfig::tauTheta);
    f["sigma_delta"] = number_field(&PipelineConfig::sigma_delta);
    f["kappa"] = number_field(&PipelineConfig::kappa);
    f["theta"] = number_field(&PipelineConfig::theta);
    f["hs"] = number_field(&PipelineConfig::hs);
    f["hr"] = number_field(&PipelineConfig::hr);
    f["eta"] = number_field(&PipelineConfig::eta);
    f["eps"] = number_field(&PipelineConfig::eps);
    f["tol"] = number_field(&PipelineConfig::tol);
    f["max_iter"] = number_field(&PipelineConfig::max_iter);
    f["mann_weight"] = number_field(&PipelineConfig::mann_weight);
    f["flood_tol"] = number_field(&PipelineConfig::flood_tol);
    f["temporal_window"] = number_field(&PipelineConfig::temporal_window);
    f["contour_tol"] = number_field(&PipelineConfig::contour_tol);
    f["intensity_scale"] = number_field(&PipelineConfig::intensity_scale);
    f["bilateral_radius"] = number_field(&PipelineConfig::bilateral_radius);
    f["cg_tol"] = number_field(&PipelineConfig::cg_tol);
    f["cg_max_iter"] = number_field(&PipelineConfig::cg_max_iter);
    f["tv_inner_tol"] = number_field(&PipelineConfig::tv_inner_tol);
    f["tv_inner_max"] = number_field(&PipelineConfig::tv_inner_max);
    f["beta_spatial"] = {
        [](PipelineConfig& c, const std::string& k, const std::string& v) {
          c.beta_spatial = parse_weights(k, v);
        },
        [](const PipelineConfig& c) { return weights_string(c.beta_spatial); }};
    f["beta_temporal"] = {
        [](PipelineConfig& c, const std::string& k, const std::string& v) {
          c.beta_temporal = parse_weights(k, v);
        },
        [](const PipelineConfig& c) { return weights_string(c.beta_temporal); }};
    f["parallel_agents"] = {
        [](PipelineConfig& c, const std::string& k, const std::string& v) {
          c.parallel_agents = parse_bool(k, v);
        },
        [](const PipelineConfig& c) {
          return std::string(c.parallel_agents ? "true" : "false");
        }};
    return f;
  }();
  return table;
}

void require(bool ok, const char* key, const char* constraint) {
  if (!ok)
    throw Error(ErrorCode::invalid_argument,
                std::string("config: ") + key + " must satisfy " + constraint);
}

Matte clamp_unit(std::span<const double> values, int width, int height) {
  Matte m(width, height);
  for (std::size_t i = 0; i < m.pixel_count(); ++i)
    m.values()[i] = std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
  return m;
}

// Per-frame quantities shared by every window that contains the frame.
struct FrameModel {
  std::shared_ptr<const DualLayerLaplacian> laplacian;
  Matte r0;
};

FrameModel build_model(const Image& frame, const Image& plate,
                       const PipelineConfig& cfg, int index, const PriorHook& hook) {
  require_same_size(frame, plate, "frame vs plate");
  FrameModel m;
  BackgroundPrior prior = build_background_prior(frame, plate, cfg.background_params());
  m.r0 = std::move(prior.r0);
  if (hook) hook(index, m.r0);
  m.laplacian = std::make_shared<const DualLayerLaplacian>(
      build_dual_laplacian(frame, plate, cfg.laplacian_options()));
  return m;
}

// MACE over consecutive frames [first, first + count).
struct VolumeSolve {
  EquilibriumReport report;
  EquilibriumDiagnostics diagnostics;
  int width = 0, height = 0;
};

VolumeSolve solve_volume(const std::vector<FrameModel>& models, std::size_t first,
                         std::size_t count, const PipelineConfig& cfg, bool temporal) {
  const int w = models[first].r0.width(), h = models[first].r0.height();
  std::vector<std::shared_ptr<const DualLayerLaplacian>> laps;
  Vector r0;
  for (std::size_t f = first; f < first + count; ++f) {
    laps.push_back(models[f].laplacian);
    r0.insert(r0.end(), models[f].r0.values().begin(), models[f].r0.values().end());
  }
  const std::vector<AgentOp> agents = {
      make_matting_agent(std::move(laps), cfg.matting_params()),
      make_background_agent(r0, cfg.lambda2, cfg.gamma),
      make_tv_agent(w, h, static_cast<int>(count), cfg.tv_options(temporal)),
  };

  VolumeSolve out;
  out.width = w;
  out.height = h;
  out.report = mace_iterate(StackedState::broadcast(r0, agents.size()), agents,
                            cfg.iteration_options());
  out.diagnostics = verify_equilibrium(out.report, agents, 10.0 * cfg.tol);
  return out;
}

// Frame `slot` of a solved volume, clamped.
FrameResult frame_of(const VolumeSolve& v, std::size_t slot) {
  const std::size_t plane = static_cast<std::size_t>(v.width) * v.height;
  FrameResult r;
  r.report = v.report;
  r.diagnostics = v.diagnostics;
  r.matte = clamp_unit(std::span<const double>(v.report.solution).subspan(slot * plane, plane),
                       v.width, v.height);
  return r;
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return std::string(to_string(err->code())) + ": " + err->what();
  return e.what();
}

}  // namespace

void PipelineConfig::validate() const {
  require(lambda1 > 0.0, "lambda1", "> 0");
  require(lambda2 >= 0.0, "lambda2", ">= 0");
  require(lambda3 > 0.0, "lambda3", "> 0");
  require(gamma < 1.0 + lambda2, "gamma", "< 1 + lambda2");
  require(tauA > 0.0, "tauA", "> 0");
  require(tauTheta > 0.0, "tauTheta", "> 0");
  require(sigma_delta > 0.0, "sigma_delta", "> 0");
  require(kappa > 0.0, "kappa", "> 0");
  require(theta > 0.0 && theta < 1.0, "theta", "0 < theta < 1");
  require(hs > 0.0, "hs", "> 0");
  require(hr > 0.0, "hr", "> 0");
  for (const auto* b : {&beta_spatial, &beta_temporal})
    require(b->x >= 0.0 && b->y >= 0.0 && b->t >= 0.0, "beta", "componentwise >= 0");
  require(eta > 0.0, "eta", "> 0");
  require(eps >= 0.0, "eps", ">= 0");
  require(tol > 0.0, "tol", "> 0");
  require(max_iter >= 1, "max_iter", ">= 1");
  require(mann_weight > 0.0 && mann_weight <= 1.0, "mann_weight", "0 < w <= 1");
  require(flood_tol >= 0.0, "flood_tol", ">= 0");
  require(temporal_window >= 1, "temporal_window", ">= 1");
  require(contour_tol >= 0, "contour_tol", ">= 0");
  require(intensity_scale > 0.0, "intensity_scale", "> 0");
  require(bilateral_radius >= 0, "bilateral_radius", ">= 0");
  require(cg_tol > 0.0, "cg_tol", "> 0");
  require(cg_max_iter >= 1, "cg_max_iter", ">= 1");
  require(tv_inner_tol > 0.0, "tv_inner_tol", "> 0");
  require(tv_inner_max >= 1, "tv_inner_max", ">= 1");
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end())
    throw Error(ErrorCode::invalid_argument, "config: unknown key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::vector<std::string> PipelineConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : fields()) out.push_back(k);
  return out;
}

std::string PipelineConfig::get(const std::string& key) const {
  const auto it = fields().find(key);
  if (it == fields().end())
    throw Error(ErrorCode::invalid_argument, "config: unknown key '" + key + "'");
  return it->second.get(*this);
}

BackgroundParams PipelineConfig::background_params() const {
  BackgroundParams p;
  p.hs = hs;
  p.hr = hr;
  p.radius = bilateral_radius;
  p.intensity_scale = intensity_scale;
  p.sigma_delta = sigma_delta;
  p.flood_tol = flood_tol;
  p.tauA = tauA;
  p.tauTheta = tauTheta;
  return p;
}

MattingParams PipelineConfig::matting_params() const {
  return {lambda1, kappa, theta, CgOptions{cg_tol, cg_max_iter}};
}

LaplacianOptions PipelineConfig::laplacian_options() const { return {eta, eps}; }

TvOptions PipelineConfig::tv_options(bool temporal) const {
  return {lambda3, temporal ? beta_temporal : beta_spatial, tv_inner_tol, tv_inner_max};
}

IterationOptions PipelineConfig::iteration_options() const {
  return {tol, max_iter, mann_weight, parallel_agents};
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::invalid_argument,
                  "config line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), base);
}

FrameResult extract_frame(const Image& frame, const Image& plate,
                          const PipelineConfig& cfg, int frame_index,
                          const PriorHook& hook) {
  cfg.validate();
  try {
    std::vector<FrameModel> models;
    models.push_back(build_model(frame, plate, cfg, frame_index, hook));
    return frame_of(solve_volume(models, 0, 1, cfg, false), 0);
  } catch (const SolverError& e) {
    throw SolverError(e.code(), "frame " + std::to_string(frame_index) + ": " + e.what(),
                      e.residual(), e.iterations());
  } catch (const Error& e) {
    throw Error(e.code(), "frame " + std::to_string(frame_index) + ": " + e.what());
  }
}

bool SequenceResult::ok() const {
  return std::all_of(errors.begin(), errors.end(),
                     [](const std::string& e) { return e.empty(); });
}

SequenceResult run_sequence(const std::vector<Image>& frames,
                            const std::vector<Image>& plates,
                            const PipelineConfig& cfg, bool temporal,
                            const PriorHook& hook) {
  cfg.validate();
  if (frames.empty())
    throw Error(ErrorCode::invalid_argument, "run_sequence: no frames");
  if (plates.size() != frames.size() && plates.size() != 1)
    throw Error(ErrorCode::invalid_argument,
                "run_sequence: need one plate or one plate per frame");
  const auto plate_for = [&](std::size_t i) -> const Image& {
    return plates.size() == 1 ? plates.front() : plates[i];
  };

  SequenceResult out;
  out.frames.resize(frames.size());
  out.errors.resize(frames.size());

  if (!temporal) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      try {
        out.frames[i] = extract_frame(frames[i], plate_for(i), cfg, static_cast<int>(i), hook);
      } catch (const std::exception& e) {
        out.errors[i] = describe(e);
      }
    }
    return out;
  }

  const auto window = static_cast<std::size_t>(cfg.temporal_window);
  if (frames.size() < window)
    throw Error(ErrorCode::invalid_argument,
                "temporal mode needs at least temporal_window=" +
                    std::to_string(window) + " frames, got " +
                    std::to_string(frames.size()));
  for (std::size_t i = 1; i < frames.size(); ++i)
    require_same_size(frames[i], frames[0], "temporal frames");

  std::vector<FrameModel> models(frames.size());
  std::vector<std::string> model_errors(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      models[i] = build_model(frames[i], plate_for(i), cfg, static_cast<int>(i), hook);
    } catch (const std::exception& e) {
      model_errors[i] = describe(e);
    }
  }

  // Frames near the ends share a window; each window is solved once.
  std::map<std::size_t, VolumeSolve> solved;
  std::map<std::size_t, std::string> solve_errors;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t half = window / 2;
    const std::size_t first =
        std::min(i > half ? i - half : 0, frames.size() - window);
    std::string failed;
    for (std::size_t f = first; f < first + window; ++f)
      if (!model_errors[f].empty()) {
        failed = "frame " + std::to_string(f) + ": " + model_errors[f];
        break;
      }
    if (!failed.empty()) {
      out.errors[i] = failed;
      continue;
    }
    if (!solved.count(first) && !solve_errors.count(first)) {
      try {
        solved.emplace(first, solve_volume(models, first, window, cfg, true));
      } catch (const std::exception& e) {
        solve_errors.emplace(first, describe(e));
      }
    }
    if (const auto it = solved.find(first); it != solved.end())
      out.frames[i] = frame_of(it->second, i - first);
    else
      out.errors[i] = "frame " + std::to_string(i) + ": " + solve_errors.at(first);
  }
  return out;
}

BatchResult run_batch(std::vector<FrameJob> jobs, const PipelineConfig& cfg,
                      bool temporal, int bit_depth, const PriorHook& hook) {
  if (jobs.empty()) throw Error(ErrorCode::invalid_argument, "run_batch: no jobs");
  std::stable_sort(jobs.begin(), jobs.end(), [](const FrameJob& a, const FrameJob& b) {
    return a.frame_path < b.frame_path;
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].frame_index = static_cast<int>(i);

  BatchResult result;
  std::vector<Image> frames(jobs.size());
  std::vector<Image> plates(jobs.size());
  std::map<std::string, Image> plate_cache;
  std::vector<std::string> load_errors(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      frames[i] = load_image(jobs[i].frame_path);
      auto it = plate_cache.find(jobs[i].plate_path);
      if (it == plate_cache.end())
        it = plate_cache.emplace(jobs[i].plate_path, load_image(jobs[i].plate_path)).first;
      plates[i] = it->second;
      require_same_size(frames[i], plates[i],
                        ("frame '" + jobs[i].frame_path + "' vs plate '" +
                         jobs[i].plate_path + "'").c_str());
    } catch (const std::exception& e) {
      load_errors[i] = "frame " + std::to_string(i) + " (" + jobs[i].frame_path +
                       "): " + describe(e);
    }
  }

  auto& seq = result.sequence;
  seq.frames.resize(jobs.size());
  seq.errors = load_errors;
  const bool loads_ok = std::all_of(load_errors.begin(), load_errors.end(),
                                    [](const std::string& e) { return e.empty(); });
  if (temporal && !loads_ok) {
    for (auto& e : seq.errors)
      if (e.empty()) e = "skipped: another frame of the temporal batch failed to load";
  } else if (temporal) {
    seq = run_sequence(frames, plates, cfg, true, hook);
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!load_errors[i].empty()) continue;
      try {
        seq.frames[i] = extract_frame(frames[i], plates[i], cfg, static_cast<int>(i), hook);
      } catch (const std::exception& e) {
        seq.errors[i] = describe(e);
      }
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (seq.frames[i] && !jobs[i].output_path.empty()) {
      try {
        save_matte(seq.frames[i]->matte, jobs[i].output_path, bit_depth);
      } catch (const std::exception& e) {
        seq.errors[i] = describe(e);
      }
    }
    if (seq.frames[i] && jobs[i].truth_path) {
      try {
        const Matte gt = load_matte(*jobs[i].truth_path);
        const std::string id = std::filesystem::path(jobs[i].frame_path).stem().string();
        result.metrics.add(evaluate_frame(id, seq.frames[i]->matte, gt, cfg.contour_tol));
        result.has_metrics = true;
      } catch (const std::exception& e) {
        seq.errors[i] = describe(e);
      }
    }
    if (result.first_failure.empty() && !seq.errors[i].empty())
      result.first_failure = seq.errors[i];
  }
  return result;
}

std::vector<FrameJob> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open manifest '" + path + "'");
  const std::filesystem::path root = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (root / fp).string();
  };
  std::vector<FrameJob> jobs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string tok; fields >> tok;) parts.push_back(tok);
    if (parts.empty()) continue;
    if (parts.size() < 3 || parts.size() > 4)
      throw Error(ErrorCode::invalid_argument,
                  "manifest line " + std::to_string(line_no) +
                      ": expected 'frame plate output [truth]'");
    FrameJob job;
    job.frame_path = resolve(parts[0]);
    job.plate_path = resolve(parts[1]);
    job.output_path = resolve(parts[2]);
    if (parts.size() == 4) job.truth_path = resolve(parts[3]);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::vector<FrameJob> jobs_from_directory(const std::string& frames_dir,
                                          const std::string& plate_path,
                                          const std::string& output_dir,
                                          const std::string& truth_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(frames_dir))
    throw Error(ErrorCode::io, "'" + frames_dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  const fs::path plate_abs = fs::absolute(plate_path);
  std::vector<FrameJob> jobs;
  for (const auto& f : files) {
    if (fs::absolute(f) == plate_abs) continue;
    FrameJob job;
    job.frame_path = f.string();
    job.plate_path = plate_path;
    job.output_path = (fs::path(output_dir) / (f.stem().string() + ".png")).string();
    if (!truth_dir.empty()) {
      const fs::path gt = fs::path(truth_dir) / f.filename();
      if (fs::exists(gt)) job.truth_path = gt.string();
    }
    jobs.push_back(std::move(job));
  }
  if (jobs.empty())
    throw Error(ErrorCode::invalid_argument, "no frames found in '" + frames_dir + "'");
  return jobs;
}

MetricReport evaluate_paths(const std::string& pred, const std::string& truth,
                            int tol_px) {
  namespace fs = std::filesystem;
  MetricReport report;
  if (fs::is_directory(pred) != fs::is_directory(truth))
    throw Error(ErrorCode::invalid_argument,
                "eval: prediction and truth must both be files or both directories");
  if (!fs::is_directory(pred)) {
    report.add(evaluate_frame(fs::path(pred).stem().string(), load_matte(pred),
                              load_matte(truth), tol_px));
    return report;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(pred)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm" || ext == ".ppm"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const fs::path gt = fs::path(truth) / f.filename();
    if (!fs::exists(gt))
      throw Error(ErrorCode::io, "eval: no truth for '" + f.string() + "' at '" +
                                     gt.string() + "'");
    report.add(evaluate_frame(f.stem().string(), load_matte(f.string()),
                              load_matte(gt.string()), tol_px));
  }
  if (report.frames.empty())
    throw Error(ErrorCode::invalid_argument, "eval: no images in '" + pred + "'");
  return report;
}

}  // namespace mace
