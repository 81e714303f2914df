#pragma once

// Synthetic subjects for end-to-end validation of the analysis pipeline.
//
// Hand response to a cue: a minimum-jerk excursion of the cued DOF, held and
// optionally returned, plus signed leaks into other DOFs. A trial's `delay`
// is the time of the first acceleration peak (the quantity the analysis
// measures), so the excursion starts kAccelPeakLead * duration earlier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "haptic_guide/cues.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/pose.hpp"
#include "haptic_guide/rng.hpp"
#include "haptic_guide/trial_log.hpp"

namespace hg {

// Fraction of a minimum-jerk movement's duration at which acceleration peaks.
inline const double kAccelPeakLead = 0.5 - std::sqrt(3.0) / 6.0;

using Matrix8 = std::array<std::array<double, 8>, 8>;

enum class ResponderClass { Fast, Slow };
inline const char* to_string(ResponderClass c) { return c == ResponderClass::Fast ? "Fast" : "Slow"; }

struct PrimaryAxis {
  Dof dof;
  double sign;
};

inline PrimaryAxis primary_axis(Direction d) {
  switch (d) {
    case Direction::Forward: return {Dof::X, 1.0};
    case Direction::Backward: return {Dof::X, -1.0};
    case Direction::Up: return {Dof::Z, 1.0};
    case Direction::Down: return {Dof::Z, -1.0};
    case Direction::TwistLeft: return {Dof::Yaw, 1.0};
    case Direction::TwistRight: return {Dof::Yaw, -1.0};
    case Direction::TiltLeft: return {Dof::Roll, -1.0};
    case Direction::TiltRight: return {Dof::Roll, 1.0};
  }
  return {Dof::X, 1.0};
}

// Leak into `dof` = fraction * signed primary displacement.
struct Coupling {
  Direction cue = Direction::Forward;
  Dof dof = Dof::Z;
  double fraction = 0.0;
};

inline Matrix8 identity_matrix8() {
  Matrix8 m{};
  for (int i = 0; i < 8; ++i) m[i][i] = 1.0;
  return m;
}

// Forced-choice counts out of 60 per cue that reproduce the published
// confusion table (rows: presented cue, columns: response).
inline constexpr std::array<std::array<int, 8>, 8> kTableICounts{{
    {58, 1, 1, 0, 0, 0, 0, 0},
    {1, 57, 0, 2, 0, 0, 0, 0},
    {1, 0, 56, 0, 1, 0, 0, 2},
    {1, 1, 2, 55, 0, 0, 1, 0},
    {0, 1, 0, 0, 56, 2, 1, 0},
    {0, 0, 0, 0, 1, 58, 0, 1},
    {0, 0, 0, 1, 0, 0, 58, 1},
    {0, 0, 0, 0, 0, 2, 1, 57},
}};

inline Matrix8 table_i_matrix() {
  Matrix8 m{};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m[i][j] = kTableICounts[i][j] / 60.0;
  return m;
}

struct SubjectProfile {
  int subject_id = 1;
  ResponderClass responder = ResponderClass::Fast;
  double mean_delay_s = 0.33;
  double delay_sd_s = 0.08;
  double rotation_delay_offset_s = 0.0;
  int experience_level = 2;
  std::array<double, 8> gain{30, 22, 25, 25, 25, 25, 18, 24};  // peak of the cued DOF, mm or deg
  double gain_noise_rel = 0.08;
  double movement_duration_s = 0.35;
  double hold_s = 0.3;
  double return_duration_s = 0.6;
  bool return_to_rest = true;
  std::vector<Coupling> coupling;
  Matrix8 misclassification = identity_matrix8();
  double repeat_probability = 0.05;

  void validate() const {
    if (!(mean_delay_s > 0.0) || !(delay_sd_s >= 0.0)) throw InvalidConfig("delay parameters invalid");
    for (double g : gain)
      if (!(g > 0.0)) throw InvalidConfig("gains must be positive");
    if (experience_level < 1 || experience_level > 4) throw InvalidConfig("experience level must be 1..4");
    if (!(movement_duration_s > 0.0) || !(hold_s >= 0.0) || !(return_duration_s > 0.0))
      throw InvalidConfig("movement timing invalid");
    for (const auto& row : misclassification) {
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) throw InvalidConfig("misclassification probabilities must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw InvalidConfig("misclassification rows must sum to 1");
    }
  }
};

struct MotionOptions {
  double t_start_s = -0.5;  // relative to cue onset
  double t_end_s = 3.0;
  double rate_hz = 80.0;
  double noise_mm = 0.1;
  double noise_deg = 0.1;
  double quantum = 1e-4;  // tracker output resolution
  Pose6 rest{};
  RigidOffset sensor_to_handle = RigidOffset::from_euler({0.0, 0.0, 60.0}, 0.0, 0.0, 0.0);
};

struct SynthTrial {
  TrialRecord record;
  double delay_s = 0.0;  // ground-truth first acceleration peak after cue onset
  double gain = 0.0;     // realized primary peak
};

namespace detail {

inline double response_profile(const SubjectProfile& p, double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau < p.movement_duration_s) return minimum_jerk(tau / p.movement_duration_s);
  const double back = p.movement_duration_s + p.hold_s;
  if (tau <= back || !p.return_to_rest) return 1.0;
  return 1.0 - minimum_jerk((tau - back) / p.return_duration_s);
}

inline double quantize(double v, double q) { return q > 0.0 ? std::round(v / q) * q : v; }

}  // namespace detail

inline SynthTrial synth_movement_trial(const SubjectProfile& profile, Direction cue, RandomStream& rng,
                                       int part = 1, int trial_index = 0, const MotionOptions& opts = {}) {
  const double lead = kAccelPeakLead * profile.movement_duration_s;
  const double mean = profile.mean_delay_s + (is_rotation(cue) ? profile.rotation_delay_offset_s : 0.0);
  double delay = rng.normal(mean, profile.delay_sd_s);
  for (int k = 0; k < 64 && delay <= lead; ++k) delay = rng.normal(mean, profile.delay_sd_s);
  delay = std::max(delay, lead + 1e-3);
  const double start = delay - lead;

  const double nominal = profile.gain[index_of(cue)];
  const double gain = std::max(nominal * (1.0 + profile.gain_noise_rel * rng.normal()), 0.2 * nominal);
  const PrimaryAxis axis = primary_axis(cue);

  int repeats = 0;
  while (repeats < 10 && rng.uniform() < profile.repeat_probability) ++repeats;

  SynthTrial out;
  out.delay_s = delay;
  out.gain = gain;
  out.record = {profile.subject_id, part, trial_index, cue, repeats, {}};

  const RigidOffset handle_to_sensor = opts.sensor_to_handle.inverse();
  const auto first = static_cast<long>(std::ceil(opts.t_start_s * opts.rate_hz - 1e-9));
  const auto last = static_cast<long>(std::floor(opts.t_end_s * opts.rate_hz + 1e-9));
  for (long k = first; k <= last; ++k) {
    const double t = static_cast<double>(k) / opts.rate_hz;
    const double m = detail::response_profile(profile, t - start);
    std::array<double, kNumDof> disp{};
    const double primary = axis.sign * gain * m;
    disp[static_cast<int>(axis.dof)] += primary;
    for (const auto& c : profile.coupling)
      if (c.cue == cue) disp[static_cast<int>(c.dof)] += c.fraction * primary;

    const auto r = opts.rest.values();
    const Pose6 handle{t, r[0] + disp[0], r[1] + disp[1], r[2] + disp[2],
                       r[3] + disp[3], r[4] + disp[4], r[5] + disp[5]};
    Pose6 sensor = to_handle_frame(handle, handle_to_sensor);
    for (int d = 0; d < kNumDof; ++d) {
      const Dof dof = static_cast<Dof>(d);
      const double sd = is_rotational(dof) ? opts.noise_deg : opts.noise_mm;
      sensor[dof] = detail::quantize(sensor[dof] + rng.normal(0.0, sd), opts.quantum);
    }
    out.record.samples.push_back(sensor);
  }
  return out;
}

inline SynthTrial synth_movement_trial(const SubjectProfile& profile, Direction cue, std::uint64_t seed, int part = 1,
                                       int trial_index = 0, const MotionOptions& opts = {}) {
  RandomStream rng(seed, static_cast<std::uint64_t>(profile.subject_id), static_cast<std::uint64_t>(part),
                   static_cast<std::uint64_t>(trial_index));
  return synth_movement_trial(profile, cue, rng, part, trial_index, opts);
}

inline Direction synth_forced_choice(const SubjectProfile& profile, Direction cue, RandomStream& rng) {
  const auto& row = profile.misclassification[index_of(cue)];
  const double u = rng.uniform();
  double acc = 0.0;
  int last_nonzero = index_of(cue);
  for (int j = 0; j < 8; ++j) {
    if (row[j] <= 0.0) continue;
    acc += row[j];
    last_nonzero = j;
    if (u < acc) return kAllDirections[j];
  }
  return kAllDirections[last_nonzero];
}

inline Direction synth_forced_choice(const SubjectProfile& profile, Direction cue, std::uint64_t seed) {
  RandomStream rng(seed);
  return synth_forced_choice(profile, cue, rng);
}

struct StudyRecipe {
  int n_fast = 13;
  int n_slow = 7;
  double fast_delay_s = 0.33;
  double fast_delay_sd_s = 0.08;
  double slow_delay_s = 1.56;
  double slow_delay_sd_s = 0.25;
  double fast_movement_s = 0.35;
  double slow_movement_s = 0.45;
  double fast_gain_noise_rel = 0.08;
  double slow_gain_noise_rel = 0.2;
  double between_subject_gain_sd_rel = 0.15;
  std::array<double, 8> gain_means{30, 22, 25, 25, 25, 25, 18, 24};
  double experience_slope_s_per_level = -0.041;
  double experience_center = 2.0;
  double rotation_delay_offset_s = 0.0;
  int forward_down_coupling_subjects = 4;
  double forward_down_fraction = -0.3;
  double tilt_pitch_fraction = 0.2;
  int movement_trials_per_cue = 10;
  int choice_trials_per_cue = 3;
  double repeat_probability = 0.05;
  Matrix8 misclassification = table_i_matrix();
  MotionOptions motion{};

  void validate() const {
    if (n_fast < 0 || n_slow < 0 || n_fast + n_slow < 1) throw InvalidConfig("recipe needs at least one subject");
    if (movement_trials_per_cue < 1 || choice_trials_per_cue < 0) throw InvalidConfig("trial counts invalid");
    if (!(motion.rate_hz > 0.0) || !(motion.t_end_s > motion.t_start_s)) throw InvalidConfig("motion window invalid");
  }
};

struct StudyData {
  StudyRecipe recipe;
  std::uint64_t seed = 0;
  std::vector<SubjectProfile> profiles;
  std::vector<SubjectInfo> subjects;
  std::vector<TrialRecord> movements;
  std::vector<double> true_delays;  // parallel to movements
  std::vector<ChoiceRecord> choices;
};

// Experience levels with mean exactly `center` (= 2) and spread over 1..4.
inline std::vector<int> balanced_experience_levels(int n) {
  static const std::vector<std::vector<int>> blocks{{1, 3}, {1, 1, 4}, {2}};
  std::vector<int> levels;
  for (std::size_t b = 0; static_cast<int>(levels.size()) < n; ++b) {
    const auto& block = blocks[b % blocks.size()];
    if (static_cast<int>(levels.size() + block.size()) > n) {
      levels.push_back(2);
      continue;
    }
    levels.insert(levels.end(), block.begin(), block.end());
  }
  return levels;
}

inline std::vector<SubjectProfile> make_profiles(const StudyRecipe& recipe, std::uint64_t seed) {
  recipe.validate();
  const int n = recipe.n_fast + recipe.n_slow;
  std::vector<ResponderClass> classes(static_cast<std::size_t>(recipe.n_fast), ResponderClass::Fast);
  classes.insert(classes.end(), static_cast<std::size_t>(recipe.n_slow), ResponderClass::Slow);
  RandomStream assign(seed, 0, 100, 0);
  assign.shuffle(std::span(classes));

  std::array<std::vector<int>, 2> levels{balanced_experience_levels(recipe.n_fast),
                                          balanced_experience_levels(recipe.n_slow)};
  assign.shuffle(std::span(levels[0]));
  assign.shuffle(std::span(levels[1]));
  std::array<std::size_t, 2> next_level{0, 0};

  // Subjects receiving the forward -> downward leak.
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 1);
  assign.shuffle(std::span(ids));
  const std::vector<int> leaky(ids.begin(), ids.begin() + std::min(n, recipe.forward_down_coupling_subjects));

  std::vector<SubjectProfile> profiles;
  for (int s = 1; s <= n; ++s) {
    RandomStream rng(seed, static_cast<std::uint64_t>(s), 0, 0);
    SubjectProfile p;
    p.subject_id = s;
    p.responder = classes[static_cast<std::size_t>(s - 1)];
    const bool fast = p.responder == ResponderClass::Fast;
    const int cls = fast ? 0 : 1;
    p.experience_level = levels[cls][next_level[cls]++];
    p.mean_delay_s = (fast ? recipe.fast_delay_s : recipe.slow_delay_s) +
                     recipe.experience_slope_s_per_level * (p.experience_level - recipe.experience_center);
    p.delay_sd_s = fast ? recipe.fast_delay_sd_s : recipe.slow_delay_sd_s;
    p.rotation_delay_offset_s = recipe.rotation_delay_offset_s;
    p.movement_duration_s = fast ? recipe.fast_movement_s : recipe.slow_movement_s;
    p.gain_noise_rel = fast ? recipe.fast_gain_noise_rel : recipe.slow_gain_noise_rel;
    for (int c = 0; c < 8; ++c)
      p.gain[c] = recipe.gain_means[c] * std::max(0.3, 1.0 + recipe.between_subject_gain_sd_rel * rng.normal());
    if (std::find(leaky.begin(), leaky.end(), s) != leaky.end())
      p.coupling.push_back({Direction::Forward, Dof::Z, recipe.forward_down_fraction});
    if (recipe.tilt_pitch_fraction != 0.0) {
      p.coupling.push_back({Direction::TiltLeft, Dof::Pitch, recipe.tilt_pitch_fraction});
      p.coupling.push_back({Direction::TiltRight, Dof::Pitch, recipe.tilt_pitch_fraction});
    }
    p.misclassification = recipe.misclassification;
    p.repeat_probability = recipe.repeat_probability;
    p.validate();
    profiles.push_back(std::move(p));
  }
  return profiles;
}

// Seeded trial order with each cue `per_cue` times.
inline std::vector<Direction> randomized_cue_order(int per_cue, RandomStream& rng) {
  std::vector<Direction> order;
  for (int r = 0; r < per_cue; ++r) order.insert(order.end(), kAllDirections.begin(), kAllDirections.end());
  rng.shuffle(std::span(order));
  return order;
}

// Part 1 and Part 3 movement trials, Part 2 forced-choice trials.
inline StudyData synth_study(const StudyRecipe& recipe, std::uint64_t seed) {
  StudyData data;
  data.recipe = recipe;
  data.seed = seed;
  data.profiles = make_profiles(recipe, seed);
  for (const auto& p : data.profiles) {
    data.subjects.push_back({p.subject_id, p.experience_level});
    const auto sid = static_cast<std::uint64_t>(p.subject_id);
    for (int part : {1, 3}) {
      RandomStream order_rng(seed, sid, static_cast<std::uint64_t>(part), 1u << 20);
      const auto order = randomized_cue_order(recipe.movement_trials_per_cue, order_rng);
      for (std::size_t i = 0; i < order.size(); ++i) {
        auto trial = synth_movement_trial(p, order[i], seed, part, static_cast<int>(i), recipe.motion);
        data.movements.push_back(std::move(trial.record));
        data.true_delays.push_back(trial.delay_s);
      }
    }
    RandomStream order_rng(seed, sid, 2, 1u << 20);
    const auto order = randomized_cue_order(recipe.choice_trials_per_cue, order_rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      RandomStream rng(seed, sid, 2, i);
      ChoiceRecord c{p.subject_id, static_cast<int>(i), order[i], synth_forced_choice(p, order[i], rng), 0};
      while (c.repeats < 10 && rng.uniform() < p.repeat_probability) ++c.repeats;
      data.choices.push_back(c);
    }
  }
  return data;
}

inline nlohmann::json to_json(const SubjectProfile& p) {
  nlohmann::json j;
  j["subject_id"] = p.subject_id;
  j["responder_class"] = to_string(p.responder);
  j["mean_delay_s"] = p.mean_delay_s;
  j["delay_sd_s"] = p.delay_sd_s;
  j["rotation_delay_offset_s"] = p.rotation_delay_offset_s;
  j["experience_level"] = p.experience_level;
  nlohmann::json gains;
  for (int c = 0; c < 8; ++c) gains[std::string(kDirectionNames[c])] = p.gain[c];
  j["gain"] = gains;
  j["gain_noise_rel"] = p.gain_noise_rel;
  j["movement_duration_s"] = p.movement_duration_s;
  j["hold_s"] = p.hold_s;
  j["return_duration_s"] = p.return_duration_s;
  j["return_to_rest"] = p.return_to_rest;
  nlohmann::json coupling = nlohmann::json::array();
  for (const auto& c : p.coupling)
    coupling.push_back({{"cue", std::string(to_string(c.cue))}, {"dof", kDofNames[static_cast<int>(c.dof)]},
                        {"fraction", c.fraction}});
  j["coupling"] = coupling;
  j["misclassification"] = p.misclassification;
  j["repeat_probability"] = p.repeat_probability;
  return j;
}

inline std::string movement_file_name(int subject_id) {
  std::string id = std::to_string(subject_id);
  if (id.size() < 2) id.insert(0, 2 - id.size(), '0');
  return "movement_s" + id + ".csv";
}

inline nlohmann::json manifest_json(const StudyData& data) {
  const auto& r = data.recipe;
  nlohmann::json m;
  m["seed"] = data.seed;
  m["recipe"] = {
      {"n_fast", r.n_fast},
      {"n_slow", r.n_slow},
      {"fast_delay_s", r.fast_delay_s},
      {"fast_delay_sd_s", r.fast_delay_sd_s},
      {"slow_delay_s", r.slow_delay_s},
      {"slow_delay_sd_s", r.slow_delay_sd_s},
      {"fast_movement_s", r.fast_movement_s},
      {"slow_movement_s", r.slow_movement_s},
      {"experience_slope_s_per_level", r.experience_slope_s_per_level},
      {"experience_center", r.experience_center},
      {"rotation_delay_offset_s", r.rotation_delay_offset_s},
      {"movement_trials_per_cue", r.movement_trials_per_cue},
      {"choice_trials_per_cue", r.choice_trials_per_cue},
      {"repeat_probability", r.repeat_probability},
      {"tracker_rate_hz", r.motion.rate_hz},
      {"window_s", {r.motion.t_start_s, r.motion.t_end_s}},
      {"noise_mm", r.motion.noise_mm},
      {"noise_deg", r.motion.noise_deg},
      {"sensor_to_handle_mm",
       {r.motion.sensor_to_handle.translation.x(), r.motion.sensor_to_handle.translation.y(),
        r.motion.sensor_to_handle.translation.z()}},
  };
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& p : data.profiles) profiles.push_back(to_json(p));
  m["subjects"] = profiles;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : data.profiles) files.push_back(movement_file_name(p.subject_id));
  files.push_back("choices.csv");
  files.push_back("subjects.csv");
  m["files"] = files;
  return m;
}

// Writes movement_sNN.csv per subject, choices.csv, subjects.csv and
// manifest.json (recipe, seed and ground-truth profiles).
inline void write_study(const StudyData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : data.profiles) {
    std::vector<TrialRecord> mine;
    for (const auto& t : data.movements)
      if (t.subject_id == p.subject_id) mine.push_back(t);
    write_text_file(dir / movement_file_name(p.subject_id), format_movement_csv(mine));
  }
  write_text_file(dir / "choices.csv", format_choice_csv(data.choices));
  write_text_file(dir / "subjects.csv", format_subjects_csv(data.subjects));
  write_text_file(dir / "manifest.json", manifest_json(data).dump(2) + "\n");
}

}  // namespace hg
