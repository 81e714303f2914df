#pragma once

// Whole-study aggregation: feature extraction over every movement trial,
// then confusion, peak means, delay mixture, responder clusters, the delay
// regression and per-DOF ANOVA. Output order depends only on input order.

#include "json.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "haptic_guide/clustering.hpp"
#include "haptic_guide/confusion.hpp"
#include "haptic_guide/features.hpp"
#include "haptic_guide/stats.hpp"
#include "haptic_guide/synth.hpp"
#include "haptic_guide/trial_log.hpp"

namespace hg {

struct PeakCell {
  Direction cue = Direction::Forward;
  int part = 1;
  Dof dof = Dof::X;
  MeanCi ci;
};

struct SubjectFeatures {
  int subject_id = 0;
  std::size_t n_delays = 0;
  double mean_delay_s = 0.0;
  double peak_magnitude_variance = 0.0;
  ResponderClass cluster = ResponderClass::Fast;
};

struct DofAnova {
  Dof dof = Dof::X;
  AnovaResult result;
};

struct DelayContrast {
  double rotation_mean_s = 0.0;
  double translation_mean_s = 0.0;
  double difference_s = 0.0;  // rotation minus translation
  double p = 1.0;
};

struct StudySummary {
  AnalysisParams params;
  std::vector<TrialFeatures> trials;
  std::size_t undetected = 0;
  std::optional<ConfusionStats> confusion;
  std::vector<PeakCell> peak_means;
  std::optional<MixtureResult> mixture;
  std::vector<SubjectFeatures> subjects;
  std::optional<ClusterResult> clusters;
  std::optional<OlsResult> delay_model;
  std::vector<DofAnova> anova;
  std::optional<DelayContrast> rotation_vs_translation;
};

// Magnitude of the peak along the cue's intended DOF, rotations in lever-arm mm.
inline double primary_peak_magnitude(const TrialFeatures& f, const AnalysisParams& params) {
  const Dof d = primary_axis(f.cue).dof;
  const double v = std::abs(f.peak[static_cast<int>(d)]);
  return is_rotational(d) ? v * rotational_scale_mm_per_deg(params) : v;
}

inline std::vector<SubjectFeatures> subject_features(std::span<const TrialFeatures> trials,
                                                     const AnalysisParams& params) {
  std::map<int, std::array<std::vector<double>, 8>> mags;
  std::map<int, std::vector<double>> delays;
  for (const auto& f : trials) {
    mags[f.subject_id][index_of(f.cue)].push_back(primary_peak_magnitude(f, params));
    if (f.delay_s) delays[f.subject_id].push_back(*f.delay_s);
  }
  std::vector<SubjectFeatures> out;
  for (const auto& [sid, by_cue] : mags) {
    SubjectFeatures s;
    s.subject_id = sid;
    const auto& d = delays[sid];
    s.n_delays = d.size();
    if (d.empty()) throw InsufficientData("subject " + std::to_string(sid) + " has no detected delays");
    double sum = 0.0;
    for (double v : d) sum += v;
    s.mean_delay_s = sum / static_cast<double>(d.size());
    double var_sum = 0.0;
    int cues = 0;
    for (const auto& m : by_cue) {
      if (m.size() < 2) continue;
      const double sd = mean_ci(m).sd;
      var_sum += sd * sd;
      ++cues;
    }
    s.peak_magnitude_variance = cues ? var_sum / cues : 0.0;
    out.push_back(s);
  }
  return out;
}

inline std::vector<std::string> direction_levels() {
  return {kDirectionNames.begin(), kDirectionNames.end()};
}

// delay ~ set + experience + cue; set and cue categorical (references: first
// part present, Forward). Experience is omitted when no subject table exists.
inline OlsResult fit_delay_model(std::span<const TrialFeatures> trials, std::span<const SubjectInfo> subjects) {
  std::map<int, int> experience;
  for (const auto& s : subjects) experience[s.subject_id] = s.experience_level;
  std::vector<std::string> set, cue;
  std::vector<double> exp, y;
  for (const auto& f : trials) {
    if (!f.delay_s) continue;
    set.push_back(std::to_string(f.part));
    cue.emplace_back(to_string(f.cue));
    y.push_back(*f.delay_s);
    if (!subjects.empty()) {
      const auto it = experience.find(f.subject_id);
      if (it == experience.end())
        throw InsufficientData("no experience level for subject " + std::to_string(f.subject_id));
      exp.push_back(it->second);
    }
  }
  DesignBuilder b(y.size());
  b.intercept();
  const std::vector<std::string> parts{"1", "2", "3"};
  b.categorical("set", set, parts);
  if (!subjects.empty()) b.numeric("experience", exp);
  b.categorical("cue", cue, direction_levels());
  return ols_fit(b.build(), Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

inline StudySummary summarize_study(const StudyLogs& logs, const AnalysisParams& params = {}) {
  params.validate();
  if (logs.movements.empty() && logs.choices.empty()) throw EmptyFile("no trials found");
  StudySummary s;
  s.params = params;

  s.trials.reserve(logs.movements.size());
  for (const auto& t : logs.movements) {
    s.trials.push_back(extract_features(t, params));
    if (!s.trials.back().delay_s) ++s.undetected;
  }
  if (!logs.choices.empty()) s.confusion = confusion_stats(logs.choices);
  if (s.trials.empty()) return s;

  std::vector<int> parts;
  for (const auto& f : s.trials)
    if (std::find(parts.begin(), parts.end(), f.part) == parts.end()) parts.push_back(f.part);
  std::sort(parts.begin(), parts.end());
  for (Direction cue : kAllDirections)
    for (int part : parts)
      for (int d = 0; d < kNumDof; ++d) {
        std::vector<double> v;
        for (const auto& f : s.trials)
          if (f.cue == cue && f.part == part) v.push_back(f.peak[d]);
        if (v.size() >= 2) s.peak_means.push_back({cue, part, static_cast<Dof>(d), mean_ci(v)});
      }

  std::vector<double> delays, rot, trans;
  for (const auto& f : s.trials)
    if (f.delay_s) {
      delays.push_back(*f.delay_s);
      (is_rotation(f.cue) ? rot : trans).push_back(*f.delay_s);
    }
  if (delays.size() >= 4) s.mixture = delay_mixture(delays);
  if (rot.size() >= 2 && trans.size() >= 2) {
    const WelchTest w = welch_t_test(rot, trans);
    s.rotation_vs_translation = DelayContrast{mean_ci(rot).mean, mean_ci(trans).mean, w.mean_diff, w.p};
  }

  s.subjects = subject_features(s.trials, params);
  if (s.subjects.size() >= 2) {
    std::vector<ResponderFeatures> feats;
    for (const auto& sf : s.subjects) feats.push_back({sf.mean_delay_s, sf.peak_magnitude_variance});
    s.clusters = cluster_responders(feats);
    for (std::size_t i = 0; i < s.subjects.size(); ++i) s.subjects[i].cluster = s.clusters->labels[i];
  }

  s.delay_model = fit_delay_model(s.trials, logs.subjects);

  std::vector<int> group, block;
  for (const auto& f : s.trials) {
    group.push_back(index_of(f.cue));
    block.push_back(f.subject_id);
  }
  for (int d = 0; d < kNumDof; ++d) {
    std::vector<double> y;
    for (const auto& f : s.trials) y.push_back(f.peak[d]);
    s.anova.push_back({static_cast<Dof>(d), anova_with_bonferroni(group, 8, block, y, params.alpha)});
  }
  return s;
}

inline nlohmann::ordered_json to_json(const MeanCi& c) {
  return {{"n", c.n}, {"mean", c.mean}, {"sd", c.sd}, {"ci95_lo", c.lo}, {"ci95_hi", c.hi}};
}

inline nlohmann::ordered_json to_json(const FTest& f) {
  nlohmann::ordered_json j{{"defined", f.defined}, {"df1", f.df1}, {"df2", f.df2}};
  j["F"] = f.defined && std::isfinite(f.f) ? nlohmann::ordered_json(f.f) : nlohmann::ordered_json(nullptr);
  j["p"] = f.p;
  return j;
}

inline nlohmann::ordered_json report_json(const StudySummary& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["trials"] = s.trials.size();
  j["trials_without_detected_motion"] = s.undetected;

  if (s.confusion) {
    ordered_json c;
    c["order"] = direction_levels();
    ordered_json rows = ordered_json::array();
    for (const auto& row : s.confusion->percent) rows.push_back(row);
    c["percent"] = rows;
    ordered_json counts = ordered_json::array();
    for (const auto& row : s.confusion->counts) counts.push_back(row);
    c["counts"] = counts;
    c["overall_percent_correct"] = s.confusion->overall_percent_correct;
    c["total"] = s.confusion->total;
    j["confusion"] = c;
  }

  if (s.mixture) {
    const auto& m = *s.mixture;
    j["delay_mixture"] = {{"means_s", m.means},   {"sds_s", m.sds},         {"weights", m.weights},
                          {"log_likelihood", m.log_likelihood},             {"iterations", m.iterations},
                          {"converged", m.converged}, {"degenerate", m.degenerate}};
  }

  if (s.clusters) {
    ordered_json c;
    c["fast_size"] = s.clusters->sizes[0];
    c["slow_size"] = s.clusters->sizes[1];
    c["fast_centroid"] = {{"mean_delay_s", s.clusters->centroids[0][0]},
                          {"peak_magnitude_variance", s.clusters->centroids[0][1]}};
    c["slow_centroid"] = {{"mean_delay_s", s.clusters->centroids[1][0]},
                          {"peak_magnitude_variance", s.clusters->centroids[1][1]}};
    ordered_json subjects = ordered_json::array();
    for (const auto& sf : s.subjects)
      subjects.push_back({{"subject_id", sf.subject_id},
                          {"mean_delay_s", sf.mean_delay_s},
                          {"peak_magnitude_variance", sf.peak_magnitude_variance},
                          {"detected_trials", sf.n_delays},
                          {"cluster", to_string(sf.cluster)}});
    c["subjects"] = subjects;
    j["clusters"] = c;
  }

  if (s.delay_model) {
    const auto& m = *s.delay_model;
    ordered_json coefs = ordered_json::array();
    for (std::size_t k = 0; k < m.names.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      coefs.push_back({{"name", m.names[k]}, {"estimate", m.coef(i)}, {"se", m.se(i)}, {"t", m.t(i)}, {"p", m.p(i)}});
    }
    j["delay_model"] = {{"n", m.n}, {"df_resid", m.df_resid}, {"r2", m.r2}, {"coefficients", coefs}};
  }

  if (s.rotation_vs_translation) {
    const auto& c = *s.rotation_vs_translation;
    j["rotation_minus_translation_delay"] = {{"rotation_mean_s", c.rotation_mean_s},
                                             {"translation_mean_s", c.translation_mean_s},
                                             {"difference_s", c.difference_s},
                                             {"p", c.p}};
  }

  ordered_json peaks = ordered_json::array();
  for (const auto& cell : s.peak_means) {
    ordered_json e{{"cue", to_string(cell.cue)}, {"part", cell.part}, {"dof", kDofNames[static_cast<int>(cell.dof)]}};
    e.update(to_json(cell.ci));
    peaks.push_back(e);
  }
  j["peak_means"] = peaks;

  ordered_json anova = ordered_json::array();
  for (const auto& a : s.anova) {
    ordered_json e{{"dof", kDofNames[static_cast<int>(a.dof)]}, {"alpha", a.result.alpha}};
    e["cue_effect"] = to_json(a.result.group);
    e["subject_effect"] = to_json(a.result.block);
    e["cue_means"] = a.result.group_means;
    ordered_json pairs = ordered_json::array();
    for (const auto& p : a.result.pairs)
      pairs.push_back({{"a", kDirectionNames[p.a]},
                       {"b", kDirectionNames[p.b]},
                       {"mean_diff", p.test.mean_diff},
                       {"p", p.test.p},
                       {"p_bonferroni", p.p_adjusted},
                       {"significant", p.significant}});
    e["pairwise"] = pairs;
    anova.push_back(e);
  }
  j["anova"] = anova;
  return j;
}

inline std::string confusion_csv(const ConfusionStats& c) {
  std::string out = "cue";
  for (auto name : kDirectionNames) out += "," + std::string(name);
  out += "\n";
  for (int r = 0; r < 8; ++r) {
    out += kDirectionNames[r];
    for (int k = 0; k < 8; ++k) {
      out += ",";
      append_number(out, c.percent[r][k]);
    }
    out += "\n";
  }
  return out;
}

inline std::string peak_means_csv(std::span<const PeakCell> cells) {
  std::string out = "cue,part,dof,n,mean,ci95_lo,ci95_hi\n";
  for (const auto& c : cells) {
    out += std::string(to_string(c.cue)) + "," + std::to_string(c.part) + "," + kDofNames[static_cast<int>(c.dof)] + ",";
    append_number(out, static_cast<long long>(c.ci.n));
    for (double v : {c.ci.mean, c.ci.lo, c.ci.hi}) {
      out += ",";
      append_number(out, v);
    }
    out += "\n";
  }
  return out;
}

inline std::string trial_features_csv(std::span<const TrialFeatures> trials) {
  std::string out = "subject_id,part,trial_index,cue,repeats,delay_s";
  for (auto name : kDofNames) out += ",peak_" + std::string(name);
  out += "\n";
  for (const auto& f : trials) {
    append_number(out, f.subject_id);
    out += ",";
    append_number(out, f.part);
    out += ",";
    append_number(out, f.trial_index);
    out += "," + std::string(to_string(f.cue)) + ",";
    append_number(out, f.repeats);
    out += ",";
    if (f.delay_s) append_number(out, *f.delay_s);
    for (double v : f.peak) {
      out += ",";
      append_number(out, v);
    }
    out += "\n";
  }
  return out;
}

inline void write_report(const StudySummary& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.json", report_json(s).dump(2) + "\n");
  if (s.confusion) write_text_file(dir / "confusion.csv", confusion_csv(*s.confusion));
  write_text_file(dir / "peak_means.csv", peak_means_csv(s.peak_means));
  write_text_file(dir / "trial_features.csv", trial_features_csv(s.trials));
}

}  // namespace hg
