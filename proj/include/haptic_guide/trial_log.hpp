#pragma once

// Trial-log file formats.
//
//   movement CSV  subject_id,part,trial_index,cue,repeats,t_s,x_mm,y_mm,z_mm,yaw_deg,pitch_deg,roll_deg
//   choice CSV    subject_id,trial_index,cue,response,repeats
//   subjects CSV  subject_id,experience_level
//
// One row per tracker sample; samples of one trial are contiguous and t_s is
// relative to cue onset. Numbers are written in shortest round-trip form.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "haptic_guide/cues.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/pose.hpp"

namespace hg {

struct TrialRecord {
  int subject_id = 0;
  int part = 1;  // 1 = before training, 3 = after training
  int trial_index = 0;
  Direction cue = Direction::Forward;
  int repeats = 0;
  std::vector<Pose6> samples;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct ChoiceRecord {
  int subject_id = 0;
  int trial_index = 0;
  Direction cue = Direction::Forward;
  Direction response = Direction::Forward;
  int repeats = 0;

  friend bool operator==(const ChoiceRecord&, const ChoiceRecord&) = default;
};

struct SubjectInfo {
  int subject_id = 0;
  int experience_level = 1;  // self-rated, 1-4

  friend bool operator==(const SubjectInfo&, const SubjectInfo&) = default;
};

inline constexpr std::string_view kMovementHeader =
    "subject_id,part,trial_index,cue,repeats,t_s,x_mm,y_mm,z_mm,yaw_deg,pitch_deg,roll_deg";
inline constexpr std::string_view kChoiceHeader = "subject_id,trial_index,cue,response,repeats";
inline constexpr std::string_view kSubjectsHeader = "subject_id,experience_level";

// ---------------------------------------------------------------- writing

inline void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v + 0.0);
  out.append(buf, res.ptr);
}

inline void append_number(std::string& out, long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void append_number(std::string& out, int v) { append_number(out, static_cast<long long>(v)); }

inline std::string format_movement_csv(const std::vector<TrialRecord>& trials) {
  std::string out(kMovementHeader);
  out += '\n';
  for (const auto& tr : trials) {
    std::string prefix;
    append_number(prefix, tr.subject_id);
    prefix += ',';
    append_number(prefix, tr.part);
    prefix += ',';
    append_number(prefix, tr.trial_index);
    prefix += ',';
    prefix += to_string(tr.cue);
    prefix += ',';
    append_number(prefix, tr.repeats);
    for (const auto& s : tr.samples) {
      out += prefix;
      for (double v : {s.t, s.x, s.y, s.z, s.yaw, s.pitch, s.roll}) {
        out += ',';
        append_number(out, v);
      }
      out += '\n';
    }
  }
  return out;
}

inline std::string format_choice_csv(const std::vector<ChoiceRecord>& choices) {
  std::string out(kChoiceHeader);
  out += '\n';
  for (const auto& c : choices) {
    append_number(out, c.subject_id);
    out += ',';
    append_number(out, c.trial_index);
    out += ',';
    out += to_string(c.cue);
    out += ',';
    out += to_string(c.response);
    out += ',';
    append_number(out, c.repeats);
    out += '\n';
  }
  return out;
}

inline std::string format_subjects_csv(const std::vector<SubjectInfo>& subjects) {
  std::string out(kSubjectsHeader);
  out += '\n';
  for (const auto& s : subjects) {
    append_number(out, s.subject_id);
    out += ',';
    append_number(out, s.experience_level);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------- reading

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CsvLine {
  std::size_t number;
  std::vector<std::string_view> fields;
};

// Splits into lines (1-based numbers) and comma-separated fields. A final
// line without a terminating newline is kept, so truncation is reported.
inline std::vector<CsvLine> split_csv(std::string_view text) {
  std::vector<CsvLine> lines;
  std::size_t pos = 0, number = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    CsvLine parsed{number, {}};
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      parsed.fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!(line.empty() && end == text.size())) lines.push_back(std::move(parsed));
    pos = end + 1;
  }
  return lines;
}

template <typename T>
T parse_field(std::string_view s, const std::string& file, std::size_t line, std::string_view column) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError(file, line, "bad value '" + std::string(s) + "' in column " + std::string(column));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw SchemaError(file, line, "non-finite value in column " + std::string(column));
  }
  return value;
}

inline Direction parse_label(std::string_view s, const std::string& file, std::size_t line) {
  if (auto d = parse_direction(s)) return *d;
  throw UnknownLabel(file + ":" + std::to_string(line) + ": unknown cue label '" + std::string(s) + "'");
}

// Views in the returned lines point into `text`.
inline std::vector<CsvLine> read_table(std::string_view text, const std::string& file, std::string_view header) {
  auto lines = split_csv(text);
  if (lines.empty()) throw EmptyFile("'" + file + "' is empty");
  std::string got;
  for (std::size_t i = 0; i < lines[0].fields.size(); ++i) {
    if (i) got += ',';
    got += lines[0].fields[i];
  }
  if (got != header) throw SchemaError(file, 1, "unexpected header '" + got + "'");
  const std::size_t columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (lines[i].fields.size() != columns)
      throw SchemaError(file, lines[i].number,
                        "expected " + std::to_string(columns) + " columns, found " +
                            std::to_string(lines[i].fields.size()));
  if (lines.size() == 1) throw EmptyFile("'" + file + "' has a header but no rows");
  lines.erase(lines.begin());
  return lines;
}

}  // namespace detail

// Loads and validates one movement log.
inline std::vector<TrialRecord> load_trials(const std::filesystem::path& path) {
  const std::string file = path.string();
  const std::string text = detail::read_text_file(path);
  const auto lines = detail::read_table(text, file, kMovementHeader);
  std::vector<TrialRecord> trials;
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& ln : lines) {
    const auto& f = ln.fields;
    const int subject = detail::parse_field<int>(f[0], file, ln.number, "subject_id");
    const int part = detail::parse_field<int>(f[1], file, ln.number, "part");
    const int index = detail::parse_field<int>(f[2], file, ln.number, "trial_index");
    const Direction cue = detail::parse_label(f[3], file, ln.number);
    const int repeats = detail::parse_field<int>(f[4], file, ln.number, "repeats");
    if (part != 1 && part != 3) throw SchemaError(file, ln.number, "part must be 1 or 3");
    if (repeats < 0) throw SchemaError(file, ln.number, "repeats must be non-negative");
    Pose6 pose;
    static constexpr std::array<std::string_view, 7> names{"t_s", "x_mm", "y_mm", "z_mm", "yaw_deg", "pitch_deg", "roll_deg"};
    std::array<double, 7> v{};
    for (std::size_t k = 0; k < 7; ++k) v[k] = detail::parse_field<double>(f[5 + k], file, ln.number, names[k]);
    pose = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};

    const bool same = !trials.empty() && trials.back().subject_id == subject && trials.back().part == part &&
                      trials.back().trial_index == index;
    if (!same) {
      if (!seen.insert({subject, part, index}).second)
        throw SchemaError(file, ln.number, "samples of a trial are not contiguous");
      trials.push_back({subject, part, index, cue, repeats, {}});
    } else {
      const auto& cur = trials.back();
      if (cur.cue != cue || cur.repeats != repeats)
        throw SchemaError(file, ln.number, "cue/repeats change within a trial");
      if (!(pose.t > cur.samples.back().t)) throw SchemaError(file, ln.number, "timestamps not strictly increasing");
    }
    trials.back().samples.push_back(pose);
  }
  return trials;
}

inline std::vector<ChoiceRecord> load_choices(const std::filesystem::path& path) {
  const std::string file = path.string();
  const std::string text = detail::read_text_file(path);
  const auto lines = detail::read_table(text, file, kChoiceHeader);
  std::vector<ChoiceRecord> out;
  out.reserve(lines.size());
  for (const auto& ln : lines) {
    const auto& f = ln.fields;
    ChoiceRecord c;
    c.subject_id = detail::parse_field<int>(f[0], file, ln.number, "subject_id");
    c.trial_index = detail::parse_field<int>(f[1], file, ln.number, "trial_index");
    c.cue = detail::parse_label(f[2], file, ln.number);
    c.response = detail::parse_label(f[3], file, ln.number);
    c.repeats = detail::parse_field<int>(f[4], file, ln.number, "repeats");
    out.push_back(c);
  }
  return out;
}

inline std::vector<SubjectInfo> load_subjects(const std::filesystem::path& path) {
  const std::string file = path.string();
  const std::string text = detail::read_text_file(path);
  const auto lines = detail::read_table(text, file, kSubjectsHeader);
  std::vector<SubjectInfo> out;
  for (const auto& ln : lines) {
    SubjectInfo s;
    s.subject_id = detail::parse_field<int>(ln.fields[0], file, ln.number, "subject_id");
    s.experience_level = detail::parse_field<int>(ln.fields[1], file, ln.number, "experience_level");
    if (s.experience_level < 1 || s.experience_level > 4)
      throw SchemaError(file, ln.number, "experience_level must be in 1..4");
    out.push_back(s);
  }
  return out;
}

// Checks the tracker rate of every trial (samples per second within tolerance).
inline void validate_sample_rate(const TrialRecord& trial, double rate_hz, double tolerance_hz = 0.5) {
  if (trial.samples.size() < 2) throw TooShort("trial has fewer than two samples");
  const double span = trial.samples.back().t - trial.samples.front().t;
  const double rate = static_cast<double>(trial.samples.size() - 1) / span;
  if (std::abs(rate - rate_hz) > tolerance_hz)
    throw Error("trial " + std::to_string(trial.trial_index) + " of subject " + std::to_string(trial.subject_id) +
                " sampled at " + std::to_string(rate) + " Hz");
}

struct StudyLogs {
  std::vector<TrialRecord> movements;
  std::vector<ChoiceRecord> choices;
  std::vector<SubjectInfo> subjects;  // empty when no subjects file exists
};

// Reads every movement*.csv, choices*.csv and subjects.csv in a directory,
// in lexicographic file order.
inline StudyLogs load_study_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> movement, choice;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("movement", 0) == 0) movement.push_back(entry.path());
    if (name.rfind("choices", 0) == 0) choice.push_back(entry.path());
  }
  std::sort(movement.begin(), movement.end());
  std::sort(choice.begin(), choice.end());
  StudyLogs logs;
  for (const auto& p : movement) {
    auto t = load_trials(p);
    logs.movements.insert(logs.movements.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  for (const auto& p : choice) {
    auto c = load_choices(p);
    logs.choices.insert(logs.choices.end(), c.begin(), c.end());
  }
  if (fs::exists(dir / "subjects.csv")) logs.subjects = load_subjects(dir / "subjects.csv");
  if (logs.movements.empty() && logs.choices.empty()) throw EmptyFile("no trials found in '" + dir.string() + "'");
  return logs;
}

}  // namespace hg
