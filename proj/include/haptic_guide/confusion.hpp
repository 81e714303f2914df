#pragma once

#include <array>
#include <span>

#include "haptic_guide/cues.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/trial_log.hpp"

namespace hg {

// Rows are presented cues, columns responses, both in kAllDirections order.
struct ConfusionStats {
  std::array<std::array<int, 8>, 8> counts{};
  std::array<std::array<double, 8>, 8> percent{};  // row-normalized; empty rows stay 0
  std::array<int, 8> row_totals{};
  int total = 0;
  int correct = 0;
  double overall_percent_correct = 0.0;
};

inline ConfusionStats confusion_stats(std::span<const ChoiceRecord> choices) {
  ConfusionStats s;
  for (const auto& c : choices) {
    const int r = index_of(c.cue), k = index_of(c.response);
    if (r < 0 || r >= 8 || k < 0 || k >= 8) throw UnknownLabel("choice label outside the 8 directions");
    ++s.counts[r][k];
    ++s.row_totals[r];
    ++s.total;
    if (r == k) ++s.correct;
  }
  for (int r = 0; r < 8; ++r)
    if (s.row_totals[r] > 0)
      for (int k = 0; k < 8; ++k) s.percent[r][k] = 100.0 * s.counts[r][k] / s.row_totals[r];
  s.overall_percent_correct = s.total > 0 ? 100.0 * s.correct / s.total : 0.0;
  return s;
}

}  // namespace hg
